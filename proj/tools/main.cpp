#include "cinemagraph/cli.hpp"

int main(int argc, char** argv) { return cinemagraph::cli_dispatch(argc, argv); }
