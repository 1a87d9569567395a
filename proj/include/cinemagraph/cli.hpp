#pragma once

#include <string>
#include <vector>

namespace cinemagraph {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

/// Runs the command line. Subcommands: animate, integrate, mask, synth-flow,
/// flow-mask, colorize, pca-viz. Never throws; errors print a diagnostic to
/// stderr and map to an ExitCode.
int cli_dispatch(int argc, char** argv);
int cli_dispatch(const std::vector<std::string>& args);

/// File name of frame n in a PNG sequence of `total` + 1 frames.
std::string frame_file_name(int n, int total);

}  // namespace cinemagraph
