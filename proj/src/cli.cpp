#include "cinemagraph/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "cinemagraph/codecs.hpp"
#include "cinemagraph/colorize.hpp"
#include "cinemagraph/euler.hpp"
#include "cinemagraph/flowsynth.hpp"
#include "cinemagraph/loop.hpp"
#include "cinemagraph/maskgen.hpp"

namespace cinemagraph {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::uint64_t seed = 0;
  int fps = 30;
  std::string threads = "auto";
};

int parse_threads(const std::string& text) {
  if (text == "auto") return 0;
  try {
    std::size_t used = 0;
    const int n = std::stoi(text, &used);
    if (used == text.size() && n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("--threads expects a positive integer or 'auto', got '" + text + "'");
}

bool ends_with_gif(const fs::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".gif";
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

struct AnimateArgs {
  std::string image, flow, mask, out, format, preset = "real";
  std::optional<int> frames;
};

void run_animate(const AnimateArgs& a, const GlobalOptions& g) {
  const Image image = read_png(a.image);
  const FlowField flow = read_flo(a.flow);
  const BinaryMask mask = read_mask_png(a.mask);
  require_same_shape(image, flow, "image and flow");
  require_same_shape(image, mask, "image and mask");

  LoopConfig cfg;
  cfg.frames = a.frames.value_or(
      default_frame_count(a.preset == "artistic" ? Preset::kArtistic : Preset::kReal));
  cfg.fps = g.fps;
  cfg.threads = parse_threads(g.threads);
  cfg.validate();

  const fs::path out(a.out);
  const bool gif = a.format.empty() ? ends_with_gif(out) : a.format == "gif";
  if (gif) {
    ensure_parent(out);
    std::vector<Image> frames(static_cast<std::size_t>(cfg.frames) + 1);
    generate_loop(image, flow, mask, cfg,
                  [&](int n, const Image& f) { frames[static_cast<std::size_t>(n)] = f; });
    GifWriter writer(image.width(), image.height(), cfg.fps);
    for (const auto& f : frames) writer.add_frame(f);
    writer.write(out);
    return;
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory " + out.string());
  }
  generate_loop(image, flow, mask, cfg, [&](int n, const Image& f) {
    write_png(f, out / frame_file_name(n, cfg.frames));
  });
}

ClusterMethod parse_method(const std::string& s) {
  return s == "kmeans" ? ClusterMethod::kKMeans : ClusterMethod::kSpectral;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e)) {
    return kExitIo;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  CLI::App app{"Looping cinemagraphs from a still image, a flow field and a motion mask",
               "cinemagraph"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--fps", g.fps, "Frames per second of the output")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Render threads: a positive integer or 'auto'")
      ->capture_default_str();

  AnimateArgs animate;
  auto* cmd_animate = app.add_subcommand("animate", "Render a looping cinemagraph");
  cmd_animate->fallthrough();
  cmd_animate->add_option("--image", animate.image, "Input PNG")->required();
  cmd_animate->add_option("--flow", animate.flow, "Per-frame flow (.flo)")->required();
  cmd_animate->add_option("--mask", animate.mask, "Motion mask PNG (>=128 moves)")->required();
  cmd_animate->add_option("--frames", animate.frames, "Loop length N (frames 0..N)")->check(CLI::PositiveNumber);
  cmd_animate->add_option("--preset", animate.preset, "Default frame count: real=60, artistic=120")
      ->check(CLI::IsMember({"real", "artistic"}))
      ->capture_default_str();
  cmd_animate->add_option("--format", animate.format, "png (frame directory) or gif; default from --out")
      ->check(CLI::IsMember({"png", "gif"}));
  cmd_animate->add_option("--out", animate.out, "Output directory or .gif file")->required();

  std::string integrate_flow, integrate_out;
  int integrate_steps = 0;
  bool integrate_backward = false;
  auto* cmd_integrate = app.add_subcommand("integrate", "Cumulative flow after n Euler steps");
  cmd_integrate->fallthrough();
  cmd_integrate->add_option("--flow", integrate_flow, "Per-frame flow (.flo)")->required();
  cmd_integrate->add_option("-n,--steps", integrate_steps, "Number of steps")->required()->check(CLI::NonNegativeNumber);
  cmd_integrate->add_flag("--backward", integrate_backward, "Integrate the reversed flow");
  cmd_integrate->add_option("--out", integrate_out, "Output .flo")->required();

  std::string mask_attn, mask_guide, mask_out, mask_method = "spectral", mask_affinity = "attention";
  MaskOptions mask_opts;
  std::optional<std::uint32_t> mask_single;
  auto* cmd_mask = app.add_subcommand("mask", "Motion mask from self-attention maps and a guide mask");
  cmd_mask->fallthrough();
  cmd_mask->add_option("--attn", mask_attn, "Attention stack (.atns)")->required();
  cmd_mask->add_option("--guide", mask_guide, "Guide segmentation PNG")->required();
  cmd_mask->add_option("--clusters", mask_opts.clusters, "Cluster count")->check(CLI::PositiveNumber)->capture_default_str();
  cmd_mask->add_option("--overlap", mask_opts.overlap, "Minimum fraction of a cluster inside the guide")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd_mask->add_option("--from-step", mask_opts.from_step, "Average maps from this step on")->capture_default_str();
  cmd_mask->add_option("--single-step", mask_single, "Use only this step's map");
  cmd_mask->add_option("--method", mask_method, "spectral or kmeans")
      ->check(CLI::IsMember({"spectral", "kmeans"}))
      ->capture_default_str();
  cmd_mask->add_option("--affinity", mask_affinity, "attention (raw map) or cosine (row similarity)")
      ->check(CLI::IsMember({"attention", "cosine"}))
      ->capture_default_str();
  cmd_mask->add_option("--out", mask_out, "Output mask PNG")->required();

  std::string synth_mask, synth_direction, synth_out;
  std::optional<double> synth_theta_deg;
  double synth_speed = 1.0;
  bool synth_deterministic = false;
  auto* cmd_synth = app.add_subcommand("synth-flow", "Constant-direction flow inside a mask");
  cmd_synth->fallthrough();
  cmd_synth->add_option("--mask", synth_mask, "Motion mask PNG")->required();
  auto* opt_dir = cmd_synth->add_option("--direction", synth_direction, "Direction phrase, e.g. \"left to right\"");
  auto* opt_theta = cmd_synth->add_option("--theta-deg", synth_theta_deg, "Direction angle in degrees, counterclockwise from +x");
  opt_dir->excludes(opt_theta);
  opt_theta->excludes(opt_dir);
  cmd_synth->add_option("--speed", synth_speed, "Pixels per frame")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd_synth->add_flag("--deterministic", synth_deterministic, "Use the arc center instead of a sampled angle");
  cmd_synth->add_option("--out", synth_out, "Output .flo")->required();

  std::string fm_flow, fm_out;
  double fm_tau = kDefaultFlowMaskThreshold;
  auto* cmd_flow_mask = app.add_subcommand("flow-mask", "Threshold flow magnitude into a mask");
  cmd_flow_mask->fallthrough();
  cmd_flow_mask->add_option("--flow", fm_flow, "Average flow (.flo)")->required();
  cmd_flow_mask->add_option("--tau", fm_tau, "Magnitude threshold, pixels per frame")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd_flow_mask->add_option("--out", fm_out, "Output mask PNG")->required();

  std::string col_flow, col_out, col_max = "auto";
  auto* cmd_colorize = app.add_subcommand("colorize", "Color-wheel visualization of a flow");
  cmd_colorize->fallthrough();
  cmd_colorize->add_option("--flow", col_flow, "Flow (.flo)")->required();
  cmd_colorize->add_option("--max-magnitude", col_max, "'auto' or the magnitude mapped to full saturation")->capture_default_str();
  cmd_colorize->add_option("--out", col_out, "Output PNG")->required();

  std::string pca_attn, pca_out;
  std::uint32_t pca_from = kDefaultFromStep;
  auto* cmd_pca = app.add_subcommand("pca-viz", "RGB rendering of the top three principal components of the averaged attention");
  cmd_pca->fallthrough();
  cmd_pca->add_option("--attn", pca_attn, "Attention stack (.atns)")->required();
  cmd_pca->add_option("--from-step", pca_from, "Average maps from this step on")->capture_default_str();
  cmd_pca->add_option("--out", pca_out, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*cmd_animate) {
    run_animate(animate, g);
  } else if (*cmd_integrate) {
    const FlowField flow = read_flo(integrate_flow);
    const FlowField out = integrate_backward ? euler_backward(flow, integrate_steps)
                                             : euler_forward(flow, integrate_steps);
    ensure_parent(integrate_out);
    // Cumulative flows may legitimately exceed the per-frame sanity bound.
    write_file(integrate_out, encode_flo(out));
  } else if (*cmd_mask) {
    const AttentionStack stack = read_atns(mask_attn);
    const BinaryMask guide = read_mask_png(mask_guide);
    mask_opts.method = parse_method(mask_method);
    mask_opts.affinity = mask_affinity == "cosine" ? AffinityKind::kCosine : AffinityKind::kAttention;
    mask_opts.single_step = mask_single;
    mask_opts.seed = g.seed;
    const BinaryMask mask = generate_motion_mask(stack, guide, mask_opts);
    ensure_parent(mask_out);
    write_mask_png(mask, mask_out);
  } else if (*cmd_synth) {
    if (synth_direction.empty() == !synth_theta_deg.has_value()) {
      throw InvalidArgument("synth-flow: give exactly one of --direction or --theta-deg");
    }
    const BinaryMask mask = read_mask_png(synth_mask);
    double theta = 0.0;
    if (synth_theta_deg) {
      theta = degrees_to_radians(*synth_theta_deg);
    } else {
      const DirectionHint hint = make_direction_hint(synth_direction, g.seed, synth_deterministic);
      theta = hint.angle_theta;
      std::cout << "quadrant " << hint.quadrant_index << " (" << hint.phrase << "), theta "
                << radians_to_degrees(theta) << " deg\n";
    }
    ensure_parent(synth_out);
    write_flo(synth_flow(mask, theta, synth_speed), synth_out);
  } else if (*cmd_flow_mask) {
    const BinaryMask mask = flow_to_mask(read_flo(fm_flow), fm_tau);
    ensure_parent(fm_out);
    write_mask_png(mask, fm_out);
  } else if (*cmd_colorize) {
    std::optional<double> max_magnitude;
    if (col_max != "auto") {
      try {
        std::size_t used = 0;
        max_magnitude = std::stod(col_max, &used);
        if (used != col_max.size()) throw std::invalid_argument(col_max);
      } catch (const std::exception&) {
        throw InvalidArgument("--max-magnitude expects 'auto' or a number, got '" + col_max + "'");
      }
    }
    ensure_parent(col_out);
    write_png(colorize_flow(read_flo(col_flow), max_magnitude), col_out);
  } else if (*cmd_pca) {
    const AttentionStack stack = read_atns(pca_attn);
    ensure_parent(pca_out);
    write_png(pca_visualize(average_attention(stack, pca_from), stack.grid_h, stack.grid_w), pca_out);
  }
  return kExitOk;
}

}  // namespace

std::string frame_file_name(int n, int total) {
  const int digits = std::max(4, static_cast<int>(std::to_string(total).size()));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%0*d.png", digits, n);
  return buf;
}

int cli_dispatch(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "cinemagraph: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cli_dispatch(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("cinemagraph");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return cli_dispatch(static_cast<int>(storage.size()), argv.data());
}

}  // namespace cinemagraph
