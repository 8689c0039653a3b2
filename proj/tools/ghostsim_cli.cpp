// Command-line front end. Each subcommand is a thin wrapper over the library;
// usage errors exit 2, data errors exit 1.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ghostsim/container.hpp"
#include "ghostsim/digits.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/fma.hpp"
#include "ghostsim/forward.hpp"
#include "ghostsim/metrics.hpp"
#include "ghostsim/pgm.hpp"
#include "ghostsim/reconstruct.hpp"

namespace fs = std::filesystem;
using namespace ghostsim;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gray levels 0..255 become intensities in [0, 1].
Image load_object(const fs::path& path) { return scaled(read_pgm(path), 1.0 / 255.0); }

Distribution distribution_flag(const std::string& name) {
  const auto dist = parse_distribution(name);
  if (!dist) throw UsageError("--dist must be uniform01 or binary, got '" + name + "'");
  return *dist;
}

std::vector<std::size_t> parse_checkpoints(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw UsageError("--checkpoints expects comma-separated counts, got '" + text + "'");
    }
    out.push_back(std::size_t(v));
  }
  return out;
}

FrameRef parse_base(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--base expects batch:frame, got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    const std::string batch = text.substr(0, colon);
    const std::string frame = text.substr(colon + 1);
    const auto bi = std::stoull(batch, &a);
    const auto fi = std::stoull(frame, &b);
    if (a != batch.size() || b != frame.size()) throw std::invalid_argument("trailing text");
    return FrameRef{std::size_t(bi), std::size_t(fi)};
  } catch (const std::exception&) {
    throw UsageError("--base expects batch:frame, got '" + text + "'");
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string object, out, dist = "uniform01";
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool include_planes = false;
};

int run_simulate(const SimulateArgs& a) {
  const Distribution dist = distribution_flag(a.dist);
  const Image object = load_object(a.object);
  auto speckles = make_shared_speckles(a.seed, a.samples, object.height(), object.width(), dist);
  const GroupFrame gf = make_gf(object, speckles, fs::path(a.object).stem().string());
  Dataset ds;
  ds.height = std::uint32_t(object.height());
  ds.width = std::uint32_t(object.width());
  ds.samples = std::uint32_t(a.samples);
  ds.entries.push_back(entry_from_gf(gf, object, a.include_planes));
  write_container(a.out, ds);
  return 0;
}

// --- rotate-sim -------------------------------------------------------------

struct RotateSimArgs {
  std::string object, out, dist = "uniform01";
  double omega = 0.0, interval = 0.0;
  std::size_t frames = 0, batches = 1, samples = 0;
  std::uint64_t seed = 0;
  bool include_planes = false;
};

int run_rotate_sim(const RotateSimArgs& a) {
  const Distribution dist = distribution_flag(a.dist);
  const Image object = load_object(a.object);
  const RotationTrajectory traj{a.omega, a.interval, a.frames, a.batches, 0.0};
  const auto bgfs = simulate_rotation_bgfs(object, traj, a.samples, a.seed, dist);
  Dataset ds;
  ds.height = std::uint32_t(object.height());
  ds.width = std::uint32_t(object.width());
  ds.samples = std::uint32_t(a.samples);
  std::size_t k = 0;
  for (const BatchGroupFrame& bgf : bgfs) {
    for (const GroupFrame& gf : bgf.frames) {
      ds.entries.push_back(
          entry_from_gf(gf, trajectory_frame_object(object, traj, k++), a.include_planes));
    }
  }
  write_container(a.out, ds);
  return 0;
}

// --- reconstruct ------------------------------------------------------------

struct ReconstructArgs {
  std::string in, out, checkpoints, curve;
  std::size_t entry = 0;
};

int run_reconstruct(const ReconstructArgs& a) {
  if (!a.curve.empty() && a.checkpoints.empty()) {
    throw UsageError("--curve needs --checkpoints");
  }
  const std::vector<std::size_t> checkpoints =
      a.checkpoints.empty() ? std::vector<std::size_t>{} : parse_checkpoints(a.checkpoints);
  const Dataset ds = read_container(a.in);
  if (a.entry >= ds.entries.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "entry " + std::to_string(a.entry) + " of " +
                                                std::to_string(ds.entries.size()));
  }
  const DatasetEntry& entry = ds.entries[a.entry];
  const GroupFrame gf = gf_from_entry(entry, ds);
  const GhostImage result = gi_from_gf(gf);
  write_pgm(a.out, result.image);

  if (!checkpoints.empty()) {
    if (!gf.speckles()) {
      throw Error(ErrorCode::CorruptGF, "checkpoints need a seed-backed entry");
    }
    const auto progressive = gi_progressive(*gf.speckles(), gf.buckets(), checkpoints);
    const Image truth = ground_truth_image(entry, ds);
    std::vector<QualityReport> rows;
    for (std::size_t k = 0; k < progressive.size(); ++k) {
      rows.push_back(assess(truth, progressive[k].image, std::to_string(checkpoints[k])));
      std::cout << "m=" << checkpoints[k] << " psnr_db=" << format_psnr(rows.back().psnr_db)
                << " ssim=" << format_number(rows.back().ssim) << '\n';
    }
    if (!a.curve.empty()) write_reports_csv(a.curve, rows);
  }
  return 0;
}

// --- fma --------------------------------------------------------------------

struct FmaArgs {
  std::string in, out, base = "0:0", curves;
  double grid_min = 0.0, grid_max = 12.0, grid_step = 0.05;
  double prefilter_sigma = kDefaultPrefilterSigmaPx;
  std::size_t span = 0;
  bool estimate_only = false;
};

int run_fma(const FmaArgs& a) {
  if (a.out.empty() && !a.estimate_only) throw UsageError("--out is required");
  const FrameRef base = parse_base(a.base);
  const Dataset ds = read_container(a.in);
  const auto bgfs = batches_from_dataset(ds);

  FmaOptions options;
  options.grid = AngleGrid{a.grid_min, a.grid_max, a.grid_step};
  if (a.span > 0) options.span = a.span;
  options.prefilter_sigma_px = a.prefilter_sigma;
  const AlphaEstimate estimate = estimate_alpha(bgfs, options);
  std::cout << "alpha_deg=" << format_number(estimate.alpha_deg) << '\n';
  if (!a.curves.empty()) write_curves_csv(a.curves, estimate);
  if (a.estimate_only) return 0;

  const MergedGroupFrame merged = fma_merge_across(bgfs, estimate.alpha_deg, base);
  std::size_t base_entry = base.frame;
  for (std::size_t b = 0; b < base.batch; ++b) base_entry += bgfs[b].size();
  const DatasetEntry& base_source = ds.entries[base_entry];

  StreamedEntry entry;
  entry.object_id = "fma-merged-" + std::to_string(base.batch) + ":" + std::to_string(base.frame);
  entry.speckle_seed = base_source.speckle_seed;
  entry.distribution = base_source.distribution;
  entry.ground_truth = base_source.ground_truth;
  const BucketSequence buckets = merged.buckets();
  entry.buckets.assign(buckets.values.begin(), buckets.values.end());
  entry.planes_included = PlaneStorage::motion_compensated;
  entry.plane = [&merged](std::size_t j, std::vector<float>& out) {
    const Image plane = merged.plane(j);
    out.assign(plane.data().begin(), plane.data().end());
  };
  write_container_streamed(a.out, ds.height, ds.width, std::uint32_t(merged.size()), {entry});
  std::cout << "merged_planes=" << merged.size() << '\n';
  return 0;
}

// --- metrics ----------------------------------------------------------------

struct MetricsArgs {
  std::string ref, test, csv;
};

int run_metrics(const MetricsArgs& a) {
  const QualityReport report =
      assess(read_pgm(a.ref), read_pgm(a.test), fs::path(a.test).stem().string());
  std::cout << "psnr_db=" << format_psnr(report.psnr_db) << '\n'
            << "ssim=" << format_number(report.ssim) << '\n';
  if (!a.csv.empty()) write_reports_csv(a.csv, {report});
  return 0;
}

// --- max-samples ------------------------------------------------------------

struct MaxSamplesArgs {
  double freq = 0.0, omega = 0.0, theta = 0.0;
};

int run_max_samples(const MaxSamplesArgs& a) {
  std::cout << max_samples(a.freq, a.omega, a.theta) << '\n';
  return 0;
}

// --- digit ------------------------------------------------------------------

struct DigitArgs {
  int value = 0;
  std::size_t size = 64;
  std::string out;
};

int run_digit(const DigitArgs& a) {
  // Scaled by the writer: a digit's range is exactly [0, 1].
  write_pgm(a.out, render_digit(a.value, a.size));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ghost-imaging simulation toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Static-object frame dataset");
  simulate->add_option("--object", sim.object, "Object image (P5 PGM)")->required();
  simulate->add_option("--samples", sim.samples, "Number of speckle patterns m")->required();
  simulate->add_option("--seed", sim.seed, "Speckle seed")->required();
  simulate->add_option("--dist", sim.dist, "uniform01 or binary");
  simulate->add_option("--out", sim.out, "Output container")->required();
  simulate->add_flag("--include-planes", sim.include_planes, "Store planes in the container");

  RotateSimArgs rot;
  auto* rotate_sim = app.add_subcommand("rotate-sim", "Rotating-object batch dataset");
  rotate_sim->add_option("--object", rot.object, "Object image (P5 PGM)")->required();
  rotate_sim->add_option("--omega-deg-per-ms", rot.omega, "Angular speed")->required();
  rotate_sim->add_option("--frames", rot.frames, "Total frames")->required();
  rotate_sim->add_option("--batches", rot.batches, "Number of batches")->required();
  rotate_sim->add_option("--frame-interval-ms", rot.interval, "Time per frame")->required();
  rotate_sim->add_option("--samples-per-frame", rot.samples, "Patterns per frame")->required();
  rotate_sim->add_option("--seed", rot.seed, "Base seed")->required();
  rotate_sim->add_option("--dist", rot.dist, "uniform01 or binary");
  rotate_sim->add_option("--out", rot.out, "Output container")->required();
  rotate_sim->add_flag("--include-planes", rot.include_planes, "Store planes in the container");

  ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Correlation reconstruction of one entry");
  reconstruct->add_option("--in", rec.in, "Input container")->required();
  reconstruct->add_option("--entry", rec.entry, "Entry index")->required();
  reconstruct->add_option("--out", rec.out, "Output image (P5 PGM)")->required();
  reconstruct->add_option("--checkpoints", rec.checkpoints, "Sample counts, e.g. 128,1024");
  reconstruct->add_option("--curve", rec.curve, "CSV of quality per checkpoint");

  FmaArgs fma;
  auto* fma_cmd = app.add_subcommand("fma", "Estimate rotation and merge frames");
  fma_cmd->add_option("--in", fma.in, "Input container")->required();
  fma_cmd->add_option("--grid-min", fma.grid_min, "Smallest candidate angle (deg)");
  fma_cmd->add_option("--grid-max", fma.grid_max, "Largest candidate angle (deg)");
  fma_cmd->add_option("--grid-step", fma.grid_step, "Candidate spacing (deg)");
  fma_cmd->add_option("--base", fma.base, "Reference frame as batch:frame");
  fma_cmd->add_option("--span", fma.span, "Frame distance v (default: half a batch)");
  fma_cmd->add_option("--prefilter-sigma", fma.prefilter_sigma,
                      "Blur of per-frame images before correlation (px, 0 = off)");
  fma_cmd->add_option("--out", fma.out, "Output container");
  fma_cmd->add_option("--curves", fma.curves, "CSV of correlation curves");
  fma_cmd->add_flag("--estimate-only", fma.estimate_only, "Print the angle, skip the merge");

  MetricsArgs met;
  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM of two images");
  metrics->add_option("--ref", met.ref, "Reference image (P5 PGM)")->required();
  metrics->add_option("--test", met.test, "Test image (P5 PGM)")->required();
  metrics->add_option("--csv", met.csv, "CSV report");

  MaxSamplesArgs ms;
  auto* max_samples_cmd = app.add_subcommand("max-samples", "Sampling bound for a moving object");
  max_samples_cmd->add_option("--freq-hz", ms.freq, "Sampling frequency")->required();
  max_samples_cmd->add_option("--omega-deg-per-s", ms.omega, "Angular speed")->required();
  max_samples_cmd->add_option("--theta-r-deg", ms.theta, "Angular resolution")->required();

  DigitArgs dig;
  auto* digit = app.add_subcommand("digit", "Render a test digit");
  digit->add_option("--value", dig.value, "Digit 0-9")->required();
  digit->add_option("--size", dig.size, "Canvas size in pixels");
  digit->add_option("--out", dig.out, "Output image (P5 PGM)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*rotate_sim) return run_rotate_sim(rot);
    if (*reconstruct) return run_reconstruct(rec);
    if (*fma_cmd) return run_fma(fma);
    if (*metrics) return run_metrics(met);
    if (*max_samples_cmd) return run_max_samples(ms);
    if (*digit) return run_digit(dig);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
