#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsims/core.hpp"
#include "hsims/eval.hpp"
#include "hsims/io.hpp"
#include "hsims/pipeline.hpp"
#include "hsims/preprocess.hpp"
#include "hsims/synth.hpp"
#include "json.hpp"

namespace {

using namespace hsims;

// Exit codes: 0 success, 2 usage or invalid arguments, 3 file and format
// errors, 4 degenerate or non-finite numerics, 5 anything unexpected.
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInternal = 5;

std::string header_path(const std::string& prefix) { return prefix + ".json"; }
std::string data_path(const std::string& prefix) { return prefix + ".raw"; }

void require_absent(const std::vector<std::string>& paths, bool force) {
  if (force) return;
  for (const auto& p : paths)
    if (std::filesystem::exists(p))
      throw std::invalid_argument("output '" + p + "' exists; pass --force to overwrite");
}

pipeline::IndicatorMode parse_mode(const std::string& s) {
  if (s == "robust_anisotropic" || s == "robust")
    return pipeline::IndicatorMode::robust_anisotropic;
  if (s == "squared_euclidean" || s == "ms2")
    return pipeline::IndicatorMode::squared_euclidean;
  throw std::invalid_argument(
      "mode must be robust_anisotropic or squared_euclidean (got '" + s + "')");
}

std::string read_text(const std::string& path) {
  auto bytes = io::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

int run_synth(const std::string& spec_path, const std::string& prefix, bool force) {
  synth::SynthSpec spec = synth::parse_spec(read_text(spec_path));
  std::string gt_prefix = prefix + "_gt";
  require_absent({header_path(prefix), data_path(prefix), header_path(gt_prefix),
                  data_path(gt_prefix)},
                 force);
  auto [cube, gt] = synth::generate(spec);
  io::save_cube(cube, header_path(prefix), data_path(prefix));
  io::save_labels(gt, header_path(gt_prefix), data_path(gt_prefix));
  std::printf("wrote %dx%dx%d cube to %s/.raw and labels to %s/.raw\n", cube.height(),
              cube.width(), cube.bands(), header_path(prefix).c_str(),
              header_path(gt_prefix).c_str());
  return 0;
}

int run_mnf(const std::string& in_prefix, const std::string& out_prefix, int kept) {
  HyperCube cube = io::load_cube(header_path(in_prefix), data_path(in_prefix));
  if (kept < 1 || kept > cube.bands())
    throw std::invalid_argument("--kept must be in 1.." + std::to_string(cube.bands()));
  HyperCube normalized = mnf::normalize_cube(cube);
  mnf::MnfModel model = mnf::fit_mnf(normalized, kept);
  HyperCube reduced = mnf::apply_mnf(normalized, model);
  io::save_cube(reduced, header_path(out_prefix), data_path(out_prefix));
  std::printf("snr spectrum (kept %d of %d):\n", kept, cube.bands());
  for (Eigen::Index i = 0; i < model.snrs.size(); ++i)
    std::printf("  component %td: %.6f\n", static_cast<std::ptrdiff_t>(i),
                model.snrs[i]);
  return 0;
}

struct SegmentArgs {
  std::string in_prefix;
  std::optional<int> k;
  std::optional<double> lambda;
  std::optional<double> eps;
  double eta = 1e-2;
  std::uint64_t seed = 0;
  std::string mode = "robust_anisotropic";
  std::optional<int> mnf_kept;
  std::string out_png;
  std::string out_labels;
};

void merge_config(SegmentArgs& a, const CLI::App* cmd, const std::string& config_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  auto want = [&](const char* flag, const char* key) {
    return cmd->count(flag) == 0 && j.contains(key);
  };
  try {
    if (want("--k", "k")) a.k = j["k"].get<int>();
    if (want("--lambda", "lambda")) a.lambda = j["lambda"].get<double>();
    if (want("--eps", "eps")) a.eps = j["eps"].get<double>();
    if (want("--eta", "eta")) a.eta = j["eta"].get<double>();
    if (want("--seed", "seed")) a.seed = j["seed"].get<std::uint64_t>();
    if (want("--mode", "mode")) a.mode = j["mode"].get<std::string>();
    if (want("--mnf-kept", "mnf_kept")) a.mnf_kept = j["mnf_kept"].get<int>();
    if (want("--out-png", "out_png")) a.out_png = j["out_png"].get<std::string>();
    if (want("--out-labels", "out_labels"))
      a.out_labels = j["out_labels"].get<std::string>();
  } catch (const nlohmann::json::type_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

int run_segment(const SegmentArgs& a) {
  if (!a.k) throw std::invalid_argument("--k is required (flag or config key 'k')");
  if (!a.lambda)
    throw std::invalid_argument("--lambda is required (flag or config key 'lambda')");
  if (!a.eps)
    throw std::invalid_argument("--eps is required (flag or config key 'eps')");
  if (!(*a.lambda > 0.0)) throw std::invalid_argument("--lambda must be positive");
  if (!(*a.eps > 0.0)) throw std::invalid_argument("--eps must be positive");
  if (!(a.eta > 0.0)) throw std::invalid_argument("--eta must be positive");
  if (*a.k < 2) throw std::invalid_argument("--k must be at least 2");

  pipeline::PipelineConfig cfg;
  cfg.k = *a.k;
  cfg.lambda = *a.lambda;
  cfg.eps = *a.eps;
  cfg.eta = a.eta;
  cfg.seed = a.seed;
  cfg.mode = parse_mode(a.mode);
  cfg.mnf_kept = a.mnf_kept;

  HyperCube cube = io::load_cube(header_path(a.in_prefix), data_path(a.in_prefix));
  HyperCube normalized = mnf::normalize_cube(cube);
  pipeline::SegmentationResult res = pipeline::segment(normalized, cfg);

  for (std::size_t it = 0; it < res.trace.size(); ++it) {
    const auto& r = res.trace[it];
    std::printf("outer %zu: energy=%.9g pdhg_iters=%d mean_shift=%.3g sizes=[",
                it + 1, r.energy, r.pdhg_iterations, r.mean_shift);
    for (std::size_t l = 0; l < r.segment_sizes.size(); ++l)
      std::printf("%s%zu", l ? ", " : "", r.segment_sizes[l]);
    std::printf("]\n");
  }

  io::GroundTruth out;
  out.height = res.labels.height();
  out.width = res.labels.width();
  out.labels.resize(res.labels.pixels());
  for (std::size_t px = 0; px < res.labels.pixels(); ++px)
    out.labels[px] = static_cast<std::uint16_t>(res.labels.argmax_class(px) + 1);

  if (!a.out_labels.empty())
    io::save_labels(out, header_path(a.out_labels), data_path(a.out_labels));
  if (!a.out_png.empty())
    io::save_label_png(out.labels, out.height, out.width, io::make_palette(cfg.k),
                       a.out_png);
  return 0;
}

int run_eval(const std::string& pred_prefix, const std::string& gt_prefix,
             const std::string& out_csv, std::uint64_t seed) {
  io::GroundTruth pred = io::load_labels(header_path(pred_prefix), data_path(pred_prefix));
  io::GroundTruth gt = io::load_labels(header_path(gt_prefix), data_path(gt_prefix));
  if (pred.height != gt.height || pred.width != gt.width)
    throw std::invalid_argument("eval: label rasters have different shapes");

  int k = 0;
  for (std::uint16_t v : gt.labels) k = std::max(k, static_cast<int>(v));
  for (std::uint16_t v : pred.labels) k = std::max(k, static_cast<int>(v));
  if (k < 1) throw DegenerateInputError("eval: no labeled pixels");

  eval::Scores s = eval::evaluate(pred.labels, gt.labels, k);
  std::printf("classes: %d\n", k);
  std::printf("oa:    %.6f\n", s.oa);
  std::printf("aa:    %.6f\n", s.aa);
  std::printf("kappa: %.6f\n", s.kappa);
  if (!out_csv.empty()) io::save_scores_csv({{s.oa, s.aa, s.kappa, seed}}, out_csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised hyperspectral image segmentation"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --threads appear after the subcommand name
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (default: HSIMS_THREADS, else hardware)")
      ->check(CLI::PositiveNumber);

  std::string synth_spec, synth_prefix;
  bool synth_force = false;
  CLI::App* c_synth = app.add_subcommand("synth", "Generate a synthetic cube + labels");
  c_synth->add_option("spec", synth_spec, "SynthSpec JSON file")->required();
  c_synth->add_option("out_prefix", synth_prefix, "Output prefix")->required();
  c_synth->add_flag("--force", synth_force, "Overwrite existing outputs");

  std::string mnf_in, mnf_out;
  int mnf_kept = 0;
  CLI::App* c_mnf = app.add_subcommand("mnf", "Noise-sorted dimensionality reduction");
  c_mnf->add_option("in_prefix", mnf_in, "Input cube prefix")->required();
  c_mnf->add_option("out_prefix", mnf_out, "Output cube prefix")->required();
  c_mnf->add_option("--kept", mnf_kept, "Components to keep")->required();

  SegmentArgs seg;
  std::string seg_config;
  CLI::App* c_seg = app.add_subcommand("segment", "Segment a cube");
  c_seg->add_option("in_prefix", seg.in_prefix, "Input cube prefix")->required();
  int seg_k = 0;
  double seg_lambda = 0.0, seg_eps = 0.0;
  int seg_mnf_kept = 0;
  c_seg->add_option("--k", seg_k, "Number of segments");
  c_seg->add_option("--lambda", seg_lambda, "Perimeter weight");
  c_seg->add_option("--eps", seg_eps, "Covariance stddev floor");
  c_seg->add_option("--eta", seg.eta, "Robust softening")->capture_default_str();
  c_seg->add_option("--seed", seg.seed, "RNG seed")->capture_default_str();
  c_seg->add_option("--mode", seg.mode, "robust_anisotropic | squared_euclidean")
      ->capture_default_str();
  c_seg->add_option("--mnf-kept", seg_mnf_kept, "Reduce to this many components first");
  c_seg->add_option("--out-png", seg.out_png, "Write a colorized PNG here");
  c_seg->add_option("--out-labels", seg.out_labels, "Write a label raster at this prefix");
  c_seg->add_option("--config", seg_config, "JSON config; explicit flags override");

  std::string eval_pred, eval_gt, eval_csv;
  std::uint64_t eval_seed = 0;
  CLI::App* c_eval = app.add_subcommand("eval", "Score labels against a reference");
  c_eval->add_option("labels_prefix", eval_pred, "Predicted label prefix")->required();
  c_eval->add_option("gt_prefix", eval_gt, "Reference label prefix")->required();
  c_eval->add_option("--out-csv", eval_csv, "Append-style CSV output path");
  c_eval->add_option("--seed", eval_seed, "Seed recorded in the CSV row")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.count("--threads")) set_num_threads(threads);
    if (c_synth->parsed()) return run_synth(synth_spec, synth_prefix, synth_force);
    if (c_mnf->parsed()) return run_mnf(mnf_in, mnf_out, mnf_kept);
    if (c_seg->parsed()) {
      if (c_seg->count("--k")) seg.k = seg_k;
      if (c_seg->count("--lambda")) seg.lambda = seg_lambda;
      if (c_seg->count("--eps")) seg.eps = seg_eps;
      if (c_seg->count("--mnf-kept")) seg.mnf_kept = seg_mnf_kept;
      if (!seg_config.empty()) merge_config(seg, c_seg, seg_config);
      return run_segment(seg);
    }
    if (c_eval->parsed()) return run_eval(eval_pred, eval_gt, eval_csv, eval_seed);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error (usage): %s\n", e.what());
    return kExitUsage;
  } catch (const io::IoError& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return kExitIo;
  } catch (const NonFiniteError& e) {
    std::fprintf(stderr, "error (numeric): %s\n", e.what());
    return kExitNumeric;
  } catch (const DegenerateInputError& e) {
    std::fprintf(stderr, "error (numeric): %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error (internal): %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
