#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmp/bench.hpp"
#include "bmp/boolquad.hpp"
#include "bmp/engine.hpp"
#include "bmp/model_io.hpp"
#include "bmp/tensor.hpp"
#include "bmp/tensor_io.hpp"

namespace {

using nlohmann::json;

struct SynthFlags {
  std::vector<std::size_t> dims;
  int atoms = 6;
  std::uint64_t seed = 0;
  bool paper_scale = false;

  bmp::SynthSpec spec() const {
    bmp::SynthSpec s;
    if (!dims.empty())
      s.dims = dims;
    else if (paper_scale)
      s.dims = bmp::SynthSpec::paper_scale_dims();
    s.atom_count = atoms;
    s.seed = seed;
    return s;
  }
};

void add_synth_flags(CLI::App* cmd, SynthFlags& f) {
  cmd->add_option("--dims", f.dims, "Tensor extents, e.g. 20,20,5")->delimiter(',');
  cmd->add_option("--atoms", f.atoms, "Number of planted atoms");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_flag("--paper-scale", f.paper_scale, "Default dims 100,100,10 instead of 20,20,5");
}

struct FitFlags {
  std::string partitions;
  int max_atoms = 18;
  double stop_tol = 1e-8;
  double ridge = 1e-10;
  int sdp_rank = 0;
  int sdp_sweeps = 200;
  double sdp_tol = 1e-6;
  int rounding_trials = 100;
  std::uint64_t seed = 0;

  bmp::FitConfig config() const {
    bmp::FitConfig cfg;
    cfg.max_atoms = max_atoms;
    cfg.stop_tol = stop_tol;
    cfg.ridge = ridge;
    cfg.seed = seed;
    cfg.sdp.rank = sdp_rank;
    cfg.sdp.max_sweeps = sdp_sweeps;
    cfg.sdp.tol = sdp_tol;
    cfg.sdp.rounding_trials = rounding_trials;
    return cfg;
  }

  bmp::Partition partition(std::size_t mode_count) const {
    if (partitions.empty()) return bmp::Partition::all_single_modes(mode_count);
    return bmp::parse_partitions(partitions, mode_count);
  }
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--partitions", f.partitions,
                  "Mode subsets, ';'-separated, modes ','-separated (default: every single mode)");
  cmd->add_option("--max-atoms", f.max_atoms, "Atom budget");
  cmd->add_option("--stop-tol", f.stop_tol, "Relative objective-improvement floor");
  cmd->add_option("--ridge", f.ridge, "Gram regularizer fallback");
  cmd->add_option("--sdp-rank", f.sdp_rank, "Mixing factor rank (0 = auto)");
  cmd->add_option("--sdp-sweeps", f.sdp_sweeps, "Mixing sweep budget");
  cmd->add_option("--sdp-tol", f.sdp_tol, "Mixing relative-change stop");
  cmd->add_option("--rounding-trials", f.rounding_trials, "Hyperplane rounding trials");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Flat key=value config: values fill options the command line left empty, so
// defaults < file < explicit flags. Keys are long option names without the
// leading dashes.
void apply_flat_config(CLI::App* cmd, const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  while (std::getline(file, line)) {
    line = trimmed(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key=value, got \"" + line + "\"");
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw std::runtime_error("config: unknown key \"" + key + "\"");
    if (opt->count() > 0) continue;  // explicit flag wins
    opt->add_result(value);
    opt->run_callback();
  }
}

// Registers --config on a subcommand and runs the body with file values
// applied.
void set_command(CLI::App* cmd, std::function<void()> body) {
  auto config_path = std::make_shared<std::string>();
  cmd->add_option("--config", *config_path, "key=value file with defaults for this subcommand");
  cmd->callback([cmd, config_path, body = std::move(body)] {
    if (!config_path->empty()) apply_flat_config(cmd, *config_path);
    body();
  });
}

json meta_for(const FitFlags& flags, const bmp::Partition& partition) {
  json config = bmp::fit_config_to_json(flags.config());
  config["partitions"] = bmp::format_partitions(partition);
  return json{{"seed", flags.seed}, {"config", std::move(config)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary matching pursuit for tensor latent feature models"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a planted ground-truth tensor");
  SynthFlags synth_flags;
  std::string synth_out, synth_model;
  add_synth_flags(synth, synth_flags);
  synth->add_option("--out", synth_out, "Output tensor (TLT1)")->required();
  synth->add_option("--model", synth_model, "Optional planted-model JSON output");
  set_command(synth, [&] {
    const bmp::GroundTruth truth = bmp::generate_ground_truth(synth_flags.spec());
    bmp::write_tlt(synth_out, truth.data);
    if (!synth_model.empty()) {
      const json meta{{"seed", synth_flags.seed}, {"planted", true}};
      bmp::write_model(synth_model, bmp::planted_model(truth), meta);
    }
  });

  // noise ------------------------------------------------------------------
  auto* noise = app.add_subcommand("noise", "Add element-wise Gaussian noise");
  std::string noise_in, noise_out;
  double sigma = 0.1;
  std::uint64_t noise_seed = 0;
  noise->add_option("--in", noise_in, "Input tensor (TLT1)")->required();
  noise->add_option("--sigma", sigma, "Noise standard deviation");
  noise->add_option("--seed", noise_seed, "Random seed");
  noise->add_option("--out", noise_out, "Output tensor (TLT1)")->required();
  set_command(noise, [&] {
    bmp::write_tlt(noise_out, bmp::add_gaussian_noise(bmp::read_tlt(noise_in), sigma, noise_seed));
  });

  // mask -------------------------------------------------------------------
  auto* mask_cmd = app.add_subcommand("mask", "Sample an observation mask");
  std::string mask_in, mask_out;
  std::vector<std::size_t> mask_dims;
  double missing = 0.1;
  std::uint64_t mask_seed = 0;
  mask_cmd->add_option("--in", mask_in, "Tensor whose extents the mask copies (TLT1)");
  mask_cmd->add_option("--dims", mask_dims, "Mask extents, e.g. 20,20,5")->delimiter(',');
  mask_cmd->add_option("--missing", missing, "Fraction of entries to drop");
  mask_cmd->add_option("--seed", mask_seed, "Random seed");
  mask_cmd->add_option("--out", mask_out, "Output mask (TLT1)")->required();
  set_command(mask_cmd, [&] {
    bmp::Dims dims = mask_dims;
    if (dims.empty()) {
      if (mask_in.empty()) throw CLI::ValidationError("mask", "need --in or --dims");
      dims = bmp::read_tlt(mask_in).dims();
    }
    bmp::write_tlt(mask_out, bmp::sample_mask(dims, missing, mask_seed));
  });

  // fit --------------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "Run binary matching pursuit");
  FitFlags fit_flags;
  std::string fit_in, fit_mask, fit_truth, fit_model, fit_trace;
  fit_cmd->add_option("--in", fit_in, "Data tensor (TLT1)")->required();
  fit_cmd->add_option("--mask", fit_mask, "Observation mask (TLT1); fits observed entries only");
  fit_cmd->add_option("--truth", fit_truth, "Ground truth for per-iteration RMSE (TLT1)");
  add_fit_flags(fit_cmd, fit_flags);
  fit_cmd->add_option("--seed", fit_flags.seed, "Random seed");
  fit_cmd->add_option("--model", fit_model, "Model JSON output");
  fit_cmd->add_option("--trace", fit_trace, "Trace CSV output");
  set_command(fit_cmd, [&] {
    const bmp::Tensor x = bmp::read_tlt(fit_in);
    bmp::Objective objective =
        fit_mask.empty() ? bmp::Objective::dense(x)
                         : bmp::Objective::masked(x, bmp::read_mask_tlt(fit_mask));
    const bmp::Partition partition = fit_flags.partition(x.mode_count());
    bmp::Tensor truth;
    const bmp::Tensor* truth_ptr = nullptr;
    if (!fit_truth.empty()) {
      truth = bmp::read_tlt(fit_truth);
      truth_ptr = &truth;
    }
    const bmp::FitResult result = bmp::fit(objective, partition, fit_flags.config(), truth_ptr);
    if (!fit_model.empty()) bmp::write_model(fit_model, result.model, meta_for(fit_flags, partition));
    if (!fit_trace.empty()) bmp::write_trace_csv(fit_trace, result.trace);
    const double final_objective =
        result.trace.empty() ? objective.value(bmp::Tensor(x.dims()))
                             : result.trace.records.back().objective;
    std::cout << "objective=" << format_double(final_objective)
              << " atoms=" << result.model.atom_count() << '\n';
  });

  // reconstruct --------------------------------------------------------------
  auto* rec = app.add_subcommand("reconstruct", "Materialize a model back into a tensor");
  std::string rec_model, rec_out;
  rec->add_option("--model", rec_model, "Model JSON")->required();
  rec->add_option("--out", rec_out, "Output tensor (TLT1)")->required();
  set_command(rec, [&] {
    bmp::write_tlt(rec_out, bmp::reconstruct(bmp::read_model(rec_model).model));
  });

  // eval ---------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "RMSE between a truth and an estimate");
  std::string eval_truth, eval_est;
  eval->add_option("--truth", eval_truth, "Ground truth (TLT1)")->required();
  eval->add_option("--in,--est", eval_est, "Estimate (TLT1)")->required();
  set_command(eval, [&] {
    const double value = bmp::rmse(bmp::read_tlt(eval_truth), bmp::read_tlt(eval_est));
    std::cout << json{{"rmse", value}}.dump() << '\n';
  });

  // curve ----------------------------------------------------------------------
  auto* curve = app.add_subcommand("curve", "RMSE-vs-atoms experiment on synthetic data");
  SynthFlags curve_synth;
  FitFlags curve_fit;
  std::string curve_out;
  double curve_sigma = 0.0, curve_missing = 0.0;
  add_synth_flags(curve, curve_synth);
  add_fit_flags(curve, curve_fit);
  auto* sigma_opt = curve->add_option("--sigma", curve_sigma, "Denoising task: noise level");
  auto* missing_opt =
      curve->add_option("--missing", curve_missing, "Recovery task: missing fraction");
  curve->add_option("--out", curve_out, "Curve CSV output (default: stdout)");
  set_command(curve, [&] {
    if (sigma_opt->count() == missing_opt->count())
      throw CLI::ValidationError("curve", "choose a task: exactly one of --sigma / --missing");
    const bmp::SynthSpec spec = curve_synth.spec();
    curve_fit.seed = curve_synth.seed;  // one seed drives the whole run
    std::vector<int> grid(static_cast<std::size_t>(curve_fit.max_atoms));
    std::iota(grid.begin(), grid.end(), 1);
    const auto records = sigma_opt->count()
                             ? bmp::run_denoise_curve(spec, curve_sigma, curve_fit.config(), grid)
                             : bmp::run_recovery_curve(spec, curve_missing, curve_fit.config(), grid);
    if (curve_out.empty())
      bmp::write_curve_csv(std::cout, records);
    else
      bmp::write_curve_csv(curve_out, records);
  });

  // oracle -----------------------------------------------------------------
  auto* oracle = app.add_subcommand("oracle", "Exhaustive Boolean quadratic maximizer");
  std::string oracle_in, oracle_dump;
  oracle->add_option("--in", oracle_in, "Symmetric matrix (CSV)")->required();
  oracle->add_option("--dump", oracle_dump, "Prefix for debug CSV dumps of A and its lift");
  set_command(oracle, [&] {
    const bmp::Tensor m = bmp::read_matrix_csv(oracle_in);
    const Eigen::MatrixXd a = bmp::unfold(m, bmp::ModeSubset({1}));
    bmp::BoolQuadProblem problem(a);
    if (!oracle_dump.empty()) {
      bmp::write_matrix_csv(oracle_dump + "_A.csv", problem.a);
      bmp::write_matrix_csv(oracle_dump + "_Ctilde.csv", bmp::lift(problem).c);
    }
    const bmp::BruteForceResult best = bmp::brute_force(problem);
    std::cout << json{{"z", bmp::code_to_bitstring(best.z)}, {"value", best.value}}.dump()
              << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
