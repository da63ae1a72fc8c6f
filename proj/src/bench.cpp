#include "bmp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "bmp/rng.hpp"

namespace bmp {

void SynthSpec::validate() const {
  if (atom_count < 1) throw std::invalid_argument("synth: atom count must be >= 1");
  if (dims.size() < 2) throw std::invalid_argument("synth: need at least 2 modes");
  for (std::size_t e : dims)
    if (e == 0) throw std::invalid_argument("synth: extents must be >= 1");
  if (value_min > value_max) throw std::invalid_argument("synth: empty value alphabet");
}

Tensor PlantedAtom::materialize(const Dims& dims) const {
  const std::size_t mode_count = dims.size();
  if (mode == 0 || mode > static_cast<int>(mode_count))
    throw std::invalid_argument("planted atom: mode out of range");
  if (code.size() != dims[static_cast<std::size_t>(mode - 1)])
    throw std::invalid_argument("planted atom: code length mismatch");

  // Per-mode factor lookup: the chosen mode reads the binary code, the rest
  // read their integer feature vectors.
  std::vector<const Eigen::VectorXd*> factor_of(mode_count, nullptr);
  Eigen::VectorXd code_vec(static_cast<Eigen::Index>(code.size()));
  for (std::size_t i = 0; i < code.size(); ++i) code_vec[static_cast<Eigen::Index>(i)] = code[i];
  std::size_t fi = 0;
  for (std::size_t l = 0; l < mode_count; ++l) {
    if (static_cast<int>(l + 1) == mode) {
      factor_of[l] = &code_vec;
      continue;
    }
    if (fi >= factors.size()) throw std::invalid_argument("planted atom: missing factor");
    if (factors[fi].size() != static_cast<Eigen::Index>(dims[l]))
      throw std::invalid_argument("planted atom: factor length mismatch");
    factor_of[l] = &factors[fi++];
  }
  if (fi != factors.size()) throw std::invalid_argument("planted atom: extra factors");

  Tensor out(dims);
  std::vector<std::size_t> idx(mode_count, 0);
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    double v = 1.0;
    for (std::size_t l = 0; l < mode_count; ++l)
      v *= (*factor_of[l])[static_cast<Eigen::Index>(idx[l])];
    out[lin] = v;
    for (std::size_t l = 0; l < mode_count; ++l) {
      if (++idx[l] < dims[l]) break;
      idx[l] = 0;
    }
  }
  return out;
}

GroundTruth generate_ground_truth(const SynthSpec& spec) {
  spec.validate();
  const std::size_t mode_count = spec.dims.size();
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> alphabet(spec.value_min, spec.value_max);

  GroundTruth truth;
  truth.data = Tensor(spec.dims);
  for (int k = 1; k <= spec.atom_count; ++k) {
    PlantedAtom atom;
    atom.mode = static_cast<int>((static_cast<std::size_t>(k - 1)) % mode_count) + 1;
    const std::size_t code_len = spec.dims[static_cast<std::size_t>(atom.mode - 1)];
    atom.code.assign(code_len, 0);
    bool any = false;
    while (!any) {
      for (auto& b : atom.code) {
        b = static_cast<std::uint8_t>(coin(rng));
        any |= (b != 0);
      }
    }
    for (std::size_t l = 0; l < mode_count; ++l) {
      if (static_cast<int>(l + 1) == atom.mode) continue;
      Eigen::VectorXd w(static_cast<Eigen::Index>(spec.dims[l]));
      for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = alphabet(rng);
      atom.factors.push_back(std::move(w));
    }
    truth.data = axpy(1.0, atom.materialize(spec.dims), truth.data);
    truth.atoms.push_back(std::move(atom));
  }
  return truth;
}

Model planted_model(const GroundTruth& truth) {
  const Dims& dims = truth.data.dims();
  Model model;
  model.dims = dims;
  model.coeffs.resize(static_cast<Eigen::Index>(truth.atoms.size()));
  for (std::size_t k = 0; k < truth.atoms.size(); ++k) {
    const PlantedAtom& planted = truth.atoms[k];
    Atom atom;
    atom.subset = ModeSubset({planted.mode});
    atom.code = planted.code;
    // Flatten the outer product of the remaining factors in complement
    // order (ascending modes, earliest fastest) and split off its norm.
    Eigen::VectorXd flat = Eigen::VectorXd::Ones(1);
    for (auto it = planted.factors.begin(); it != planted.factors.end(); ++it) {
      const Eigen::VectorXd& w = *it;
      Eigen::VectorXd next(flat.size() * w.size());
      for (Eigen::Index j = 0; j < w.size(); ++j)
        next.segment(j * flat.size(), flat.size()) = flat * w[j];
      flat = std::move(next);
    }
    const double norm = flat.norm();
    if (norm == 0.0) throw std::invalid_argument("planted model: zero feature factor");
    atom.feature = flat / norm;
    model.coeffs[static_cast<Eigen::Index>(k)] = norm;
    model.atoms.push_back(std::move(atom));
  }
  return model;
}

Tensor add_gaussian_noise(const Tensor& x, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
  if (sigma == 0.0) return x;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += gauss(rng);
  return out;
}

MaskTensor sample_mask(const Dims& dims, double missing_frac, std::uint64_t seed) {
  if (missing_frac < 0.0 || missing_frac >= 1.0)
    throw std::invalid_argument("mask: missing fraction must be in [0, 1)");
  Tensor indicator(dims);
  const std::size_t n = indicator.size();
  for (std::size_t i = 0; i < n; ++i) indicator[i] = 1.0;
  const auto missing = static_cast<std::size_t>(std::llround(missing_frac * static_cast<double>(n)));

  // Partial Fisher-Yates: the first `missing` slots end up holding a uniform
  // sample without replacement.
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < missing; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
    indicator[pool[i]] = 0.0;
  }
  return MaskTensor(std::move(indicator));
}

double rmse(const Tensor& truth, const Tensor& estimate) {
  if (!truth.same_dims(estimate)) throw std::invalid_argument("rmse: extents differ");
  const double n = static_cast<double>(truth.size());
  return (truth.as_vector() - estimate.as_vector()).norm() / std::sqrt(n);
}

double rmse_masked(const Tensor& truth, const Tensor& estimate, const MaskTensor& mask,
                   bool held_out) {
  if (!truth.same_dims(estimate) || !truth.same_dims(mask.tensor()))
    throw std::invalid_argument("rmse_masked: extents differ");
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mask.observed(i) == held_out) continue;
    const double d = truth[i] - estimate[i];
    sq += d * d;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("rmse_masked: no entries selected");
  return std::sqrt(sq / static_cast<double>(n));
}

Tensor mean_fill(const Tensor& x, const MaskTensor& mask) {
  if (!x.same_dims(mask.tensor())) throw std::invalid_argument("mean_fill: extents differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask.observed(i)) continue;
    sum += x[i];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("mean_fill: mask observes no entries");
  const double mean = sum / static_cast<double>(n);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.observed(i)) out[i] = mean;
  return out;
}

namespace {

std::vector<CurveRecord> curve_from_trace(const FitTrace& trace,
                                          const std::vector<int>& atom_grid) {
  std::vector<CurveRecord> records;
  int prev = 0;
  for (int g : atom_grid) {
    if (g <= prev) throw std::invalid_argument("curve: atom grid must be strictly increasing");
    prev = g;
    if (static_cast<std::size_t>(g) > trace.size()) break;  // fit stopped early
    const TraceRecord& r = trace.records[static_cast<std::size_t>(g - 1)];
    CurveRecord rec;
    rec.atom_count = g;
    rec.rmse = r.rmse;
    rec.objective = r.objective;
    rec.wall_time_ms = r.elapsed_ms;
    rec.held_out_rmse = r.held_out_rmse;
    records.push_back(rec);
  }
  return records;
}

FitConfig grid_config(const FitConfig& cfg, const std::vector<int>& atom_grid) {
  if (atom_grid.empty()) throw std::invalid_argument("curve: empty atom grid");
  FitConfig run = cfg;
  run.max_atoms = *std::max_element(atom_grid.begin(), atom_grid.end());
  return run;
}

}  // namespace

std::vector<CurveRecord> run_denoise_curve(const SynthSpec& spec, double sigma,
                                           const FitConfig& cfg,
                                           const std::vector<int>& atom_grid) {
  const GroundTruth truth = generate_ground_truth(spec);
  const Tensor noisy = add_gaussian_noise(truth.data, sigma, mix_seed(spec.seed, kCurveNoiseSalt));
  const Partition partition = Partition::all_single_modes(spec.dims.size());
  const FitResult res =
      fit(Objective::dense(noisy), partition, grid_config(cfg, atom_grid), &truth.data);
  return curve_from_trace(res.trace, atom_grid);
}

std::vector<CurveRecord> run_recovery_curve(const SynthSpec& spec, double missing_frac,
                                            const FitConfig& cfg,
                                            const std::vector<int>& atom_grid) {
  const GroundTruth truth = generate_ground_truth(spec);
  const MaskTensor mask = sample_mask(spec.dims, missing_frac, mix_seed(spec.seed, kCurveMaskSalt));
  const Partition partition = Partition::all_single_modes(spec.dims.size());
  const FitResult res = fit(Objective::masked(truth.data, mask), partition,
                            grid_config(cfg, atom_grid), &truth.data);
  return curve_from_trace(res.trace, atom_grid);
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRecord>& records) {
  bool with_held_out = false;
  for (const CurveRecord& r : records) with_held_out |= !std::isnan(r.held_out_rmse);

  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "atom_count,rmse,objective,wall_time_ms";
  if (with_held_out) out << ",held_out_rmse";
  out << '\n';
  for (const CurveRecord& r : records) {
    out << r.atom_count << ',' << fmt(r.rmse) << ',' << fmt(r.objective) << ','
        << fmt(r.wall_time_ms);
    if (with_held_out) out << ',' << fmt(r.held_out_rmse);
    out << '\n';
  }
}

void write_curve_csv(const std::string& path, const std::vector<CurveRecord>& records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_curve_csv(f, records);
}

}  // namespace bmp
