#include "bmp/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmp/rng.hpp"

namespace bmp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd code_as_vector(const std::vector<std::uint8_t>& code) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(code.size()));
  for (std::size_t i = 0; i < code.size(); ++i) z[static_cast<Eigen::Index>(i)] = code[i];
  return z;
}

double rmse_of(const Tensor& truth, const Tensor& est) {
  const double n = static_cast<double>(truth.size());
  return (truth.as_vector() - est.as_vector()).norm() / std::sqrt(n);
}

double rmse_held_out(const Tensor& truth, const Tensor& est, const MaskTensor& mask) {
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mask.observed(i)) continue;
    const double d = truth[i] - est[i];
    sq += d * d;
    ++n;
  }
  return n == 0 ? kNaN : std::sqrt(sq / static_cast<double>(n));
}

}  // namespace

Partition::Partition(std::vector<ModeSubset> subsets) : subsets_(std::move(subsets)) {
  if (subsets_.empty()) throw std::invalid_argument("partition must be nonempty");
  for (std::size_t i = 0; i < subsets_.size(); ++i)
    for (std::size_t j = i + 1; j < subsets_.size(); ++j)
      if (subsets_[i] == subsets_[j])
        throw std::invalid_argument("partition contains a duplicate subset");
}

void Partition::validate_for(std::size_t mode_count) const {
  for (const auto& s : subsets_) s.validate_for(mode_count);
}

Partition Partition::all_single_modes(std::size_t mode_count) {
  std::vector<ModeSubset> subsets;
  subsets.reserve(mode_count);
  for (int m = 1; m <= static_cast<int>(mode_count); ++m)
    subsets.emplace_back(std::vector<int>{m});
  return Partition(std::move(subsets));
}

Tensor Atom::materialize(const Dims& dims) const {
  subset.validate_for(dims.size());
  const Eigen::VectorXd z = code_as_vector(code);
  return refold(z * feature.transpose(), subset, dims);
}

Tensor reconstruct(const Model& model) {
  Tensor w(model.dims);
  for (std::size_t m = 0; m < model.atoms.size(); ++m)
    w = axpy(model.coeffs[static_cast<Eigen::Index>(m)], model.atoms[m].materialize(model.dims),
             w);
  return w;
}

Objective::Objective(Tensor x, std::optional<MaskTensor> mask)
    : x_(std::move(x)), mask_(std::move(mask)) {
  if (mask_) {
    if (!x_.same_dims(mask_->tensor()))
      throw std::invalid_argument("objective: mask extents differ from data");
    if (mask_->observed_count() == 0)
      throw std::invalid_argument("objective: mask observes no entries");
  }
}

Objective Objective::dense(Tensor x) { return Objective(std::move(x), std::nullopt); }

Objective Objective::masked(Tensor x, MaskTensor mask) {
  return Objective(std::move(x), std::move(mask));
}

double Objective::value(const Tensor& w) const {
  if (!w.same_dims(x_)) throw std::invalid_argument("objective: iterate extents differ");
  if (!mask_) return 0.5 * (x_.as_vector() - w.as_vector()).squaredNorm();
  double sq = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!mask_->observed(i)) continue;
    const double d = x_[i] - w[i];
    sq += d * d;
  }
  return 0.5 * sq;
}

Tensor Objective::gradient(const Tensor& w) const {
  if (!w.same_dims(x_)) throw std::invalid_argument("objective: iterate extents differ");
  Tensor g(x_.dims());
  g.as_vector() = w.as_vector() - x_.as_vector();
  if (mask_) g.as_vector() = g.as_vector().cwiseProduct(mask_->tensor().as_vector());
  return g;
}

void FitConfig::validate() const {
  if (max_atoms < 1) throw std::invalid_argument("max_atoms must be >= 1");
  if (stop_tol < 0.0) throw std::invalid_argument("stop_tol must be >= 0");
  if (ridge < 0.0) throw std::invalid_argument("ridge must be >= 0");
  if (duplicate_retry_budget < 0)
    throw std::invalid_argument("duplicate_retry_budget must be >= 0");
  sdp.validate();
}

std::optional<GreedyCandidate> greedy_atom_search(const Tensor& grad,
                                                  const Partition& partition,
                                                  const FitConfig& cfg) {
  partition.validate_for(grad.mode_count());
  std::optional<GreedyCandidate> best;
  for (std::size_t idx = 0; idx < partition.size(); ++idx) {
    const ModeSubset& subset = partition.subsets()[idx];
    const Eigen::MatrixXd g = unfold(grad, subset);

    SdpSolverConfig sdp = cfg.sdp;
    sdp.seed = mix_seed(cfg.seed, idx + 1);
    const BoolQuadSolution sol = solve(BoolQuadProblem::from_gram(g), sdp);
    if (sol.zero_gradient) continue;

    // value = z'GG'z = ||G'z||^2, so the descent score is -sqrt(value).
    const Eigen::VectorXd z = code_as_vector(sol.z);
    Eigen::VectorXd projected = g.transpose() * z;
    const double norm = projected.norm();
    if (!(norm > 0.0)) continue;
    const double score = -norm;
    if (!best || score < best->score) {
      GreedyCandidate cand;
      cand.atom.subset = subset;
      cand.atom.code = sol.z;
      cand.atom.feature = -projected / norm;
      cand.score = score;
      cand.partition_index = static_cast<int>(idx);
      best = std::move(cand);
    }
  }
  return best;
}

namespace {

// Incremental normal-equation state for the fully-corrective refit. Columns
// are flattened atoms; under a masked objective both the columns and the data
// vector are zeroed at unobserved entries, which restricts every inner
// product to observed positions.
class CoefficientSolver {
 public:
  CoefficientSolver(const Objective& objective, double ridge)
      : objective_(objective), ridge_(ridge) {
    x_ = objective.data().as_vector();
    if (const MaskTensor* mask = objective.mask())
      x_ = x_.cwiseProduct(mask->tensor().as_vector());
    x_norm_ = x_.norm();
  }

  void add_atom(const Atom& atom, const Dims& dims) {
    Eigen::VectorXd col = atom.materialize(dims).as_vector();
    if (const MaskTensor* mask = objective_.mask())
      col = col.cwiseProduct(mask->tensor().as_vector());
    const Eigen::Index k = static_cast<Eigen::Index>(columns_.size());
    gram_.conservativeResize(k + 1, k + 1);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double dot = col.dot(columns_[static_cast<std::size_t>(j)]);
      gram_(k, j) = dot;
      gram_(j, k) = dot;
    }
    gram_(k, k) = col.squaredNorm();
    rhs_.conservativeResize(k + 1);
    rhs_[k] = col.dot(x_);
    columns_.push_back(std::move(col));
  }

  WeightSolution solve() const {
    WeightSolution out;
    const auto ldlt = gram_.ldlt();
    out.coeffs = ldlt.solve(rhs_);
    out.normal_eq_residual = relative_residual(out.coeffs);
    // Rank deficiency can still yield a consistent solution, so singularity
    // is judged from the pivots as well as the residual.
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    const bool singular = pivots.minCoeff() <= 1e-12 * pivots.maxCoeff();
    const double limit = 1e-8;
    if (singular || !out.coeffs.allFinite() || out.normal_eq_residual > limit) {
      const Eigen::Index k = gram_.rows();
      Eigen::MatrixXd regularized =
          gram_ + ridge_ * Eigen::MatrixXd::Identity(k, k);
      out.coeffs = regularized.ldlt().solve(rhs_);
      out.used_ridge = true;
      out.normal_eq_residual = kNaN;
      if (!out.coeffs.allFinite())
        throw std::runtime_error("adjust_weights: singular Gram system after ridge retry");
    }
    return out;
  }

 private:
  double relative_residual(const Eigen::VectorXd& coeffs) const {
    if (!coeffs.allFinite()) return std::numeric_limits<double>::infinity();
    const double resid = (rhs_ - gram_ * coeffs).cwiseAbs().maxCoeff();
    return x_norm_ > 0.0 ? resid / x_norm_ : resid;
  }

  const Objective& objective_;
  double ridge_;
  Eigen::VectorXd x_;
  double x_norm_ = 0.0;
  std::vector<Eigen::VectorXd> columns_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd rhs_;
};

bool same_atom(const Atom& a, const Atom& b) {
  if (!(a.subset == b.subset) || a.code != b.code) return false;
  const double d_plus = (a.feature + b.feature).norm();
  const double d_minus = (a.feature - b.feature).norm();
  return std::min(d_plus, d_minus) <= 1e-6;
}

bool duplicates_active(const Atom& atom, const std::vector<Atom>& active) {
  for (const Atom& a : active)
    if (same_atom(atom, a)) return true;
  return false;
}

}  // namespace

WeightSolution adjust_weights(const Objective& objective, const std::vector<Atom>& atoms,
                              double ridge) {
  if (atoms.empty()) throw std::invalid_argument("adjust_weights: no active atoms");
  CoefficientSolver solver(objective, ridge);
  for (const Atom& atom : atoms) solver.add_atom(atom, objective.dims());
  return solver.solve();
}

FitResult fit(const Objective& objective, const Partition& partition, const FitConfig& cfg,
              const Tensor* truth) {
  cfg.validate();
  partition.validate_for(objective.dims().size());
  if (truth && truth->dims() != objective.dims())
    throw std::invalid_argument("fit: truth extents differ from data");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };

  FitResult result;
  result.model.dims = objective.dims();
  CoefficientSolver solver(objective, cfg.ridge);

  Tensor w(objective.dims());
  double prev_objective = objective.value(w);
  double grad_floor = -1.0;

  for (int k = 1; k <= cfg.max_atoms; ++k) {
    const Tensor grad = objective.gradient(w);
    const double grad_norm = frobenius_norm(grad);
    // The floor is relative to the first gradient (= the masked data), so a
    // residual at machine-noise level counts as a zero gradient.
    if (grad_floor < 0.0) grad_floor = 1e-14 * grad_norm;
    if (grad_norm <= grad_floor) {
      result.converged = true;
      break;
    }

    const std::uint64_t iter_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
    std::optional<GreedyCandidate> cand;
    bool fresh = false;
    for (int retry = 0; retry <= cfg.duplicate_retry_budget; ++retry) {
      FitConfig attempt = cfg;
      attempt.seed = mix_seed(iter_seed, static_cast<std::uint64_t>(retry));
      cand = greedy_atom_search(grad, partition, attempt);
      if (!cand) break;
      if (!duplicates_active(cand->atom, result.model.atoms)) {
        fresh = true;
        break;
      }
    }
    if (!cand || !fresh) {
      // Zero gradient, or a repeated atom that re-rounding could not avoid;
      // a duplicate cannot improve a fully-corrective fit.
      result.converged = true;
      break;
    }

    result.model.atoms.push_back(cand->atom);
    solver.add_atom(cand->atom, objective.dims());
    const WeightSolution weights = solver.solve();
    result.model.coeffs = weights.coeffs;
    w = reconstruct(result.model);
    const double obj = objective.value(w);

    TraceRecord rec;
    rec.iteration = k;
    rec.objective = obj;
    rec.partition_index = cand->partition_index;
    rec.score = cand->score;
    rec.coeff_l1 = weights.coeffs.lpNorm<1>();
    rec.rmse = truth ? rmse_of(*truth, w) : kNaN;
    rec.held_out_rmse = (truth && objective.mask())
                            ? rmse_held_out(*truth, w, *objective.mask())
                            : kNaN;
    rec.normal_eq_residual = weights.normal_eq_residual;
    rec.used_ridge = weights.used_ridge;
    rec.elapsed_ms = elapsed_ms();
    result.trace.records.push_back(rec);

    const double improvement = prev_objective - obj;
    if (prev_objective <= 0.0 || improvement < cfg.stop_tol * prev_objective) {
      result.converged = true;
      break;
    }
    prev_objective = obj;
  }
  return result;
}

FitResult matrix_lfm_fit(const Tensor& x, const FitConfig& cfg, const Tensor* truth) {
  if (x.mode_count() != 2)
    throw std::invalid_argument("matrix_lfm_fit: input must be a 2-mode tensor");
  Partition partition(std::vector<ModeSubset>{ModeSubset({1})});
  return fit(Objective::dense(x), partition, cfg, truth);
}

}  // namespace bmp
