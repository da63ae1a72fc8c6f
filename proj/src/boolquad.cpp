#include "bmp/boolquad.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace bmp {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and nonempty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
}

double cut_value(const std::vector<std::int8_t>& signs, const Eigen::MatrixXd& c) {
  const Eigen::Index n = c.rows();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = signs[static_cast<std::size_t>(i)];
  return y.dot(c * y);
}

// Greedy 1-opt: flip the best single coordinate while any flip strictly
// increases y'Cy. Flipping i changes the value by -4 y_i (g_i - C_ii y_i)
// with g = Cy.
void one_opt_polish(std::vector<std::int8_t>& signs, const Eigen::MatrixXd& c) {
  const Eigen::Index n = c.rows();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = signs[static_cast<std::size_t>(i)];
  Eigen::VectorXd g = c * y;
  while (true) {
    double best_delta = 0.0;
    Eigen::Index best_i = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double delta = -4.0 * y[i] * (g[i] - c(i, i) * y[i]);
      if (delta > best_delta) {
        best_delta = delta;
        best_i = i;
      }
    }
    if (best_i < 0) break;
    y[best_i] = -y[best_i];
    g += 2.0 * y[best_i] * c.col(best_i);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    signs[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(y[i] > 0 ? 1 : -1);
}

}  // namespace

BoolQuadProblem::BoolQuadProblem(Eigen::MatrixXd matrix) : a(std::move(matrix)) {
  require_symmetric(a, "BoolQuadProblem");
}

BoolQuadProblem BoolQuadProblem::from_gram(const Eigen::MatrixXd& g) {
  Eigen::MatrixXd a = g * g.transpose();
  a = 0.5 * (a + a.transpose());  // scrub rounding asymmetry
  return BoolQuadProblem(std::move(a));
}

void SdpSolverConfig::validate() const {
  if (rank != 0 && rank < 2) throw std::invalid_argument("sdp rank must be >= 2 (0 = auto)");
  if (max_sweeps < 1) throw std::invalid_argument("sdp max_sweeps must be >= 1");
  if (tol <= 0.0) throw std::invalid_argument("sdp tol must be > 0");
  if (rounding_trials < 1) throw std::invalid_argument("rounding_trials must be >= 1");
}

int SdpSolverConfig::effective_rank(Eigen::Index lifted_order) const {
  if (rank > 0) return rank;
  // Above the Barvinok-Pataki threshold the factorized problem has no
  // spurious local maxima.
  return static_cast<int>(std::ceil(std::sqrt(2.0 * static_cast<double>(lifted_order)))) + 1;
}

MaxCutLift lift(const BoolQuadProblem& problem) {
  const Eigen::MatrixXd& a = problem.a;
  const Eigen::Index p = a.rows();
  MaxCutLift lifted;
  lifted.c.resize(p + 1, p + 1);
  const Eigen::VectorXd row_sums = a.rowwise().sum();
  lifted.c(0, 0) = row_sums.sum();
  lifted.c.block(0, 1, 1, p) = row_sums.transpose();
  lifted.c.block(1, 0, p, 1) = row_sums;
  lifted.c.block(1, 1, p, p) = a;
  return lifted;
}

MixingResult mixing_solve(const MaxCutLift& lifted, const SdpSolverConfig& cfg) {
  cfg.validate();
  require_symmetric(lifted.c, "mixing_solve");
  const Eigen::MatrixXd& c = lifted.c;
  const Eigen::Index n = c.rows();
  const int k = cfg.effective_rank(n);

  MixingResult res;
  res.v.resize(k, n);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int r = 0; r < k; ++r) res.v(r, j) = gauss(rng);
    res.v.col(j).normalize();
  }

  auto objective = [&]() { return ((res.v.transpose() * res.v).cwiseProduct(c)).sum(); };

  double prev = objective();
  res.objective_history.push_back(prev);
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < n; ++i) {
      // Closed-form maximizer of 2 v_i . g + const over the unit sphere.
      Eigen::VectorXd g = res.v * c.col(i) - c(i, i) * res.v.col(i);
      const double norm = g.norm();
      if (norm > 0.0) res.v.col(i) = g / norm;
    }
    ++res.sweeps;
    const double obj = objective();
    res.objective_history.push_back(obj);
    if (std::abs(obj - prev) <= cfg.tol * std::max(1.0, std::abs(obj))) break;
    prev = obj;
  }
  return res;
}

std::vector<RoundedCut> round_trials(const Eigen::MatrixXd& v, const MaxCutLift& lifted,
                                     const SdpSolverConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = lifted.c.rows();
  if (v.cols() != n) throw std::invalid_argument("round: factor and lift order mismatch");

  std::vector<RoundedCut> trials;
  trials.reserve(static_cast<std::size_t>(cfg.rounding_trials));
  for (int t = 0; t < cfg.rounding_trials; ++t) {
    std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(t));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd hyperplane(v.rows());
    for (Eigen::Index r = 0; r < v.rows(); ++r) hyperplane[r] = gauss(rng);

    RoundedCut cut;
    cut.trial = t;
    cut.signs.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = hyperplane.dot(v.col(i));
      cut.signs[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(s >= 0.0 ? 1 : -1);
    }
    if (cfg.one_opt) one_opt_polish(cut.signs, lifted.c);
    cut.value = cut_value(cut.signs, lifted.c);
    trials.push_back(std::move(cut));
  }
  return trials;
}

RoundedCut round(const Eigen::MatrixXd& v, const MaxCutLift& lifted,
                 const SdpSolverConfig& cfg) {
  auto trials = round_trials(v, lifted, cfg);
  std::size_t best = 0;
  for (std::size_t t = 1; t < trials.size(); ++t)
    if (trials[t].value > trials[best].value) best = t;
  return trials[best];
}

std::vector<std::uint8_t> to_binary(const std::vector<std::int8_t>& signs) {
  if (signs.size() < 2) throw std::invalid_argument("to_binary: need dummy plus p entries");
  for (std::int8_t s : signs)
    if (s != 1 && s != -1) throw std::invalid_argument("to_binary: entries must be +-1");
  const int flip = signs[0] == -1 ? -1 : 1;
  std::vector<std::uint8_t> z(signs.size() - 1);
  for (std::size_t i = 1; i < signs.size(); ++i)
    z[i - 1] = static_cast<std::uint8_t>(flip * signs[i] == 1 ? 1 : 0);
  return z;
}

BruteForceResult brute_force(const BoolQuadProblem& problem) {
  const Eigen::MatrixXd& a = problem.a;
  const Eigen::Index p = a.rows();
  if (p > 20) throw std::invalid_argument("brute_force: order > 20");

  // Ascending-encoding walk; between consecutive encodings only the trailing
  // bits change, each flip updating g = Az and the value in O(p).
  const std::uint64_t count = 1ULL << p;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  std::vector<std::uint8_t> z(static_cast<std::size_t>(p), 0);
  double value = 0.0;

  BruteForceResult best;
  best.z = z;
  best.value = 0.0;

  for (std::uint64_t enc = 1; enc < count; ++enc) {
    const std::uint64_t changed = enc ^ (enc - 1);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (!((changed >> i) & 1ULL)) continue;
      auto& zi = z[static_cast<std::size_t>(i)];
      if (zi == 0) {
        value += 2.0 * g[i] + a(i, i);
        g += a.col(i);
        zi = 1;
      } else {
        g -= a.col(i);
        value -= 2.0 * g[i] + a(i, i);
        zi = 0;
      }
    }
    if (value > best.value) {
      best.value = value;
      best.z = z;
    }
  }
  return best;
}

BoolQuadSolution solve(const BoolQuadProblem& problem, const SdpSolverConfig& cfg) {
  cfg.validate();
  BoolQuadSolution sol;
  const Eigen::Index p = problem.order();

  if (cfg.exhaustive) {
    BruteForceResult exact = brute_force(problem);
    sol.sdp_objective = std::numeric_limits<double>::quiet_NaN();
    if (exact.value > 0.0) {
      sol.z = std::move(exact.z);
      sol.value = exact.value;
    } else {
      sol.z.assign(static_cast<std::size_t>(p), 0);
      sol.zero_gradient = true;
    }
    return sol;
  }

  const MaxCutLift lifted = lift(problem);
  const MixingResult sdp = mixing_solve(lifted, cfg);
  sol.sdp_objective = sdp.objective();

  double best_value = 0.0;
  std::vector<std::uint8_t> best_z;
  for (const RoundedCut& cut : round_trials(sdp.v, lifted, cfg)) {
    std::vector<std::uint8_t> z = to_binary(cut.signs);
    bool nonzero = false;
    for (std::uint8_t b : z) nonzero |= (b != 0);
    if (!nonzero) continue;
    Eigen::VectorXd zv(p);
    for (Eigen::Index i = 0; i < p; ++i) zv[i] = z[static_cast<std::size_t>(i)];
    const double value = zv.dot(problem.a * zv);
    if (value > best_value) {
      best_value = value;
      best_z = std::move(z);
    }
  }

  if (best_z.empty()) {
    sol.z.assign(static_cast<std::size_t>(p), 0);
    sol.zero_gradient = true;
  } else {
    sol.z = std::move(best_z);
    sol.value = best_value;
  }
  return sol;
}

}  // namespace bmp
