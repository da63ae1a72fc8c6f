#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace bmp {

/// max_{z in {0,1}^p} z'Az for a symmetric PSD matrix A (a Gram form GG' of
/// an unfolded gradient in the greedy step).
struct BoolQuadProblem {
  Eigen::MatrixXd a;

  explicit BoolQuadProblem(Eigen::MatrixXd matrix);    // checks symmetry
  static BoolQuadProblem from_gram(const Eigen::MatrixXd& g);  // A = GG'

  Eigen::Index order() const { return a.rows(); }
};

/// The (p+1) x (p+1) augmented matrix of the +-1 reformulation:
///   [[1'A1, 1'A], [A1, A]],
/// under y = 2z - 1 with dummy y0, so (1/4) [y0;y]' C [y0;y] = z'Az at y0 = 1.
struct MaxCutLift {
  Eigen::MatrixXd c;
};

struct SdpSolverConfig {
  int rank = 0;              // 0 = auto: ceil(sqrt(2(p+1))) + 1
  int max_sweeps = 200;
  double tol = 1e-6;         // relative objective-change stop
  int rounding_trials = 100;
  bool one_opt = true;
  std::uint64_t seed = 0;
  bool exhaustive = false;   // solve by enumeration (order <= 20) instead of the SDP

  void validate() const;
  int effective_rank(Eigen::Index lifted_order) const;
};

MaxCutLift lift(const BoolQuadProblem& problem);

struct MixingResult {
  Eigen::MatrixXd v;                     // rank x (p+1), unit-norm columns
  std::vector<double> objective_history; // <C, V'V> after each sweep, non-decreasing
  int sweeps = 0;

  double objective() const { return objective_history.back(); }
};

// Low-rank coordinate-ascent solver for max <C, V'V> with unit-norm columns.
// Columns are updated cyclically; each update is the closed-form maximizer,
// so the objective never decreases.
MixingResult mixing_solve(const MaxCutLift& lifted, const SdpSolverConfig& cfg);

struct RoundedCut {
  std::vector<std::int8_t> signs;  // p+1 entries in {-1, +1}
  double value = 0.0;              // signs' C signs
  int trial = -1;
};

// All rounding trials, in trial order. Trial t draws its Gaussian hyperplane
// from seed^t, so trials are order-independent; 1-opt then flips single
// coordinates while any flip increases the cut value.
std::vector<RoundedCut> round_trials(const Eigen::MatrixXd& v, const MaxCutLift& lifted,
                                     const SdpSolverConfig& cfg);

// Best trial by (value, then lowest trial index).
RoundedCut round(const Eigen::MatrixXd& v, const MaxCutLift& lifted,
                 const SdpSolverConfig& cfg);

// Maps signs back to the binary vector: flips globally if the dummy entry is
// -1, then z = (1 + y)/2 over the non-dummy entries.
std::vector<std::uint8_t> to_binary(const std::vector<std::int8_t>& signs);

struct BruteForceResult {
  std::vector<std::uint8_t> z;
  double value = 0.0;
};

// Exact maximizer over all 2^p assignments, p <= 20. Ties are broken by the
// lowest binary-integer encoding of z (bit i of the encoding is z_{i+1}).
BruteForceResult brute_force(const BoolQuadProblem& problem);

struct BoolQuadSolution {
  std::vector<std::uint8_t> z;
  double value = 0.0;
  bool zero_gradient = false;   // no candidate with positive value; z is all-zero
  double sdp_objective = 0.0;   // <C, V'V> at the returned factor (NaN if exhaustive)
};

// Full pipeline: lift, mixing SDP, randomized rounding with 1-opt, selection
// of the best nonzero candidate. z = 0 is never returned with a positive
// value claim; if every candidate scores zero the zero_gradient flag is set.
BoolQuadSolution solve(const BoolQuadProblem& problem, const SdpSolverConfig& cfg);

}  // namespace bmp
