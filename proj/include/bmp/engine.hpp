#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bmp/boolquad.hpp"
#include "bmp/tensor.hpp"

namespace bmp {

/// Ordered collection of mode subsets; each entry stands for the pair
/// (S, S^c). Duplicates are rejected.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<ModeSubset> subsets);

  const std::vector<ModeSubset>& subsets() const { return subsets_; }
  std::size_t size() const { return subsets_.size(); }
  void validate_for(std::size_t mode_count) const;

  // One singleton subset per mode: {1}, {2}, ..., {L}.
  static Partition all_single_modes(std::size_t mode_count);

 private:
  std::vector<ModeSubset> subsets_;
};

/// Dictionary element: a binary code over the subset extents and a unit
/// feature vector over the complement extents. The realized tensor is
/// refold_S(code * feature').
struct Atom {
  ModeSubset subset;
  std::vector<std::uint8_t> code;
  Eigen::VectorXd feature;

  Tensor materialize(const Dims& dims) const;
};

struct Model {
  Dims dims;
  std::vector<Atom> atoms;
  Eigen::VectorXd coeffs;

  std::size_t atom_count() const { return atoms.size(); }
};

Tensor reconstruct(const Model& model);

/// Least-squares data term: dense 1/2 ||X - W||_F^2, or the same restricted
/// to observed entries when a mask is attached.
class Objective {
 public:
  static Objective dense(Tensor x);
  static Objective masked(Tensor x, MaskTensor mask);

  const Dims& dims() const { return x_.dims(); }
  const Tensor& data() const { return x_; }
  bool is_masked() const { return mask_.has_value(); }
  const MaskTensor* mask() const { return mask_ ? &*mask_ : nullptr; }

  double value(const Tensor& w) const;
  Tensor gradient(const Tensor& w) const;  // dense: W - X; masked: (W - X) .* mask

 private:
  Objective(Tensor x, std::optional<MaskTensor> mask);

  Tensor x_;
  std::optional<MaskTensor> mask_;
};

struct FitConfig {
  int max_atoms = 18;
  double stop_tol = 1e-8;           // relative objective-improvement floor
  double ridge = 1e-10;             // Gram regularizer fallback
  SdpSolverConfig sdp;
  std::uint64_t seed = 0;
  int duplicate_retry_budget = 3;

  void validate() const;
};

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;
  int partition_index = -1;
  double score = 0.0;       // <grad, atom>, always <= 0 for accepted atoms
  double coeff_l1 = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();           // vs supplied truth
  double held_out_rmse = std::numeric_limits<double>::quiet_NaN();  // masked + truth only
  double normal_eq_residual = 0.0;  // relative, NaN when the ridge path was taken
  bool used_ridge = false;
  double elapsed_ms = 0.0;  // cumulative wall time at the end of the iteration
};

struct FitTrace {
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

struct FitResult {
  Model model;
  FitTrace trace;
  bool converged = false;   // stopped before the atom budget was exhausted
};

struct GreedyCandidate {
  Atom atom;
  double score = 0.0;
  int partition_index = -1;
};

// Algorithm: per subset, unfold the gradient into G, maximize z'(GG')z with
// the Boolean quadratic solver, set the feature to -G'z normalized so the
// candidate is a descent direction with score -||G'z||; returns the candidate
// with the minimum score (ties: lowest partition index), or nothing when the
// gradient is zero for every subset.
std::optional<GreedyCandidate> greedy_atom_search(const Tensor& grad,
                                                  const Partition& partition,
                                                  const FitConfig& cfg);

struct WeightSolution {
  Eigen::VectorXd coeffs;
  double normal_eq_residual = 0.0;  // ||M'(x - Mc)||_inf / ||x||_2 on the eps=0 path
  bool used_ridge = false;
};

// Fully-corrective refit: minimize the objective over the span of the active
// atoms. Solves the normal equations with eps = 0 first and falls back to the
// ridge regularizer when the Gram system is singular.
WeightSolution adjust_weights(const Objective& objective, const std::vector<Atom>& atoms,
                              double ridge);

// The full greedy loop: gradient, atom search, fully-corrective refit,
// reconstruction, with early stopping on zero gradient, vanishing relative
// improvement, or a duplicate atom that survives the retry budget.
FitResult fit(const Objective& objective, const Partition& partition, const FitConfig& cfg,
              const Tensor* truth = nullptr);

// Matrix latent feature model: fit() restricted to 2-mode data with the
// single partition {1}.
FitResult matrix_lfm_fit(const Tensor& x, const FitConfig& cfg,
                         const Tensor* truth = nullptr);

}  // namespace bmp
