#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bmp/boolquad.hpp"

using namespace bmp;

namespace {

Eigen::MatrixXd random_gram(int p, int inner, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(p, inner);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < inner; ++j) g(i, j) = gauss(rng);
  Eigen::MatrixXd a = g * g.transpose();
  return 0.5 * (a + a.transpose());
}

double boolean_value(const Eigen::MatrixXd& a, const std::vector<std::uint8_t>& z) {
  Eigen::VectorXd zv(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) zv[i] = z[static_cast<std::size_t>(i)];
  return zv.dot(a * zv);
}

double lifted_value(const Eigen::MatrixXd& c, const std::vector<std::int8_t>& signs) {
  Eigen::VectorXd y(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) y[i] = signs[static_cast<std::size_t>(i)];
  return y.dot(c * y);
}

}  // namespace

TEST_CASE("lift of a 1x1 problem") {
  BoolQuadProblem problem{Eigen::MatrixXd::Constant(1, 1, 2.0)};
  MaxCutLift lifted = lift(problem);
  Eigen::MatrixXd expected(2, 2);
  expected << 2, 2, 2, 2;
  CHECK((lifted.c - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lift of the zero problem") {
  BoolQuadProblem problem{Eigen::MatrixXd::Zero(3, 3)};
  CHECK(lift(problem).c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lift preserves the boolean objective") {
  std::mt19937_64 rng(23);
  BoolQuadProblem problem{random_gram(5, 5, rng)};
  MaxCutLift lifted = lift(problem);
  CHECK(lifted.c(0, 0) == doctest::Approx(problem.a.sum()).epsilon(1e-12));

  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint8_t> z(5);
    std::vector<std::int8_t> signs(6);
    signs[0] = 1;
    for (int i = 0; i < 5; ++i) {
      z[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(coin(rng));
      signs[static_cast<std::size_t>(i + 1)] =
          static_cast<std::int8_t>(2 * z[static_cast<std::size_t>(i)] - 1);
    }
    CHECK(0.25 * lifted_value(lifted.c, signs) ==
          doctest::Approx(boolean_value(problem.a, z)).epsilon(1e-10));
  }
}

TEST_CASE("lift rejects asymmetric input") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 1;
  CHECK_THROWS_AS(BoolQuadProblem{a}, std::invalid_argument);
}

TEST_CASE("mixing solver reaches the analytic optimum for p=1") {
  // Over Y = [[1, y], [y, 1]] the objective 4 + 4y is maximized at y = 1
  // with value 8.
  BoolQuadProblem problem{Eigen::MatrixXd::Constant(1, 1, 2.0)};
  SdpSolverConfig cfg;
  cfg.seed = 5;
  MixingResult res = mixing_solve(lift(problem), cfg);
  CHECK(res.objective() == doctest::Approx(8.0).epsilon(1e-6));
  for (Eigen::Index j = 0; j < res.v.cols(); ++j)
    CHECK(res.v.col(j).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mixing solver on the zero matrix") {
  MaxCutLift zero{Eigen::MatrixXd::Zero(4, 4)};
  SdpSolverConfig cfg;
  MixingResult res = mixing_solve(zero, cfg);
  CHECK(res.objective() == 0.0);
  for (Eigen::Index j = 0; j < res.v.cols(); ++j)
    CHECK(res.v.col(j).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mixing objective dominates the boolean optimum and never decreases") {
  std::mt19937_64 rng(31);
  for (int instance = 0; instance < 8; ++instance) {
    const int p = 2 + static_cast<int>(rng() % 5);  // p <= 6
    BoolQuadProblem problem{random_gram(p, p, rng)};
    MaxCutLift lifted = lift(problem);
    SdpSolverConfig cfg;
    cfg.seed = rng();
    MixingResult res = mixing_solve(lifted, cfg);

    for (std::size_t s = 1; s < res.objective_history.size(); ++s)
      CHECK(res.objective_history[s] >=
            res.objective_history[s - 1] - 1e-9 * (1.0 + std::abs(res.objective_history[s])));

    // Enumerate all sign assignments of [y0; y].
    double best = 0.0;
    const int n = p + 1;
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      std::vector<std::int8_t> signs(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        signs[static_cast<std::size_t>(i)] = (bits >> i) & 1u ? 1 : -1;
      best = std::max(best, lifted_value(lifted.c, signs));
    }
    CHECK(res.objective() >= best - 1e-6 * (1.0 + std::abs(best)));
  }
}

TEST_CASE("rounding the p=1 problem") {
  BoolQuadProblem problem{Eigen::MatrixXd::Constant(1, 1, 2.0)};
  MaxCutLift lifted = lift(problem);
  SdpSolverConfig cfg;
  cfg.seed = 9;
  MixingResult res = mixing_solve(lifted, cfg);
  RoundedCut cut = round(res.v, lifted, cfg);
  CHECK(static_cast<int>(cut.signs[0]) * static_cast<int>(cut.signs[1]) == 1);
  CHECK(0.25 * cut.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(boolean_value(problem.a, to_binary(cut.signs)) == doctest::Approx(2.0));
}

TEST_CASE("identical columns round to equal signs") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
  MaxCutLift lifted = lift(BoolQuadProblem{a});
  Eigen::MatrixXd v(3, 3);
  v.setZero();
  v.row(0).setOnes();  // all columns equal e1
  SdpSolverConfig cfg;
  cfg.one_opt = false;
  cfg.rounding_trials = 10;
  RoundedCut cut = round(v, lifted, cfg);
  CHECK(cut.signs[0] == cut.signs[1]);
  CHECK(cut.signs[1] == cut.signs[2]);
  CHECK(cut.value == doctest::Approx(lifted.c.sum()).epsilon(1e-12));
}

TEST_CASE("one-opt leaves no improving flip") {
  std::mt19937_64 rng(67);
  BoolQuadProblem problem{random_gram(9, 6, rng)};
  MaxCutLift lifted = lift(problem);
  SdpSolverConfig cfg;
  cfg.seed = 21;
  MixingResult res = mixing_solve(lifted, cfg);
  RoundedCut cut = round(res.v, lifted, cfg);
  for (std::size_t i = 0; i < cut.signs.size(); ++i) {
    auto flipped = cut.signs;
    flipped[i] = static_cast<std::int8_t>(-flipped[i]);
    CHECK(lifted_value(lifted.c, flipped) <= cut.value + 1e-9);
  }
}

TEST_CASE("to_binary") {
  CHECK(to_binary({1, 1, -1}) == std::vector<std::uint8_t>{1, 0});
  CHECK(to_binary({-1, -1, 1}) == std::vector<std::uint8_t>{1, 0});
  CHECK_THROWS_AS(to_binary({1, 0, 1}), std::invalid_argument);

  std::mt19937_64 rng(41);
  BoolQuadProblem problem{random_gram(6, 4, rng)};
  MaxCutLift lifted = lift(problem);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::int8_t> signs(7);
    for (auto& s : signs) s = static_cast<std::int8_t>(coin(rng) ? 1 : -1);
    CHECK(boolean_value(problem.a, to_binary(signs)) ==
          doctest::Approx(0.25 * lifted_value(lifted.c, signs)).epsilon(1e-10));
  }
}

TEST_CASE("brute force on small frozen instances") {
  BruteForceResult id3 = brute_force(BoolQuadProblem{Eigen::MatrixXd::Identity(3, 3)});
  CHECK(id3.z == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(id3.value == doctest::Approx(3.0));

  Eigen::MatrixXd a(2, 2);
  a << 1, -1, -1, 1;
  BruteForceResult tie = brute_force(BoolQuadProblem{a});
  CHECK(tie.value == doctest::Approx(1.0));
  CHECK(tie.z == std::vector<std::uint8_t>{1, 0});  // encoding tie-break

  CHECK_THROWS_AS(brute_force(BoolQuadProblem{Eigen::MatrixXd::Identity(21, 21)}),
                  std::invalid_argument);
}

TEST_CASE("brute force agrees with direct evaluation") {
  std::mt19937_64 rng(77);
  BoolQuadProblem problem{random_gram(10, 7, rng)};
  BruteForceResult best = brute_force(problem);

  // Independent re-evaluation: O(2^p p^2) from scratch.
  double expected = 0.0;
  std::vector<std::uint8_t> arg(10, 0);
  for (unsigned bits = 0; bits < (1u << 10); ++bits) {
    std::vector<std::uint8_t> z(10);
    for (int i = 0; i < 10; ++i) z[static_cast<std::size_t>(i)] = (bits >> i) & 1u;
    const double v = boolean_value(problem.a, z);
    if (v > expected) {
      expected = v;
      arg = z;
    }
  }
  CHECK(best.value == doctest::Approx(expected).epsilon(1e-10));
  CHECK(best.z == arg);
}

TEST_CASE("solve handles the zero matrix") {
  SdpSolverConfig cfg;
  BoolQuadSolution sol = solve(BoolQuadProblem{Eigen::MatrixXd::Zero(4, 4)}, cfg);
  CHECK(sol.zero_gradient);
  CHECK(sol.value == 0.0);
  CHECK(sol.z == std::vector<std::uint8_t>(4, 0));
}

TEST_CASE("solve finds the all-ones optimum of the identity") {
  SdpSolverConfig cfg;
  cfg.seed = 3;
  for (int p : {2, 5, 9}) {
    BoolQuadSolution sol = solve(BoolQuadProblem{Eigen::MatrixXd::Identity(p, p)}, cfg);
    CHECK(!sol.zero_gradient);
    CHECK(sol.value == doctest::Approx(static_cast<double>(p)).epsilon(1e-9));
  }
}

TEST_CASE("solve stays within the approximation bound of the oracle") {
  std::mt19937_64 rng(101);
  for (int instance = 0; instance < 10; ++instance) {
    const int p = 12;
    BoolQuadProblem problem{random_gram(p, 8, rng)};
    SdpSolverConfig cfg;
    cfg.seed = rng();
    BoolQuadSolution sol = solve(problem, cfg);
    BruteForceResult exact = brute_force(problem);
    REQUIRE(exact.value > 0.0);
    CHECK(sol.value >= 0.6 * exact.value);
    CHECK(sol.value <= exact.value + 1e-9 * exact.value);
    // Feasibility sandwich against the SDP relaxation.
    CHECK(sol.value <= 0.25 * sol.sdp_objective + 1e-6 * (1.0 + std::abs(sol.sdp_objective)));
  }
}

TEST_CASE("solve is deterministic for a fixed seed") {
  std::mt19937_64 rng(55);
  BoolQuadProblem problem{random_gram(8, 5, rng)};
  SdpSolverConfig cfg;
  cfg.seed = 1234;
  BoolQuadSolution a = solve(problem, cfg);
  BoolQuadSolution b = solve(problem, cfg);
  CHECK(a.z == b.z);
  CHECK(a.value == b.value);

  cfg.exhaustive = true;
  BoolQuadSolution exact = solve(problem, cfg);
  CHECK(exact.value >= a.value - 1e-12);
}

TEST_CASE("solver config validation") {
  SdpSolverConfig cfg;
  cfg.rank = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rank = 0;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tol = 1e-6;
  cfg.rounding_trials = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
