#include "betheforge/solver.hpp"

#include <gtest/gtest.h>

namespace bf = betheforge;
using bf::Complex;

namespace {

bf::Chain chain(bf::Model m, std::size_t len, bf::SiteKind k = bf::SiteKind::Fundamental) {
  return bf::Chain(bf::ChainSpec::with_default_inhomogeneities(m, len, k));
}

bf::SolveResult one_start(const bf::ConditionFn& fn, Complex start, bf::SolveOptions opt = {}) {
  auto res = bf::solve_conditions(fn, {1, 0, 0}, {bf::BetheRoots{{start}, {}, {}}}, opt);
  EXPECT_EQ(res.size(), 1U);
  return res.front();
}

}  // namespace

TEST(Solver, Gl2RootMatchesRationalValue) {
  bf::SolveProblem prob{chain(bf::Model::GL2, 2), {1, 0, 0}, {}, {}};
  auto res = bf::solve(prob);
  ASSERT_FALSE(res.empty());
  ASSERT_TRUE(res.front().converged);
  EXPECT_LT(std::abs(res.front().roots.u[0] - Complex(-0.25, 0.0)), 1e-10);
  EXPECT_LE(res.front().residual, prob.options.tol);
  auto rep = bf::verify_solution(prob.chain, res.front(), bf::default_samples());
  EXPECT_EQ(rep.verdict, "eigenvector");
  EXPECT_LE(rep.max_eigen_residual, 1e-8);
  EXPECT_GT(rep.min_overlap, 1 - 1e-8);
}

TEST(Solver, DeterministicForFixedSeed) {
  bf::SolveProblem prob{chain(bf::Model::GL2, 3), {2, 0, 0}, {}, {}};
  prob.options.starts = 8;
  auto a = bf::solve(prob);
  auto b = bf::solve(prob);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(bf::to_json(a[i]), bf::to_json(b[i]));
}

TEST(Solver, DeduplicatesPermutedRoots) {
  bf::SolveProblem prob{chain(bf::Model::GL2, 4), {2, 0, 0}, {}, {}};
  prob.options.starts = 20;
  auto res = bf::solve(prob);
  std::size_t converged = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i].converged) continue;
    ++converged;
    for (std::size_t j = 0; j < i; ++j) {
      if (res[j].converged) {
        EXPECT_FALSE(bf::detail::same_roots(res[i].roots, res[j].roots, 1e-6));
      }
    }
  }
  EXPECT_GE(converged, 1U);
  for (std::size_t i = 1; i < res.size(); ++i) {
    if (res[i].converged) {
      EXPECT_TRUE(res[i - 1].converged);
    }
  }
}

TEST(Solver, EmptyConfigurationIsTrivial) {
  bf::SolveProblem prob{chain(bf::Model::SP4, 1), {0, 0, 0}, {}, {}};
  auto res = bf::solve(prob);
  ASSERT_EQ(res.size(), 1U);
  EXPECT_TRUE(res[0].converged);
  EXPECT_EQ(res[0].roots.size(), 0U);
  EXPECT_EQ(bf::verify_solution(prob.chain, res[0], bf::default_samples()).verdict, "eigenvector");
}

TEST(Solver, RejectsCountsOutsideModel) {
  EXPECT_THROW(bf::solve({chain(bf::Model::GL2, 2), {1, 1, 0}, {}, {}}), std::invalid_argument);
  EXPECT_THROW(bf::solve({chain(bf::Model::GL3, 2), {1, 1, 1}, {}, {}}), std::invalid_argument);
}

TEST(Solver, DualGl3SecondLevelRoot) {
  bf::SolveProblem prob{chain(bf::Model::GL3, 2, bf::SiteKind::Dual), {0, 1, 0}, {}, {}};
  auto res = bf::solve(prob);
  ASSERT_TRUE(!res.empty() && res.front().converged);
  EXPECT_LT(std::abs(res.front().roots.v[0] - Complex(0.75, 0.0)), 1e-10);
  EXPECT_EQ(bf::verify_solution(prob.chain, res.front(), bf::default_samples()).verdict, "eigenvector");
}

TEST(Solver, Sp4SingletFromNearbyGuess) {
  bf::SolveProblem prob{chain(bf::Model::SP4, 2), {1, 1, 1},
                        {bf::BetheRoots{{Complex(-1.26, 0.01)}, {Complex(-0.77, 0.0)}, {Complex(-1.73, 0.01)}}}, {}};
  prob.options.starts = 1;
  auto res = bf::solve(prob);
  ASSERT_TRUE(!res.empty() && res.front().converged);
  EXPECT_LT(std::abs(res.front().roots.u[0] - Complex(-1.25, 0.0)), 1e-6);
  auto rep = bf::verify_solution(prob.chain, res.front(), bf::default_samples());
  EXPECT_EQ(rep.verdict, "eigenvector");
  EXPECT_LE(rep.max_eigen_residual, 1e-8);
}

TEST(Solver, PerturbedRootIsRejectedByVerification) {
  auto ch = chain(bf::Model::GL2, 2);
  bf::SolveResult r;
  r.roots.u = {Complex(-0.25, 0.0) * (1 + 1e-3)};
  r.converged = true;
  auto rep = bf::verify_solution(ch, r, bf::default_samples());
  EXPECT_EQ(rep.verdict, "not_eigenvector");
  EXPECT_GT(rep.max_eigen_residual, 1e-4);
}

TEST(Solver, PoleSamplesAreSkipped) {
  auto ch = chain(bf::Model::GL2, 2);
  bf::SolveResult r;
  r.roots.u = {Complex(-0.25, 0.0)};
  r.converged = true;
  auto rep = bf::verify_solution(ch, r, {Complex(-1.0, 0.0), Complex(0.31, 0.47)});
  ASSERT_EQ(rep.samples.size(), 2U);
  EXPECT_TRUE(rep.samples[0].skipped);
  EXPECT_FALSE(rep.samples[1].skipped);
  EXPECT_EQ(rep.verdict, "eigenvector");
}

TEST(Solver, UnconvergedResultIsNotVerified) {
  bf::SolveResult r;
  r.roots.u = {Complex(0.1, 0.0)};
  EXPECT_EQ(bf::verify_solution(chain(bf::Model::GL2, 2), r, bf::default_samples()).verdict, "not_converged");
}

TEST(Solver, DegenerateRootIsRejected) {
  // Both sides vanish at z = 1.
  bf::ConditionFn fn = [](const std::vector<Complex>& z) {
    return std::vector<bf::Residual<Complex>>{bf::make_residual<Complex>(z[0] - 1.0, 2.0 * (z[0] - 1.0))};
  };
  auto r = one_start(fn, Complex(1.2, 0.1));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.status, "degenerate");
}

TEST(Solver, RegularRootConverges) {
  bf::ConditionFn fn = [](const std::vector<Complex>& z) {
    return std::vector<bf::Residual<Complex>>{bf::make_residual<Complex>(z[0] * z[0], Complex(2.0, 0.0))};
  };
  auto r = one_start(fn, Complex(1.2, 0.1));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.status, "converged");
  EXPECT_LT(std::abs(r.roots.u[0] - std::sqrt(2.0)), 1e-10);
}

TEST(Solver, EscapeToInfinityIsRejected) {
  // The only zero of the relative residual is at infinity.
  bf::ConditionFn fn = [](const std::vector<Complex>& z) {
    return std::vector<bf::Residual<Complex>>{bf::make_residual<Complex>(z[0], z[0] + 1.0)};
  };
  auto r = one_start(fn, Complex(1.5, 0.3));
  EXPECT_FALSE(r.converged);
  EXPECT_NE(r.status, "converged");
}

TEST(Solver, PoleEverywhereReportsPole) {
  bf::ConditionFn fn = [](const std::vector<Complex>&) -> std::vector<bf::Residual<Complex>> {
    throw bf::PoleError("always");
  };
  auto r = one_start(fn, Complex(0.5, 0.5));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.status, "pole");
}

TEST(Solver, RandomStartsAreSeeded) {
  auto spec = bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, 2);
  auto a = bf::random_starts(spec, {1, 1, 1}, 4, 11);
  auto b = bf::random_starts(spec, {1, 1, 1}, 4, 11);
  auto c = bf::random_starts(spec, {1, 1, 1}, 4, 12);
  ASSERT_EQ(a.size(), 4U);
  EXPECT_EQ(a[2].w[0], b[2].w[0]);
  EXPECT_NE(a[2].w[0], c[2].w[0]);
}

TEST(Solver, JsonShape) {
  bf::SolveProblem prob{chain(bf::Model::GL2, 2), {1, 0, 0}, {}, {}};
  prob.options.starts = 2;
  auto j = bf::to_json(bf::solve(prob).front());
  for (const char* key : {"roots", "residual", "iterations", "converged", "condition", "status"})
    EXPECT_TRUE(j.contains(key)) << key;
}
