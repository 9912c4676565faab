#include "betheforge/nested_gl.hpp"

#include <gtest/gtest.h>

namespace bf = betheforge;
using bf::Complex;
using bf::Rational;
using bf::RootSet;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

bf::Chain gl_chain(bf::Model m, std::size_t len, bf::SiteKind k = bf::SiteKind::Fundamental) {
  return bf::Chain(bf::ChainSpec::with_default_inhomogeneities(m, len, k));
}

template <class S>
double exact_gap(const bf::Chain& ch, const bf::Vector<S>& v, const S& x, const S& e) {
  auto hv = ch.monodromy<S>(x).transfer().apply(v);
  return bf::max_abs(bf::difference(hv, bf::scaled(v, e)));
}

const std::vector<Rational> kSamples{Rational(7, 3), Rational(-5, 2), Rational(11, 13)};

}  // namespace

TEST(Gl2, ExchangeRelationsExact) {
  auto ch = gl_chain(bf::Model::GL2, 2);
  auto [a, b] = bf::check_gl2_exchange<Rational>(ch, q(9, 4), {q(-2, 3)});
  EXPECT_EQ(a, 0.0);
  EXPECT_EQ(b, 0.0);
  auto [c, d] = bf::check_gl2_exchange<Rational>(ch, q(9, 4), {q(-2, 3), q(5, 7)});
  EXPECT_EQ(c, 0.0);
  EXPECT_EQ(d, 0.0);
}

TEST(Gl2, BetheVectorIsSymmetric) {
  auto ch = gl_chain(bf::Model::GL2, 3);
  auto a = bf::gl2_vector<Rational>(ch, {q(-3, 5), q(5, 7)});
  auto b = bf::gl2_vector<Rational>(ch, {q(5, 7), q(-3, 5)});
  EXPECT_EQ(bf::max_abs(bf::difference(a, b)), 0.0);
}

TEST(Gl2, EmptyStateIsVacuum) {
  auto ch = gl_chain(bf::Model::GL2, 2);
  auto v = bf::gl2_vector<Rational>(ch, {});
  EXPECT_EQ(bf::max_abs(bf::difference(v, ch.omega<Rational>())), 0.0);
  for (const auto& x : kSamples) {
    auto lam = ch.lambda<Rational>(x);
    EXPECT_EQ(bf::gl2_eigenvalue<Rational>(ch, x, {}), Rational(lam[0] + lam[1]));
    EXPECT_EQ(exact_gap<Rational>(ch, v, x, Rational(lam[0] + lam[1])), 0.0);
  }
}

TEST(Gl2, RationalRootIsExactEigenvector) {
  // z = (0, 1/2): the single-root condition f(u,0) f(u,1/2) = 1 has root u = -1/4.
  auto ch = gl_chain(bf::Model::GL2, 2);
  RootSet<Rational> us{q(-1, 4)};
  auto res = bf::gl2_residuals<Rational>(ch, us);
  ASSERT_EQ(res.size(), 1U);
  EXPECT_EQ(res[0].lhs, res[0].rhs);
  auto v = bf::gl2_vector<Rational>(ch, us);
  for (const auto& x : kSamples) EXPECT_EQ(exact_gap<Rational>(ch, v, x, bf::gl2_eigenvalue<Rational>(ch, x, us)), 0.0);
}

TEST(Gl2, OffShellRootIsNotEigenvector) {
  auto ch = gl_chain(bf::Model::GL2, 2);
  RootSet<Rational> us{q(-1, 3)};
  auto v = bf::gl2_vector<Rational>(ch, us);
  EXPECT_GT(exact_gap<Rational>(ch, v, kSamples[0], bf::gl2_eigenvalue<Rational>(ch, kSamples[0], us)), 1e-4);
}

TEST(Gl3, HattedVacuumAndRtt) {
  auto ch = gl_chain(bf::Model::GL3, 1);
  EXPECT_EQ(bf::check_gl3_vacuum<Rational>(ch, q(7, 3), {q(-1, 2)}), 0.0);
  EXPECT_EQ(bf::check_gl3_vacuum<Rational>(ch, q(7, 3), {q(-1, 2), q(4, 5)}), 0.0);
  EXPECT_EQ(bf::check_gl3_hatted_rtt<Rational>(ch, q(7, 3), q(-9, 4), {q(-1, 2)}), 0.0);
}

TEST(Gl3, SingleFirstLevelRootReducesToGl2) {
  // With no second-level roots the first family coincides with the gl(2) condition.
  auto ch = gl_chain(bf::Model::GL3, 2);
  RootSet<Rational> us{q(-1, 4)};
  auto [fu, fv] = bf::gl3_residuals<Rational>(ch, us, {});
  ASSERT_EQ(fu.size(), 1U);
  EXPECT_TRUE(fv.empty());
  EXPECT_EQ(fu[0].lhs, fu[0].rhs);
  auto v = bf::gl3_vector<Rational>(ch, us, {});
  for (const auto& x : kSamples)
    EXPECT_EQ(exact_gap<Rational>(ch, v, x, bf::gl3_eigenvalue<Rational>(ch, x, us, {})), 0.0);
}

TEST(Gl3, DualChainSecondLevelRootIsExact) {
  auto ch = gl_chain(bf::Model::GL3, 2, bf::SiteKind::Dual);
  RootSet<Rational> vs{q(3, 4)};
  auto [fu, fv] = bf::gl3_residuals<Rational>(ch, {}, vs);
  ASSERT_EQ(fv.size(), 1U);
  EXPECT_EQ(fv[0].lhs, fv[0].rhs);
  auto rep = bf::gl3_check_hatted_eigenvector<Rational>(ch, {}, vs, kSamples);
  EXPECT_EQ(rep.hatted_residual, 0.0);
  EXPECT_EQ(rep.condition_residual, 0.0);
  EXPECT_EQ(rep.eigen_residual, 0.0);
  auto v = bf::gl3_vector<Rational>(ch, {}, vs);
  for (const auto& x : kSamples)
    EXPECT_EQ(exact_gap<Rational>(ch, v, x, bf::gl3_eigenvalue<Rational>(ch, x, {}, vs)), 0.0);
}

TEST(Gl3, OffShellSecondLevelRootFails) {
  auto ch = gl_chain(bf::Model::GL3, 2, bf::SiteKind::Dual);
  auto rep = bf::gl3_check_hatted_eigenvector<Rational>(ch, {}, {q(2, 3)}, kSamples);
  EXPECT_GT(rep.condition_residual, 1e-4);
  EXPECT_GT(rep.eigen_residual, 1e-4);
}

TEST(Gl3, ModelMismatchThrows) {
  auto ch = gl_chain(bf::Model::GL2, 1);
  EXPECT_THROW(bf::gl3_vector<Rational>(ch, {q(1, 3)}, {}), std::invalid_argument);
}
