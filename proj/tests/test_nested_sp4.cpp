#include "betheforge/nested_sp4.hpp"

#include <gtest/gtest.h>

namespace bf = betheforge;
using bf::Complex;
using bf::Rational;
using bf::RootSet;
using bf::Sign;
using Config = bf::Sp4Config<Rational>;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

bf::Chain sp4_chain(std::size_t len) {
  return bf::Chain(bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, len));
}

const std::vector<Rational> kSamples{Rational(7, 3), Rational(-5, 3), Rational(11, 13)};

class Sp4Single : public ::testing::Test {
 protected:
  bf::Chain ch = sp4_chain(1);
  std::vector<bf::Vector<Rational>> w0 = bf::w0_spanning_set<Rational>(ch);
};

}  // namespace

TEST_F(Sp4Single, BlockAlgebraOnW0) {
  EXPECT_FALSE(w0.empty());
  EXPECT_EQ(bf::check_w0_annihilation<Rational>(ch, q(9, 4), w0), 0.0);
  EXPECT_EQ(bf::check_block_rtt<Rational>(ch, q(9, 4), q(-4, 7), w0), 0.0);
  EXPECT_EQ(bf::check_tilde_rtt<Rational>(ch, q(9, 4), q(-4, 7), w0), 0.0);
  EXPECT_EQ(bf::check_tilde_commutation<Rational>(ch, q(9, 4), q(-4, 7), w0), 0.0);
}

TEST_F(Sp4Single, BOperatorExchange) {
  auto [generic, coincident] = bf::check_b_exchange<Rational>(ch, q(9, 4), q(-4, 7), w0);
  EXPECT_EQ(generic, 0.0);
  EXPECT_EQ(coincident, 0.0);
}

TEST_F(Sp4Single, BOperatorAction) {
  for (Sign e : {Sign::Plus, Sign::Minus}) {
    EXPECT_EQ(bf::check_b_action<Rational>(ch, e, q(9, 4), {q(-4, 7)}, w0), 0.0);
    EXPECT_EQ(bf::check_b_action<Rational>(ch, e, q(9, 4), {q(-4, 7), q(5, 3)}, w0), 0.0);
  }
}

TEST_F(Sp4Single, HattedRtt) {
  for (Sign a : {Sign::Plus, Sign::Minus})
    for (Sign b : {Sign::Plus, Sign::Minus})
      EXPECT_EQ(bf::check_hatted_rtt<Rational>(ch, a, b, q(9, 4), q(-4, 7), {q(5, 3)}, w0), 0.0);
}

TEST_F(Sp4Single, ReducedVacuum) {
  for (const RootSet<Rational>& us : {RootSet<Rational>{q(5, 3)}, RootSet<Rational>{q(5, 3), q(-2, 7)}}) {
    EXPECT_EQ(bf::check_reduced_vacuum<Rational>(ch, q(9, 4), us), 0.0);
    auto v = bf::reduced_vacuum<Rational>(ch, q(9, 4), us);
    EXPECT_EQ(v.size(), (std::size_t{1} << (2 * us.size())) * 4);
  }
}

TEST_F(Sp4Single, TildeExchangeAndAction) {
  RootSet<Rational> us{q(5, 3)};
  EXPECT_EQ(bf::check_tilde_exchange<Rational>(ch, us, q(9, 4), {q(-4, 7)}, {q(1, 5)}, w0), 0.0);
  EXPECT_EQ(bf::check_tilde_action<Rational>(ch, us, q(9, 4), {q(-4, 7)}, {q(1, 5)}), 0.0);
}

TEST(Sp4, AuxiliaryIdentities) {
  for (const auto& [name, r] : bf::check_auxiliary_identities<Rational>(q(9, 4), q(-4, 7), q(5, 3), q(1, 5)))
    EXPECT_EQ(r, 0.0) << name;
}

TEST(Sp4, EmptyPairingIsIdentity) {
  auto ch = sp4_chain(2);
  auto phi = bf::sp4_phi<Rational>(ch, Config{});
  EXPECT_EQ(bf::max_abs(bf::difference(phi, ch.omega<Rational>())), 0.0);
  EXPECT_EQ(bf::max_abs(bf::difference(bf::sp4_pair<Rational>(ch, {}, phi), phi)), 0.0);
}

TEST(Sp4, ReducedWeightsOracle) {
  auto ch = sp4_chain(2);
  Rational x = q(9, 4);
  auto l = bf::sp4_lambda<Rational>(ch, x);
  auto m0 = bf::sp4_mu<Rational>(ch, x, {});
  EXPECT_EQ(m0.l1, l.l1);
  EXPECT_EQ(m0.l2, l.l2);
  EXPECT_EQ(m0.lm1, l.lm1);
  EXPECT_EQ(m0.lm2, l.lm2);
  RootSet<Rational> us{q(5, 3), q(-2, 7)};
  auto m = bf::sp4_mu<Rational>(ch, x, us);
  EXPECT_EQ(Rational(m.l2 * bf::F_left(us, x)), l.l2);
  EXPECT_EQ(Rational(m.lm2 * bf::F_right(x, us)), l.lm2);
}

TEST(Sp4, VacuumEigenvalue) {
  auto ch = sp4_chain(2);
  auto om = ch.omega<Rational>();
  for (const auto& x : kSamples) {
    auto l = bf::sp4_lambda<Rational>(ch, x);
    Rational e = l.l1 + l.l2 + l.lm1 + l.lm2;
    EXPECT_EQ(bf::sp4_eigenvalue<Rational>(ch, x, Config{}), e);
    auto h = ch.monodromy<Rational>(x).transfer().apply(om);
    EXPECT_EQ(bf::max_abs(bf::difference(h, bf::scaled(om, e))), 0.0);
  }
}

TEST(Sp4, ReducedVacuumIsHattedEigenvectorOffShell) {
  // With no inner roots Φ is the reduced vacuum, an eigenvector for any u.
  auto ch = sp4_chain(2);
  Config cfg{{q(5, 3)}, {}, {}};
  EXPECT_EQ(bf::sp4_hatted_eigen_residual<Rational>(ch, cfg, kSamples), 0.0);
  EXPECT_EQ(bf::sp4_hatted_eigen_residual<Rational>(ch, cfg, kSamples, true), 0.0);
}

TEST(Sp4, EigenvalueDecomposition) {
  auto ch = sp4_chain(2);
  Config cfg{{q(5, 3), q(-2, 7)}, {q(1, 5)}, {q(-9, 2)}};
  for (const auto& x : kSamples) {
    auto [ep, em] = bf::sp4_hatted_eigenvalues<Rational>(ch, x, cfg);
    Rational e = bf::F_left(cfg.u, x) * ep + bf::F_right(x, cfg.u) * em;
    EXPECT_EQ(e, bf::sp4_eigenvalue<Rational>(ch, x, cfg));
  }
  auto outer = bf::sp4_outer_residuals<Rational>(ch, cfg);
  auto fam = bf::sp4_residuals<Rational>(ch, cfg).u;
  ASSERT_EQ(outer.size(), fam.size());
  for (std::size_t k = 0; k < fam.size(); ++k) {
    EXPECT_EQ(outer[k].lhs, Rational(2 * fam[k].lhs));
    EXPECT_EQ(outer[k].rhs, Rational(2 * fam[k].rhs));
  }
}

TEST(Sp4, HattedEigenvalueHasPoleAtRoot) {
  auto ch = sp4_chain(1);
  EXPECT_THROW(bf::sp4_hatted_eigenvalues<Rational>(ch, q(5, 3), Config{{q(5, 3), q(-2, 7)}, {}, {}}), bf::PoleError);
}

TEST(Sp4, BetheVectorSymmetricInInnerRoots) {
  auto ch = sp4_chain(2);
  auto order = bf::natural_order<Rational>({q(5, 3)});
  auto a = bf::sp4_pair<Rational>(ch, order, bf::sp4_phi<Rational>(ch, Config{{q(5, 3)}, {q(1, 5), q(-9, 2)}, {}}));
  auto b = bf::sp4_pair<Rational>(ch, order, bf::sp4_phi<Rational>(ch, Config{{q(5, 3)}, {q(-9, 2), q(1, 5)}, {}}));
  EXPECT_EQ(bf::max_abs(bf::difference(a, b)), 0.0);
}

TEST(Sp4, LoneRootConditionIsIdentity) {
  // λ1 = λ-1 on the fundamental chain, so a lone outer root is on-shell for every u.
  for (std::size_t len : {1, 2}) {
    auto ch = sp4_chain(len);
    for (const auto& u : kSamples) {
      auto r = bf::sp4_residuals<Rational>(ch, Config{{u}, {}, {}});
      EXPECT_EQ(r.u[0].lhs, r.u[0].rhs);
    }
  }
}

TEST(Sp4, LoneRootVectorVanishes) {
  for (std::size_t len : {1, 2})
    EXPECT_THROW(bf::sp4_bethe_vector<Rational>(sp4_chain(len), Config{{q(5, 3)}, {}, {}}), bf::ZeroVectorError);
}

TEST(Sp4, OffShellVectorIsNotEigenvector) {
  auto ch = sp4_chain(2);
  Config cfg{{q(5, 3)}, {q(1, 5)}, {q(-9, 2)}};
  EXPECT_GT(bf::sp4_residuals<Rational>(ch, cfg).max_relative(), 1e-4);
  auto psi = bf::sp4_bethe_vector<Rational>(ch, cfg);
  auto x = kSamples[0];
  auto h = ch.monodromy<Rational>(x).transfer().apply(psi);
  EXPECT_GT(bf::eigen_residual<Rational>(h, psi, bf::sp4_eigenvalue<Rational>(ch, x, cfg)), 1e-4);
}

TEST(Sp4, WrongModelThrows) {
  bf::Chain ch(bf::ChainSpec::with_default_inhomogeneities(bf::Model::GL2, 1));
  EXPECT_THROW(bf::sp4_bethe_vector<Rational>(ch, Config{{q(5, 3)}, {}, {}}), std::invalid_argument);
}

TEST(Sp4, OuterRootOrderIsReportedNotAsserted) {
  auto ch = sp4_chain(2);
  Config a{{q(5, 3), q(-2, 7)}, {q(1, 5)}, {q(-9, 2)}};
  Config b{{q(-2, 7), q(5, 3)}, {q(1, 5)}, {q(-9, 2)}};
  auto pa = bf::sp4_pair<Rational>(ch, bf::natural_order(a.u), bf::sp4_phi<Rational>(ch, a));
  auto pb = bf::sp4_pair<Rational>(ch, bf::natural_order(b.u), bf::sp4_phi<Rational>(ch, b));
  ASSERT_GT(bf::max_abs(pa), 0.0);
  double diff = bf::max_abs(bf::difference(pa, pb));
  RecordProperty("outer_swap_difference", std::to_string(diff));
  std::cout << "outer root swap difference: " << diff << "\n";
}
