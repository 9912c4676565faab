#include "betheforge/chain.hpp"

#include <gtest/gtest.h>

namespace bf = betheforge;
using bf::Complex;
using bf::Rational;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

Rational prod_inv_f(const bf::ChainSpec& spec, const Rational& x, bool site_first) {
  Rational p(1);
  for (const auto& z : spec.z()) p *= site_first ? Rational(1 / bf::f(z, x)) : Rational(1 / bf::f(x, z));
  return p;
}

}  // namespace

TEST(ChainSpec, JsonRoundTrip) {
  auto j = nlohmann::json::parse(R"({"model": "sp4", "length": 2, "inhomogeneities": ["0", "1/2"]})");
  auto spec = bf::ChainSpec::from_json(j);
  EXPECT_EQ(spec.model(), bf::Model::SP4);
  EXPECT_EQ(spec.length(), 2U);
  EXPECT_EQ(spec.z()[1], q(1, 2));
  EXPECT_EQ(spec.space_dim(), 16U);
  EXPECT_EQ(bf::ChainSpec::from_json(spec.to_json()).to_json(), spec.to_json());
}

TEST(ChainSpec, DefaultInhomogeneities) {
  auto spec = bf::ChainSpec::with_default_inhomogeneities(bf::Model::GL3, 3);
  EXPECT_EQ(spec.z()[2], q(2, 3));
  auto j = nlohmann::json::parse(R"({"model": "gl2", "length": 2})");
  EXPECT_EQ(bf::ChainSpec::from_json(j).z()[1], q(1, 2));
}

TEST(ChainSpec, RejectsBadInput) {
  EXPECT_THROW(bf::ChainSpec(bf::Model::SP4, {q(0), q(3)}), std::invalid_argument);
  EXPECT_THROW(bf::ChainSpec(bf::Model::GL2, {q(0), q(1)}), std::invalid_argument);
  EXPECT_THROW(bf::ChainSpec(bf::Model::GL2, {}), std::invalid_argument);
  EXPECT_THROW(bf::ChainSpec(bf::Model::SP4, {q(0)}, bf::SiteKind::Dual), std::invalid_argument);
  auto j = nlohmann::json::parse(R"({"model": "gl2", "length": 3, "inhomogeneities": ["0", "1/2"]})");
  EXPECT_THROW(bf::ChainSpec::from_json(j), std::invalid_argument);
  EXPECT_THROW(bf::parse_model("so5"), std::invalid_argument);
}

TEST(ChainSpec, CapacityBound) {
  EXPECT_NO_THROW(bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, 5));
  EXPECT_THROW(bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, 6), bf::CapacityError);
  auto big = bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, 5);
  EXPECT_THROW(bf::eigenvalues(big, Complex(0.3, 0.1)), bf::CapacityError);
}

TEST(Monodromy, RttAndCommutingExact) {
  bf::SampleSource src(4);
  for (auto m : {bf::Model::GL2, bf::Model::GL3, bf::Model::SP4})
    for (std::size_t len : {1, 2}) {
      auto spec = bf::ChainSpec::with_default_inhomogeneities(m, len);
      auto p = bf::distinct_rationals(src, 2, {0, 1, -1, 3, -3}, spec.z());
      EXPECT_EQ(bf::check_rtt<Rational>(spec, p[0], p[1]), 0.0);
      EXPECT_EQ(bf::check_commuting<Rational>(spec, p[0], p[1]), 0.0);
    }
}

TEST(Monodromy, RttHoldsAtPoleOfAuxiliaryR) {
  auto spec = bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, 2);
  EXPECT_EQ(bf::check_rtt<Rational>(spec, q(4), q(7)), 0.0);
}

TEST(Monodromy, DualSitesSatisfyRtt) {
  auto spec = bf::ChainSpec::with_default_inhomogeneities(bf::Model::GL3, 2, bf::SiteKind::Dual);
  EXPECT_EQ(bf::check_rtt<Rational>(spec, q(7, 3), q(-5, 2)), 0.0);
  EXPECT_EQ(bf::check_commuting<Rational>(spec, q(7, 3), q(-5, 2)), 0.0);
}

TEST(Monodromy, CommutatorDetectsAPerturbation) {
  // Negative control: H(x) against the transfer matrix of a different chain.
  auto a = bf::ChainSpec(bf::Model::GL2, {q(0), q(1, 2), q(1, 5)});
  auto b = bf::ChainSpec(bf::Model::GL2, {q(0), q(1, 3), q(2, 7)});
  auto ha = bf::transfer<Rational>(a, q(5, 2));
  auto hb = bf::transfer<Rational>(b, q(-7, 3));
  EXPECT_GT((ha * hb - hb * ha).max_abs(), 1e-6);
}

TEST(Vacuum, GlFundamentalWeights) {
  for (auto m : {bf::Model::GL2, bf::Model::GL3}) {
    bf::Chain ch(bf::ChainSpec::with_default_inhomogeneities(m, 2));
    EXPECT_EQ(ch.vacuum.convention, bf::Triangularity::Lower);
    EXPECT_EQ(ch.vacuum.local_slot, 0U);
    Rational x = q(13, 5);
    auto lam = ch.lambda<Rational>(x);
    EXPECT_EQ(lam[0], q(1));
    for (std::size_t i = 1; i < lam.size(); ++i) EXPECT_EQ(lam[i], prod_inv_f(ch.spec, x, false));
  }
}

TEST(Vacuum, GlDualWeights) {
  bf::Chain ch(bf::ChainSpec::with_default_inhomogeneities(bf::Model::GL3, 2, bf::SiteKind::Dual));
  EXPECT_EQ(ch.vacuum.local_slot, 2U);
  Rational x = q(-11, 4);
  auto lam = ch.lambda<Rational>(x);
  EXPECT_EQ(lam[2], q(1));
  EXPECT_EQ(lam[0], prod_inv_f(ch.spec, x, true));
  EXPECT_EQ(lam[1], prod_inv_f(ch.spec, x, true));
}

TEST(Vacuum, Sp4Weights) {
  bf::Chain ch(bf::ChainSpec::with_default_inhomogeneities(bf::Model::SP4, 2));
  EXPECT_EQ(ch.vacuum.convention, bf::Triangularity::Upper);
  EXPECT_EQ(ch.vacuum.local_slot, bf::sp4_slot(2));
  Rational x = q(17, 7);
  auto lam = ch.lambda<Rational>(x);
  Rational m2(1);
  for (const auto& z : ch.spec.z()) m2 *= Rational((1 - bf::h(x, z)) / bf::f(x, z));
  EXPECT_EQ(lam[bf::sp4_slot(2)], q(1));
  EXPECT_EQ(lam[bf::sp4_slot(1)], prod_inv_f(ch.spec, x, false));
  EXPECT_EQ(lam[bf::sp4_slot(-1)], prod_inv_f(ch.spec, x, false));
  EXPECT_EQ(lam[bf::sp4_slot(-2)], m2);
}

TEST(Spectrum, SingleSiteTransferIsScalar) {
  // One site: H(x) = tr_0 R(x,z) is a multiple of the identity.
  auto gl2 = bf::ChainSpec(bf::Model::GL2, {q(0)});
  Complex x(0.7, 0.4);
  Complex gl2_value = (2.0 * x + 1.0) / (x + 1.0);
  for (const auto& e : bf::eigenvalues(gl2, x)) EXPECT_LT(std::abs(e - gl2_value), 1e-12);
  auto sp4 = bf::ChainSpec(bf::Model::SP4, {q(0)});
  Complex sp4_value = (x / (x + 1.0)) * (4.0 + 1.0 / x - 1.0 / (x + 3.0));
  auto lines = bf::spectrum(sp4, x);
  ASSERT_EQ(lines.size(), 1U);
  EXPECT_EQ(lines[0].multiplicity, 4);
  EXPECT_LT(std::abs(lines[0].value - sp4_value), 1e-12);
}

TEST(Spectrum, GapToKnownEigenvalue) {
  auto spec = bf::ChainSpec(bf::Model::GL2, {q(0), q(1, 2)});
  Complex x(0.3, -0.2);
  auto ev = bf::eigenvalues(spec, x);
  EXPECT_LT(bf::spectrum_gap(spec, x, ev[1]), 1e-14);
  EXPECT_GT(bf::spectrum_gap(spec, x, ev[1] + Complex(0.5, 0.0)), 1e-3);
}
