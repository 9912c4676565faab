#include "betheforge/scalar.hpp"

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

}  // namespace

TEST(ScalarFunctions, ValuesAtSimplePoints) {
  EXPECT_EQ(bf::f(q(3), q(1)), q(3, 2));
  EXPECT_EQ(bf::g(q(3), q(1)), q(1, 2));
  EXPECT_EQ(bf::h(q(3), q(1)), q(1, 5));
  EXPECT_EQ(bf::k(q(3), q(1)), q(1));
  EXPECT_EQ(bf::f_inv(q(3), q(1)), q(2, 3));
  EXPECT_EQ(bf::f_inv(q(2), q(2)), q(0));
}

TEST(ScalarFunctions, FIsOnePlusG) {
  bf::SampleSource src(11);
  for (int t = 0; t < 50; ++t) {
    auto p = bf::distinct_rationals(src, 2);
    EXPECT_EQ(bf::f(p[0], p[1]), Rational(1 + bf::g(p[0], p[1])));
  }
}

TEST(ScalarFunctions, PolesRaise) {
  EXPECT_THROW(bf::f(q(1), q(1)), bf::PoleError);
  EXPECT_THROW(bf::g(q(1), q(1)), bf::PoleError);
  EXPECT_THROW(bf::h(q(1), q(4)), bf::PoleError);
  EXPECT_THROW(bf::k(q(2), q(1)), bf::PoleError);
  EXPECT_THROW(bf::f_inv(q(0), q(1)), bf::PoleError);
  EXPECT_THROW(bf::f(Complex(1.0, 0.0), Complex(1.0, 1e-14)), bf::PoleError);
}

TEST(Rationals, StayCanonical) {
  Rational a = q(6, 4) + q(1, 6);
  EXPECT_EQ(a.get_num(), 5);
  EXPECT_EQ(a.get_den(), 3);
  EXPECT_GT(q(3, -9).get_den(), 0);
}

TEST(RootSets, RemovalAndProducts) {
  bf::RootSet<Rational> us{q(1), q(5, 2), q(-3)};
  auto rest = bf::without(us, 1);
  ASSERT_EQ(rest.size(), 2U);
  EXPECT_EQ(rest[0], q(1));
  EXPECT_EQ(rest[1], q(-3));
  Rational x = q(1, 3);
  EXPECT_EQ(bf::F_left(us, x), Rational(bf::f(us[0], x) * bf::f(us[1], x) * bf::f(us[2], x)));
  EXPECT_EQ(bf::F_right(x, us), Rational(bf::f(x, us[0]) * bf::f(x, us[1]) * bf::f(x, us[2])));
  EXPECT_EQ(bf::F_left({}, x), q(1));
  EXPECT_EQ(bf::F_left_inv(us, us[1]), q(0));
  EXPECT_EQ(bf::with(rest, x).back(), x);
  EXPECT_EQ(bf::shifted(us, 2)[2], q(-1));
}

TEST(SumIdentities, ExactForAllSizes) {
  bf::SampleSource src(3);
  for (std::size_t n = 0; n <= 6; ++n)
    for (int t = 0; t < 20; ++t) {
      auto p = bf::distinct_rationals(src, n + 2);
      bf::RootSet<Rational> us(p.begin(), p.begin() + static_cast<long>(n));
      auto [a, b] = bf::check_sum_identities<Rational>(us, p[n], p[n + 1]);
      EXPECT_EQ(a, 0.0);
      EXPECT_EQ(b, 0.0);
    }
}

TEST(SumIdentities, EmptySetIsTrivial) {
  auto [a, b] = bf::check_sum_identities<Rational>({}, q(2), q(7, 3));
  EXPECT_EQ(a, 0.0);
  EXPECT_EQ(b, 0.0);
}

TEST(SumIdentities, FloatAgreesWithExact) {
  bf::SampleSource src(5);
  for (int t = 0; t < 20; ++t) {
    auto p = bf::distinct_rationals(src, 5);
    bf::RootSet<Complex> us;
    for (int i = 0; i < 3; ++i) us.push_back(bf::ScalarTraits<Complex>::from_rational(p[i]));
    auto [a, b] = bf::check_sum_identities<Complex>(us, Complex(p[3].get_d()), Complex(p[4].get_d()));
    EXPECT_LE(a, 1e-12);
    EXPECT_LE(b, 1e-12);
  }
}

TEST(Parsing, RationalForms) {
  EXPECT_EQ(bf::parse_rational("3/4"), q(3, 4));
  EXPECT_EQ(bf::parse_rational("-6/8"), q(-3, 4));
  EXPECT_EQ(bf::parse_rational("0.25"), q(1, 4));
  EXPECT_EQ(bf::parse_rational("-0.0770"), q(-77, 1000));
  EXPECT_EQ(bf::parse_rational("+2"), q(2));
  EXPECT_EQ(bf::parse_rational("1e-1"), Rational(0.1));
  EXPECT_THROW(bf::parse_rational("abc"), std::invalid_argument);
  EXPECT_THROW(bf::parse_rational(""), std::invalid_argument);
}

TEST(Parsing, ComplexForms) {
  EXPECT_EQ(bf::parse_complex("1.3+0.2i"), Complex(1.3, 0.2));
  EXPECT_EQ(bf::parse_complex("-1.5-2i"), Complex(-1.5, -2.0));
  EXPECT_EQ(bf::parse_complex("0.5i"), Complex(0.0, 0.5));
  EXPECT_EQ(bf::parse_complex("-i"), Complex(0.0, -1.0));
  EXPECT_EQ(bf::parse_complex("1/4"), Complex(0.25, 0.0));
  EXPECT_EQ(bf::parse_complex("1e-3+2e-2i"), Complex(1e-3, 2e-2));
}

TEST(Parsing, Lists) {
  EXPECT_TRUE(bf::split_list("").empty());
  auto items = bf::split_list("1, 2/3 ,0.5+1i");
  ASSERT_EQ(items.size(), 3U);
  EXPECT_EQ(items[1], "2/3");
}

TEST(Formatting, RoundTrip) {
  Complex z(-0.125, 3.5);
  EXPECT_EQ(bf::parse_complex(bf::to_string(z)), z);
  EXPECT_EQ(bf::to_string(q(-3, 6)), "-1/2");
}

TEST(Sampling, DeterministicAndDistinct) {
  bf::SampleSource a(42), b(42);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(a.rational(), b.rational());
  bf::SampleSource src(1);
  auto p = bf::distinct_rationals(src, 6, {0, 1, -1}, {q(0)});
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (long off : {0L, 1L, -1L}) EXPECT_NE(Rational(p[i] - 0), Rational(off));
    for (std::size_t j = i + 1; j < p.size(); ++j)
      for (long off : {0L, 1L, -1L}) EXPECT_NE(Rational(p[i] - p[j]), Rational(off));
  }
}
