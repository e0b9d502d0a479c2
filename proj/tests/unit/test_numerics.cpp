#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "platoon/numerics.hpp"

using namespace platoon;

namespace {

// Plain composite Simpson rule, kept separate from the library quadrature.
template <typename F>
double simpson(F f, double lo, double hi, int n = 20000) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

const QuadratureSpec kGp{1e-4, 1e-6, 4000, 1.0};

}  // namespace

TEST(GammaUpper, TrivialValues) {
  EXPECT_DOUBLE_EQ(gamma_upper(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(gamma_upper(2.0, 0.0), 1.0);
  EXPECT_NEAR(gamma_upper(5.0, 0.0), 24.0, 1e-12);
}

TEST(GammaUpper, IntegerShapeClosedForm) {
  // Gamma(3, x) = 2 e^{-x} (1 + x + x^2 / 2).
  EXPECT_NEAR(gamma_upper(3.0, 2.0), 10.0 * std::exp(-2.0), 1e-13);
  const double direct = simpson([](double t) { return t * t * std::exp(-t); }, 2.0, 60.0);
  EXPECT_NEAR(gamma_upper(3.0, 2.0), direct, 1e-12);
}

TEST(GammaUpper, DecreasingAndBounded) {
  for (double a : {0.5, 1.0, 2.5, 7.0}) {
    double prev = gamma_upper(a, 0.0);
    EXPECT_NEAR(prev, std::tgamma(a), 1e-12 * std::tgamma(a));
    for (double x = 0.25; x < 30.0; x += 0.25) {
      const double v = gamma_upper(a, x);
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
}

TEST(GammaUpper, RejectsNonPositiveShape) {
  EXPECT_THROW(gamma_upper(0.0, 1.0), std::domain_error);
  EXPECT_THROW(gamma_upper(-1.0, 1.0), std::domain_error);
}

TEST(Hyp2f1, TrivialValues) {
  EXPECT_DOUBLE_EQ(hyp2f1_real(1.0, 0.5, 1.5, 0.0), 1.0);
  for (double z : {-0.3, -0.9, -1.0, -4.0, -50.0})
    EXPECT_NEAR(hyp2f1_real(1.7, 2.3, 2.3, z), std::pow(1.0 - z, -1.7), 1e-12);
}

TEST(Hyp2f1, EulerIntegralOracle) {
  // 2F1(1, b; b + 1; z) = b int_0^1 t^{b-1} / (1 - z t) dt; with t = u^{1/b}
  // the integrand 1 / (1 - z u^{1/b}) is smooth.
  for (double alpha : {2.5, 3.5, 4.0}) {
    const double b = 1.0 - 1.0 / alpha;
    for (double z : {-0.2, -0.99, -1.0, -2.0, -10.0, -1e3}) {
      const double oracle = simpson([&](double u) { return 1.0 / (1.0 - z * std::pow(u, 1.0 / b)); },
                                    0.0, 1.0, 200000);
      EXPECT_NEAR(hyp2f1_real(1.0, b, b + 1.0, z), oracle, 1e-9 * oracle) << alpha << " " << z;
    }
  }
}

TEST(IntersectionLength, Branches) {
  EXPECT_DOUBLE_EQ(intersection_length(50, 100, 0), 100.0);
  EXPECT_DOUBLE_EQ(intersection_length(50, 100, 150), 0.0);
  // [-100, 100] and [-50, 150] overlap on [-50, 100].
  EXPECT_DOUBLE_EQ(intersection_length(100, 100, 50), 150.0);
  EXPECT_DOUBLE_EQ(intersection_length(50, 100, 400), 0.0);
}

TEST(IntersectionLength, SymmetricContinuousNonincreasing) {
  for (double r : {10.0, 75.0, 100.0, 230.0}) {
    double prev = intersection_length(r, 100.0, 0.0);
    for (double x = 0.0; x <= 400.0; x += 0.5) {
      const double v = intersection_length(r, 100.0, x);
      EXPECT_DOUBLE_EQ(v, intersection_length(100.0, r, x));
      EXPECT_LE(v, prev + 1e-12);
      EXPECT_LE(prev - v, 0.5 + 1e-12);  // Lipschitz 1, hence continuous
      prev = v;
    }
  }
}

TEST(FuncFG, Values) {
  EXPECT_NEAR(func_F(1.0, 1, 1.0), 1.0 - 3.0 * std::exp(-2.0), 1e-14);
  EXPECT_NEAR(func_G(1.0, 0, 1.0), std::exp(-2.0), 1e-15);
  for (double m : {0.01, 0.5, 3.0})
    EXPECT_NEAR(func_F(m, 0, 1.0) + func_G(m, 0, 1.0), 1.0 / m, 1e-12 / m);
}

TEST(FuncFG, SumIsGammaOverPower) {
  for (double m : {0.002, 0.03, 1.0})
    for (int k = 0; k <= 6; ++k)
      for (double a : {50.0, 150.0}) {
        const double full = std::tgamma(k + 1.0) / std::pow(m, k + 1);
        EXPECT_NEAR(func_F(m, k, a) + func_G(m, k, a), full, 1e-12 * full);
      }
}

TEST(RampStep, Values) {
  EXPECT_DOUBLE_EQ(ramp(5, 5), 0.0);
  EXPECT_DOUBLE_EQ(ramp(7, 5), 2.0);
  EXPECT_DOUBLE_EQ(ramp(3, 5), 0.0);
  EXPECT_DOUBLE_EQ(unit_step(0), 1.0);
  EXPECT_DOUBLE_EQ(unit_step(-1e-300), 0.0);
}

TEST(Quadrature, SemiInfiniteDensity) {
  const double lr = 2e-3;
  QuadratureSpec spec;
  spec.semi_infinite_scale = 1.0 / (2 * lr);
  const double v = integrate([&](double r) { return 2 * lr * std::exp(-2 * lr * r); }, 0.0,
                             INFINITY, spec);
  EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Quadrature, EndpointSingularity) {
  // int_0^1 y^{-eta} (1 - (1 + tau y)^{-1}) dy against its power series.
  const double alpha = 3.5, eta = 1.0 + 1.0 / alpha, tau = 0.5;
  double series = 0.0;
  for (int n = 1; n < 200; ++n) series += -std::pow(-tau, n) / (n + 1.0 - eta);
  const double v = integrate(
      [&](double y) { return std::pow(y, -eta) * (tau * y / (1.0 + tau * y)); }, 0.0, 1.0);
  EXPECT_NEAR(v, series, 1e-10);
}

TEST(Quadrature, MatchesFuncF) {
  EXPECT_NEAR(integrate([](double x) { return x * std::exp(-x); }, 0.0, 2.0), func_F(1.0, 1, 1.0),
              1e-14);
}

TEST(Quadrature, ReportsFailure) {
  QuadratureSpec spec{1e-14, 1e-14, 3, 1.0};
  const auto r = integrate_adaptive([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, spec);
  EXPECT_FALSE(r.converged);
  EXPECT_THROW(integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, spec), NumericalError);
}

TEST(GilPelaez, DegenerateVariable) {
  const double p = 0.6;
  auto m = [&](double t) { return std::exp(ComplexValue{0.0, t * std::log(p)}); };
  EXPECT_NEAR(gil_pelaez_invert(m, 0.3, kGp), 1.0, 1e-3);
  EXPECT_NEAR(gil_pelaez_invert(m, 0.9, kGp), 0.0, 1e-3);
}

TEST(GilPelaez, TwoPointMixture) {
  auto m = [](double t) {
    return 0.5 * std::exp(ComplexValue{0.0, t * std::log(0.3)}) +
           0.5 * std::exp(ComplexValue{0.0, t * std::log(0.9)});
  };
  EXPECT_NEAR(gil_pelaez_invert(m, 0.5, kGp), 0.5, 1e-3);
  EXPECT_NEAR(gil_pelaez_invert(m, 0.2, kGp), 1.0, 1e-3);
  EXPECT_NEAR(gil_pelaez_invert(m, 0.95, kGp), 0.0, 1e-3);
}

TEST(GilPelaez, UniformVariableIsMonotone) {
  // P ~ U(0, 1): E[P^{it}] = 1 / (1 + it), survival 1 - x.
  auto m = [](double t) { return 1.0 / ComplexValue{1.0, t}; };
  double prev = 1.0;
  for (double x = 0.05; x < 1.0; x += 0.05) {
    const double v = gil_pelaez_invert(m, x, kGp);
    EXPECT_NEAR(v, 1.0 - x, 1e-3);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, prev + 1e-3);
    prev = v;
  }
}

TEST(GilPelaez, MassFarBelowThreshold) {
  // Half the mass is e^{-Y} with Y exponential of mean 1e9, so its feature
  // sits at t ~ 1e-9; the other half is at 0.95.
  auto m = [](double t) {
    return 0.5 / ComplexValue{1.0, 1e9 * t} + 0.5 * std::exp(ComplexValue{0.0, t * std::log(0.95)});
  };
  GilPelaezOptions opts;
  opts.log_moment_bound = 1e9;
  EXPECT_NEAR(gil_pelaez_invert(m, 0.5, kGp, opts), 0.5, 1e-3);
  opts.log_moment_bound = 1.0;
  EXPECT_GT(gil_pelaez_invert(m, 0.5, kGp, opts), 0.7);
}

TEST(GilPelaez, RejectsLevelOutsideUnitInterval) {
  auto m = [](double) { return ComplexValue{1.0, 0.0}; };
  EXPECT_THROW(gil_pelaez_invert(m, 0.0), std::domain_error);
  EXPECT_THROW(gil_pelaez_invert(m, 1.0), std::domain_error);
}
