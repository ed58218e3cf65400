#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ecoevo/errors.hpp"
#include "ecoevo/moments.hpp"
#include "ecoevo/reproduction.hpp"
#include "oracles.hpp"

using namespace ecoevo;

namespace {

DensityState random_density(const Grid1D& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(g.size());
  const double mu1 = -0.8 + 1.6 * u(rng), mu2 = -0.8 + 1.6 * u(rng);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = g.node(i);
    v[i] = std::exp(-8.0 * (x - mu1) * (x - mu1)) + 0.5 * std::exp(-20.0 * (x - mu2) * (x - mu2));
    v[i] *= 1.0 + 0.2 * u(rng);
  }
  return normalize(DensityState(g, std::move(v), 0.0, DensityKind::normalized));
}

}  // namespace

TEST(Kernel, NormalizationAndMoments) {
  const SegregationKernel k(0.2);
  EXPECT_NEAR(oracle::integrate([&](double x) { return k(x); }, -3.0, 3.0), 1.0, 1e-12);
  EXPECT_NEAR(oracle::integrate([&](double x) { return x * x * k(x); }, -3.0, 3.0), k.variance(), 1e-12);
  EXPECT_DOUBLE_EQ(k.variance(), 0.02);
  EXPECT_NEAR(k.moment(2), 0.02, 1e-16);
  EXPECT_NEAR(k.moment(4), 3.0 * 0.02 * 0.02, 1e-16);
  EXPECT_NEAR(k.moment(6), 15.0 * std::pow(0.02, 3), 1e-18);
  EXPECT_DOUBLE_EQ(k.moment(3), 0.0);
}

TEST(Reproduction, MethodsAgreeOnRandomDensities) {
  std::mt19937_64 rng(7);
  const Grid1D g(-2.0, 2.0, 161);
  for (double eps : {0.05, 0.1, 0.3}) {
    const SegregationKernel k(eps);
    for (int s = 0; s < 4; ++s) {
      const auto q = random_density(g, rng);
      const auto ref = reproduce_reference(q, k);
      const auto dir = reproduce_direct(q, k);
      const auto fft = reproduce_fast(q, k);
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(dir.raw[i], ref.raw[i], 1e-12);
        EXPECT_NEAR(fft.raw[i], ref.raw[i], 1e-11);
        EXPECT_NEAR(fft.offspring.values[i], ref.offspring.values[i], 1e-11);
      }
      EXPECT_NEAR(fft.leaked_mass, ref.leaked_mass, 1e-12);
    }
  }
}

TEST(Reproduction, MatchesContinuousOperatorOnGaussian) {
  const Grid1D g(-2.0, 2.0, 401);
  const double mu = 0.3, sd = 0.25, eps = 0.2;
  const auto q = gaussian_density(g, mu, sd);
  const auto out = reproduce_fast(q, SegregationKernel(eps)).offspring;
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(out.values[i] - oracle::offspring_of_gaussian(g.node(i), mu, sd, eps)));
  }
  EXPECT_LT(err, 1e-6);
}

TEST(Reproduction, MatchesNestedQuadratureOnBimodalParents) {
  auto p = [](double y) {
    return 0.6 * oracle::gaussian_pdf(y, -0.4, 0.15) + 0.4 * oracle::gaussian_pdf(y, 0.5, 0.2);
  };
  const Grid1D g(-2.0, 2.0, 321);
  std::vector<double> v;
  for (double x : g.nodes()) v.push_back(p(x));
  const auto q = normalize(DensityState(g, v, 0.0, DensityKind::normalized));
  const double eps = 0.15;
  const auto out = reproduce_fast(q, SegregationKernel(eps)).offspring;
  for (std::size_t i = 0; i < g.size(); i += 40) {
    const double expected = oracle::offspring_density(p, g.node(i), eps, -2.0, 2.0);
    EXPECT_NEAR(out.values[i], expected, 2e-5) << g.node(i);
  }
}

TEST(Reproduction, MeanAndVarianceAgreeWithMonteCarlo) {
  std::mt19937_64 rng(11);
  const Grid1D g(-2.0, 2.0, 257);
  const double eps = 0.1;
  const auto q = random_density(g, rng);
  const auto out = reproduce_fast(q, SegregationKernel(eps)).offspring;
  const auto mc = oracle::monte_carlo_offspring(g.nodes(), q.values, eps, 2'000'000, 99);
  EXPECT_NEAR(mean(out), mc.mean, 4.0 * mc.mean_se);
  EXPECT_NEAR(central_moment(out, 2), mc.var, 4.0 * mc.var_se);
}

TEST(Reproduction, VarianceIdentityAndMeanPreservation) {
  std::mt19937_64 rng(3);
  const Grid1D g(-2.0, 2.0, 1024);
  for (double eps : {0.05, 0.2}) {
    const auto q = random_density(g, rng);
    const auto out = reproduce_fast(q, SegregationKernel(eps)).offspring;
    EXPECT_NEAR(mean(out), mean(q), 1e-10);
    const double expected = 0.5 * eps * eps + 0.5 * central_moment(q, 2);
    EXPECT_NEAR(central_moment(out, 2), expected, 1e-6 * expected);
  }
}

TEST(Reproduction, HigherEvenMomentRecursion) {
  const Grid1D g(-2.0, 2.0, 1024);
  std::mt19937_64 rng(5);
  const double eps = 0.2;
  const auto q = random_density(g, rng);
  const auto out = reproduce_fast(q, SegregationKernel(eps)).offspring;
  std::vector<double> central(9);
  central[0] = 1.0;
  central[1] = 0.0;
  for (int k = 2; k <= 8; ++k) central[k] = central_moment(q, k);
  for (int k = 1; k <= 3; ++k) {
    const double predicted = reproduced_even_central_moment(k, eps, central);
    EXPECT_NEAR(central_moment(out, 2 * k), predicted, 1e-6 * predicted) << "order " << 2 * k;
  }
}

TEST(Reproduction, FftSizeContract) {
  const Grid1D g(-1.0, 1.0, 33);
  const SegregationKernel k(0.1);
  EXPECT_THROW(FastReproducer(g, k, FastReproducer::minimum_transform_size(33) - 1), ConfigError);
  FastReproducer op(g, k);
  EXPECT_GE(op.transform_size(), FastReproducer::minimum_transform_size(33));
  FastReproducer big(g, k, 512);
  const auto q = gaussian_density(g, 0.0, 0.2);
  const auto a = op.apply(q);
  const auto b = big.apply(q);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(a.raw[i], b.raw[i], 1e-13);
}

TEST(Reproduction, BoundaryLeakIsReported) {
  const Grid1D g(-1.0, 1.0, 201);
  const auto q = normalize(indicator_density(g, 0.95, 0.05));
  const auto out = reproduce_fast(q, SegregationKernel(0.2));
  EXPECT_GT(out.leaked_mass, kBoundaryLeakThreshold);
  EXPECT_TRUE(out.boundary_warning);
  EXPECT_NEAR(trapezoid(out.offspring), 1.0, 1e-12);

  const auto centered = reproduce_fast(gaussian_density(g, 0.0, 0.1), SegregationKernel(0.05));
  EXPECT_FALSE(centered.boundary_warning);
  EXPECT_LT(centered.leaked_mass, 1e-10);
}

TEST(Reproduction, OffspringNonnegative) {
  const Grid1D g(-2.0, 2.0, 201);
  const auto q = normalize(indicator_density(g, 0.0, 0.3));
  const auto out = reproduce_fast(q, SegregationKernel(0.05));
  for (double v : out.offspring.values) EXPECT_GE(v, 0.0);
}

TEST(Reproduction, UnnormalizedScalesByPopulation) {
  const Grid1D g(-2.0, 2.0, 201);
  auto n = gaussian_density(g, 0.2, 0.3);
  for (auto& v : n.values) v *= 2.5;
  const auto out = reproduce_unnormalized(n, SegregationKernel(0.1));
  EXPECT_NEAR(trapezoid(out), 2.5, 1e-9);
}

TEST(Reproduction, RejectsUnnormalizedInput) {
  const Grid1D g(-2.0, 2.0, 101);
  DensityState n(g, std::vector<double>(101, 1.0));
  EXPECT_THROW(reproduce_fast(n, SegregationKernel(0.1)), ContractError);
}

TEST(Midpoint, PointMassStaysPut) {
  const Grid1D g(-2.0, 2.0, 201);
  std::vector<double> v(g.size(), 0.0);
  v[130] = 1.0;
  const auto q = normalize(DensityState(g, v, 0.0, DensityKind::normalized));
  const auto h = midpoint_density(q);
  ASSERT_EQ(h.grid.size(), 2 * g.size() - 1);
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    if (k == 260) {
      EXPECT_GT(h.values[k], 0.0);
    } else {
      EXPECT_DOUBLE_EQ(h.values[k], 0.0) << k;
    }
  }
  EXPECT_NEAR(trapezoid(h.values, h.grid), 1.0, 1e-12);
}

TEST(Midpoint, GaussianParentsHalveVariance) {
  const Grid1D g(-2.0, 2.0, 1024);
  const double m = 0.2, sd = 0.3;
  const auto h = midpoint_density(gaussian_density(g, m, sd));
  double err = 0.0;
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    err = std::max(err, std::abs(h.values[k] - oracle::gaussian_pdf(h.grid.node(k), m, sd / std::sqrt(2.0))));
  }
  EXPECT_LT(err, 1e-6);
  EXPECT_NEAR(trapezoid(h.values, h.grid), 1.0, 1e-10);
}

TEST(Midpoint, UniformParentsGiveTriangle) {
  const Grid1D g(-2.0, 2.0, 1025);
  std::vector<double> v;
  for (double x : g.nodes()) v.push_back(std::abs(x) <= 1.0 + 1e-12 ? 0.5 : 0.0);
  const auto q = normalize(DensityState(g, v, 0.0, DensityKind::normalized));
  const auto h = midpoint_density(q);
  // Each node carries a cell of width h, so the parents are uniform on [-a, a], a = 1 + h/2,
  // and their midpoint has the triangular density (1 - |s|/a)/a.
  const double a = 1.0 + 0.5 * g.spacing();
  double err = 0.0;
  for (std::size_t k = 0; k < h.values.size(); ++k) {
    const double s = h.grid.node(k);
    err = std::max(err, std::abs(h.values[k] - std::max(0.0, 1.0 - std::abs(s) / a) / a));
  }
  EXPECT_LT(err, 1e-6);
}

TEST(Reproduction, GaussianAnsatzIsFixedPointOfVariance) {
  const Grid1D g(-2.0, 2.0, 1024);
  for (double eps : {0.05, 0.1, 0.2}) {
    const auto out = reproduce_reference(gaussian_density(g, 0.0, eps), SegregationKernel(eps)).offspring;
    EXPECT_NEAR(central_moment(out, 2), eps * eps, 1e-4 * eps * eps);
  }
}

TEST(Reproduction, SymmetryAboutCenter) {
  const Grid1D g(-2.0, 2.0, 401);  // node 250 sits at 0.5
  std::vector<double> v;
  for (double x : g.nodes()) {
    const double u = x - 0.5;
    v.push_back(std::exp(-30.0 * (u - 0.2) * (u - 0.2)) + std::exp(-30.0 * (u + 0.2) * (u + 0.2)));
  }
  const auto q = normalize(DensityState(g, v, 0.0, DensityKind::normalized));
  for (auto method : {ReproductionMethod::reference, ReproductionMethod::fft}) {
    const auto out = method == ReproductionMethod::fft ? reproduce_fast(q, SegregationKernel(0.1)).offspring
                                                       : reproduce_reference(q, SegregationKernel(0.1)).offspring;
    EXPECT_NEAR(mean(out), 0.5, 1e-10);
    for (std::size_t k = 1; k < 150; ++k) EXPECT_NEAR(out.values[250 - k], out.values[250 + k], 1e-12);
  }
}

TEST(Reproduction, BimodalMixtureIdentityAndMonteCarlo) {
  const Grid1D g(-2.0, 2.0, 1024);
  std::vector<double> v;
  for (double x : g.nodes()) v.push_back(0.5 * oracle::gaussian_pdf(x, -0.5, 0.1) + 0.5 * oracle::gaussian_pdf(x, 0.5, 0.1));
  const auto q = normalize(DensityState(g, v, 0.0, DensityKind::normalized));
  const double eps = 0.1;
  const double identity = 0.5 * eps * eps + 0.5 * (0.25 + 0.01);
  for (const auto& out : {reproduce_fast(q, SegregationKernel(eps)).offspring,
                          reproduce_reference(q, SegregationKernel(eps)).offspring}) {
    EXPECT_NEAR(central_moment(out, 2), identity, 1e-4 * identity);
  }
  const auto mc = oracle::monte_carlo_offspring(g.nodes(), q.values, eps, 10'000'000, 2024);
  EXPECT_NEAR(identity, mc.var, 4.0 * mc.var_se);
  EXPECT_NEAR(0.0, mc.mean, 4.0 * mc.mean_se);
}

TEST(Reproduction, UnnormalizedExamples) {
  const Grid1D g(-2.0, 2.0, 801);
  const double eps = 0.15, rho = 3.7;
  auto n = gaussian_density(g, 0.1, 0.2);
  for (auto& v : n.values) v *= rho;
  const auto out = reproduce_unnormalized(n, SegregationKernel(eps));
  EXPECT_NEAR(trapezoid(out), rho, 1e-10);
  const double sd = std::sqrt(0.5 * 0.04 + 0.5 * eps * eps);
  for (std::size_t i = 0; i < g.size(); i += 20) {
    EXPECT_NEAR(out.values[i], rho * oracle::gaussian_pdf(g.node(i), 0.1, sd), 1e-8);
  }

  std::vector<double> spike(g.size(), 0.0);
  spike[500] = 2.0 / g.spacing();  // rho = 2 at x = 0.5
  const auto o2 = reproduce_unnormalized(DensityState(g, spike), SegregationKernel(eps));
  const SegregationKernel k(eps);
  for (std::size_t i = 300; i < 700; i += 10) EXPECT_NEAR(o2.values[i], 2.0 * k(g.node(i) - 0.5), 1e-9);

  EXPECT_THROW(reproduce_unnormalized(DensityState(g, std::vector<double>(g.size(), 0.0)), k),
               DegenerateStateError);
}
