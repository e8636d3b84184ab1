#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aniso/aniso.hpp"
#include "oracles.hpp"

using namespace aniso;

namespace {

Mat<2> diag41() { return Vec<2>(4.0, 1.0).asDiagonal(); }

std::vector<Anisotropy<2>> families2() {
  return {Anisotropy<2>::euclidean(), Anisotropy<2>::matrix(diag41()),
          Anisotropy<2>::sphere_graph(theta_constant<2>()), Anisotropy<2>::sphere_graph(theta_ellipse<2>(Vec<2>(4.0, 1.0))),
          Anisotropy<2>::sphere_graph(theta_cosine_bump<2>(0.2))};
}

std::vector<Anisotropy<3>> families3() {
  Mat<3> m;
  m << 3.0, 0.5, 0.2, 0.5, 2.0, -0.3, 0.2, -0.3, 1.0;
  return {Anisotropy<3>::euclidean(), Anisotropy<3>::matrix(m), Anisotropy<3>::sphere_graph(theta_cosine_bump<3>(0.3)),
          Anisotropy<3>::sphere_graph(theta_ellipse<3>(Vec<3>(1.0, 2.0, 5.0)))};
}

}  // namespace

TEST(EvalJets, MatrixAtOneOne) {
  const auto j = eval_jets(Anisotropy<2>::matrix(diag41()), Vec<2>(1.0, 1.0));
  EXPECT_NEAR(j.value, std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(j.grad(0), 4.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(j.grad(1), 1.0 / std::sqrt(5.0), 1e-15);
}

TEST(EvalJets, EuclideanHessianAtE2) {
  const auto j = eval_jets(Anisotropy<2>::euclidean(), Vec<2>(0.0, 1.0));
  EXPECT_NEAR(j.hess(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(j.hess(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(j.hess(1, 1), 0.0, 1e-15);
}

TEST(EvalJets, MatrixHessianAtE2RestrictsToFour) {
  const Vec<2> xi(0.0, 1.0);
  const auto j = eval_jets(Anisotropy<2>::matrix(diag41()), xi);
  // Closed form M/H - (M xi)(M xi)^T / H^3.
  const Vec<2> mx = diag41() * xi;
  const double H = std::sqrt(xi.dot(mx));
  const Mat<2> expected = diag41() / H - mx * mx.transpose() / (H * H * H);
  EXPECT_LE((j.hess - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(j.hess(0, 0), 4.0, 1e-14);
  const auto r = restrict_to_complement<2>(j.hess, xi);
  ASSERT_EQ(r.rows(), 1);
  EXPECT_NEAR(r(0, 0), 4.0, 1e-14);
}

TEST(EvalJets, OriginIsADomainError) {
  for (const auto& a : families2()) EXPECT_THROW(eval_jets(a, Vec<2>(Vec<2>::Zero())), DomainError);
  EXPECT_EQ(Anisotropy<2>::euclidean().value(Vec<2>::Zero()), 0.0);
}

TEST(EvalJets, JetsMatchCentralDifferences) {
  for (const auto& a : families3()) {
    double worst = 0.0;
    for (const auto& xi : oracle::random_unit_vectors<3>(200, 5)) {
      const auto j = eval_jets(a, Vec<3>(xi));
      const std::function<double(const oracle::Vec<3>&)> val = [&](const oracle::Vec<3>& y) { return a.value(y); };
      const std::function<oracle::Vec<3>(const oracle::Vec<3>&)> grad = [&](const oracle::Vec<3>& y) {
        return oracle::Vec<3>(a.template jet<1>(Vec<3>(y)).grad);
      };
      worst = std::max(worst, (oracle::central_gradient<3>(val, xi, 1e-5) - j.grad).norm());
      worst = std::max(worst, (oracle::central_hessian<3>(grad, xi, 1e-5) - j.hess).norm() / std::max(1.0, j.hess.norm()));
    }
    EXPECT_LE(worst, 1e-6) << a.name();
  }
}

TEST(EulerIdentities, EuclideanFirstIdentityIsExact) {
  const auto a = Anisotropy<2>::euclidean();
  for (const auto& xi : oracle::random_unit_vectors<2>(50, 1)) {
    const Vec<2> x = 3.7 * xi;
    EXPECT_NEAR(eval_jets(a, x).grad.dot(x), x.norm(), 1e-14);
  }
}

TEST(EulerIdentities, MatrixAtOneOne) {
  const auto j = eval_jets(Anisotropy<2>::matrix(diag41()), Vec<2>(1.0, 1.0));
  EXPECT_NEAR(j.grad.dot(Vec<2>(1.0, 1.0)), std::sqrt(5.0), 1e-15);
}

TEST(EulerIdentities, ConstantThetaMatchesEuclidean) {
  const auto e = Anisotropy<2>::euclidean();
  const auto s = Anisotropy<2>::sphere_graph(theta_constant<2>());
  const auto re = check_euler_identities(e, 500, 9);
  const auto rs = check_euler_identities(s, 500, 9);
  EXPECT_TRUE(rs.passed);
  EXPECT_NEAR(re.first, rs.first, 1e-12);
  for (const auto& xi : shell_samples<2>(100, 4, 0.01, 100.0)) {
    const auto je = eval_jets(e, xi);
    const auto js = eval_jets(s, xi);
    EXPECT_NEAR(je.value, js.value, 1e-12 * je.value);
    EXPECT_LE((je.grad - js.grad).norm(), 1e-12);
    EXPECT_LE((je.hess - js.hess).norm(), 1e-12 * je.hess.norm() + 1e-14);
  }
}

TEST(EulerIdentities, HoldForEveryBuiltInFamily) {
  for (const auto& a : families2()) {
    const auto r = check_euler_identities(a, 1000, 17);
    EXPECT_TRUE(r.passed) << a.name() << " " << r.first << " " << r.second << " " << r.third;
  }
  for (const auto& a : families3()) {
    const auto r = check_euler_identities(a, 1000, 17);
    EXPECT_TRUE(r.passed) << a.name() << " " << r.first << " " << r.second << " " << r.third;
  }
}

// Property: H, grad H and Hess H are homogeneous of degree 1, 0 and -1.
TEST(Homogeneity, DegreesOfHAndItsDerivatives) {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> ut(0.1, 10.0);
  for (const auto& a : families3()) {
    const auto dirs = oracle::random_unit_vectors<3>(1000, 77);
    for (const auto& d : dirs) {
      const double t = ut(rng);
      const Vec<3> xi = d;
      const auto j1 = eval_jets(a, xi);
      const auto jt = eval_jets(a, Vec<3>(t * xi));
      ASSERT_LE(std::abs(jt.value - t * j1.value), 1e-10 * t * j1.value);
      ASSERT_LE((jt.grad - j1.grad).norm(), 1e-10 * j1.grad.norm());
      ASSERT_LE((t * jt.hess - j1.hess).norm(), 1e-10 * std::max(1.0, j1.hess.norm()));
    }
  }
}

// Property: Hess H is positive semidefinite for certified anisotropies.
TEST(Convexity, HessianIsPositiveSemidefinite) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (const auto& a : families3()) {
    ASSERT_TRUE(certify_assumptions(a, BProfile::power(2.0), 1.0, 256, 1).holds_A) << a.name();
    for (int k = 0; k < 1000; ++k) {
      const Vec<3> xi(g(rng), g(rng), g(rng));
      const Vec<3> eta(g(rng), g(rng), g(rng));
      const auto h = a.template jet<2>(xi).hess;
      ASSERT_GE(eta.dot(h * eta), -1e-12 * eta.squaredNorm() / xi.norm()) << a.name();
    }
  }
}

TEST(FluxAtOrigin, LimitVanishes) {
  for (const auto& a : families2()) {
    for (const auto& b : {BProfile::power(2.0), BProfile::power(3.0), BProfile::minimal_surface(),
                          BProfile::regularized_power(2.0, 0.5)})
      for (int axis = 0; axis < 2; ++axis) EXPECT_NEAR(flux_limit_at_origin(a, b, axis).limit, 0.0, 1e-8) << a.name();
  }
}

TEST(HessBH, QuadraticBGivesIdentityForEuclidean) {
  const auto b = BProfile::power(2.0);
  for (const auto& xi : shell_samples<3>(50, 2, 0.1, 10.0))
    EXPECT_LE((hess_BH(Anisotropy<3>::euclidean(), b, xi) - Mat<3>::Identity()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(HessBH, QuadraticBGivesTheMatrix) {
  const auto b = BProfile::power(2.0);
  for (const auto& a : families3()) {
    if (a.family() != AnisotropyFamily::matrix) continue;
    for (const auto& xi : shell_samples<3>(50, 2, 0.1, 10.0))
      EXPECT_LE((hess_BH(a, b, xi) - a.matrix_form()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HessBH, CubicPowerAtE1) {
  const Mat<2> h = hess_BH(Anisotropy<2>::euclidean(), BProfile::power(3.0), Vec<2>(1.0, 0.0));
  EXPECT_NEAR(h(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(h(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-14);
}

TEST(BProfileFamilies, VanishAtOriginAndArePositive) {
  for (const auto& b : {BProfile::power(1.5), BProfile::power(2.0), BProfile::power(4.0),
                        BProfile::regularized_power(3.0, 0.3), BProfile::minimal_surface()}) {
    EXPECT_EQ(b.value(0.0), 0.0);
    EXPECT_EQ(b.first(0.0), 0.0);
    EXPECT_EQ(b.gauge(0.0), 0.0);
    double prev = 0.0;
    for (int k = 1; k <= 1000; ++k) {
      const double t = 10.0 * k / 1000.0;
      const auto v = b.eval(t);
      ASSERT_GT(v.b0, 0.0);
      ASSERT_GT(v.b1, 0.0);
      ASSERT_GT(v.b2, 0.0);
      const double g = b.gauge(t);
      ASSERT_GT(g, prev);
      prev = g;
    }
  }
}

TEST(BProfileFamilies, MinimalSurfaceMatchesClosedForm) {
  const auto b = BProfile::minimal_surface();
  for (double t : {0.0, 1e-4, 0.5, 3.0, 40.0}) {
    EXPECT_NEAR(b.value(t), std::sqrt(1.0 + t * t) - 1.0, 1e-14 * std::max(1.0, t));
    EXPECT_NEAR(b.first(t), t / std::sqrt(1.0 + t * t), 1e-15);
  }
}

TEST(BProfileFamilies, RegularizedPowerDerivativesMatchDifferences) {
  const auto b = BProfile::regularized_power(3.0, 0.4);
  for (double t : {0.05, 0.7, 2.5}) {
    const double h = 1e-5;
    EXPECT_NEAR(b.first(t), (b.value(t + h) - b.value(t - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(b.second(t), (b.first(t + h) - b.first(t - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(b.eval(t).b3, (b.second(t + h) - b.second(t - h)) / (2 * h), 1e-7);
  }
}

TEST(SphereGraph, NonPositiveThetaIsRejected) {
  EXPECT_THROW(Anisotropy<2>::sphere_graph(theta_cosine_bump<2>(1.5)), ConstructionError);
}

TEST(SphereGraph, EllipseThetaReproducesTheMatrixFamily) {
  const auto s = Anisotropy<2>::sphere_graph(theta_ellipse<2>(Vec<2>(4.0, 1.0)));
  const auto m = Anisotropy<2>::matrix(diag41());
  EXPECT_NEAR(s.value(Vec<2>(0.5, 0.0)), 1.0, 1e-15);
  for (const auto& xi : shell_samples<2>(200, 3, 0.01, 100.0)) {
    const auto js = eval_jets(s, xi), jm = eval_jets(m, xi);
    EXPECT_NEAR(js.value, jm.value, 1e-13 * jm.value);
    EXPECT_LE((js.hess - jm.hess).norm(), 1e-11 * jm.hess.norm());
  }
}

TEST(SphereGraph, CosineBumpIsNotEven) {
  const auto a = Anisotropy<2>::sphere_graph(theta_cosine_bump<2>(0.2));
  EXPECT_NEAR(a.value(Vec<2>(1.0, 0.0)), 1.2, 1e-15);
  EXPECT_NEAR(a.value(Vec<2>(-1.0, 0.0)), 0.8, 1e-15);
}
