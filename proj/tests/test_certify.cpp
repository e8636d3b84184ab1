#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aniso/aniso.hpp"
#include "oracles.hpp"

using namespace aniso;

namespace {

Mat<2> diag41() { return Vec<2>(4.0, 1.0).asDiagonal(); }

}  // namespace

TEST(HessianPositivity, MatrixWithQuadraticBIsPositiveEverywhere) {
  const auto r = check_wxgen_equivalence(Anisotropy<2>::matrix(diag41()), BProfile::power(2.0), 1000, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.min_full, 0.0);
  EXPECT_GT(r.min_restricted, 0.0);
  // Closed forms: Hess(B o H) = M, and the restricted Hessian at e_2 is 4.
  EXPECT_NEAR(r.min_full, 1.0, 1e-12);
}

TEST(HessianPositivity, EllipseSphereGraphAgreesWithMatrix) {
  const auto m = check_wxgen_equivalence(Anisotropy<2>::matrix(diag41()), BProfile::power(2.0), 1000, 1);
  const auto s = check_wxgen_equivalence(Anisotropy<2>::sphere_graph(theta_ellipse<2>(Vec<2>(4.0, 1.0))),
                                         BProfile::power(2.0), 1000, 1);
  EXPECT_EQ(m.passed, s.passed);
  EXPECT_NEAR(m.min_full, s.min_full, 1e-8);
  EXPECT_NEAR(m.min_restricted, s.min_restricted, 1e-8);
}

TEST(HessianPositivity, SamplesMatchAnIndependentEigensolver) {
  const auto a = Anisotropy<3>::sphere_graph(theta_cosine_bump<3>(0.3));
  const auto b = BProfile::power(3.0);
  for (const auto& xi : oracle::random_unit_vectors<3>(100, 3)) {
    const Mat<3> h = hess_BH(a, b, Vec<3>(xi));
    EXPECT_NEAR(min_eigenvalue(h), oracle::min_eig<3>(h), 1e-12);
  }
}

TEST(Certify, CubicPowerEuclidean) {
  const auto r = certify_assumptions(Anisotropy<2>::euclidean(), BProfile::power(3.0), 1.0, 1000, 0);
  EXPECT_TRUE(r.holds_A);
  // Eigenvalues of Hess |xi|^3/3 are 2|xi| and |xi|: the infimum ratio is 1.
  EXPECT_NEAR(r.gamma_est, 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.Gamma_est));
  EXPECT_EQ(r.p_star, 3.0);
}

TEST(Certify, RegularizedPowerWithMatrixHoldsB) {
  const auto r = certify_assumptions(Anisotropy<2>::matrix(diag41()), BProfile::regularized_power(2.0, 0.5), 1.0, 500, 0);
  EXPECT_TRUE(r.holds_B);
  EXPECT_EQ(r.p_star, 2.0);
}

TEST(Certify, MinimalSurfaceHoldsBOnTheBall) {
  const double K = 10.0;
  const auto r = certify_assumptions(Anisotropy<2>::euclidean(), BProfile::minimal_surface(), K, 1000, 0);
  EXPECT_TRUE(r.holds_B);
  EXPECT_GE(r.gamma_B, std::pow(1.0 + K * K, -1.5) * (1.0 - 1e-12));
}

TEST(Certify, KappaOutsideUnitIntervalIsAUsageError) {
  EXPECT_THROW(certify_assumptions(Anisotropy<2>::euclidean(), BProfile::regularized_power(2.0, 1.0), 1.0, 10, 0),
               UsageError);
}

TEST(Certify, NonQuadraticHFailsB) {
  const auto r = certify_assumptions(Anisotropy<2>::sphere_graph(theta_l4<2>()), BProfile::power(2.0), 1.0, 500, 0);
  EXPECT_FALSE(r.holds_B);
}

TEST(Gauge, PowerTwoAtTwo) {
  EXPECT_DOUBLE_EQ(gauge_b(BProfile::power(2.0), 2.0), 2.0);
  const auto e = estimate_epsilon(BProfile::power(2.0), Anisotropy<2>::euclidean(), 10.0);
  EXPECT_NEAR(e.epsilon, 0.5, 1e-12);
  EXPECT_EQ(e.p_star, 2.0);
}

TEST(Gauge, MinimalSurfaceAtRootThree) {
  EXPECT_NEAR(gauge_b(BProfile::minimal_surface(), std::sqrt(3.0)), 0.5, 1e-15);
}

TEST(Gauge, ZeroAtOrigin) {
  for (const auto& b : {BProfile::power(3.0), BProfile::minimal_surface(), BProfile::regularized_power(2.5, 0.2)})
    EXPECT_EQ(gauge_b(b, 0.0), 0.0);
}

// Property: b(t) >= eps t^p* for the reported eps on a 10x denser grid.
TEST(Gauge, EpsilonBoundHoldsOnADenserGrid) {
  const auto a = Anisotropy<2>::euclidean();
  for (const auto& b : {BProfile::power(3.0), BProfile::regularized_power(2.0, 0.5), BProfile::minimal_surface()}) {
    const double m_cap = 5.0;
    const auto e = estimate_epsilon(b, a, m_cap);
    EXPECT_GT(e.epsilon, 0.0);
    for (int k = 1; k <= 20000; ++k) {
      const double t = m_cap * k / 20000.0;
      ASSERT_GE(b.gauge(t), e.epsilon * std::pow(t, e.p_star) * (1.0 - 1e-12)) << b.name() << " t=" << t;
    }
  }
}

TEST(QuarticForm, EuclideanAtE2) {
  Mat<2> c;
  c << 3.0, 1.0, 1.0, 0.0;
  const auto v = corpos_form(Anisotropy<2>::euclidean(), Vec<2>(0.0, 1.0), c);
  EXPECT_NEAR(v.value, 9.0, 1e-13);
}

TEST(QuarticForm, RigidConstructionVanishes) {
  const Vec<2> xi(0.0, 1.0);
  const Vec<2> v(0.7, -2.0);
  const Mat<2> c = 0.5 * (xi * v.transpose() + v * xi.transpose());
  const auto r = corpos_form(Anisotropy<2>::euclidean(), xi, c);
  EXPECT_NEAR(r.value, 0.0, 1e-14);
  EXPECT_NEAR(r.rigid_block_norm, 0.0, 1e-14);
}

TEST(QuarticForm, ZeroMatrix) {
  const auto r = corpos_form(Anisotropy<2>::matrix(diag41()), Vec<2>(0.3, 0.4), Mat<2>(Mat<2>::Zero()));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.rigid_block_norm, 0.0);
}

// Property: the quartic form is non-negative, and the rigid construction
// is annihilated, for random inputs.
TEST(QuarticForm, RandomFormsAreNonNegative) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  const auto a = Anisotropy<3>::sphere_graph(theta_cosine_bump<3>(0.3));
  for (int k = 0; k < 2000; ++k) {
    const Vec<3> xi(g(rng), g(rng), g(rng));
    const Mat<3> c = oracle::random_symmetric<3>(rng);
    const double scale = c.squaredNorm() * a.template jet<2>(xi).hess.squaredNorm();
    ASSERT_GE(corpos_form(a, xi, c).value, -1e-12 * scale);
    const Vec<3> v(g(rng), g(rng), g(rng));
    const Vec<3> u = xi.normalized();
    const Mat<3> rigid = 0.5 * (u * v.transpose() + v * u.transpose());
    const auto r = corpos_form(a, xi, rigid);
    const double rs = rigid.squaredNorm() * a.template jet<2>(xi).hess.squaredNorm();
    ASSERT_LE(std::abs(r.value), 1e-12 * std::max(1.0, rs));
    ASSERT_LE(r.rigid_block_norm, 1e-12 * std::max(1.0, rigid.norm()));
  }
}

TEST(SphereGraphBuild, ConstantThetaIsTheUnitBall) {
  const auto b = build_sphere_graph<2>(theta_constant<2>(), 1.0);
  EXPECT_NEAR(b.report.curvature_inf, 1.0, 1e-12);
  EXPECT_LE(b.report.level_set_defect, 1e-14);
  EXPECT_TRUE(b.report.meets_expected || b.report.curvature_inf >= 1.0 - 1e-12);
}

TEST(SphereGraphBuild, EllipseContainsHalfE1) {
  const auto b = build_sphere_graph<2>(theta_ellipse<2>(Vec<2>(4.0, 1.0)), 0.1);
  EXPECT_NEAR(b.anisotropy.value(Vec<2>(0.5, 0.0)), 1.0, 1e-15);
  // Curvature of x^2/(1/4) + y^2 = 1 is smallest at (+-1/2, 0): a/b^2 = (1/2)/1.
  EXPECT_NEAR(b.report.curvature_inf, 0.5, 1e-6);
}

TEST(SphereGraphBuild, CosineBumpIsConvexButNotEven) {
  const auto b = build_sphere_graph<2>(theta_cosine_bump<2>(0.2), 0.0);
  EXPECT_GT(b.report.curvature_inf, 0.0);
  EXPECT_NE(b.anisotropy.value(Vec<2>(1.0, 0.0)), b.anisotropy.value(Vec<2>(-1.0, 0.0)));
}

TEST(SphereGraphBuild, NonConvexBodyFailsCertification) {
  // Theta = 1 + 0.9 cos(4 phi) in the plane is positive but not convex.
  auto theta = SphereFunction<2>(
      [](const auto& u) {
        const auto c2 = u[0] * u[0] - u[1] * u[1];
        const auto s2 = 2.0 * (u[0] * u[1]);
        return 1.0 + 0.9 * (c2 * c2 - s2 * s2);
      },
      "flower");
  EXPECT_THROW(build_sphere_graph<2>(theta, 0.0), CertificationError);
}

TEST(Characterize, MatrixIsRecovered) {
  const auto r = characterize_matrix_form(Anisotropy<2>::matrix(diag41()), BProfile::power(2.0), 1e-9);
  ASSERT_TRUE(r.matrix.has_value());
  EXPECT_LE((*r.matrix - diag41()).cwiseAbs().maxCoeff(), 1e-8);
  // B''(0) = H(e_1)^-2 d^2_11 (B o H)(0) = 1 for B = t^2/2.
  EXPECT_NEAR(r.origin.b2_from_hessian.limit, 1.0, 1e-8);
}

TEST(Characterize, L4IsRejectedWithADiagonalWitness) {
  const auto r = characterize_matrix_form(Anisotropy<2>::sphere_graph(theta_l4<2>()), BProfile::power(2.0), 1e-9);
  EXPECT_FALSE(r.matrix.has_value());
  EXPECT_NEAR(std::abs(r.witness(0)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(std::abs(r.witness(1)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.defect, 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Characterize, EuclideanGivesIdentity) {
  const auto r = characterize_matrix_form(Anisotropy<3>::euclidean(), BProfile::power(2.0), 1e-9);
  ASSERT_TRUE(r.matrix.has_value());
  EXPECT_LE((*r.matrix - Mat<3>::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}
