#include "semalign/manifold.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "testutil.hpp"

using namespace semalign;
using test::random_point;
using test::random_point_near;

namespace {

const ManifoldKind kEuclid2 = ManifoldKind::euclidean(2);
const ManifoldKind kSphere2 = ManifoldKind::sphere(2);
const ManifoldKind kSphere3 = ManifoldKind::sphere(3);
const ManifoldKind kBall2 = ManifoldKind::poincare_ball(2);

Eigen::Vector2d vec2(double a, double b) { return Eigen::Vector2d(a, b); }

}  // namespace

TEST(ManifoldPoint, MembershipValidation) {
  EXPECT_NO_THROW(make_point(kEuclid2, vec2(3, -4)));
  EXPECT_NO_THROW(make_point(kSphere2, vec2(0, 1)));
  EXPECT_THROW(make_point(kSphere2, vec2(0.5, 0.5)), std::invalid_argument);
  EXPECT_NO_THROW(make_point(kBall2, vec2(0.9, 0)));
  EXPECT_THROW(make_point(kBall2, vec2(1.0, 0)), std::invalid_argument);
  EXPECT_THROW(make_point(kEuclid2, vec2(std::nan(""), 0)), std::invalid_argument);
  EXPECT_THROW(make_point(kEuclid2, Eigen::Vector3d(1, 2, 3)), std::invalid_argument);
}

TEST(ManifoldPoint, SphereTangentMustBeOrthogonal) {
  const Point x = make_point(kSphere2, vec2(1, 0));
  EXPECT_NO_THROW(make_tangent(x, vec2(0, 2)));
  EXPECT_THROW(make_tangent(x, vec2(0.1, 2)), std::invalid_argument);
}

TEST(ExpMap, EuclideanIsVectorAddition) {
  const Point x = make_point(kEuclid2, vec2(1, 1));
  const Point y = exp_map(make_tangent(x, vec2(2, 3)));
  EXPECT_NEAR(y.coords[0], 3.0, 1e-15);
  EXPECT_NEAR(y.coords[1], 4.0, 1e-15);
}

TEST(ExpMap, SphereQuarterTurn) {
  const Point x = make_point(kSphere2, vec2(1, 0));
  const Point y = exp_map(make_tangent(x, vec2(0, std::numbers::pi / 2)));
  EXPECT_NEAR(y.coords[0], 0.0, 1e-12);
  EXPECT_NEAR(y.coords[1], 1.0, 1e-12);
}

// Oracle: on the ball, the radial geodesic distance is d(0, r) = 2*artanh(r),
// so a tangent of metric length L at the origin must land at r = tanh(L/2).
TEST(ExpMap, PoincareBallRadialOracle) {
  const Point origin = make_point(kBall2, vec2(0, 0));
  const Point y = exp_map(make_tangent(origin, vec2(1, 0)));
  const double expect_r = std::tanh(0.5);
  EXPECT_NEAR(y.coords[0], expect_r, 1e-12);
  EXPECT_NEAR(y.coords[1], 0.0, 1e-12);
  EXPECT_NEAR(y.coords[0], 0.46212, 1e-5);  // frozen from the oracle
}

TEST(ExpMap, SphereInjectivityRadius) {
  const Point x = make_point(kSphere2, vec2(1, 0));
  EXPECT_THROW(exp_map(make_tangent(x, vec2(0, std::numbers::pi))), std::domain_error);
  EXPECT_THROW(exp_map(TangentVector{x, vec2(0, std::nan(""))}), std::invalid_argument);
}

TEST(LogMap, EuclideanDifference) {
  const Point x = make_point(kEuclid2, vec2(1, 0));
  const Point y = make_point(kEuclid2, vec2(4, 4));
  const TangentVector v = log_map(x, y);
  EXPECT_NEAR(v.components[0], 3.0, 1e-15);
  EXPECT_NEAR(v.components[1], 4.0, 1e-15);
}

TEST(LogMap, IdenticalPointsGiveZero) {
  for (const auto& m : {kEuclid2, kSphere3, kBall2}) {
    Rng rng(11);
    const Point x = random_point(m, rng);
    EXPECT_NEAR(tangent_norm(log_map(x, x)), 0.0, 1e-15) << m.name();
  }
}

TEST(LogMap, SphereOrthonormalGreatCircle) {
  const Point e1 = make_point(kSphere3, Eigen::Vector3d(1, 0, 0));
  const Point e2 = make_point(kSphere3, Eigen::Vector3d(0, 1, 0));
  const TangentVector v = log_map(e1, e2);
  EXPECT_NEAR(tangent_norm(v), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(v.components[1], std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(v.components[0], 0.0, 1e-12);
  EXPECT_NEAR(v.components[2], 0.0, 1e-12);
}

TEST(LogMap, SphereAntipodalIsError) {
  const Point e1 = make_point(kSphere3, Eigen::Vector3d(1, 0, 0));
  const Point me1 = make_point(kSphere3, Eigen::Vector3d(-1, 0, 0));
  EXPECT_THROW(log_map(e1, me1), std::domain_error);
}

TEST(LogMap, MismatchedManifoldsAreError) {
  const Point a = make_point(kEuclid2, vec2(0, 0));
  const Point b = make_point(kBall2, vec2(0, 0));
  EXPECT_THROW(log_map(a, b), std::invalid_argument);
  EXPECT_THROW(geodesic_distance(a, b), std::invalid_argument);
}

TEST(GeodesicDistance, EuclideanPythagorean) {
  const Point a = make_point(kEuclid2, vec2(0, 0));
  const Point b = make_point(kEuclid2, vec2(3, 4));
  EXPECT_NEAR(geodesic_distance(a, b), 5.0, 1e-15);
}

TEST(GeodesicDistance, SphereAntipodalArc) {
  const Point e1 = make_point(kSphere3, Eigen::Vector3d(1, 0, 0));
  const Point me1 = make_point(kSphere3, Eigen::Vector3d(-1, 0, 0));
  EXPECT_NEAR(geodesic_distance(e1, me1), std::numbers::pi, 1e-12);
}

// Oracle: numeric line integral of the conformal metric 2/(1-r^2) along the
// radius, independent of the closed form used by the implementation.
TEST(GeodesicDistance, PoincareBallRadialQuadratureOracle) {
  const Point origin = make_point(kBall2, vec2(0, 0));
  const Point y = make_point(kBall2, vec2(0.5, 0));
  const double oracle =
      test::simpson([](double r) { return 2.0 / (1.0 - r * r); }, 0.0, 0.5);
  EXPECT_NEAR(oracle, std::log(3.0), 1e-10);  // sanity on the oracle itself
  EXPECT_NEAR(geodesic_distance(origin, y), oracle, 1e-9);
}

TEST(GeodesicDistance, RoundTripProperty) {
  // d(exp_x(log_x y), y) small for random pairs within the injectivity radius.
  struct Case { ManifoldKind m; double tol; };
  for (const auto& c : {Case{kEuclid2, 1e-9}, Case{kSphere3, 1e-9}, Case{kBall2, 1e-7}}) {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
      const Point x = random_point(c.m, rng, 0.95);
      const Point y = c.m.family() == ManifoldFamily::Sphere
                          ? random_point_near(x, 3.0, rng)
                          : random_point(c.m, rng, 0.95);
      const Point back = exp_map(log_map(x, y));
      EXPECT_LT(geodesic_distance(back, y), c.tol) << c.m.name() << " i=" << i;
    }
  }
}

TEST(GeodesicDistance, UnitSpeedProperty) {
  // d(x, exp_x(v)) == |v| for |v| inside the injectivity radius.
  for (const auto& m : {kEuclid2, kSphere3, kBall2}) {
    Rng rng(202);
    for (int i = 0; i < 500; ++i) {
      const Point x = random_point(m, rng);
      Eigen::VectorXd dir = test::random_vector(m.dim(), rng);
      if (m.family() == ManifoldFamily::Sphere) dir -= x.coords.dot(dir) * x.coords;
      if (dir.norm() < 1e-12) continue;
      dir.normalize();
      const double len = 0.1 + 2.8 * rng.uniform();
      const TangentVector v{x, len * dir};
      EXPECT_NEAR(geodesic_distance(x, exp_map(v)), len, 1e-9)
          << m.name() << " i=" << i;
    }
  }
}

TEST(GeodesicDistance, SymmetryProperty) {
  for (const auto& m : {kEuclid2, kSphere3, kBall2}) {
    Rng rng(303);
    for (int i = 0; i < 500; ++i) {
      const Point x = random_point(m, rng);
      const Point y = random_point(m, rng);
      EXPECT_NEAR(geodesic_distance(x, y), geodesic_distance(y, x), 1e-12);
    }
  }
}

TEST(GeodesicDistance, SampledTriangleInequality) {
  for (const auto& m : {kEuclid2, kSphere3, kBall2}) {
    Rng rng(404);
    for (int i = 0; i < 1000; ++i) {
      const Point x = random_point(m, rng);
      const Point y = random_point(m, rng);
      const Point z = random_point(m, rng);
      EXPECT_LE(geodesic_distance(x, z),
                geodesic_distance(x, y) + geodesic_distance(y, z) + 1e-9)
          << m.name() << " i=" << i;
    }
  }
}

TEST(TangentGaussian, SigmaZeroIsZeroVector) {
  Rng rng(1);
  const Point x = make_point(kSphere3, Eigen::Vector3d(0, 0, 1));
  const TangentVector v = sample_tangent_gaussian(x, 0.0, rng);
  EXPECT_EQ(tangent_norm(v), 0.0);
}

TEST(TangentGaussian, DeterministicGivenState) {
  const Point x = make_point(kEuclid2, vec2(0, 0));
  Rng a(7), b(7);
  const TangentVector va = sample_tangent_gaussian(x, 1.3, a);
  const TangentVector vb = sample_tangent_gaussian(x, 1.3, b);
  EXPECT_EQ(va.components, vb.components);
}

TEST(TangentGaussian, SphereDrawsAreTangent) {
  Rng rng(9);
  const Point x = random_point(kSphere3, rng);
  for (int i = 0; i < 100; ++i) {
    const TangentVector v = sample_tangent_gaussian(x, 0.7, rng);
    EXPECT_LT(std::abs(x.coords.dot(v.components)), 1e-12);
  }
}

// Law-of-large-numbers check on the sampler's own moments.
TEST(TangentGaussian, EuclideanMoments) {
  Rng rng(2024);
  const Point x = make_point(kEuclid2, vec2(0, 0));
  const int n = 100000;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d sq = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i) {
    const TangentVector v = sample_tangent_gaussian(x, 1.0, rng);
    mean += v.components;
    sq += v.components.cwiseProduct(v.components);
  }
  mean /= n;
  sq /= n;
  for (int k = 0; k < 2; ++k) {
    EXPECT_LT(std::abs(mean[k]), 0.02);
    EXPECT_LT(std::abs(sq[k] - mean[k] * mean[k] - 1.0), 0.05);
  }
}
