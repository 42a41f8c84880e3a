#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "semalign/rng.hpp"

namespace semalign {

/**
 * Riemannian geometry kernel for the three semantic-state spaces: flat
 * Euclidean space, the unit sphere (ambient embedding), and the Poincare
 * ball with curvature -1 (conformal factor 2 / (1 - |x|^2)).
 *
 * Tangent-vector convention: `components` are expressed in a frame where
 * the Euclidean norm of the component vector equals the metric norm of
 * the tangent vector. For Euclidean space and the embedded sphere this is
 * the ambient representation; for the Poincare ball the chart direction
 * is kept and the length is the geodesic (metric) length. The conformal
 * factor is applied inside exp/log when converting to and from chart
 * displacements, so `components.norm()` is always a geodesic length and
 * tangent-space arithmetic (gradient steps, noise) needs no extra
 * weighting.
 */

enum class ManifoldFamily { Euclidean, Sphere, PoincareBall };

class ManifoldKind {
 public:
  static ManifoldKind euclidean(int dim) { return {ManifoldFamily::Euclidean, dim}; }
  static ManifoldKind sphere(int ambient_dim) { return {ManifoldFamily::Sphere, ambient_dim}; }
  static ManifoldKind poincare_ball(int dim) { return {ManifoldFamily::PoincareBall, dim}; }

  ManifoldFamily family() const { return family_; }
  int dim() const { return dim_; }

  bool operator==(const ManifoldKind& o) const {
    return family_ == o.family_ && dim_ == o.dim_;
  }
  bool operator!=(const ManifoldKind& o) const { return !(*this == o); }

  std::string name() const {
    switch (family_) {
      case ManifoldFamily::Euclidean: return "euclidean";
      case ManifoldFamily::Sphere: return "sphere";
      case ManifoldFamily::PoincareBall: return "poincare_ball";
    }
    return "?";
  }

 private:
  ManifoldKind(ManifoldFamily f, int d) : family_(f), dim_(d) {
    if (d < 1) throw std::invalid_argument("manifold dimension must be >= 1");
    if (f == ManifoldFamily::Sphere && d < 2)
      throw std::invalid_argument("sphere needs ambient dimension >= 2");
  }

  ManifoldFamily family_;
  int dim_;
};

struct Point {
  ManifoldKind manifold;
  Eigen::VectorXd coords;
};

struct TangentVector {
  Point base;
  Eigen::VectorXd components;
};

namespace detail {

constexpr double kSphereTol = 1e-9;
constexpr double kBallBoundary = 1.0 - 1e-9;

inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite components");
}

inline void require_same_manifold(const Point& x, const Point& y) {
  if (x.manifold != y.manifold)
    throw std::invalid_argument("points live on different manifolds");
}

/// Mobius addition on the Poincare ball (curvature -1).
inline Eigen::VectorXd mobius_add(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) {
  const double xy = x.dot(y);
  const double x2 = x.squaredNorm();
  const double y2 = y.squaredNorm();
  const double denom = 1.0 + 2.0 * xy + x2 * y2;
  return ((1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y) / denom;
}

inline double artanh(double r) { return 0.5 * std::log((1.0 + r) / (1.0 - r)); }

}  // namespace detail

/// Validating constructor; throws std::invalid_argument when `coords`
/// violates the manifold's membership constraint.
inline Point make_point(const ManifoldKind& m, Eigen::VectorXd coords) {
  detail::require_finite(coords, "point");
  if (coords.size() != m.dim())
    throw std::invalid_argument("point dimension mismatch");
  switch (m.family()) {
    case ManifoldFamily::Euclidean:
      break;
    case ManifoldFamily::Sphere:
      if (std::abs(coords.norm() - 1.0) > detail::kSphereTol)
        throw std::invalid_argument("sphere point must have unit norm");
      break;
    case ManifoldFamily::PoincareBall:
      if (coords.norm() >= 1.0)
        throw std::invalid_argument("Poincare ball point must have norm < 1");
      break;
  }
  return Point{m, std::move(coords)};
}

inline TangentVector make_tangent(Point base, Eigen::VectorXd components) {
  detail::require_finite(components, "tangent vector");
  if (components.size() != base.coords.size())
    throw std::invalid_argument("tangent dimension mismatch");
  if (base.manifold.family() == ManifoldFamily::Sphere &&
      std::abs(base.coords.dot(components)) > detail::kSphereTol)
    throw std::invalid_argument("sphere tangent must be orthogonal to base");
  return TangentVector{std::move(base), std::move(components)};
}

inline TangentVector zero_tangent(const Point& base) {
  return TangentVector{base, Eigen::VectorXd::Zero(base.coords.size())};
}

/// Metric norm of a tangent vector (see the convention note above).
inline double tangent_norm(const TangentVector& v) { return v.components.norm(); }

inline double geodesic_distance(const Point& x, const Point& y) {
  detail::require_same_manifold(x, y);
  switch (x.manifold.family()) {
    case ManifoldFamily::Euclidean:
      return (y.coords - x.coords).norm();
    case ManifoldFamily::Sphere: {
      // atan2 form; acos(dot) loses ~sqrt(eps) near coincident points.
      const double c = std::clamp(x.coords.dot(y.coords), -1.0, 1.0);
      const double s = (y.coords - c * x.coords).norm();
      return std::atan2(s, c);
    }
    case ManifoldFamily::PoincareBall: {
      const Eigen::VectorXd w = detail::mobius_add(-x.coords, y.coords);
      const double r = std::min(w.norm(), detail::kBallBoundary);
      return 2.0 * detail::artanh(r);
    }
  }
  return 0.0;
}

/// Follows the geodesic from v.base with initial velocity v for unit time.
/// Throws std::domain_error when |v| reaches the sphere's injectivity
/// radius pi, std::invalid_argument on non-finite input.
inline Point exp_map(const TangentVector& v) {
  detail::require_finite(v.components, "exp_map");
  const Point& x = v.base;
  const double norm = v.components.norm();
  switch (x.manifold.family()) {
    case ManifoldFamily::Euclidean:
      return Point{x.manifold, x.coords + v.components};
    case ManifoldFamily::Sphere: {
      if (norm >= std::numbers::pi)
        throw std::domain_error("exp_map: |v| >= pi leaves the sphere's injectivity radius");
      if (norm < 1e-15) return x;
      Eigen::VectorXd out =
          std::cos(norm) * x.coords + (std::sin(norm) / norm) * v.components;
      out.normalize();  // kill accumulated drift
      return Point{x.manifold, out};
    }
    case ManifoldFamily::PoincareBall: {
      if (norm < 1e-15) return x;
      // components carry the geodesic length; tanh(d/2) is the chart
      // radius of the geodesic endpoint seen from the base point.
      const Eigen::VectorXd step = std::tanh(0.5 * norm) * (v.components / norm);
      Eigen::VectorXd out = detail::mobius_add(x.coords, step);
      const double r = out.norm();
      if (r > detail::kBallBoundary) out *= detail::kBallBoundary / r;
      return Point{x.manifold, out};
    }
  }
  throw std::logic_error("unreachable");
}

/// Inverse of exp_map: the tangent vector at x pointing to y with
/// |log_map(x,y)| = geodesic_distance(x,y). Sphere antipodes have no
/// single-valued log and raise std::domain_error.
inline TangentVector log_map(const Point& x, const Point& y) {
  detail::require_same_manifold(x, y);
  switch (x.manifold.family()) {
    case ManifoldFamily::Euclidean:
      return TangentVector{x, y.coords - x.coords};
    case ManifoldFamily::Sphere: {
      const double c = std::clamp(x.coords.dot(y.coords), -1.0, 1.0);
      if (c <= -1.0 + 1e-12)
        throw std::domain_error("log_map is undefined for antipodal sphere points");
      const Eigen::VectorXd u = y.coords - c * x.coords;
      const double s = u.norm();
      const double theta = std::atan2(s, c);
      if (theta < 1e-15) return zero_tangent(x);
      return TangentVector{x, (theta / s) * u};
    }
    case ManifoldFamily::PoincareBall: {
      const Eigen::VectorXd w = detail::mobius_add(-x.coords, y.coords);
      const double r = w.norm();
      if (r < 1e-15) return zero_tangent(x);
      const double d = 2.0 * detail::artanh(std::min(r, detail::kBallBoundary));
      return TangentVector{x, (d / r) * w};
    }
  }
  throw std::logic_error("unreachable");
}

/// Zero-mean isotropic Gaussian in the tangent space at `base`, standard
/// deviation `sigma` per tangent coordinate. Sphere draws are projected
/// onto the tangent plane (an isotropic Gaussian stays isotropic under
/// orthogonal projection). sigma = 0 returns the zero vector without
/// consuming PRNG state.
inline TangentVector sample_tangent_gaussian(const Point& base, double sigma,
                                             Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (sigma == 0.0) return zero_tangent(base);
  const auto n = base.coords.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = sigma * rng.gaussian();
  if (base.manifold.family() == ManifoldFamily::Sphere)
    g -= base.coords.dot(g) * base.coords;
  return TangentVector{base, std::move(g)};
}

}  // namespace semalign
