#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "semalign/manifold.hpp"
#include "semalign/rng.hpp"

namespace semalign {

/**
 * Hierarchical alignment dynamics: a fixed anchor state and peripheral
 * agents descending the squared-geodesic-distance loss toward it, either
 * as a smooth gradient flow or as (possibly noisy) discrete descent.
 */

/// The anchor a = x_0. Held by value and never mutated by any operation.
struct AnchorState {
  Point point;
};

struct AgentState {
  int id = 0;
  Point point;
};

/// Stepsize schedule alpha_t. The Robbins-Monro form alpha0 / (1 + lambda*t)
/// satisfies sum(alpha) = inf and sum(alpha^2) < inf by construction.
class StepSchedule {
 public:
  static StepSchedule constant(double alpha) {
    check_alpha(alpha, "alpha");
    StepSchedule s;
    s.alpha0_ = alpha;
    s.lambda_ = 0.0;
    return s;
  }

  static StepSchedule robbins_monro(double alpha0, double lambda) {
    check_alpha(alpha0, "alpha0");
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be > 0");
    StepSchedule s;
    s.alpha0_ = alpha0;
    s.lambda_ = lambda;
    return s;
  }

  double at(std::int64_t t) const { return alpha0_ / (1.0 + lambda_ * static_cast<double>(t)); }
  bool diminishing() const { return lambda_ > 0.0; }
  double alpha0() const { return alpha0_; }
  double lambda() const { return lambda_; }

 private:
  static void check_alpha(double a, const char* name) {
    if (!(a > 0.0) || a > 0.5)
      throw std::invalid_argument(std::string(name) +
                                  " must lie in (0, 0.5] for the contraction guarantee");
  }
  StepSchedule() = default;
  double alpha0_ = 0.0;
  double lambda_ = 0.0;
};

struct NoiseSpec {
  double sigma = 0.0;
  /// Default: noise enters as alpha_t * xi (the form whose Robbins-Monro
  /// convergence is guaranteed). false injects xi unscaled, for ablation.
  bool scale_by_stepsize = true;
};

struct TrajectoryKind {
  enum class Mode { SmoothFlow, DeterministicDescent, StochasticDescent };

  static TrajectoryKind smooth_flow(double dt = 1e-3) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    return {Mode::SmoothFlow, dt};
  }
  static TrajectoryKind deterministic_descent() { return {Mode::DeterministicDescent, 0.0}; }
  static TrajectoryKind stochastic_descent() { return {Mode::StochasticDescent, 0.0}; }

  Mode mode;
  double dt;
};

struct TrajectoryRow {
  std::int64_t step;
  double time;  // step * dt for the flow, step index for descent
  Point point;
  double distance;
  double loss;      // d^2
  double lyapunov;  // d^2 / 2
};

struct AlignmentRun {
  std::vector<TrajectoryRow> trajectory;
  AgentState final_state;
  bool converged = false;
  std::int64_t steps = 0;
};

struct RecordOptions {
  /// Record every stride-th step (step 0 and the final step always).
  std::int64_t stride = 1;
};

inline double global_loss(const AnchorState& anchor,
                          const std::vector<AgentState>& agents) {
  double acc = 0.0;
  for (const AgentState& agent : agents) {
    const double d = geodesic_distance(anchor.point, agent.point);
    acc += d * d;
  }
  return acc;
}

inline double lyapunov_value(const AnchorState& anchor, const AgentState& agent) {
  const double d = geodesic_distance(anchor.point, agent.point);
  return 0.5 * d * d;
}

/// Riemannian gradient of f(x) = d(a, x)^2, namely -2 * log_x(a).
/// Its metric norm is 2 d(a, x); the descent direction is its negation.
inline TangentVector riemannian_gradient(const AnchorState& anchor,
                                         const AgentState& agent) {
  TangentVector toward = log_map(agent.point, anchor.point);
  toward.components *= -2.0;
  return toward;
}

/// One classical four-stage Runge-Kutta step of the gradient flow
/// Dx/dt = 2 log_x(a), with retraction through exp_map. The flow field is
/// radial along the geodesic through x and a, and parallel transport along
/// that geodesic preserves both the radial direction and magnitudes, so the
/// four stage velocities reduce to scalar stages on the distance.
inline AgentState flow_step(const AnchorState& anchor, const AgentState& agent,
                            double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const double s0 = geodesic_distance(anchor.point, agent.point);
  if (s0 == 0.0) return agent;

  const double k1 = -2.0 * s0;
  const double k2 = -2.0 * (s0 + 0.5 * dt * k1);
  const double k3 = -2.0 * (s0 + 0.5 * dt * k2);
  const double k4 = -2.0 * (s0 + dt * k3);
  const double s1 = s0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (std::abs(s1) >= s0)
    throw std::domain_error("flow_step: dt too large, step does not contract");

  TangentVector toward = log_map(agent.point, anchor.point);
  toward.components *= (s0 - s1) / s0;
  return AgentState{agent.id, exp_map(toward)};
}

/// Discrete update with an explicitly supplied noise realization:
///   x' = exp_x( alpha * 2 * log_x(a) + [alpha *] xi ).
inline AgentState sgd_step_with_noise(const AnchorState& anchor,
                                      const AgentState& agent, double alpha_t,
                                      const Eigen::VectorXd& xi,
                                      bool scale_noise_by_stepsize = true) {
  if (!(alpha_t > 0.0) || alpha_t > 0.5)
    throw std::invalid_argument("alpha_t must lie in (0, 0.5]");
  TangentVector step = log_map(agent.point, anchor.point);
  step.components *= 2.0 * alpha_t;
  if (xi.size() != 0) {
    if (xi.size() != step.components.size())
      throw std::invalid_argument("noise dimension mismatch");
    step.components += (scale_noise_by_stepsize ? alpha_t : 1.0) * xi;
  }
  return AgentState{agent.id, exp_map(step)};
}

/// Noisy gradient step in the tangent space; xi ~ isotropic Gaussian of
/// scale noise.sigma at the current point. With sigma = 0 on Euclidean
/// space this contracts the anchor distance by exactly (1 - 2 alpha_t).
inline AgentState sgd_step(const AnchorState& anchor, const AgentState& agent,
                           double alpha_t, const NoiseSpec& noise, Rng& rng) {
  Eigen::VectorXd xi;
  if (noise.sigma > 0.0)
    xi = sample_tangent_gaussian(agent.point, noise.sigma, rng).components;
  return sgd_step_with_noise(anchor, agent, alpha_t, xi, noise.scale_by_stepsize);
}

/// Iterates the selected step rule until d(a, x) <= tol or max_steps is
/// reached. Non-convergence is reported through the flag, not an exception.
/// An initial state exactly equal to the anchor returns immediately with an
/// empty trajectory.
inline AlignmentRun run_alignment(const AnchorState& anchor,
                                  const AgentState& initial,
                                  const TrajectoryKind& kind,
                                  const StepSchedule& schedule,
                                  const NoiseSpec& noise, double tol,
                                  std::int64_t max_steps, Rng& rng,
                                  const RecordOptions& record = {}) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (record.stride < 1) throw std::invalid_argument("stride must be >= 1");
  detail::require_same_manifold(anchor.point, initial.point);

  AlignmentRun run{{}, initial, false, 0};

  if (initial.point.coords == anchor.point.coords) {
    run.converged = true;
    run.steps = 0;
    return run;
  }

  const double dt = kind.mode == TrajectoryKind::Mode::SmoothFlow ? kind.dt : 1.0;
  AgentState state = initial;
  double dist = geodesic_distance(anchor.point, state.point);

  const auto record_row = [&](std::int64_t step) {
    if (!run.trajectory.empty() && run.trajectory.back().step == step) return;
    run.trajectory.push_back(TrajectoryRow{step, static_cast<double>(step) * dt,
                                           state.point, dist, dist * dist,
                                           0.5 * dist * dist});
  };

  record_row(0);
  run.converged = dist <= tol;

  std::int64_t t = 0;
  while (!run.converged && t < max_steps) {
    switch (kind.mode) {
      case TrajectoryKind::Mode::SmoothFlow:
        state = flow_step(anchor, state, kind.dt);
        break;
      case TrajectoryKind::Mode::DeterministicDescent:
        state = sgd_step_with_noise(anchor, state, schedule.at(t), {});
        break;
      case TrajectoryKind::Mode::StochasticDescent:
        state = sgd_step(anchor, state, schedule.at(t), noise, rng);
        break;
    }
    ++t;
    dist = geodesic_distance(anchor.point, state.point);
    run.converged = dist <= tol;
    if (t % record.stride == 0 || run.converged || t == max_steps) record_row(t);
  }

  run.final_state = state;
  run.steps = t;
  return run;
}

struct ConvergenceReport {
  double fitted_rate;  // exponential decay rate mu: the negated slope of ln d vs time
  double r_squared;
  bool monotone;  // Lyapunov sequence never increases (1e-12 slack)
};

/// Least-squares fit of ln d(a, x(t)) against elapsed time over the
/// recorded rows. Needs at least 10 rows with positive distance.
inline ConvergenceReport convergence_report(const AlignmentRun& run) {
  std::vector<double> ts, lds;
  for (const TrajectoryRow& row : run.trajectory) {
    if (row.distance > 0.0) {
      ts.push_back(row.time);
      lds.push_back(std::log(row.distance));
    }
  }
  if (ts.empty())
    throw std::domain_error("convergence_report: all distances are zero (degenerate fit)");
  if (ts.size() < 10)
    throw std::invalid_argument("convergence_report: needs >= 10 recorded steps with positive distance");

  const auto n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += lds[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (size_t i = 0; i < ts.size(); ++i) {
    const double dt = ts[i] - mt;
    const double dl = lds[i] - ml;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (stt == 0.0)
    throw std::domain_error("convergence_report: degenerate time axis");
  const double slope = stl / stt;
  const double r2 = sll == 0.0 ? 1.0 : (stl * stl) / (stt * sll);

  bool monotone = true;
  for (size_t i = 1; i < run.trajectory.size(); ++i) {
    if (run.trajectory[i].lyapunov > run.trajectory[i - 1].lyapunov + 1e-12) {
      monotone = false;
      break;
    }
  }
  return ConvergenceReport{-slope, r2, monotone};
}

}  // namespace semalign
