#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "semalign/rng.hpp"

namespace semalign {

/// Distribution over a finite vocabulary. Entries are >= 0 and sum to 1
/// within 1e-9 (validated by make_prob_vector).
struct ProbVector {
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t i) const { return p[i]; }
};

inline constexpr double kProbSumTol = 1e-9;

inline ProbVector make_prob_vector(std::vector<double> entries) {
  if (entries.empty()) throw std::invalid_argument("probability vector is empty");
  double sum = 0.0;
  for (double v : entries) {
    if (!(v >= 0.0)) throw std::invalid_argument("probability entries must be >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    throw std::invalid_argument("probability vector must sum to 1 within 1e-9");
  return ProbVector{std::move(entries)};
}

inline ProbVector softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return ProbVector{std::move(out)};
}

/// Shannon entropy in nats, with 0 log 0 = 0.
inline double shannon_entropy(const ProbVector& p) {
  double h = 0.0;
  for (double v : p.p)
    if (v > 0.0) h -= v * std::log(v);
  return std::max(h, 0.0);
}

inline double top1(const ProbVector& p) {
  return *std::max_element(p.p.begin(), p.p.end());
}

/// KL(p || q) in nats. Where p_j > 0 and q_j = 0 the divergence is +inf
/// (absolute-continuity violation); the sentinel keeps metric evaluation
/// total over arbitrary model outputs.
inline double kl_divergence(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("KL: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) return std::numeric_limits<double>::infinity();
    acc += p[j] * std::log(p[j] / q[j]);
  }
  return std::max(acc, 0.0);
}

/// Fisher-Rao geodesic distance on the simplex through the Hellinger
/// embedding: 2 arccos <sqrt(p), sqrt(q)>, in [0, pi].
inline double fisher_rao(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("fisher_rao: length mismatch");
  double bc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) bc += std::sqrt(p[j] * q[j]);
  bc = std::clamp(bc, 0.0, 1.0);
  return 2.0 * std::acos(bc);
}

/// Reweights p by temperature tau (p^(1/tau), renormalized).
inline ProbVector apply_temperature(const ProbVector& p, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (tau == 1.0) return p;
  std::vector<double> w(p.size());
  double z = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    w[j] = p[j] > 0.0 ? std::pow(p[j], 1.0 / tau) : 0.0;
    z += w[j];
  }
  for (double& v : w) v /= z;
  return ProbVector{std::move(w)};
}

/// Top-p (nucleus) sampling with optional top-k truncation. Tokens are
/// sorted by decreasing probability (ties broken by lower index), truncated
/// to the k most probable when k > 0, cut off at the smallest prefix with
/// cumulative mass >= p0, renormalized and sampled. Only nucleus tokens can
/// be returned.
inline int top_p_sample(const ProbVector& p, double p0, int k, Rng& rng) {
  if (!(p0 > 0.0) || p0 > 1.0) throw std::invalid_argument("p0 must lie in (0, 1]");
  if (k < 0) throw std::invalid_argument("k must be >= 0");

  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p[a] > p[b]; });
  if (k > 0 && static_cast<std::size_t>(k) < order.size()) order.resize(k);

  std::size_t nucleus = order.size();
  double cum = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    cum += p[order[i]];
    if (cum >= p0) {
      nucleus = i + 1;
      break;
    }
  }
  order.resize(nucleus);

  double mass = 0.0;
  for (int idx : order) mass += p[idx];
  const double u = rng.uniform() * mass;
  double acc = 0.0;
  for (int idx : order) {
    acc += p[idx];
    if (u < acc) return idx;
  }
  return order.back();
}

}  // namespace semalign
