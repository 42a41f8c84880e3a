#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "semalign/alignment.hpp"
#include "semalign/manifold.hpp"
#include "semalign/prob.hpp"

namespace semalign {

/**
 * Entropy-collapse measurement: conditional entropy of agent states given
 * the anchor, estimated over an ensemble of independent runs observed at a
 * fixed step. Samples are charted into the tangent space at the anchor via
 * log_map, where both a histogram estimator and a Gaussian plug-in
 * estimator operate.
 *
 * Reporting conventions: the discrete histogram (bin width declared with
 * every estimate, bins centered on integer multiples of the width) stays
 * nonnegative and collapses to 0; the Gaussian plug-in is a differential
 * entropy and may be negative, collapsing toward -inf. Both are reported
 * side by side. A zero-variance ensemble yields a degenerate sentinel
 * rather than -inf so reports stay finite.
 */

inline constexpr double kDefaultBinWidth = 0.01;

struct Ensemble {
  AnchorState anchor;
  std::vector<Point> samples;
  std::vector<Eigen::VectorXd> chart;  // log_map(anchor, sample) components
};

inline Ensemble make_ensemble(const AnchorState& anchor,
                              std::vector<Point> samples) {
  if (samples.empty()) throw std::invalid_argument("ensemble needs >= 1 sample");
  std::vector<Eigen::VectorXd> chart;
  chart.reserve(samples.size());
  for (const Point& s : samples)
    chart.push_back(log_map(anchor.point, s).components);
  return Ensemble{anchor, std::move(samples), std::move(chart)};
}

enum class EntropyMethod { DiscreteHistogram, GaussianPlugin };

inline const char* entropy_method_name(EntropyMethod m) {
  return m == EntropyMethod::DiscreteHistogram ? "discrete-histogram"
                                               : "gaussian-plugin";
}

struct EntropyEstimate {
  double value = 0.0;  // nats
  EntropyMethod method = EntropyMethod::DiscreteHistogram;
  /// Bin width for the histogram; mean fitted per-axis variance for the
  /// Gaussian plug-in.
  double parameter = 0.0;
  /// Zero-variance ensemble: value is not meaningful, reported as sentinel.
  bool degenerate = false;
};

/// Shannon entropy of a discrete distribution, in nats.
inline double discrete_entropy(const ProbVector& p) { return shannon_entropy(p); }

/// Differential entropy of an isotropic Gaussian with per-dimension
/// variance sigma2: (dims/2) ln(2 pi e sigma2).
inline double gaussian_differential_entropy(double sigma2, int dims) {
  if (dims < 1) throw std::invalid_argument("dims must be >= 1");
  if (!(sigma2 > 0.0))
    throw std::domain_error("sigma2 must be > 0 (degenerate ensembles report a sentinel)");
  return 0.5 * static_cast<double>(dims) *
         std::log(2.0 * std::numbers::pi * std::numbers::e * sigma2);
}

inline EntropyEstimate ensemble_conditional_entropy(
    const Ensemble& e, EntropyMethod method,
    double bin_width = kDefaultBinWidth) {
  const std::size_t n = e.chart.size();
  if (n == 0) throw std::invalid_argument("empty ensemble");
  const auto dims = e.chart.front().size();

  if (method == EntropyMethod::GaussianPlugin) {
    if (n < 2)
      throw std::invalid_argument("gaussian-plugin needs >= 2 samples");
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dims);
    for (const auto& c : e.chart) mean += c;
    mean /= static_cast<double>(n);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dims);
    for (const auto& c : e.chart) {
      const Eigen::VectorXd d = c - mean;
      var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(n - 1);

    const double mean_var = var.mean();
    if (var.minCoeff() <= 0.0)
      return EntropyEstimate{0.0, method, mean_var, true};

    double h = 0.0;  // diagonal Gaussian: sum of per-axis entropies
    for (Eigen::Index k = 0; k < dims; ++k)
      h += gaussian_differential_entropy(var[k], 1);
    return EntropyEstimate{h, method, mean_var, false};
  }

  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be > 0");
  // Bins centered at integer multiples of the width: an ensemble collapsed
  // onto the anchor (chart coordinates at 0) lands in a single bin.
  std::map<std::vector<long long>, std::size_t> counts;
  std::vector<long long> key(dims);
  for (const auto& c : e.chart) {
    for (Eigen::Index k = 0; k < dims; ++k)
      key[k] = llround(c[k] / bin_width);
    ++counts[key];
  }
  double h = 0.0;
  for (const auto& [bin, count] : counts) {
    const double f = static_cast<double>(count) / static_cast<double>(n);
    h -= f * std::log(f);
  }
  return EntropyEstimate{std::max(h, 0.0), method, bin_width, false};
}

/// Plug-in identity I(X; A) = H(X) - H(X | A). Both estimates must come
/// from the same method (and binning, for the histogram).
inline double mutual_information(const EntropyEstimate& h_x,
                                 const EntropyEstimate& h_x_given_a) {
  if (h_x.method != h_x_given_a.method)
    throw std::invalid_argument("mutual_information: estimator method mismatch");
  if (h_x.method == EntropyMethod::DiscreteHistogram &&
      h_x.parameter != h_x_given_a.parameter)
    throw std::invalid_argument("mutual_information: histogram bin width mismatch");
  return h_x.value - h_x_given_a.value;
}

}  // namespace semalign
