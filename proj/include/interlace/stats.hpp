#pragma once

#include <cmath>
#include <cstdint>

namespace interlace {

/// Counter for a Bernoulli frequency with binomial error bars.
struct Frequency {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  void add(bool hit) {
    hits += hit ? 1 : 0;
    ++trials;
  }
  void merge(const Frequency& other) {
    hits += other.hits;
    trials += other.trials;
  }
  double estimate() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials); }
  /// Binomial standard error of the estimate.
  double sigma() const {
    if (trials == 0) return 0.0;
    const double p = estimate();
    return std::sqrt(p * (1 - p) / static_cast<double>(trials));
  }
  /// Standard error using a reference probability (for tests against a known law).
  double sigma_at(double p) const {
    return trials == 0 ? 0.0 : std::sqrt(p * (1 - p) / static_cast<double>(trials));
  }
  double ci_radius(double z = 3.0) const { return z * sigma(); }
};

/// Streaming mean/variance (Welford), mergeable with Chan's update.
struct MeanStat {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  void merge(const MeanStat& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const auto n = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / n;
    m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / n;
    count += other.count;
  }
  double variance() const { return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1); }
  double sem() const { return count == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(count)); }
  double ci_radius(double z = 3.0) const { return z * sem(); }
};

/// Two-sample z statistic for equality of two frequencies (unpooled).
inline double two_sample_z(const Frequency& a, const Frequency& b) {
  const double s = std::hypot(a.sigma(), b.sigma());
  const double diff = a.estimate() - b.estimate();
  if (s == 0) return diff == 0 ? 0.0 : INFINITY;
  return diff / s;
}

/// Two-sample z statistic for equality of means.
inline double two_sample_z(const MeanStat& a, const MeanStat& b) {
  const double s = std::hypot(a.sem(), b.sem());
  const double diff = a.mean - b.mean;
  if (s == 0) return diff == 0 ? 0.0 : INFINITY;
  return diff / s;
}

}  // namespace interlace
