#include "gwsnake/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gwsnake/rng.hpp"

namespace gwsnake {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic_normal(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  if (xs.size() % 2 == 1) return xs[mid];
  const double upper = xs[mid];
  const double lower = *std::max_element(xs.begin(), xs.begin() + mid);
  return 0.5 * (lower + upper);
}

namespace {

double weighted_correlation(std::span<const double> xs, std::span<const double> ys,
                            std::span<const std::uint32_t> w) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += w[i];
    sx += w[i] * xs[i];
    sy += w[i] * ys[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double cxy = 0, cxx = 0, cyy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    cxy += w[i] * dx * dy;
    cxx += w[i] * dx * dx;
    cyy += w[i] * dy * dy;
  }
  if (cxx <= 0.0 || cyy <= 0.0) return 0.0;
  return cxy / std::sqrt(cxx * cyy);
}

double spread(const std::vector<double>& values) {
  return std::sqrt(variance(values));
}

}  // namespace

double correlation(std::span<const double> xs, std::span<const double> ys) {
  std::vector<std::uint32_t> ones(xs.size(), 1);
  return weighted_correlation(xs, ys, ones);
}

BootstrapPlan::BootstrapPlan(std::size_t replicas, std::size_t resamples, std::uint64_t seed)
    : replicas_(replicas), resamples_(resamples), counts_(replicas * resamples, 0) {
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng rng(SeedSpec{seed, b});
    for (std::size_t i = 0; i < replicas; ++i) ++counts_[b * replicas + rng.below(replicas)];
  }
}

double BootstrapPlan::ratio_se(std::span<const double> num, std::span<const double> den) const {
  std::vector<double> ratios;
  ratios.reserve(resamples_);
  for (std::size_t b = 0; b < resamples_; ++b) {
    const auto w = counts(b);
    double sn = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < replicas_; ++i) {
      sn += w[i] * num[i];
      sd += w[i] * den[i];
    }
    if (sd != 0.0) ratios.push_back(sn / sd);
  }
  return spread(ratios);
}

double BootstrapPlan::correlation_se(std::span<const double> xs, std::span<const double> ys) const {
  std::vector<double> values;
  values.reserve(resamples_);
  for (std::size_t b = 0; b < resamples_; ++b) values.push_back(weighted_correlation(xs, ys, counts(b)));
  return spread(values);
}

}  // namespace gwsnake
