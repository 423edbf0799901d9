#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gwsnake {

// Standard normal CDF through erfc (double precision, well below 1e-10 error).
double normal_cdf(double z);

// Kolmogorov-Smirnov distance between the empirical law of xs and N(0,1).
double ks_statistic_normal(std::vector<double> xs);

double mean(std::span<const double> xs);
// Unbiased sample variance.
double variance(std::span<const double> xs);
double median(std::vector<double> xs);
double correlation(std::span<const double> xs, std::span<const double> ys);

// Replica-level resampling: counts[b][i] is how often replica i appears in
// resample b. Fixed seed, so the same plan is reused by every statistic.
class BootstrapPlan {
 public:
  BootstrapPlan(std::size_t replicas, std::size_t resamples, std::uint64_t seed);

  std::size_t resamples() const { return resamples_; }
  std::size_t replicas() const { return replicas_; }
  std::span<const std::uint32_t> counts(std::size_t b) const {
    return {counts_.data() + b * replicas_, replicas_};
  }

  // Standard error of sum(w * num) / sum(w * den) over resamples.
  double ratio_se(std::span<const double> num, std::span<const double> den) const;
  double correlation_se(std::span<const double> xs, std::span<const double> ys) const;

 private:
  std::size_t replicas_;
  std::size_t resamples_;
  std::vector<std::uint32_t> counts_;
};

}  // namespace gwsnake
