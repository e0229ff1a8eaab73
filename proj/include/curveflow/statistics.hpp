#pragma once

#include <cstddef>
#include <span>

namespace curveflow {

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr double z95 = 1.959963984540054;

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;       // unbiased sample standard deviation
  double std_error = 0.0;    // stddev / sqrt(count)
  double half_width = 0.0;   // 95% normal half-width
};

/// Summary of independent samples, reduced in index order.
SampleSummary summarize(std::span<const double> samples);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a mean of [0,1]-valued samples over `count`
/// independent members. Bernoulli variance bounds the variance of any
/// [0,1]-valued variable with the same mean, so this is conservative.
Interval wilson_interval(double mean, std::size_t count, double z = z95);

}  // namespace curveflow
