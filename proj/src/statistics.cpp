#include "curveflow/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace curveflow {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

SampleSummary summarize(std::span<const double> samples) {
  SampleSummary s;
  s.count = samples.size();
  if (s.count == 0) return s;
  CompensatedSum total;
  for (double x : samples) total.add(x);
  s.mean = total.value() / static_cast<double>(s.count);
  if (s.count > 1) {
    CompensatedSum sq;
    for (double x : samples) sq.add((x - s.mean) * (x - s.mean));
    s.stddev = std::sqrt(sq.value() / static_cast<double>(s.count - 1));
    s.std_error = s.stddev / std::sqrt(static_cast<double>(s.count));
    s.half_width = z95 * s.std_error;
  }
  return s;
}

Interval wilson_interval(double mean, std::size_t count, double z) {
  if (count == 0) return {0.0, 1.0};
  const double n = static_cast<double>(count);
  const double p = std::clamp(mean, 0.0, 1.0);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace curveflow
