#include "bbp/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace bbp {

double SpectralDistribution::total_probability() const {
  double total = 0.0;
  for (const auto& p : points) total += p.probability;
  return total;
}

double SpectralDistribution::mean() const { return moment(1); }

double SpectralDistribution::moment(int order) const {
  double sum = 0.0;
  for (const auto& p : points) sum += std::pow(p.value, order) * p.probability;
  return sum;
}

double SpectralDistribution::central_moment(int order) const {
  const double m = mean();
  double sum = 0.0;
  for (const auto& p : points) sum += std::pow(p.value - m, order) * p.probability;
  return sum;
}

double SpectralDistribution::expectation(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (const auto& p : points) sum += f(p.value) * p.probability;
  return sum;
}

SpectralDistribution merge_support(std::vector<SpectralPoint> points, double tolerance) {
  std::stable_sort(points.begin(), points.end(),
                   [](const SpectralPoint& a, const SpectralPoint& b) { return a.value < b.value; });
  SpectralDistribution out;
  out.points.reserve(points.size());
  std::size_t i = 0;
  while (i < points.size()) {
    std::size_t j = i + 1;
    while (j < points.size() && points[j].value - points[j - 1].value <= tolerance) ++j;
    double mass = 0.0;
    double weighted = 0.0;
    double plain = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      mass += points[k].probability;
      weighted += points[k].probability * points[k].value;
      plain += points[k].value;
    }
    const double value = mass > 0.0 ? weighted / mass : plain / static_cast<double>(j - i);
    out.points.push_back({value, mass});
    i = j;
  }
  return out;
}

SpectralDistribution convolve(const SpectralDistribution& x, const SpectralDistribution& y, double tolerance) {
  std::vector<SpectralPoint> sums;
  sums.reserve(x.points.size() * y.points.size());
  for (const auto& a : x.points) {
    for (const auto& b : y.points) sums.push_back({a.value + b.value, a.probability * b.probability});
  }
  SpectralDistribution out = merge_support(std::move(sums), tolerance);
  out.truncation_tail = std::max(x.truncation_tail, y.truncation_tail);
  return out;
}

double total_variation(const SpectralDistribution& a, const SpectralDistribution& b, double support_tolerance) {
  // Chain-cluster the union of both supports, then compare mass per cluster.
  struct Tagged {
    double value;
    double probability;
    int side;
  };
  std::vector<Tagged> all;
  all.reserve(a.points.size() + b.points.size());
  for (const auto& p : a.points) all.push_back({p.value, p.probability, 0});
  for (const auto& p : b.points) all.push_back({p.value, p.probability, 1});
  std::stable_sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) { return x.value < y.value; });
  double l1 = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    double diff = all[i].side == 0 ? all[i].probability : -all[i].probability;
    std::size_t j = i + 1;
    while (j < all.size() && all[j].value - all[j - 1].value <= support_tolerance) {
      diff += all[j].side == 0 ? all[j].probability : -all[j].probability;
      ++j;
    }
    l1 += std::abs(diff);
    i = j;
  }
  return 0.5 * l1;
}

double cdf_at(const SpectralDistribution& d, double x) {
  double sum = 0.0;
  for (const auto& p : d.points) {
    if (p.value > x) break;
    sum += p.probability;
  }
  return sum;
}

}  // namespace bbp
