#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bbp {

struct SpectralPoint {
  double value;
  double probability;
};

/// Discrete outcome distribution: support points sorted strictly increasing.
/// For normalized states the probabilities sum to one; the polarization
/// identity also uses unnormalized ones, scaled by the squared norm.
struct SpectralDistribution {
  std::vector<SpectralPoint> points;
  /// Probability the state places on basis states in the top two photon shells.
  double truncation_tail = 0.0;

  double total_probability() const;
  double mean() const;
  double moment(int order) const;
  double central_moment(int order) const;
  double variance() const { return central_moment(2); }
  double expectation(const std::function<double(double)>& f) const;
};

using MeasurementDistribution = SpectralDistribution;

/// Sorts by value and merges runs whose consecutive gaps are <= tolerance:
/// probabilities add, the value becomes the probability-weighted average
/// (plain average when the run carries no probability).
SpectralDistribution merge_support(std::vector<SpectralPoint> points, double tolerance);

/// Distribution of X + Y for independent X, Y.
SpectralDistribution convolve(const SpectralDistribution& x, const SpectralDistribution& y, double tolerance);

/// Half the l1 distance after aligning supports: points of either
/// distribution closer than `support_tolerance` to a neighbour are chained
/// into one cluster and compared by total cluster mass.
double total_variation(const SpectralDistribution& a, const SpectralDistribution& b, double support_tolerance);

/// Right-continuous CDF value at x.
double cdf_at(const SpectralDistribution& d, double x);

}  // namespace bbp
