#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "wristlink/signal.hpp"

namespace wristlink {

inline constexpr std::size_t kAxisFeatureCount = 32;
inline constexpr std::size_t kFeatureCount = 3 * kAxisFeatureCount;
inline constexpr std::size_t kMinSeriesLength = 8;

/// Per-axis feature order. Indices 0..20 are temporal, 21..28 spectral, and
/// 29..31 are the lag-2 / lower-quartile variants that complete the 32.
enum class AxisFeature : std::size_t {
  Mean,
  StdDev,
  InterquartileRange,
  AbsEnergy,
  MeanAbsDeviation,
  StdErrorOfMean,
  MeanChange,
  Autocovariance1,
  LongestStrikeAboveMean,
  Variance,
  AbsSumOfChanges,
  Kurtosis,
  SampleEntropy,
  Autocorrelation1,
  MeanAbsChange,
  Sum,
  Skewness,
  Quantile75,
  Median,
  LongestStrikeBelowMean,
  ComplexityInvariantDistance,
  SpectralCentroid,
  SpectralFlatness,
  SpectralKurtosis,
  SpectralSkewness,
  SpectralDecrease,
  SpectralSpread,
  SpectralRolloff,
  SpectralSlope,
  Autocorrelation2,
  Quantile25,
  Autocovariance2,
};

using AxisFeatures = std::array<double, kAxisFeatureCount>;

/// The ordered per-axis feature identifiers.
std::span<const std::string_view> axis_feature_names();

/// 96 names: x_<feature>, then y_<feature>, then z_<feature>.
const std::vector<std::string>& feature_names();

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::span<const double> axis(Axis a) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(a) * kAxisFeatureCount,
                                                   kAxisFeatureCount);
  }
};

AxisFeatures extract_axis_features(std::span<const double> series, double sample_rate_hz);

FeatureVector extract(const GyroTrace& segment);

namespace feature_detail {
// Individual estimators, exposed for tests.
double sample_entropy(std::span<const double> x, int m = 2, double r_factor = 0.2);
double autocovariance(std::span<const double> x, std::size_t lag);
double autocorrelation(std::span<const double> x, std::size_t lag);
std::size_t longest_strike_above_mean(std::span<const double> x);
std::size_t longest_strike_below_mean(std::span<const double> x);
/// One-sided magnitude spectrum of the mean-removed series; index 0 is DC.
std::vector<double> magnitude_spectrum(std::span<const double> x);
}  // namespace feature_detail

struct Standardizer {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};

  FeatureVector apply(const FeatureVector& v) const;
};

Standardizer fit_standardizer(std::span<const FeatureVector> dataset);
FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v);

}  // namespace wristlink
