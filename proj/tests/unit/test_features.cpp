#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wristlink/error.hpp"
#include "wristlink/features.hpp"
#include "wristlink/rng.hpp"
#include "wristlink/stats.hpp"

using namespace wristlink;

namespace {

double at(const AxisFeatures& f, AxisFeature k) { return f[static_cast<std::size_t>(k)]; }

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() + 0.3 * std::sin(0.2 * static_cast<double>(&x - v.data()));
  return v;
}

}  // namespace

TEST_CASE("feature names") {
  CHECK(axis_feature_names().size() == kAxisFeatureCount);
  const auto& names = feature_names();
  REQUIRE(names.size() == 96);
  CHECK(names[0] == "x_mean");
  CHECK(names[32] == "y_mean");
  CHECK(names[64] == "z_mean");
}

TEST_CASE("temporal features on small series") {
  const std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8};
  const auto f = extract_axis_features(s, 60.0);
  CHECK(at(f, AxisFeature::Mean) == doctest::Approx(4.5));
  CHECK(at(f, AxisFeature::AbsEnergy) == doctest::Approx(204.0));
  CHECK(at(f, AxisFeature::Sum) == doctest::Approx(36.0));
  CHECK(at(f, AxisFeature::Median) == doctest::Approx(4.5));
  CHECK(at(f, AxisFeature::MeanChange) == doctest::Approx(1.0));
  CHECK(at(f, AxisFeature::MeanAbsChange) == doctest::Approx(1.0));
  CHECK(at(f, AxisFeature::AbsSumOfChanges) == doctest::Approx(7.0));
  CHECK(at(f, AxisFeature::ComplexityInvariantDistance) == doctest::Approx(std::sqrt(7.0)));
  CHECK(at(f, AxisFeature::Quantile75) == doctest::Approx(6.25));
  CHECK(at(f, AxisFeature::Quantile25) == doctest::Approx(2.75));
  CHECK(at(f, AxisFeature::InterquartileRange) == doctest::Approx(3.5));
  CHECK(at(f, AxisFeature::Skewness) == doctest::Approx(0.0));
  CHECK(at(f, AxisFeature::StdErrorOfMean) ==
        doctest::Approx(at(f, AxisFeature::StdDev) / std::sqrt(8.0)));

  const std::vector<double> abc{1, 2, 3};
  CHECK(stats::mean(abc) == doctest::Approx(2.0));

  const std::vector<double> strike{0, 5, 5, 5, 0};
  CHECK(feature_detail::longest_strike_above_mean(strike) == 3);
  CHECK(feature_detail::longest_strike_below_mean(strike) == 1);

  CHECK_THROWS_AS(extract_axis_features(abc, 60.0), Error);
}

TEST_CASE("constant series") {
  const std::vector<double> c(20, 3.0);
  const auto f = extract_axis_features(c, 60.0);
  CHECK(at(f, AxisFeature::SampleEntropy) == 0.0);
  CHECK(at(f, AxisFeature::Skewness) == 0.0);
  CHECK(at(f, AxisFeature::Kurtosis) == 0.0);
  for (double v : f) CHECK(std::isfinite(v));
}

TEST_CASE("extract concatenates axes") {
  const auto x = random_series(90, 1);
  const auto z = random_series(90, 2);
  const auto t = GyroTrace::from_axes(60.0, 0.0, x, x, z);
  const auto fv = extract(t);
  for (std::size_t i = 0; i < kAxisFeatureCount; ++i) {
    CHECK(fv[i] == fv[i + kAxisFeatureCount]);
    CHECK(std::isfinite(fv[i + 2 * kAxisFeatureCount]));
  }
  const auto short_trace = GyroTrace::from_axes(60.0, 0.0, std::span(x).first(5), std::span(x).first(5),
                                                std::span(x).first(5));
  CHECK_THROWS_AS(extract(short_trace), Error);
}

TEST_CASE("spectral centroid of a bin-centred tone") {
  const std::size_t n = 120;
  const double fs = 60.0;
  const int bin = 30;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2.0 * std::numbers::pi * bin * static_cast<double>(i) / n);
  const auto f = extract_axis_features(s, fs);
  const double f0 = bin * fs / static_cast<double>(n);
  CHECK(std::abs(at(f, AxisFeature::SpectralCentroid) - f0) <= fs / static_cast<double>(n));

  std::vector<double> shifted(n + 7, 0.0);
  std::copy(s.begin(), s.end(), shifted.begin() + 7);
  const auto g = extract_axis_features(shifted, fs);
  CHECK(std::abs(at(g, AxisFeature::SpectralCentroid) - f0) <= fs / static_cast<double>(n + 7) + 1e-9);
}

TEST_CASE("scaling behaviour") {
  const auto s = random_series(80, 9);
  std::vector<double> scaled(s);
  const double c = 2.5;
  for (auto& v : scaled) v *= c;
  const auto a = extract_axis_features(s, 60.0);
  const auto b = extract_axis_features(scaled, 60.0);

  using F = AxisFeature;
  for (F k : {F::Mean, F::StdDev, F::InterquartileRange, F::MeanAbsDeviation, F::StdErrorOfMean, F::Sum,
              F::Median, F::Quantile75, F::Quantile25, F::MeanChange, F::MeanAbsChange, F::AbsSumOfChanges,
              F::ComplexityInvariantDistance}) {
    CHECK(at(b, k) == doctest::Approx(c * at(a, k)).epsilon(1e-9));
  }
  for (F k : {F::AbsEnergy, F::Variance, F::Autocovariance1, F::Autocovariance2}) {
    CHECK(at(b, k) == doctest::Approx(c * c * at(a, k)).epsilon(1e-9));
  }
  for (F k : {F::Skewness, F::Kurtosis, F::Autocorrelation1, F::Autocorrelation2, F::SpectralCentroid,
              F::SpectralSpread, F::SpectralRolloff, F::SpectralFlatness, F::LongestStrikeAboveMean,
              F::LongestStrikeBelowMean, F::SampleEntropy}) {
    CHECK(at(b, k) == doctest::Approx(at(a, k)).epsilon(1e-9));
  }
  CHECK((at(b, F::SpectralSlope) > 0) == (at(a, F::SpectralSlope) > 0));
}

TEST_CASE("estimators against direct formulas") {
  const std::vector<double> x{1, 3, 2, 5, 4, 6, 5, 8};
  double m = 0;
  for (double v : x) m += v;
  m /= 8.0;
  double var = 0;
  for (double v : x) var += (v - m) * (v - m);
  var /= 8.0;
  double c1 = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) c1 += (x[i] - m) * (x[i + 1] - m);
  c1 /= 7.0;
  CHECK(feature_detail::autocovariance(x, 1) == doctest::Approx(c1));
  CHECK(feature_detail::autocorrelation(x, 1) == doctest::Approx(c1 / var));

  const auto spec = feature_detail::magnitude_spectrum(x);
  CHECK(spec.size() == 5);
  CHECK(spec[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("standardizer") {
  FeatureVector a;
  FeatureVector b;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    a[i] = 0.0;
    b[i] = 2.0;
  }
  std::vector<FeatureVector> two{a, b};
  const auto s = fit_standardizer(two);
  const auto za = apply_standardizer(s, a);
  const auto zb = apply_standardizer(s, b);
  CHECK(za[0] == doctest::Approx(-1.0));
  CHECK(zb[95] == doctest::Approx(1.0));

  std::vector<FeatureVector> same{b, b, b};
  const auto s2 = fit_standardizer(same);
  CHECK(apply_standardizer(s2, b)[10] == 0.0);

  std::vector<FeatureVector> data;
  for (int k = 0; k < 5; ++k) {
    FeatureVector v;
    const auto r = random_series(kFeatureCount, 40 + static_cast<std::uint64_t>(k));
    std::copy(r.begin(), r.end(), v.values.begin());
    data.push_back(v);
  }
  const auto s3 = fit_standardizer(data);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0;
    for (const auto& v : data) sum += apply_standardizer(s3, v)[j];
    CHECK(std::abs(sum / 5.0) < 1e-9);
  }
  CHECK_THROWS_AS(fit_standardizer(std::vector<FeatureVector>{}), Error);
}
