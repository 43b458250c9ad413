#include "wristlink/features.hpp"

#include <cstdint>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "wristlink/error.hpp"
#include "wristlink/stats.hpp"

namespace wristlink {

namespace {

constexpr std::array<std::string_view, kAxisFeatureCount> kAxisNames{
    "mean",
    "std",
    "iqr",
    "abs_energy",
    "mean_abs_deviation",
    "sem",
    "mean_change",
    "autocovariance_lag1",
    "longest_strike_above_mean",
    "variance",
    "abs_sum_of_changes",
    "kurtosis",
    "sample_entropy",
    "autocorrelation_lag1",
    "mean_abs_change",
    "sum",
    "skewness",
    "quantile_0.75",
    "median",
    "longest_strike_below_mean",
    "cid_ce",
    "spectral_centroid",
    "spectral_flatness",
    "spectral_kurtosis",
    "spectral_skewness",
    "spectral_decrease",
    "spectral_spread",
    "spectral_rolloff",
    "spectral_slope",
    "autocorrelation_lag2",
    "quantile_0.25",
    "autocovariance_lag2",
};

struct SpectralStats {
  double centroid = 0.0;
  double flatness = 0.0;
  double kurtosis = 0.0;
  double skewness = 0.0;
  double decrease = 0.0;
  double spread = 0.0;
  double rolloff = 0.0;
  double slope = 0.0;
};

constexpr double kRolloffFraction = 0.85;

SpectralStats spectral_stats(std::span<const double> x, double rate) {
  SpectralStats out;
  const auto mag = feature_detail::magnitude_spectrum(x);
  const std::size_t n = x.size();
  // Bins 1..K; DC is excluded from every statistic.
  const std::size_t bins = mag.size() - 1;
  if (bins == 0) return out;
  std::vector<double> freq(bins), m(bins);
  double total = 0.0, power_total = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    freq[k] = static_cast<double>(k + 1) * rate / static_cast<double>(n);
    m[k] = mag[k + 1];
    total += m[k];
    power_total += m[k] * m[k];
  }
  if (total <= 0.0) return out;

  double c = 0.0;
  for (std::size_t k = 0; k < bins; ++k) c += freq[k] * m[k] / total;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double p = m[k] / total;
    const double d = freq[k] - c;
    m2 += p * d * d;
    m3 += p * d * d * d;
    m4 += p * d * d * d * d;
  }
  out.centroid = c;
  out.spread = std::sqrt(m2);
  if (m2 > 0.0) {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
  }

  double log_sum = 0.0;
  for (double v : m) log_sum += std::log(v * v + 1e-300);
  const double mean_power = power_total / static_cast<double>(bins);
  out.flatness = mean_power > 0.0 ? std::exp(log_sum / static_cast<double>(bins)) / mean_power : 0.0;

  double cumulative = 0.0;
  out.rolloff = freq.back();
  for (std::size_t k = 0; k < bins; ++k) {
    cumulative += m[k] * m[k];
    if (cumulative >= kRolloffFraction * power_total) {
      out.rolloff = freq[k];
      break;
    }
  }

  if (bins >= 2) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < bins; ++k) {
      num += (m[k] - m[0]) / static_cast<double>(k);
      den += m[k];
    }
    out.decrease = den > 0.0 ? num / den : 0.0;

    const double fm = stats::mean(freq);
    const double mm = total / static_cast<double>(bins);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      sxy += (freq[k] - fm) * (m[k] - mm);
      sxx += (freq[k] - fm) * (freq[k] - fm);
    }
    out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return out;
}

}  // namespace

std::span<const std::string_view> axis_feature_names() { return kAxisNames; }

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    v.reserve(kFeatureCount);
    for (const char* axis : {"x_", "y_", "z_"}) {
      for (auto n : kAxisNames) v.push_back(std::string(axis) + std::string(n));
    }
    return v;
  }();
  return names;
}

namespace feature_detail {

double autocovariance(std::span<const double> x, std::size_t lag) {
  if (lag >= x.size()) return 0.0;
  const double mu = stats::mean(x);
  double s = 0.0;
  for (std::size_t t = 0; t + lag < x.size(); ++t) s += (x[t] - mu) * (x[t + lag] - mu);
  return s / static_cast<double>(x.size() - lag);
}

double autocorrelation(std::span<const double> x, std::size_t lag) {
  const double var = stats::variance(x);
  return var > 0.0 ? autocovariance(x, lag) / var : 0.0;
}

namespace {
template <typename Pred>
std::size_t longest_strike(std::span<const double> x, Pred pred) {
  std::size_t best = 0, cur = 0;
  for (double v : x) {
    cur = pred(v) ? cur + 1 : 0;
    best = std::max(best, cur);
  }
  return best;
}
}  // namespace

std::size_t longest_strike_above_mean(std::span<const double> x) {
  const double mu = stats::mean(x);
  return longest_strike(x, [mu](double v) { return v > mu; });
}

std::size_t longest_strike_below_mean(std::span<const double> x) {
  const double mu = stats::mean(x);
  return longest_strike(x, [mu](double v) { return v < mu; });
}

double sample_entropy(std::span<const double> x, int m, double r_factor) {
  const std::size_t n = x.size();
  const auto mm = static_cast<std::size_t>(m);
  if (n <= mm + 1) return 0.0;
  const double r = std::max(r_factor * std::sqrt(stats::variance(x)), 1e-12);
  // Both counts use the same n - m templates so A and B are comparable.
  const std::size_t templates = n - mm;
  std::uint64_t b = 0, a = 0;
  for (std::size_t i = 0; i < templates; ++i) {
    for (std::size_t j = i + 1; j < templates; ++j) {
      double dist = 0.0;
      for (std::size_t k = 0; k < mm; ++k) dist = std::max(dist, std::abs(x[i + k] - x[j + k]));
      if (dist <= r) {
        ++b;
        if (std::abs(x[i + mm] - x[j + mm]) <= r) ++a;
      }
    }
  }
  if (a == 0 || b == 0) {
    // No matches: report the largest value the estimator can take.
    const double pairs = static_cast<double>(templates) * static_cast<double>(templates - 1) / 2.0;
    return std::log(std::max(pairs, 1.0));
  }
  return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

std::vector<double> magnitude_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double mu = stats::mean(x);
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    cos_table[j] = std::cos(w);
    sin_table[j] = std::sin(w);
  }
  const std::size_t half = n / 2;
  std::vector<double> mag(half + 1, 0.0);
  for (std::size_t k = 0; k <= half; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = x[t] - mu;
      re += v * cos_table[idx];
      im -= v * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    mag[k] = std::hypot(re, im);
  }
  return mag;
}

}  // namespace feature_detail

AxisFeatures extract_axis_features(std::span<const double> x, double sample_rate_hz) {
  require(x.size() >= kMinSeriesLength, Errc::SeriesTooShort,
          "series of length " + std::to_string(x.size()) + " is shorter than " +
              std::to_string(kMinSeriesLength));
  for (double v : x) require(std::isfinite(v), Errc::InvalidTrace, "series contains non-finite values");
  using F = AxisFeature;
  AxisFeatures f{};
  auto set = [&f](F id, double v) { f[static_cast<std::size_t>(id)] = v; };

  const auto n = static_cast<double>(x.size());
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());

  const double mu = stats::mean(x);
  const double var = stats::variance(x);
  const double sd = std::sqrt(var);
  double sum = 0.0, energy = 0.0, mad = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mu;
    sum += v;
    energy += v * v;
    mad += std::abs(d);
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  mad /= n;
  m3 /= n;
  m4 /= n;
  double abs_changes = 0.0, sq_changes = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double d = x[t] - x[t - 1];
    abs_changes += std::abs(d);
    sq_changes += d * d;
  }
  const double q25 = stats::quantile_sorted(sorted, 0.25);
  const double q75 = stats::quantile_sorted(sorted, 0.75);

  set(F::Mean, mu);
  set(F::StdDev, sd);
  set(F::InterquartileRange, q75 - q25);
  set(F::AbsEnergy, energy);
  set(F::MeanAbsDeviation, mad);
  set(F::StdErrorOfMean, sd / std::sqrt(n));
  set(F::MeanChange, (x.back() - x.front()) / (n - 1.0));
  set(F::Autocovariance1, feature_detail::autocovariance(x, 1));
  set(F::LongestStrikeAboveMean, static_cast<double>(feature_detail::longest_strike_above_mean(x)));
  set(F::Variance, var);
  set(F::AbsSumOfChanges, abs_changes);
  set(F::Kurtosis, var > 0.0 ? m4 / (var * var) - 3.0 : 0.0);
  set(F::SampleEntropy, feature_detail::sample_entropy(x));
  set(F::Autocorrelation1, feature_detail::autocorrelation(x, 1));
  set(F::MeanAbsChange, abs_changes / (n - 1.0));
  set(F::Sum, sum);
  set(F::Skewness, var > 0.0 ? m3 / std::pow(var, 1.5) : 0.0);
  set(F::Quantile75, q75);
  set(F::Median, stats::quantile_sorted(sorted, 0.5));
  set(F::LongestStrikeBelowMean, static_cast<double>(feature_detail::longest_strike_below_mean(x)));
  set(F::ComplexityInvariantDistance, std::sqrt(sq_changes));

  const SpectralStats sp = spectral_stats(x, sample_rate_hz);
  set(F::SpectralCentroid, sp.centroid);
  set(F::SpectralFlatness, sp.flatness);
  set(F::SpectralKurtosis, sp.kurtosis);
  set(F::SpectralSkewness, sp.skewness);
  set(F::SpectralDecrease, sp.decrease);
  set(F::SpectralSpread, sp.spread);
  set(F::SpectralRolloff, sp.rolloff);
  set(F::SpectralSlope, sp.slope);

  set(F::Autocorrelation2, feature_detail::autocorrelation(x, 2));
  set(F::Quantile25, q25);
  set(F::Autocovariance2, feature_detail::autocovariance(x, 2));
  return f;
}

FeatureVector extract(const GyroTrace& segment) {
  FeatureVector fv;
  for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
    const auto series = segment.axis(a);
    const auto f = extract_axis_features(series, segment.sample_rate_hz());
    std::copy(f.begin(), f.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(a) * kAxisFeatureCount);
  }
  return fv;
}

Standardizer fit_standardizer(std::span<const FeatureVector> dataset) {
  require(!dataset.empty(), Errc::EmptyDataset, "cannot fit a standardizer on no data");
  Standardizer s;
  const auto n = static_cast<double>(dataset.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double m = 0.0;
    for (const auto& v : dataset) m += v[j];
    m /= n;
    double var = 0.0;
    for (const auto& v : dataset) var += (v[j] - m) * (v[j] - m);
    s.mean[j] = m;
    s.stddev[j] = std::sqrt(var / n);
  }
  return s;
}

FeatureVector Standardizer::apply(const FeatureVector& v) const {
  FeatureVector z;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    z[j] = (v[j] - mean[j]) / std::max(stddev[j], 1e-12);
  }
  return z;
}

FeatureVector apply_standardizer(const Standardizer& s, const FeatureVector& v) { return s.apply(v); }

}  // namespace wristlink
