#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wristlink {

inline constexpr double kDefaultSampleRateHz = 60.0;

struct GyroSample {
  double t = 0.0;  // seconds since session start
  double x = 0.0;  // rad/s
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const GyroSample&, const GyroSample&) = default;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Uniformly sampled three-axis angular velocity. Timestamps are strictly
/// increasing with spacing 1/sample_rate_hz (checked to 1e-9 s).
class GyroTrace {
 public:
  explicit GyroTrace(double sample_rate_hz = kDefaultSampleRateHz);
  GyroTrace(double sample_rate_hz, std::vector<GyroSample> samples);

  /// Builds a trace with t_k = t0 + k / sample_rate_hz.
  static GyroTrace from_axes(double sample_rate_hz, double t0, std::span<const double> x,
                             std::span<const double> y, std::span<const double> z);

  double sample_rate_hz() const noexcept { return rate_; }
  double sample_period() const noexcept { return 1.0 / rate_; }
  std::span<const GyroSample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const GyroSample& operator[](std::size_t i) const { return samples_[i]; }

  /// size() / sample_rate_hz.
  double duration() const noexcept { return static_cast<double>(samples_.size()) / rate_; }
  double start_time() const noexcept { return samples_.empty() ? 0.0 : samples_.front().t; }

  std::vector<double> axis(Axis a) const;

  /// Samples [first, last) with their original timestamps.
  GyroTrace slice(std::size_t first, std::size_t last) const;

  friend bool operator==(const GyroTrace&, const GyroTrace&) = default;

 private:
  double rate_;
  std::vector<GyroSample> samples_;
};

using SymbolId = char;

/// A, B, C, E: the symbols written for answer options A, B, C, D.
std::span<const SymbolId> definitive_alphabet();
/// The 18 candidates that survive the visual pre-filter, in table order.
std::span<const SymbolId> extended_alphabet();
/// Every symbol with a stroke template (extended set plus D).
std::span<const SymbolId> supported_symbols();
bool is_supported_symbol(SymbolId s);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Nominal pen path for one symbol: points[i] -> points[i+1] is traversed in
/// durations[i] seconds. Curves are carried as finely discretized polylines.
struct StrokeTemplate {
  SymbolId symbol = 'A';
  std::vector<Point2> points;
  std::vector<double> durations;
  double total_duration = 0.0;
};

StrokeTemplate stroke_template(SymbolId symbol);

/// Per-writer generator parameters. `style_sigma` scales per-sample shape
/// variability (turn angles, segment timing, tempo, gain); zero gives a
/// template-exact writer.
struct MercenaryProfile {
  int id = 0;
  double amplitude_scale = 1.0;
  double duration_scale = 1.0;
  double gesture_noise_sigma = 0.0;  // rad/s
  double still_tremor_sigma = 0.0;   // rad/s
  double pause_jitter_sigma = 0.0;   // s
  double style_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// The 15 shipped presets (ids 1..15).
std::vector<MercenaryProfile> default_profiles();
/// A preset with every noise and variability term set to zero.
MercenaryProfile noiseless_profile(int id, std::uint64_t seed = 0);

struct ProtocolParams {
  double t1 = 12.0;
  double t2 = 5.0;
  double eps = 2.0;
  double sample_rate_hz = kDefaultSampleRateHz;

  void validate() const;
};

struct FillerPolicy {
  double min_total = 5.0;
  double max_total = 40.0;
  double burst_min = 0.5;
  double burst_max = 3.0;
  double still_min = 0.2;
  /// Micro-stills are capped at t2 - eps - still_margin.
  double still_margin = 0.5;
  double burst_amp_min = 0.3;  // rad/s
  double burst_amp_max = 2.0;

  void validate(const ProtocolParams& params) const;
};

struct ScriptedAnswer {
  int question_no = 1;
  SymbolId symbol = 'A';
};

struct SessionScript {
  std::vector<ScriptedAnswer> answers;
  FillerPolicy filler;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Questions 1..n_answers with symbols drawn uniformly from `symbols`.
SessionScript make_script(int n_answers, std::span<const SymbolId> symbols, std::uint64_t seed);

enum class SegmentKind { OpeningPause, Symbol, ClosingPause, Filler };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view s);

struct Annotation {
  SegmentKind kind = SegmentKind::Filler;
  double start_t = 0.0;
  double end_t = 0.0;  // exclusive
  std::optional<SymbolId> symbol;
  std::optional<int> question_no;

  double duration() const noexcept { return end_t - start_t; }
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct AnnotatedSession {
  GyroTrace trace;
  std::vector<Annotation> truth;
};

struct LabeledTrace {
  SymbolId label = 'A';
  GyroTrace trace;
};

GyroTrace synth_symbol(const MercenaryProfile& profile, SymbolId symbol, std::uint64_t seed,
                       double sample_rate_hz = kDefaultSampleRateHz);

GyroTrace synth_pause(const MercenaryProfile& profile, double duration_s, std::uint64_t seed,
                      double sample_rate_hz = kDefaultSampleRateHz);

AnnotatedSession synth_session(const MercenaryProfile& profile, const SessionScript& script,
                               const ProtocolParams& params);

std::vector<LabeledTrace> synth_training_set(const MercenaryProfile& profile,
                                             std::span<const SymbolId> symbols,
                                             int n_per_symbol = 30,
                                             double sample_rate_hz = kDefaultSampleRateHz);

/// Standalone pauses (opening and closing lengths alternating) for threshold
/// calibration, independent of any session draws.
std::vector<GyroTrace> synth_training_pauses(const MercenaryProfile& profile,
                                             const ProtocolParams& params, int count = 10);

}  // namespace wristlink
