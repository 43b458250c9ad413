#include "wristlink/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "wristlink/error.hpp"
#include "wristlink/rng.hpp"

namespace wristlink {

// ---------------------------------------------------------------------------
// GyroTrace

GyroTrace::GyroTrace(double sample_rate_hz) : rate_(sample_rate_hz) {
  require(std::isfinite(rate_) && rate_ > 0.0, Errc::InvalidTrace, "sample rate must be positive");
}

GyroTrace::GyroTrace(double sample_rate_hz, std::vector<GyroSample> samples)
    : rate_(sample_rate_hz), samples_(std::move(samples)) {
  require(std::isfinite(rate_) && rate_ > 0.0, Errc::InvalidTrace, "sample rate must be positive");
  const double dt = 1.0 / rate_;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    require(std::isfinite(s.t) && s.t >= 0.0, Errc::InvalidTrace,
            "timestamp must be finite and non-negative");
    require(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.z), Errc::InvalidTrace,
            "angular velocity must be finite");
    if (i > 0) {
      const double gap = s.t - samples_[i - 1].t;
      require(gap > 0.0 && std::abs(gap - dt) <= 1e-9, Errc::InvalidTrace,
              "sample spacing deviates from 1/sample_rate_hz at index " + std::to_string(i));
    }
  }
}

GyroTrace GyroTrace::from_axes(double sample_rate_hz, double t0, std::span<const double> x,
                               std::span<const double> y, std::span<const double> z) {
  require(x.size() == y.size() && y.size() == z.size(), Errc::InvalidTrace,
          "axis lengths differ");
  std::vector<GyroSample> samples(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    samples[i] = {t0 + static_cast<double>(i) / sample_rate_hz, x[i], y[i], z[i]};
  }
  return GyroTrace(sample_rate_hz, std::move(samples));
}

std::vector<double> GyroTrace::axis(Axis a) const {
  std::vector<double> out(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    out[i] = a == Axis::X ? s.x : a == Axis::Y ? s.y : s.z;
  }
  return out;
}

GyroTrace GyroTrace::slice(std::size_t first, std::size_t last) const {
  require(first <= last && last <= samples_.size(), Errc::InvalidTrace, "slice out of range");
  GyroTrace out(rate_);
  out.samples_.assign(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                      samples_.begin() + static_cast<std::ptrdiff_t>(last));
  return out;
}

// ---------------------------------------------------------------------------
// Alphabets

namespace {

constexpr std::array<SymbolId, 4> kDefinitive{'A', 'B', 'C', 'E'};
constexpr std::array<SymbolId, 18> kExtended{'A', 'B', 'C', 'D', 'E', 'H', 'I', 'J', 'K',
                                             'm', 'O', 'q', 'S', 'W', 'X', 'y', 'Z', '8'};

}  // namespace

std::span<const SymbolId> definitive_alphabet() { return kDefinitive; }
std::span<const SymbolId> extended_alphabet() { return kExtended; }
std::span<const SymbolId> supported_symbols() { return kExtended; }

bool is_supported_symbol(SymbolId s) {
  return std::find(kExtended.begin(), kExtended.end(), s) != kExtended.end();
}

// ---------------------------------------------------------------------------
// Stroke programs
//
// A symbol is authored as a pen "turtle" program: corners (instant heading
// changes), straight runs, and arcs (heading sweeping at a constant rate).
// Pen-up travel between strokes is part of the path since the wrist keeps
// moving. Every program starts and ends with a short arc so the gesture has
// non-zero rotation at both ends.

namespace {

enum class OpKind { Turn, Line, Arc };

struct PenOp {
  OpKind kind;
  double degrees;   // turn amount or arc sweep; unused for lines
  double duration;  // seconds; zero for turns
  double length;    // path length for lines; arcs derive it from sweep
};

constexpr PenOp turn(double deg) { return {OpKind::Turn, deg, 0.0, 0.0}; }
constexpr PenOp line(double dur, double len = 1.0) { return {OpKind::Line, 0.0, dur, len}; }
constexpr PenOp arc(double deg, double dur) { return {OpKind::Arc, deg, dur, 0.0}; }

struct PenProgram {
  double start_heading;  // degrees, 0 = +x, counterclockwise positive
  std::vector<PenOp> ops;
};

PenProgram pen_program(SymbolId s) {
  switch (s) {
    case 'A':
      return {60, {arc(15, 0.056), line(0.224), turn(-145), line(0.224), turn(-140), line(0.126, 0.5),
                   turn(-140), line(0.14, 0.6), arc(40, 0.07)}};
    case 'B':
      return {-60, {arc(-30, 0.08), arc(-20, 0.34), arc(180, 0.2), arc(15, 0.25), turn(-90), arc(-180, 0.3),
                    turn(150), arc(-150, 0.35), arc(-20, 0.08)}};
    case 'C':
      return {150, {arc(20, 0.07), arc(230, 0.6), arc(15, 0.07)}};
    case 'D':
      return {-60, {arc(-30, 0.08), line(0.34), arc(180, 0.2), line(0.25), turn(-80),
                    arc(-190, 0.5), arc(-20, 0.08)}};
    case 'E':
      return {160, {arc(20, 0.084), line(0.28, 0.6), turn(90), line(0.504), turn(90), line(0.308, 0.6),
                    turn(130), line(0.28, 0.6), turn(-130), line(0.224, 0.5), arc(30, 0.112)}};
    case 'H':
      return {-70, {arc(-20, 0.06), line(0.34), turn(140), line(0.34), turn(-140), line(0.34),
                    turn(-130), line(0.2, 0.5), turn(-140), line(0.18, 0.5), arc(30, 0.06)}};
    case 'I':
      return {10, {arc(-10, 0.05), line(0.16, 0.5), turn(180), line(0.08, 0.25), turn(90), line(0.4),
                   turn(90), line(0.08, 0.25), turn(180), line(0.16, 0.5), arc(20, 0.05)}};
    case 'J':
      return {10, {arc(-10, 0.05), line(0.16, 0.5), turn(180), line(0.08, 0.25), turn(90), line(0.32),
                   arc(-160, 0.3), arc(-20, 0.06)}};
    case 'K':
      return {-70, {arc(-20, 0.06), line(0.34), arc(160, 0.2), line(0.25), arc(-210, 0.15),
                    line(0.2, 0.6), turn(95), line(0.22, 0.6), arc(20, 0.06)}};
    case 'm':
      return {-80, {arc(-10, 0.05), line(0.2, 0.5), arc(180, 0.15), line(0.15, 0.4), arc(-180, 0.25),
                    line(0.2, 0.5), arc(180, 0.15), line(0.15, 0.4), arc(-180, 0.25),
                    line(0.2, 0.5), arc(40, 0.08)}};
    case 'O':
      return {180, {arc(360, 0.7), arc(20, 0.05)}};
    case 'q':
      return {180, {arc(270, 0.5), arc(-180, 0.12), line(0.35), arc(60, 0.1)}};
    case 'S':
      return {150, {arc(30, 0.065), arc(150, 0.39), arc(-160, 0.455), arc(-20, 0.065)}};
    case 'W':
      return {-60, {arc(-10, 0.05), line(0.22), turn(140), line(0.22), turn(-140), line(0.22),
                    turn(140), line(0.22), arc(20, 0.05)}};
    case 'X':
      return {-40, {arc(-10, 0.04), line(0.272), turn(140), line(0.2, 0.7), arc(-220, 0.12),
                    line(0.272), arc(-20, 0.04)}};
    case 'y':
      return {-50, {arc(-10, 0.05), line(0.18, 0.5), turn(120), line(0.2, 0.5), arc(-175, 0.12),
                    line(0.4), arc(-90, 0.15)}};
    case 'Z':
      return {10, {arc(-10, 0.05), line(0.22, 0.6), turn(-145), line(0.35), turn(145),
                   line(0.22, 0.6), arc(20, 0.05)}};
    case '8':
      return {150, {arc(30, 0.05), arc(150, 0.3), arc(-360, 0.6), arc(150, 0.3), arc(20, 0.05)}};
    default:
      fail(Errc::UnknownSymbol, std::string("no stroke template for '") + s + "'");
  }
}

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kArcPieceDeg = 2.0;
constexpr double kArcSpeed = 2.5;  // path length per second along arcs

struct Perturbation {
  double turn_sigma_deg = 0.0;
  double sweep_sigma = 0.0;
  double duration_sigma = 0.0;
};

/// Applies the style draw to a program. Draw order is fixed per op so the
/// consumed random stream only depends on the symbol.
PenProgram perturb(PenProgram prog, const Perturbation& pert, CounterRng& rng) {
  for (auto& op : prog.ops) {
    const double a = rng.normal();
    const double b = rng.normal();
    switch (op.kind) {
      case OpKind::Turn: op.degrees += pert.turn_sigma_deg * a; break;
      case OpKind::Arc:
        op.degrees *= 1.0 + pert.sweep_sigma * a;
        op.duration *= std::exp(pert.duration_sigma * b);
        break;
      case OpKind::Line: op.duration *= std::exp(pert.duration_sigma * b); break;
    }
  }
  return prog;
}

StrokeTemplate trace_program(SymbolId symbol, const PenProgram& prog) {
  StrokeTemplate tpl;
  tpl.symbol = symbol;
  double heading = prog.start_heading * kDeg;
  Point2 pos{0.0, 0.0};
  tpl.points.push_back(pos);
  auto advance = [&](double len, double dur) {
    pos.x += len * std::cos(heading);
    pos.y += len * std::sin(heading);
    tpl.points.push_back(pos);
    tpl.durations.push_back(dur);
  };
  for (const auto& op : prog.ops) {
    switch (op.kind) {
      case OpKind::Turn: heading += op.degrees * kDeg; break;
      case OpKind::Line: advance(op.length, op.duration); break;
      case OpKind::Arc: {
        const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(op.degrees) / kArcPieceDeg)));
        const double step = op.degrees * kDeg / pieces;
        const double piece_dur = op.duration / pieces;
        const double piece_len = kArcSpeed * op.duration / pieces;
        // Heading of each chord is the mid-angle of its piece.
        for (int k = 0; k < pieces; ++k) {
          heading += 0.5 * step;
          advance(piece_len, piece_dur);
          heading += 0.5 * step;
        }
        break;
      }
    }
  }
  for (double d : tpl.durations) tpl.total_duration += d;
  return tpl;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

/// Centered raised-cosine smoothing kernel spanning `width_s`.
std::vector<double> raised_cosine_kernel(double width_s, double rate) {
  const int taps = std::max(3, static_cast<int>(std::lround(width_s * rate)) + 1);
  std::vector<double> w(static_cast<std::size_t>(taps));
  double sum = 0.0;
  for (int j = 0; j < taps; ++j) {
    const double s = std::sin(std::numbers::pi * (j + 1) / (taps + 1));
    w[static_cast<std::size_t>(j)] = s * s;
    sum += s * s;
  }
  for (auto& v : w) v /= sum;
  return w;
}

std::vector<double> convolve_same(std::span<const double> x, std::span<const double> kernel) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto taps = static_cast<std::ptrdiff_t>(kernel.size());
  const std::ptrdiff_t half = (taps - 1) / 2;
  std::vector<double> out(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < taps; ++j) {
      const std::ptrdiff_t src = i + half - j;
      if (src >= 0 && src < n) acc += kernel[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(src)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

constexpr double kWristGain = 0.2;         // wrist rotation per unit pen-heading rate
constexpr double kCouplingX = 0.4;
constexpr double kCouplingY = 0.25;
constexpr double kVelocityGain = 0.6;     // wrist flexion/deviation per unit pen speed
constexpr double kSmoothingWidth = 0.05;   // seconds
constexpr double kSlantSigma = 0.72;       // radians of writing slant per unit style
constexpr double kDriftRatio = 2.0;        // arm drift amplitude per unit gesture noise
constexpr double kMaxTurnRate = 8.0;       // rad/s of pen heading the wrist can follow

/// Pen heading along the template at template time `t`.
class HeadingLookup {
 public:
  explicit HeadingLookup(const StrokeTemplate& tpl) : tpl_(tpl) {
    cumulative_.reserve(tpl.durations.size() + 1);
    cumulative_.push_back(0.0);
    for (double d : tpl.durations) cumulative_.push_back(cumulative_.back() + d);
  }

  double operator()(double t) const {
    const std::size_t seg = segment(t);
    const auto& a = tpl_.points[seg];
    const auto& b = tpl_.points[seg + 1];
    return std::atan2(b.y - a.y, b.x - a.x);
  }

  Point2 position(double t) const {
    const std::size_t seg = segment(t);
    const auto& a = tpl_.points[seg];
    const auto& b = tpl_.points[seg + 1];
    const double d = tpl_.durations[seg];
    const double u = d > 0.0 ? std::clamp((t - cumulative_[seg]) / d, 0.0, 1.0) : 1.0;
    return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
  }

 private:
  std::size_t segment(double t) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
    const std::size_t seg = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    return std::min(seg, tpl_.durations.size() - 1);
  }

  const StrokeTemplate& tpl_;
  std::vector<double> cumulative_;
};

double clamp_abs(double v, double limit) { return std::clamp(v, -limit, limit); }

}  // namespace

StrokeTemplate stroke_template(SymbolId symbol) {
  return trace_program(symbol, pen_program(symbol));
}

// ---------------------------------------------------------------------------
// Profiles and parameters

void MercenaryProfile::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(std::isfinite(amplitude_scale) && amplitude_scale > 0.0, Errc::InvalidProfile,
          "amplitude_scale must be positive");
  require(std::isfinite(duration_scale) && duration_scale > 0.0, Errc::InvalidProfile,
          "duration_scale must be positive");
  require(finite_nonneg(gesture_noise_sigma) && finite_nonneg(still_tremor_sigma) &&
              finite_nonneg(pause_jitter_sigma) && finite_nonneg(style_sigma),
          Errc::InvalidProfile, "noise terms must be finite and non-negative");
}

std::vector<MercenaryProfile> default_profiles() {
  std::vector<MercenaryProfile> out;
  out.reserve(15);
  for (int i = 1; i <= 15; ++i) {
    // Permuted fractions spread each parameter over its range without tying
    // them to the profile order or to each other.
    const double fa = static_cast<double>((i * 7) % 15) / 14.0;
    const double fd = static_cast<double>((i * 4) % 15) / 14.0;
    const double ft = static_cast<double>((i * 11) % 15) / 14.0;
    const double fs = static_cast<double>((i * 13) % 15) / 14.0;
    MercenaryProfile p;
    p.id = i;
    p.amplitude_scale = 0.7 + 0.6 * fa;
    p.duration_scale = 0.8 + 0.4 * fd;
    p.still_tremor_sigma = 0.006 + 0.006 * ft;
    p.gesture_noise_sigma = 0.08 + 0.06 * fs;
    p.pause_jitter_sigma = 0.4;
    p.style_sigma = 1.0 + 0.06 * fs;
    p.seed = 0x5eed0000ULL + static_cast<std::uint64_t>(i);
    out.push_back(p);
  }
  return out;
}

MercenaryProfile noiseless_profile(int id, std::uint64_t seed) {
  MercenaryProfile p;
  p.id = id;
  p.seed = seed;
  return p;
}

void ProtocolParams::validate() const {
  require(std::isfinite(t1) && std::isfinite(t2) && std::isfinite(eps), Errc::InvalidConfig,
          "protocol times must be finite");
  require(eps > 0.0, Errc::InvalidConfig, "eps must be positive");
  require(t2 - eps > 0.0, Errc::InvalidConfig, "closing window must be positive");
  require(t1 - eps > t2 + eps, Errc::InvalidConfig, "opening and closing windows overlap");
  require(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0, Errc::InvalidConfig,
          "sample rate must be positive");
}

void FillerPolicy::validate(const ProtocolParams& params) const {
  require(min_total > 0.0 && max_total >= min_total, Errc::InvalidConfig,
          "filler total range invalid");
  require(burst_min > 0.0 && burst_max >= burst_min, Errc::InvalidConfig,
          "filler burst range invalid");
  require(burst_amp_min > 0.0 && burst_amp_max >= burst_amp_min, Errc::InvalidConfig,
          "filler amplitude range invalid");
  const double cap = params.t2 - params.eps - still_margin;
  require(still_min > 0.0 && cap >= still_min, Errc::InvalidConfig,
          "micro-still cap below its minimum");
}

void SessionScript::validate() const {
  require(!answers.empty(), Errc::EmptyScript, "session script has no answers");
  int prev = 0;
  for (const auto& a : answers) {
    require(a.question_no > prev, Errc::InvalidConfig,
            "question numbers must be positive and strictly increasing");
    require(is_supported_symbol(a.symbol), Errc::UnknownSymbol,
            std::string("unsupported symbol '") + a.symbol + "'");
    prev = a.question_no;
  }
}

SessionScript make_script(int n_answers, std::span<const SymbolId> symbols, std::uint64_t seed) {
  require(!symbols.empty(), Errc::EmptyAlphabet, "no symbols to draw from");
  require(n_answers >= 1, Errc::EmptyScript, "need at least one answer");
  SessionScript script;
  script.seed = seed;
  CounterRng rng(seed, 0x5c12);
  for (int q = 1; q <= n_answers; ++q) {
    script.answers.push_back({q, symbols[rng.below(symbols.size())]});
  }
  return script;
}

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::OpeningPause: return "opening_pause";
    case SegmentKind::Symbol: return "symbol";
    case SegmentKind::ClosingPause: return "closing_pause";
    case SegmentKind::Filler: return "filler";
  }
  return "filler";
}

SegmentKind segment_kind_from_string(std::string_view s) {
  if (s == "opening_pause") return SegmentKind::OpeningPause;
  if (s == "symbol") return SegmentKind::Symbol;
  if (s == "closing_pause") return SegmentKind::ClosingPause;
  if (s == "filler") return SegmentKind::Filler;
  fail(Errc::ParseError, "unknown annotation kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

struct Axes {
  std::vector<double> x, y, z;

  std::size_t size() const { return z.size(); }

  void append(const Axes& o) {
    x.insert(x.end(), o.x.begin(), o.x.end());
    y.insert(y.end(), o.y.begin(), o.y.end());
    z.insert(z.end(), o.z.begin(), o.z.end());
  }
};

std::size_t samples_for(double duration_s, double rate) {
  return static_cast<std::size_t>(std::llround(duration_s * rate));
}

Axes symbol_axes(const MercenaryProfile& profile, SymbolId symbol, std::uint64_t seed, double rate) {
  require(is_supported_symbol(symbol), Errc::UnknownSymbol,
          std::string("unsupported symbol '") + symbol + "'");
  profile.validate();
  CounterRng style_rng(seed, 0x517e);
  const double s = profile.style_sigma;
  const Perturbation pert{36.0 * s, 0.29 * s, 0.72 * s};
  const PenProgram program = perturb(pen_program(symbol), pert, style_rng);
  const double tempo = std::exp(0.29 * s * style_rng.normal());
  const double gain = kWristGain * std::exp(0.54 * s * style_rng.normal());
  const double slant = kSlantSigma * s * style_rng.normal();

  const StrokeTemplate tpl = trace_program(symbol, program);
  const double duration = tpl.total_duration * profile.duration_scale * tempo;
  const std::size_t n = std::max<std::size_t>(8, samples_for(duration, rate));
  const double time_map = tpl.total_duration / (static_cast<double>(n) / rate);

  HeadingLookup heading(tpl);
  std::vector<double> rate_of_turn(n, 0.0);
  std::vector<double> vx(n, 0.0);
  std::vector<double> vy(n, 0.0);
  double prev = heading(0.0);
  Point2 prev_pos = heading.position(0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double t = static_cast<double>(k) / rate * time_map;
    const double h = heading(t);
    const Point2 pos = heading.position(t);
    rate_of_turn[k] = wrap_angle(h - prev) * rate;
    vx[k] = (pos.x - prev_pos.x) * rate;
    vy[k] = (pos.y - prev_pos.y) * rate;
    prev = h;
    prev_pos = pos;
  }
  const auto kernel = raised_cosine_kernel(kSmoothingWidth, rate);
  const auto smooth = convolve_same(rate_of_turn, kernel);
  const auto svx = convolve_same(vx, kernel);
  const auto svy = convolve_same(vy, kernel);

  Axes out;
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double zbase = gain * kMaxTurnRate * std::tanh(smooth[k] / kMaxTurnRate);
    out.z[k] = profile.amplitude_scale * zbase;
    const double vx_w = std::cos(slant) * svx[k] - std::sin(slant) * svy[k];
    const double vy_w = std::sin(slant) * svx[k] + std::cos(slant) * svy[k];
    out.x[k] = profile.amplitude_scale * (kCouplingX * zbase + kVelocityGain * vy_w);
    out.y[k] = profile.amplitude_scale * (kCouplingY * zbase - kVelocityGain * vx_w);
  }
  if (profile.gesture_noise_sigma > 0.0) {
    CounterRng noise(seed, 0x7015e);
    // Slow arm motion riding on the gesture: one sinusoid per axis.
    for (auto* axis : {&out.x, &out.y, &out.z}) {
      const double amp = kDriftRatio * profile.gesture_noise_sigma * noise.normal();
      const double f = noise.uniform(0.3, 2.0);
      const double ph = noise.uniform(0.0, 2.0 * std::numbers::pi);
      for (std::size_t k = 0; k < n; ++k) {
        (*axis)[k] += amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(k) / rate + ph);
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      out.x[k] += profile.gesture_noise_sigma * noise.normal();
      out.y[k] += profile.gesture_noise_sigma * noise.normal();
      out.z[k] += profile.gesture_noise_sigma * noise.normal();
    }
  }
  return out;
}

Axes tremor_axes(double sigma, std::size_t n, CounterRng& rng) {
  Axes out;
  out.x.assign(n, 0.0);
  out.y.assign(n, 0.0);
  out.z.assign(n, 0.0);
  if (sigma > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      out.x[k] = sigma * rng.normal();
      out.y[k] = sigma * rng.normal();
      out.z[k] = sigma * rng.normal();
    }
  }
  return out;
}

Axes pause_axes(const MercenaryProfile& profile, double duration_s, std::uint64_t seed, double rate) {
  require(std::isfinite(duration_s) && duration_s > 0.0, Errc::InvalidDuration,
          "pause duration must be positive");
  const std::size_t n = samples_for(duration_s, rate);
  require(n >= 1, Errc::InvalidDuration, "pause shorter than one sample");
  CounterRng rng(seed, 0x9a05e);
  return tremor_axes(profile.still_tremor_sigma, n, rng);
}

/// Flat-topped burst: raised-cosine edges of `ramp` seconds, per-axis signed
/// amplitude with a slow wobble that never crosses zero.
Axes burst_axes(const MercenaryProfile& profile, const FillerPolicy& policy, std::size_t n,
                double rate, CounterRng& rng) {
  std::array<double, 3> amp{};
  for (auto& a : amp) {
    a = rng.uniform(policy.burst_amp_min, policy.burst_amp_max) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
  }
  const double wobble_hz = rng.uniform(0.5, 2.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const std::size_t ramp = std::min<std::size_t>(samples_for(0.1, rate), n / 2);
  Axes out = tremor_axes(profile.still_tremor_sigma, n, rng);
  for (std::size_t k = 0; k < n; ++k) {
    double env = 1.0;
    if (ramp > 0 && k < ramp) {
      const double u = static_cast<double>(k + 1) / static_cast<double>(ramp + 1);
      env = std::sin(0.5 * std::numbers::pi * u) * std::sin(0.5 * std::numbers::pi * u);
    } else if (ramp > 0 && k + ramp >= n) {
      const double u = static_cast<double>(n - k) / static_cast<double>(ramp + 1);
      env = std::sin(0.5 * std::numbers::pi * u) * std::sin(0.5 * std::numbers::pi * u);
    }
    const double t = static_cast<double>(k) / rate;
    const double shape = env * (1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * wobble_hz * t + phase));
    out.x[k] += amp[0] * shape;
    out.y[k] += amp[1] * shape;
    out.z[k] += amp[2] * shape;
  }
  return out;
}

struct Piece {
  SegmentKind kind;
  Axes axes;
  std::optional<SymbolId> symbol;
  std::optional<int> question_no;
};

void append_filler(const MercenaryProfile& profile, const FillerPolicy& policy,
                   const ProtocolParams& params, CounterRng& rng, std::vector<Piece>& pieces,
                   int question_no) {
  const double rate = params.sample_rate_hz;
  const double cap = params.t2 - params.eps - policy.still_margin;
  double remaining = rng.uniform(policy.min_total, policy.max_total);
  Axes filler;
  // Alternate bursts and micro-stills; always starts and ends with a burst so
  // no still stretch can merge with a neighbouring pause.
  while (true) {
    double burst = rng.uniform(policy.burst_min, policy.burst_max);
    if (remaining - burst < policy.still_min + policy.burst_min) burst = std::max(remaining, policy.burst_min);
    filler.append(burst_axes(profile, policy, std::max<std::size_t>(1, samples_for(burst, rate)), rate, rng));
    remaining -= burst;
    if (remaining < policy.still_min + policy.burst_min) break;
    const double still = std::min(rng.uniform(policy.still_min, cap), remaining - policy.burst_min);
    auto still_axes = tremor_axes(profile.still_tremor_sigma,
                                  std::max<std::size_t>(1, samples_for(still, rate)), rng);
    filler.append(still_axes);
    remaining -= still;
  }
  pieces.push_back({SegmentKind::Filler, std::move(filler), std::nullopt, question_no});
}

}  // namespace

GyroTrace synth_symbol(const MercenaryProfile& profile, SymbolId symbol, std::uint64_t seed,
                       double sample_rate_hz) {
  const Axes a = symbol_axes(profile, symbol, seed, sample_rate_hz);
  return GyroTrace::from_axes(sample_rate_hz, 0.0, a.x, a.y, a.z);
}

GyroTrace synth_pause(const MercenaryProfile& profile, double duration_s, std::uint64_t seed,
                      double sample_rate_hz) {
  profile.validate();
  const Axes a = pause_axes(profile, duration_s, seed, sample_rate_hz);
  return GyroTrace::from_axes(sample_rate_hz, 0.0, a.x, a.y, a.z);
}

AnnotatedSession synth_session(const MercenaryProfile& profile, const SessionScript& script,
                               const ProtocolParams& params) {
  profile.validate();
  params.validate();
  script.validate();
  script.filler.validate(params);
  const double rate = params.sample_rate_hz;
  const double jitter_limit = 0.9 * params.eps;
  const std::uint64_t session_seed = derive_seed(profile.seed, script.seed ^ 0xa11c0de5ULL);
  CounterRng timing(session_seed, 1);
  CounterRng filler_rng(session_seed, 2);

  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < script.answers.size(); ++i) {
    const auto& ans = script.answers[i];
    const double open = params.t1 + clamp_abs(profile.pause_jitter_sigma * timing.normal(), jitter_limit);
    const double close = params.t2 + clamp_abs(profile.pause_jitter_sigma * timing.normal(), jitter_limit);
    const std::uint64_t k = static_cast<std::uint64_t>(i);
    pieces.push_back({SegmentKind::OpeningPause,
                      pause_axes(profile, open, derive_seed(session_seed, 3 * k + 100), rate),
                      std::nullopt, ans.question_no});
    pieces.push_back({SegmentKind::Symbol,
                      symbol_axes(profile, ans.symbol, derive_seed(session_seed, 3 * k + 101), rate),
                      ans.symbol, ans.question_no});
    pieces.push_back({SegmentKind::ClosingPause,
                      pause_axes(profile, close, derive_seed(session_seed, 3 * k + 102), rate),
                      std::nullopt, ans.question_no});
    append_filler(profile, script.filler, params, filler_rng, pieces, ans.question_no);
  }

  Axes all;
  AnnotatedSession session;
  std::size_t cursor = 0;
  for (auto& p : pieces) {
    const std::size_t n = p.axes.size();
    session.truth.push_back({p.kind, static_cast<double>(cursor) / rate,
                             static_cast<double>(cursor + n) / rate, p.symbol, p.question_no});
    all.append(p.axes);
    cursor += n;
  }
  session.trace = GyroTrace::from_axes(rate, 0.0, all.x, all.y, all.z);
  return session;
}

std::vector<LabeledTrace> synth_training_set(const MercenaryProfile& profile,
                                             std::span<const SymbolId> symbols, int n_per_symbol,
                                             double sample_rate_hz) {
  require(!symbols.empty(), Errc::EmptyAlphabet, "training alphabet is empty");
  require(n_per_symbol >= 1, Errc::InvalidConfig, "n_per_symbol must be at least 1");
  std::vector<LabeledTrace> out;
  out.reserve(symbols.size() * static_cast<std::size_t>(n_per_symbol));
  for (SymbolId s : symbols) {
    for (int k = 0; k < n_per_symbol; ++k) {
      const std::uint64_t stream = (static_cast<std::uint64_t>(static_cast<unsigned char>(s)) << 32) |
                                   static_cast<std::uint64_t>(k);
      const std::uint64_t seed = derive_seed(profile.seed ^ 0x7ea1ULL, stream);
      out.push_back({s, synth_symbol(profile, s, seed, sample_rate_hz)});
    }
  }
  return out;
}

std::vector<GyroTrace> synth_training_pauses(const MercenaryProfile& profile,
                                             const ProtocolParams& params, int count) {
  params.validate();
  require(count >= 1, Errc::InvalidConfig, "need at least one calibration pause");
  std::vector<GyroTrace> out;
  for (int k = 0; k < count; ++k) {
    const double d = (k % 2 == 0) ? params.t1 : params.t2;
    out.push_back(synth_pause(profile, d, derive_seed(profile.seed ^ 0xca1bULL, static_cast<std::uint64_t>(k)),
                              params.sample_rate_hz));
  }
  return out;
}

}  // namespace wristlink
