#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "wristlink/error.hpp"
#include "wristlink/protocol.hpp"
#include "wristlink/signal.hpp"
#include "wristlink/stats.hpp"

using namespace wristlink;

namespace {

double peak_abs(const GyroTrace& t) {
  double m = 0.0;
  for (const auto& s : t.samples()) m = std::max({m, std::abs(s.x), std::abs(s.y), std::abs(s.z)});
  return m;
}

std::vector<double> pooled_abs(const GyroTrace& t) {
  std::vector<double> v;
  for (const auto& s : t.samples()) {
    v.push_back(std::abs(s.x));
    v.push_back(std::abs(s.y));
    v.push_back(std::abs(s.z));
  }
  return v;
}

}  // namespace

TEST_CASE("trace construction enforces a uniform grid") {
  std::vector<double> x{0, 1, 2};
  const auto t = GyroTrace::from_axes(60.0, 1.0, x, x, x);
  CHECK(t.size() == 3);
  CHECK(t[2].t == doctest::Approx(1.0 + 2.0 / 60.0));
  CHECK(t.duration() == doctest::Approx(0.05));

  std::vector<GyroSample> bad{{0.0, 0, 0, 0}, {0.5, 0, 0, 0}};
  CHECK_THROWS_AS(GyroTrace(60.0, bad), Error);
}

TEST_CASE("every supported symbol has a template in the allowed duration range") {
  for (SymbolId s : supported_symbols()) {
    const auto tpl = stroke_template(s);
    CHECK(tpl.total_duration >= 0.5);
    CHECK(tpl.total_duration <= 4.0);
    CHECK_FALSE(tpl.durations.empty());
  }
  CHECK(extended_alphabet().size() == 18);
  CHECK_THROWS_AS(stroke_template('Q'), Error);
}

TEST_CASE("synth_symbol") {
  const auto quiet = noiseless_profile(1);

  SUBCASE("deterministic") {
    CHECK(synth_symbol(quiet, 'A', 7) == synth_symbol(quiet, 'A', 7));
    const auto p = default_profiles()[4];
    CHECK(synth_symbol(p, 'C', 11) == synth_symbol(p, 'C', 11));
  }

  SUBCASE("linear in amplitude_scale") {
    auto doubled = quiet;
    doubled.amplitude_scale = 2.0;
    const auto a = synth_symbol(quiet, 'A', 7);
    const auto b = synth_symbol(doubled, 'A', 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i].x == 2.0 * a[i].x);
      CHECK(b[i].y == 2.0 * a[i].y);
      CHECK(b[i].z == 2.0 * a[i].z);
    }
  }

  SUBCASE("duration follows the template and duration_scale") {
    auto slow = quiet;
    slow.duration_scale = 1.2;
    const auto tpl = stroke_template('E');
    const auto t = synth_symbol(slow, 'E', 1);
    CHECK(t.duration() == doctest::Approx(tpl.total_duration * 1.2).epsilon(0.02));
  }

  SUBCASE("gesture peak dominates tremor") {
    const auto p = default_profiles()[0];
    CHECK(peak_abs(synth_symbol(p, 'B', 3)) > 5.0 * p.still_tremor_sigma);
  }

  SUBCASE("unknown symbol") { CHECK_THROWS_AS(synth_symbol(quiet, '?', 1), Error); }
}

TEST_CASE("synth_pause") {
  auto p = noiseless_profile(2);
  const auto z = synth_pause(p, 12.0, 99);
  CHECK(z.size() == 720);
  CHECK(peak_abs(z) == 0.0);

  const auto d = default_profiles()[0];
  const auto pause = synth_pause(d, 5.0, 1);
  CHECK(pause.size() == 300);
  const auto pauses = synth_training_pauses(d, ProtocolParams{}, 10);
  const double th = calibrate_threshold(pauses);
  CHECK(stats::quantile(pooled_abs(pause), 0.99) < th);

  CHECK_THROWS_AS(synth_pause(d, 0.0, 1), Error);
  CHECK_THROWS_AS(synth_pause(d, -1.0, 1), Error);
}

TEST_CASE("synth_session annotations") {
  const auto profile = default_profiles()[2];
  const ProtocolParams params;
  const auto script = make_script(50, definitive_alphabet(), 17);
  const auto session = synth_session(profile, script, params);

  int opening = 0;
  int closing = 0;
  int symbols = 0;
  for (const auto& a : session.truth) {
    if (a.kind == SegmentKind::OpeningPause) {
      ++opening;
      CHECK(a.duration() >= params.t1 - params.eps - 1e-9);
      CHECK(a.duration() <= params.t1 + params.eps + 1e-9);
    } else if (a.kind == SegmentKind::ClosingPause) {
      ++closing;
      CHECK(a.duration() >= params.t2 - params.eps - 1e-9);
      CHECK(a.duration() <= params.t2 + params.eps + 1e-9);
    } else if (a.kind == SegmentKind::Symbol) {
      ++symbols;
      CHECK(a.symbol.has_value());
    }
  }
  CHECK(opening == 50);
  CHECK(closing == 50);
  CHECK(symbols == 50);

  SUBCASE("annotations tile the trace") {
    const double dt = session.trace.sample_period();
    CHECK(session.truth.front().start_t == doctest::Approx(session.trace.start_time()));
    for (std::size_t i = 1; i < session.truth.size(); ++i) {
      CHECK(session.truth[i].start_t == doctest::Approx(session.truth[i - 1].end_t).epsilon(1e-12));
    }
    CHECK(session.truth.back().end_t == doctest::Approx(session.trace[session.trace.size() - 1].t + dt));
  }

  SUBCASE("zero jitter gives nominal pauses") {
    auto exact = noiseless_profile(3);
    const auto one = make_script(1, definitive_alphabet(), 5);
    const auto s = synth_session(exact, one, params);
    const auto it = std::find_if(s.truth.begin(), s.truth.end(),
                                 [](const Annotation& a) { return a.kind == SegmentKind::OpeningPause; });
    REQUIRE(it != s.truth.end());
    CHECK(it->duration() == doctest::Approx(12.0).epsilon(1e-12));
  }

  SUBCASE("still segments stay below the symbol activity") {
    double still_max = 0.0;
    double symbol_p95_min = 1e300;
    for (const auto& a : session.truth) {
      const auto first = static_cast<std::size_t>(std::llround((a.start_t - session.trace.start_time()) * 60.0));
      const auto last = static_cast<std::size_t>(std::llround((a.end_t - session.trace.start_time()) * 60.0));
      const auto slice = session.trace.slice(first, last);
      if (a.kind == SegmentKind::OpeningPause || a.kind == SegmentKind::ClosingPause) {
        still_max = std::max(still_max, peak_abs(slice));
      } else if (a.kind == SegmentKind::Symbol) {
        symbol_p95_min = std::min(symbol_p95_min, stats::quantile(pooled_abs(slice), 0.95));
      }
    }
    CHECK(still_max < symbol_p95_min);
  }

  CHECK_THROWS_AS(synth_session(profile, SessionScript{}, params), Error);
}

TEST_CASE("synth_training_set") {
  const auto p = default_profiles()[1];
  const auto set = synth_training_set(p, definitive_alphabet(), 30);
  CHECK(set.size() == 120);
  for (SymbolId s : definitive_alphabet()) {
    CHECK(std::count_if(set.begin(), set.end(), [s](const LabeledTrace& l) { return l.label == s; }) == 30);
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) CHECK_FALSE(set[i].trace == set[j].trace);
  }

  const std::vector<SymbolId> only_a{'A'};
  const auto one = synth_training_set(p, only_a, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].label == 'A');

  CHECK_THROWS_AS(synth_training_set(p, std::span<const SymbolId>{}, 3), Error);
  CHECK_THROWS_AS(synth_training_set(p, only_a, 0), Error);
}

TEST_CASE("default presets") {
  const auto presets = default_profiles();
  REQUIRE(presets.size() == 15);
  std::set<std::uint64_t> seeds;
  for (const auto& p : presets) {
    CHECK(p.amplitude_scale >= 0.7);
    CHECK(p.amplitude_scale <= 1.3 + 1e-12);
    CHECK(p.duration_scale >= 0.8);
    CHECK(p.duration_scale <= 1.2 + 1e-12);
    CHECK(p.pause_jitter_sigma <= ProtocolParams{}.eps / 3.0);
    seeds.insert(p.seed);
  }
  CHECK(seeds.size() == 15);
}
