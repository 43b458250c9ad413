#include "wristlink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "wristlink/error.hpp"

namespace wristlink {

void HapticParams::validate() const {
  require(std::isfinite(t1_vibe_ms) && t1_vibe_ms > 0.0, Errc::InvalidConfig, "vibration length must be positive");
  require(std::isfinite(t2_gap_s) && t2_gap_s > 0.0, Errc::InvalidConfig, "intra-cluster gap must be positive");
  require(std::isfinite(t3_min_s) && t3_min_s > t2_gap_s, Errc::InvalidConfig,
          "inter-cluster gap must exceed the intra-cluster gap");
  require(std::isfinite(amplitude) && amplitude > 0.0 && amplitude <= 250.0, Errc::AmplitudeOutOfRange,
          "amplitude must lie in (0, 250]");
}

VibrationSchedule::VibrationSchedule(std::vector<VibrationEvent> events) : events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    require(std::isfinite(e.start_t) && std::isfinite(e.duration_ms) && e.duration_ms > 0.0,
            Errc::InvalidConfig, "vibration events need finite times and positive durations");
    if (i > 0) {
      require(e.start_t > events_[i - 1].start_t && e.start_t >= events_[i - 1].end_t(), Errc::InvalidConfig,
              "vibration events overlap or are out of order at index " + std::to_string(i));
    }
  }
}

VibrationSchedule encode_haptic(std::span<const AnswerMessage> messages, const HapticParams& params) {
  params.validate();
  const double vibe_s = params.t1_vibe_ms / 1000.0;
  std::vector<VibrationEvent> events;
  double prev_end = 0.0;
  double prev_ts = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (const auto& m : messages) {
    require(is_answer_option(m.option), Errc::UnknownOption,
            std::string("'") + m.option + "' is not an answer option");
    require(m.timestamp >= prev_ts, Errc::InvalidConfig, "message timestamps must be non-decreasing");
    prev_ts = m.timestamp;
    const int k = m.option - 'A' + 1;
    double start = first ? m.timestamp : std::max(m.timestamp, prev_end + params.t3_min_s);
    // Rounding in prev_end + t3 can leave the measured gap a few ulps short.
    while (!first && start - prev_end < params.t3_min_s) start = std::nextafter(start, HUGE_VAL);
    for (int j = 0; j < k; ++j) {
      events.push_back({start + j * (vibe_s + params.t2_gap_s), params.t1_vibe_ms, params.amplitude});
    }
    prev_end = events.back().end_t();
    first = false;
  }
  return VibrationSchedule(std::move(events));
}

std::vector<char> decode_haptic(std::span<const VibrationEvent> events, double split_gap, const HapticParams& params) {
  require(split_gap > params.t2_gap_s && split_gap < params.t3_min_s, Errc::InvalidConfig,
          "split gap must lie strictly between the intra- and inter-cluster gaps");
  std::vector<VibrationEvent> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const VibrationEvent& a, const VibrationEvent& b) { return a.start_t < b.start_t; });
  std::vector<char> out;
  auto flush = [&](int size) {
    require(size >= 1 && size <= 4, Errc::MalformedCluster,
            "cluster of " + std::to_string(size) + " vibrations does not encode an option");
    out.push_back(static_cast<char>('A' + size - 1));
  };
  int size = 0;
  double last_end = 0.0;
  for (const auto& e : sorted) {
    if (size > 0 && e.start_t - last_end > split_gap) {
      flush(size);
      size = 0;
    }
    ++size;
    last_end = size == 1 ? e.end_t() : std::max(last_end, e.end_t());
  }
  if (size > 0) flush(size);
  return out;
}

std::vector<char> decode_haptic(const VibrationSchedule& schedule, double split_gap, const HapticParams& params) {
  return decode_haptic(schedule.events(), split_gap, params);
}

std::string_view to_string(Placement p) { return p == Placement::Wrist ? "wrist" : "table"; }

Placement placement_from_string(std::string_view s) {
  if (s == "wrist") return Placement::Wrist;
  if (s == "table") return Placement::Table;
  fail(Errc::ParseError, "placement must be 'wrist' or 'table', got '" + std::string(s) + "'");
}

double audible_distance(double amplitude, Placement placement, const AudibilityModel& model) {
  require(std::isfinite(amplitude) && amplitude > 0.0 && amplitude <= 250.0, Errc::AmplitudeOutOfRange,
          "amplitude must lie in (0, 250]");
  const double wrist = model.anchor_distance_m * (amplitude / model.anchor_amplitude);
  return placement == Placement::Wrist ? wrist : model.table_factor * wrist;
}

Detectability detectability_check(const HapticParams& params, Placement placement, double proctor_distance_m,
                                  const AudibilityModel& model) {
  require(std::isfinite(proctor_distance_m) && proctor_distance_m > 0.0, Errc::InvalidParams,
          "proctor distance must be positive");
  return audible_distance(params.amplitude, placement, model) < proctor_distance_m ? Detectability::Safe
                                                                                   : Detectability::Unsafe;
}

// ---------------------------------------------------------------------------
// Clock face

char to_char(SlotState s) {
  switch (s) {
    case SlotState::A: return 'A';
    case SlotState::B: return 'B';
    case SlotState::C: return 'C';
    case SlotState::D: return 'D';
    case SlotState::Pending: return '-';
  }
  return '-';
}

SlotState slot_from_option(char option) {
  switch (option) {
    case 'A': return SlotState::A;
    case 'B': return SlotState::B;
    case 'C': return SlotState::C;
    case 'D': return SlotState::D;
    default: fail(Errc::UnknownOption, std::string("'") + option + "' is not an answer option");
  }
}

std::string_view slot_color(SlotState s) {
  switch (s) {
    case SlotState::A: return "red";
    case SlotState::B: return "green";
    case SlotState::C: return "blue";
    case SlotState::D: return "yellow";
    case SlotState::Pending: return "purple";
  }
  return "purple";
}

std::string_view to_string(SlotState s) {
  switch (s) {
    case SlotState::A: return "A";
    case SlotState::B: return "B";
    case SlotState::C: return "C";
    case SlotState::D: return "D";
    case SlotState::Pending: return "Pending";
  }
  return "Pending";
}

SlotState slot_state_from_string(std::string_view s) {
  if (s == "Pending") return SlotState::Pending;
  if (s.size() == 1) return slot_from_option(s[0]);
  fail(Errc::ParseError, "unknown slot state '" + std::string(s) + "'");
}

void ClockState::validate() const {
  require(page_index >= 1 && page_index <= kClockSlots, Errc::InvalidQuestion,
          "page index must lie in 1..12 (one page-counter dot each)");
}

int page_of(int question_no) {
  require(question_no >= 1, Errc::InvalidQuestion, "question numbers start at 1");
  return (question_no + kClockSlots - 1) / kClockSlots;
}

int slot_of(int question_no) {
  require(question_no >= 1, Errc::InvalidQuestion, "question numbers start at 1");
  return (question_no - 1) % kClockSlots + 1;
}

ClockState apply_answer(std::span<const AnswerMessage> history, int question_no, char option) {
  const int page = page_of(question_no);
  const SlotState target = slot_from_option(option);
  ClockState state;
  state.page_index = page;
  state.validate();
  for (const auto& m : reorder_messages(history)) {
    if (page_of(m.question_no) == page) {
      state.slots[static_cast<std::size_t>(slot_of(m.question_no) - 1)] = slot_from_option(m.option);
    }
  }
  state.slots[static_cast<std::size_t>(slot_of(question_no) - 1)] = target;
  return state;
}

namespace {

constexpr double kCanvas = 240.0;
constexpr double kCenter = kCanvas / 2.0;
constexpr double kAnswerRing = 95.0;
constexpr double kAnswerRadius = 13.0;
constexpr double kPageRing = 62.0;
constexpr double kPageRadius = 4.0;
constexpr std::string_view kPageActive = "#505050";
constexpr std::string_view kPageIdle = "#d3d3d3";

void circle(std::string& out, std::string_view cls, int index, double ring, double r, std::string_view fill) {
  // Position i sits at clock numeral i (12 o'clock for i = 12).
  const double angle = 2.0 * std::numbers::pi * index / kClockSlots;
  const double cx = kCenter + ring * std::sin(angle);
  const double cy = kCenter - ring * std::cos(angle);
  char buf[160];
  std::snprintf(buf, sizeof buf, "  <circle class=\"%.*s\" cx=\"%.3f\" cy=\"%.3f\" r=\"%.1f\" fill=\"%.*s\"/>\n",
                static_cast<int>(cls.size()), cls.data(), cx, cy, r, static_cast<int>(fill.size()), fill.data());
  out += buf;
}

}  // namespace

std::string render_clock_svg(const ClockState& state) {
  state.validate();
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"240\" height=\"240\" "
      "viewBox=\"0 0 240 240\">\n";
  for (int i = 1; i <= kClockSlots; ++i) {
    circle(out, "answer", i, kAnswerRing, kAnswerRadius, slot_color(state.slots[static_cast<std::size_t>(i - 1)]));
  }
  for (int i = 1; i <= kClockSlots; ++i) {
    circle(out, "page", i, kPageRing, kPageRadius, i == state.page_index ? kPageActive : kPageIdle);
  }
  out += "</svg>\n";
  return out;
}

std::vector<AnswerMessage> decode_clock(const ClockState& state) {
  state.validate();
  std::vector<AnswerMessage> out;
  for (int i = 0; i < kClockSlots; ++i) {
    const SlotState s = state.slots[static_cast<std::size_t>(i)];
    if (s == SlotState::Pending) continue;
    out.push_back({(state.page_index - 1) * kClockSlots + i + 1, to_char(s), 0.0});
  }
  return out;
}

}  // namespace wristlink
