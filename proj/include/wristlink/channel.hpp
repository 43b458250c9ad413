#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wristlink/protocol.hpp"

namespace wristlink {

// ---------------------------------------------------------------------------
// Haptic channel: answer k-th option as a cluster of k vibrations.

struct HapticParams {
  double t1_vibe_ms = 200.0;  // single vibration length
  double t2_gap_s = 1.0;      // gap between vibrations inside a cluster
  double t3_min_s = 45.0;     // minimum gap between clusters
  double amplitude = 70.0;    // device units, (0, 250]

  void validate() const;
};

struct VibrationEvent {
  double start_t = 0.0;  // seconds
  double duration_ms = 0.0;
  double amplitude = 0.0;

  double end_t() const noexcept { return start_t + duration_ms / 1000.0; }
  friend bool operator==(const VibrationEvent&, const VibrationEvent&) = default;
};

/// Non-overlapping events with strictly increasing start times.
class VibrationSchedule {
 public:
  VibrationSchedule() = default;
  explicit VibrationSchedule(std::vector<VibrationEvent> events);

  std::span<const VibrationEvent> events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }

  friend bool operator==(const VibrationSchedule&, const VibrationSchedule&) = default;

 private:
  std::vector<VibrationEvent> events_;
};

inline constexpr double kDefaultSplitGap = 10.0;

VibrationSchedule encode_haptic(std::span<const AnswerMessage> messages, const HapticParams& params = {});

/// Groups events (sorted by start) wherever the silence between one event's
/// end and the next start exceeds split_gap; cluster size k maps to option k.
std::vector<char> decode_haptic(std::span<const VibrationEvent> events, double split_gap = kDefaultSplitGap,
                                const HapticParams& params = {});
std::vector<char> decode_haptic(const VibrationSchedule& schedule, double split_gap = kDefaultSplitGap,
                                const HapticParams& params = {});

enum class Placement { Wrist, Table };

std::string_view to_string(Placement p);
Placement placement_from_string(std::string_view s);

/// Linear audibility line through the origin, anchored at 0.5 m for 70 units
/// on the wrist; the table placement is a multiple of the wrist line.
struct AudibilityModel {
  double anchor_amplitude = 70.0;
  double anchor_distance_m = 0.5;
  double table_factor = 1.5;
};

double audible_distance(double amplitude, Placement placement, const AudibilityModel& model = {});

enum class Detectability { Safe, Unsafe };

/// Safe iff the audible distance is strictly below the proctor distance.
Detectability detectability_check(const HapticParams& params, Placement placement, double proctor_distance_m,
                                  const AudibilityModel& model = {});

// ---------------------------------------------------------------------------
// Visual channel: 12 answer dots on a clock face plus a 12-dot page counter.

inline constexpr int kClockSlots = 12;

enum class SlotState { A, B, C, D, Pending };

char to_char(SlotState s);  // 'A'..'D', '-' for Pending
SlotState slot_from_option(char option);
std::string_view slot_color(SlotState s);
std::string_view to_string(SlotState s);
SlotState slot_state_from_string(std::string_view s);

struct ClockState {
  int page_index = 1;
  std::array<SlotState, kClockSlots> slots{SlotState::Pending, SlotState::Pending, SlotState::Pending,
                                           SlotState::Pending, SlotState::Pending, SlotState::Pending,
                                           SlotState::Pending, SlotState::Pending, SlotState::Pending,
                                           SlotState::Pending, SlotState::Pending, SlotState::Pending};

  void validate() const;
  friend bool operator==(const ClockState&, const ClockState&) = default;
};

int page_of(int question_no);
int slot_of(int question_no);  // 1-based

/// Replays `history` together with the new answer and returns the face for
/// the page holding question_no.
ClockState apply_answer(std::span<const AnswerMessage> history, int question_no, char option);

std::string render_clock_svg(const ClockState& state);

std::vector<AnswerMessage> decode_clock(const ClockState& state);

}  // namespace wristlink
