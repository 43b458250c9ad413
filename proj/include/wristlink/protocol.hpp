#pragma once

#include <span>
#include <utility>
#include <vector>

#include "wristlink/signal.hpp"

namespace wristlink {

struct Window {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

enum class AmbiguousPolicy { Error, Ignore };

/// Which axes must lie inside [-th, th] for a sample to count as still.
enum class AxisMode { AllAxes, XOnly };

struct DetectorConfig {
  double th = 0.0;  // rad/s
  Window opening_window{10.0, 14.0};
  Window closing_window{3.0, 7.0};
  AmbiguousPolicy ambiguous_policy = AmbiguousPolicy::Error;
  AxisMode axis_mode = AxisMode::AllAxes;
  /// Runs shorter than this are dropped as flicker.
  double min_run_s = 0.5;
  /// Up to this many consecutive over-threshold samples are absorbed into a
  /// surrounding still run (tremor outliers above a percentile threshold).
  int max_gap_samples = 4;

  static DetectorConfig from_protocol(const ProtocolParams& params, double th);
  void validate() const;
};

struct StillRun {
  std::size_t first = 0;  // sample index, inclusive
  std::size_t last = 0;   // sample index, exclusive
  double start_t = 0.0;
  double end_t = 0.0;

  double duration() const noexcept { return end_t - start_t; }
};

enum class PauseKind { Opening, Closing };

struct PauseEvent {
  PauseKind kind = PauseKind::Opening;
  double start_t = 0.0;
  double end_t = 0.0;

  double duration() const noexcept { return end_t - start_t; }
};

struct AnswerSegment {
  int index = 1;  // 1-based answer ordinal
  GyroTrace trace_slice;
  double start_t = 0.0;
  double end_t = 0.0;
};

struct SegmentationResult {
  std::vector<AnswerSegment> segments;
  std::vector<PauseEvent> pauses;
};

struct AnswerMessage {
  int question_no = 1;
  char option = 'A';
  double timestamp = 0.0;

  friend bool operator==(const AnswerMessage&, const AnswerMessage&) = default;
};

inline constexpr double kThresholdFloor = 1e-6;

/// th = 1.1 x 99th percentile of |component| pooled over every axis and trace,
/// floored at kThresholdFloor.
double calibrate_threshold(std::span<const GyroTrace> training_pauses);

std::vector<StillRun> detect_still_runs(const GyroTrace& trace, double th);
std::vector<StillRun> detect_still_runs(const GyroTrace& trace, const DetectorConfig& config);

SegmentationResult segment_session(const GyroTrace& trace, const DetectorConfig& config);

/// Sorted by question number; for duplicated questions only the message with
/// the latest timestamp survives.
std::vector<AnswerMessage> reorder_messages(std::span<const AnswerMessage> messages);

bool is_answer_option(char option);
/// A, B, C, E -> A, B, C, D.
char symbol_to_option(SymbolId symbol);
SymbolId option_to_symbol(char option);

}  // namespace wristlink
