#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wristlink/channel.hpp"
#include "wristlink/features.hpp"
#include "wristlink/learn.hpp"
#include "wristlink/protocol.hpp"
#include "wristlink/signal.hpp"
#include "wristlink/theory.hpp"

namespace wristlink::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Fixed-point text with `decimals` digits.
std::string format_fixed(double v, int decimals);

std::string read_text(const std::filesystem::path& path);
/// Creates parent directories; writes bytes verbatim.
void write_text(const std::filesystem::path& path, const std::string& text);

// Traces: CSV `t,x,y,z`, nine decimals. Reading re-grids timestamps onto
// t0 + k / rate, with the rate inferred from the mean spacing (0.1 mHz
// resolution) unless given.
std::string trace_to_csv(const GyroTrace& trace);
GyroTrace trace_from_csv(const std::string& text, double sample_rate_hz = 0.0);

Json annotations_to_json(std::span<const Annotation> truth, double sample_rate_hz);
std::vector<Annotation> annotations_from_json(const Json& j);

Json segmentation_to_json(const SegmentationResult& result, double threshold);

Json message_to_json(const AnswerMessage& m);
AnswerMessage message_from_json(const Json& j);
/// One JSON object per line.
std::string messages_to_jsonl(std::span<const AnswerMessage> messages);
std::vector<AnswerMessage> messages_from_jsonl(const std::string& text);

/// Header of feature names plus `label`, one row per vector.
std::string features_to_csv(std::span<const FeatureVector> features, std::span<const SymbolId> labels);

Json model_to_json(const LogRegModel& model);
Json model_to_json(const ForestModel& model);
Json model_to_json(const Classifier& model);
Classifier model_from_json(const Json& j);

Json evaluation_to_json(double accuracy, const ConfusionMatrix& confusion);

// Vibration schedules: CSV `start_t,duration_ms,amplitude`.
std::string schedule_to_csv(const VibrationSchedule& schedule);
std::vector<VibrationEvent> schedule_from_csv(const std::string& text);

Json clock_to_json(const ClockState& state);
ClockState clock_from_json(const Json& j);

// Surfaces: CSV `p,alpha,value` plus a JSON sidecar with the fixed parameters.
std::string surface_to_csv(const theory::SurfaceGrid& grid);
Json surface_sidecar(const theory::SurfaceGrid& grid);

Json simulation_to_json(const theory::TheoryParams& params, const theory::SimulationResult& result,
                        double formula_value);

/// Serialized JSON with two-space indentation and a trailing newline.
std::string dump(const Json& j);
Json parse_json(const std::string& text);

}  // namespace wristlink::io
