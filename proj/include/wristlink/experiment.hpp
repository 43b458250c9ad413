#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wristlink/channel.hpp"
#include "wristlink/error.hpp"
#include "wristlink/features.hpp"
#include "wristlink/learn.hpp"
#include "wristlink/protocol.hpp"
#include "wristlink/signal.hpp"
#include "wristlink/theory.hpp"

namespace wristlink {

enum class ClassifierKind { LogReg, Forest };
enum class ChannelKind { Haptic, Clock };

std::string_view to_string(ClassifierKind k);
ClassifierKind classifier_from_string(std::string_view s);
std::string_view to_string(ChannelKind k);
ChannelKind channel_from_string(std::string_view s);

struct ExperimentConfig {
  int profiles = 15;                 // ids 1..profiles unless profile_ids is set
  std::vector<int> profile_ids;
  bool noiseless = false;            // replace every preset with its zero-noise twin
  ProtocolParams protocol;
  FillerPolicy filler;
  int answers = 50;
  std::vector<SymbolId> alphabet{'A', 'B', 'C', 'E'};
  int training_per_symbol = 30;
  int training_pauses = 10;
  ClassifierKind classifier = ClassifierKind::LogReg;
  LogRegConfig logreg;
  ForestConfig forest;
  ChannelKind channel = ChannelKind::Haptic;
  HapticParams haptic;
  double split_gap = kDefaultSplitGap;
  /// Pass-mark as a fraction of the question count (r = ceil(fraction * n)).
  double pass_fraction = 0.7;
  int options = 4;
  std::int64_t simulation_trials = 20000;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  void validate() const;
  /// Profiles selected by the config, in run order.
  std::vector<MercenaryProfile> selected_profiles() const;
  int pass_mark() const;
};

struct PauseScore {
  int expected = 0;
  int detected = 0;        // truth pauses matched by a detected pause of the same kind
  int wrong_kind = 0;      // truth pauses only matched by the other kind
  int false_pauses = 0;    // detected pauses overlapping no truth pause of their kind
};

/// Detected pauses scored against the generator's annotations by overlap.
PauseScore score_pauses(std::span<const PauseEvent> detected, std::span<const Annotation> truth);

struct ClassifierScore {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<char> predicted;  // per scripted answer, '?' when no segment matched
};

struct ProfileOutcome {
  MercenaryProfile profile;
  double threshold = 0.0;
  PauseScore pauses;
  int segments = 0;
  ClassifierScore logreg;
  ClassifierScore forest;
  std::vector<AnswerMessage> messages;   // chosen classifier, after reordering
  std::vector<char> delivered;           // decoded at the beneficiary, per question
  int exam_score = 0;
};

/// Everything the pipeline derives for one profile except file artifacts.
struct ProfileRun {
  ProfileOutcome outcome;
  SessionScript script;
  AnnotatedSession session;
  std::vector<LabeledTrace> training;
  SegmentationResult segmentation;
  std::vector<FeatureVector> segment_features;
  LogRegModel logreg_model;
  ForestModel forest_model;
  VibrationSchedule schedule;
  std::vector<ClockState> clock_pages;
};

/// A library error tagged with the pipeline stage and profile it came from.
class StageError : public Error {
 public:
  StageError(std::string stage, int profile_id, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "' (profile " + std::to_string(profile_id) + "): " + cause.what()),
        stage_(std::move(stage)),
        profile_id_(profile_id) {}

  const std::string& stage() const noexcept { return stage_; }
  int profile_id() const noexcept { return profile_id_; }

 private:
  std::string stage_;
  int profile_id_;
};

/// Runs synth -> calibrate -> segment -> train -> extract -> classify ->
/// encode -> decode for one profile; failures surface as StageError.
ProfileRun run_profile(const MercenaryProfile& profile, const ExperimentConfig& config);

/// Per-symbol mean feature vectors (rows follow `symbols`) from a fresh
/// training set for `profile`.
Eigen::MatrixXd symbol_mean_features(const MercenaryProfile& profile, std::span<const SymbolId> symbols,
                                     int n_per_symbol, double sample_rate_hz = kDefaultSampleRateHz);

struct ClusteringOutcome {
  KMeansResult clusters;
  std::vector<SymbolId> symbols;
  std::vector<SymbolId> selected;
  bool definitive_separated = false;  // A, B, C, E in four distinct clusters
};

/// K-means on standardized per-symbol means of the extended alphabet.
ClusteringOutcome cluster_symbols(const MercenaryProfile& profile, const KMeansConfig& config, int n_per_symbol);

}  // namespace wristlink
