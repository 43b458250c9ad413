#include "wristlink/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wristlink/error.hpp"
#include "wristlink/rng.hpp"

namespace wristlink {

std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::LogReg ? "logreg" : "forest"; }

ClassifierKind classifier_from_string(std::string_view s) {
  if (s == "logreg") return ClassifierKind::LogReg;
  if (s == "forest") return ClassifierKind::Forest;
  fail(Errc::InvalidConfig, "classifier must be 'logreg' or 'forest', got '" + std::string(s) + "'");
}

std::string_view to_string(ChannelKind k) { return k == ChannelKind::Haptic ? "haptic" : "clock"; }

ChannelKind channel_from_string(std::string_view s) {
  if (s == "haptic") return ChannelKind::Haptic;
  if (s == "clock") return ChannelKind::Clock;
  fail(Errc::InvalidConfig, "channel must be 'haptic' or 'clock', got '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
  protocol.validate();
  filler.validate(protocol);
  haptic.validate();
  require(profile_ids.empty() ? profiles >= 1 && profiles <= 15 : true, Errc::InvalidConfig,
          "profile count must lie in 1..15");
  for (int id : profile_ids) {
    require(id >= 1 && id <= 15, Errc::InvalidConfig, "profile ids must lie in 1..15");
  }
  require(answers >= 1, Errc::InvalidConfig, "need at least one answer per session");
  require(alphabet.size() == 4, Errc::InvalidConfig, "the attack alphabet needs one symbol per answer option");
  require(std::set<SymbolId>(alphabet.begin(), alphabet.end()).size() == alphabet.size(), Errc::InvalidConfig,
          "alphabet symbols must be distinct");
  for (SymbolId s : alphabet) {
    require(is_supported_symbol(s), Errc::UnknownSymbol, std::string("'") + s + "' has no stroke template");
  }
  require(training_per_symbol >= 1 && training_pauses >= 1, Errc::InvalidConfig,
          "training set sizes must be positive");
  require(logreg.l2_lambda >= 0.0 && logreg.max_iters >= 1 && logreg.tol > 0.0, Errc::InvalidConfig,
          "invalid logistic regression hyperparameters");
  require(forest.n_trees >= 1 && forest.max_features >= 0 && forest.min_leaf >= 1, Errc::InvalidConfig,
          "invalid forest hyperparameters");
  require(split_gap > haptic.t2_gap_s && split_gap < haptic.t3_min_s, Errc::InvalidConfig,
          "split gap must lie strictly between the intra- and inter-cluster gaps");
  require(pass_fraction > 0.0 && pass_fraction <= 1.0, Errc::InvalidConfig, "pass fraction must lie in (0, 1]");
  require(options == 4, Errc::InvalidOptions, "the delivery channels carry exactly four options");
  require(simulation_trials >= 1, Errc::InvalidConfig, "simulation needs at least one trial");
  require(!out_dir.empty(), Errc::InvalidConfig, "output directory must be set");
}

std::vector<MercenaryProfile> ExperimentConfig::selected_profiles() const {
  const auto presets = default_profiles();
  std::vector<int> ids = profile_ids;
  if (ids.empty()) {
    for (int i = 1; i <= profiles; ++i) ids.push_back(i);
  }
  std::vector<MercenaryProfile> out;
  for (int id : ids) {
    const auto& p = presets.at(static_cast<std::size_t>(id - 1));
    out.push_back(noiseless ? noiseless_profile(p.id, p.seed) : p);
  }
  return out;
}

int ExperimentConfig::pass_mark() const {
  const int r = static_cast<int>(std::ceil(pass_fraction * answers - 1e-9));
  return std::clamp(r, 1, answers);
}

namespace {

double overlap(double a0, double a1, double b0, double b1) { return std::min(a1, b1) - std::max(a0, b0); }

}  // namespace

PauseScore score_pauses(std::span<const PauseEvent> detected, std::span<const Annotation> truth) {
  PauseScore s;
  auto kind_of = [](SegmentKind k) {
    return k == SegmentKind::OpeningPause ? PauseKind::Opening : PauseKind::Closing;
  };
  for (const auto& a : truth) {
    if (a.kind != SegmentKind::OpeningPause && a.kind != SegmentKind::ClosingPause) continue;
    ++s.expected;
    bool same = false;
    bool other = false;
    for (const auto& p : detected) {
      if (overlap(a.start_t, a.end_t, p.start_t, p.end_t) <= 0.0) continue;
      (p.kind == kind_of(a.kind) ? same : other) = true;
    }
    if (same) {
      ++s.detected;
    } else if (other) {
      ++s.wrong_kind;
    }
  }
  for (const auto& p : detected) {
    bool hit = false;
    for (const auto& a : truth) {
      if ((a.kind == SegmentKind::OpeningPause || a.kind == SegmentKind::ClosingPause) && kind_of(a.kind) == p.kind &&
          overlap(a.start_t, a.end_t, p.start_t, p.end_t) > 0.0) {
        hit = true;
        break;
      }
    }
    s.false_pauses += hit ? 0 : 1;
  }
  return s;
}

namespace {

Dataset training_dataset(std::span<const LabeledTrace> training, std::span<const SymbolId> alphabet) {
  std::vector<FeatureVector> fv;
  std::vector<SymbolId> labels;
  fv.reserve(training.size());
  for (const auto& lt : training) {
    fv.push_back(extract(lt.trace));
    labels.push_back(lt.label);
  }
  return Dataset::from_features(fv, labels, alphabet);
}

/// For each scripted answer, the index of the segment overlapping its symbol
/// annotation the most (or -1).
std::vector<int> match_segments(const SegmentationResult& seg, std::span<const Annotation> truth) {
  std::vector<int> out;
  for (const auto& a : truth) {
    if (a.kind != SegmentKind::Symbol) continue;
    int best = -1;
    double best_ov = 0.0;
    for (std::size_t i = 0; i < seg.segments.size(); ++i) {
      const double ov = overlap(a.start_t, a.end_t, seg.segments[i].start_t, seg.segments[i].end_t);
      if (ov > best_ov) {
        best_ov = ov;
        best = static_cast<int>(i);
      }
    }
    out.push_back(best);
  }
  return out;
}

ClassifierScore score_classifier(const Classifier& model, std::span<const std::optional<FeatureVector>> features,
                                 std::span<const int> matched, const SessionScript& script,
                                 std::span<const SymbolId> alphabet, std::vector<int>& per_segment) {
  ClassifierScore s;
  s.confusion = ConfusionMatrix(classes_of(model));
  per_segment.assign(features.size(), -1);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i]) per_segment[i] = predict(model, features[i]->values).label;
  }
  int correct = 0;
  for (std::size_t k = 0; k < script.answers.size(); ++k) {
    const SymbolId truth = script.answers[k].symbol;
    const int truth_idx = static_cast<int>(std::find(alphabet.begin(), alphabet.end(), truth) - alphabet.begin());
    const int seg = matched[k];
    const int pred = seg >= 0 ? per_segment[static_cast<std::size_t>(seg)] : -1;
    if (pred < 0) {
      s.predicted.push_back('?');
      continue;
    }
    s.predicted.push_back(alphabet[static_cast<std::size_t>(pred)]);
    s.confusion.add(truth_idx, pred);
    correct += pred == truth_idx ? 1 : 0;
  }
  s.accuracy = script.answers.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(script.answers.size());
  return s;
}

}  // namespace

namespace {

template <typename F>
void stage(const char* name, int profile_id, F&& f) {
  try {
    f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, profile_id, e);
  }
}

}  // namespace

ProfileRun run_profile(const MercenaryProfile& profile, const ExperimentConfig& config) {
  config.validate();
  ProfileRun run;
  auto& out = run.outcome;
  out.profile = profile;
  const int id = profile.id;
  const std::uint64_t profile_seed = derive_seed(config.seed, static_cast<std::uint64_t>(id));

  std::vector<GyroTrace> pauses;
  stage("synth", id, [&] {
    run.script = make_script(config.answers, config.alphabet, profile_seed);
    run.script.filler = config.filler;
    run.session = synth_session(profile, run.script, config.protocol);
    pauses = synth_training_pauses(profile, config.protocol, config.training_pauses);
    run.training = synth_training_set(profile, config.alphabet, config.training_per_symbol,
                                      config.protocol.sample_rate_hz);
  });

  stage("calibrate", id, [&] { out.threshold = calibrate_threshold(pauses); });

  stage("segment", id, [&] {
    const auto detector = DetectorConfig::from_protocol(config.protocol, out.threshold);
    run.segmentation = segment_session(run.session.trace, detector);
    out.pauses = score_pauses(run.segmentation.pauses, run.session.truth);
    out.segments = static_cast<int>(run.segmentation.segments.size());
  });

  stage("train", id, [&] {
    const Dataset train = training_dataset(run.training, config.alphabet);
    run.logreg_model = train_logreg(train, config.logreg);
    ForestConfig fc = config.forest;
    fc.seed = derive_seed(profile_seed ^ config.forest.seed, 0xf0e57);
    run.forest_model = train_forest(train, fc);
  });

  std::vector<std::optional<FeatureVector>> seg_features;
  stage("extract", id, [&] {
    for (const auto& seg : run.segmentation.segments) {
      if (seg.trace_slice.size() >= kMinSeriesLength) {
        seg_features.push_back(extract(seg.trace_slice));
        run.segment_features.push_back(*seg_features.back());
      } else {
        seg_features.emplace_back();
      }
    }
  });

  std::vector<int> chosen;
  stage("classify", id, [&] {
    const auto matched = match_segments(run.segmentation, run.session.truth);
    std::vector<int> lr_seg;
    std::vector<int> rf_seg;
    out.logreg = score_classifier(run.logreg_model, seg_features, matched, run.script, config.alphabet, lr_seg);
    out.forest = score_classifier(run.forest_model, seg_features, matched, run.script, config.alphabet, rf_seg);
    chosen = config.classifier == ClassifierKind::LogReg ? lr_seg : rf_seg;

    // The mercenary's metadata: the segment ordinal names the question.
    std::vector<AnswerMessage> raw;
    for (std::size_t i = 0; i < run.segmentation.segments.size(); ++i) {
      if (chosen[i] < 0) continue;
      const auto& seg = run.segmentation.segments[i];
      const int q = seg.index <= static_cast<int>(run.script.answers.size())
                        ? run.script.answers[static_cast<std::size_t>(seg.index - 1)].question_no
                        : seg.index;
      raw.push_back({q, static_cast<char>('A' + chosen[i]), seg.end_t});
    }
    out.messages = reorder_messages(raw);
  });

  std::map<int, char> received;
  stage("encode", id, [&] {
    if (config.channel == ChannelKind::Haptic) {
      run.schedule = encode_haptic(out.messages, config.haptic);
    } else {
      std::vector<AnswerMessage> history;
      std::map<int, ClockState> pages;
      for (const auto& m : out.messages) {
        pages[page_of(m.question_no)] = apply_answer(history, m.question_no, m.option);
        history.push_back(m);
      }
      for (const auto& [page, state] : pages) run.clock_pages.push_back(state);
    }
  });

  stage("decode", id, [&] {
    if (config.channel == ChannelKind::Haptic) {
      const auto options = decode_haptic(run.schedule, config.split_gap, config.haptic);
      require(options.size() == out.messages.size(), Errc::MalformedCluster,
              "decoded cluster count differs from the message count");
      for (std::size_t i = 0; i < options.size(); ++i) received[out.messages[i].question_no] = options[i];
    } else {
      for (const auto& state : run.clock_pages) {
        for (const auto& m : decode_clock(state)) received[m.question_no] = m.option;
      }
    }
  });

  for (const auto& a : run.script.answers) {
    const auto it = received.find(a.question_no);
    const char got = it == received.end() ? '?' : it->second;
    out.delivered.push_back(got);
    const auto pos = std::find(config.alphabet.begin(), config.alphabet.end(), a.symbol) - config.alphabet.begin();
    out.exam_score += got == static_cast<char>('A' + pos) ? 1 : 0;
  }
  return run;
}

Eigen::MatrixXd symbol_mean_features(const MercenaryProfile& profile, std::span<const SymbolId> symbols,
                                     int n_per_symbol, double sample_rate_hz) {
  const auto set = synth_training_set(profile, symbols, n_per_symbol, sample_rate_hz);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(symbols.size()),
                                                static_cast<Eigen::Index>(kFeatureCount));
  std::vector<int> counts(symbols.size(), 0);
  for (const auto& lt : set) {
    const auto row = std::find(symbols.begin(), symbols.end(), lt.label) - symbols.begin();
    const auto fv = extract(lt.trace);
    for (std::size_t j = 0; j < kFeatureCount; ++j) means(row, static_cast<Eigen::Index>(j)) += fv[j];
    ++counts[static_cast<std::size_t>(row)];
  }
  for (Eigen::Index i = 0; i < means.rows(); ++i) means.row(i) /= std::max(1, counts[static_cast<std::size_t>(i)]);
  return means;
}

ClusteringOutcome cluster_symbols(const MercenaryProfile& profile, const KMeansConfig& config, int n_per_symbol) {
  ClusteringOutcome out;
  const auto ext = extended_alphabet();
  out.symbols.assign(ext.begin(), ext.end());
  const Eigen::MatrixXd means = symbol_mean_features(profile, out.symbols, n_per_symbol);
  const Eigen::MatrixXd z = ColumnScaler::fit(means).apply(means);
  KMeansConfig kc = config;
  kc.seed = derive_seed(config.seed, static_cast<std::uint64_t>(profile.id));
  out.clusters = kmeans(z, kc);
  out.selected = select_symbols(out.clusters, out.symbols);
  std::set<int> seen;
  for (SymbolId s : definitive_alphabet()) {
    const auto i = std::find(out.symbols.begin(), out.symbols.end(), s) - out.symbols.begin();
    seen.insert(out.clusters.assignment[static_cast<std::size_t>(i)]);
  }
  out.definitive_separated = seen.size() == 4;
  return out;
}

}  // namespace wristlink
