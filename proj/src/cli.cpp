#include "wristlink/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "wristlink/error.hpp"
#include "wristlink/rng.hpp"

namespace wristlink::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), Errc::InvalidConfig, where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    require(keys.count(k) == 1, Errc::InvalidConfig, "unknown config key '" + where + k + "'");
  }
}

template <typename T>
void overlay(const Json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidConfig, std::string("config key '") + key + "': " + e.what());
  }
}

std::string alphabet_string(std::span<const SymbolId> a) { return std::string(a.begin(), a.end()); }

}  // namespace

ExperimentConfig config_from_json(const Json& j, ExperimentConfig c) {
  check_keys(j,
             {"schema_version", "profiles", "profile_ids", "noiseless", "protocol", "filler", "answers", "alphabet",
              "training_per_symbol", "training_pauses", "classifier", "logreg", "forest", "channel", "haptic",
              "split_gap", "pass_fraction", "options", "simulation_trials", "seed", "out_dir"},
             "");
  overlay(j, "profiles", c.profiles);
  overlay(j, "profile_ids", c.profile_ids);
  overlay(j, "noiseless", c.noiseless);
  if (j.contains("protocol")) {
    const auto& p = j["protocol"];
    check_keys(p, {"t1", "t2", "eps", "sample_rate_hz"}, "protocol.");
    overlay(p, "t1", c.protocol.t1);
    overlay(p, "t2", c.protocol.t2);
    overlay(p, "eps", c.protocol.eps);
    overlay(p, "sample_rate_hz", c.protocol.sample_rate_hz);
  }
  if (j.contains("filler")) {
    const auto& f = j["filler"];
    check_keys(f,
               {"min_total", "max_total", "burst_min", "burst_max", "still_min", "still_margin", "burst_amp_min",
                "burst_amp_max"},
               "filler.");
    overlay(f, "min_total", c.filler.min_total);
    overlay(f, "max_total", c.filler.max_total);
    overlay(f, "burst_min", c.filler.burst_min);
    overlay(f, "burst_max", c.filler.burst_max);
    overlay(f, "still_min", c.filler.still_min);
    overlay(f, "still_margin", c.filler.still_margin);
    overlay(f, "burst_amp_min", c.filler.burst_amp_min);
    overlay(f, "burst_amp_max", c.filler.burst_amp_max);
  }
  overlay(j, "answers", c.answers);
  if (j.contains("alphabet")) {
    std::string a;
    overlay(j, "alphabet", a);
    c.alphabet.assign(a.begin(), a.end());
  }
  overlay(j, "training_per_symbol", c.training_per_symbol);
  overlay(j, "training_pauses", c.training_pauses);
  if (j.contains("classifier")) c.classifier = classifier_from_string(j["classifier"].get<std::string>());
  if (j.contains("logreg")) {
    const auto& l = j["logreg"];
    check_keys(l, {"l2_lambda", "max_iters", "tol", "standardize"}, "logreg.");
    overlay(l, "l2_lambda", c.logreg.l2_lambda);
    overlay(l, "max_iters", c.logreg.max_iters);
    overlay(l, "tol", c.logreg.tol);
    overlay(l, "standardize", c.logreg.standardize);
  }
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    check_keys(f, {"n_trees", "max_features", "min_leaf", "seed"}, "forest.");
    overlay(f, "n_trees", c.forest.n_trees);
    overlay(f, "max_features", c.forest.max_features);
    overlay(f, "min_leaf", c.forest.min_leaf);
    overlay(f, "seed", c.forest.seed);
  }
  if (j.contains("channel")) c.channel = channel_from_string(j["channel"].get<std::string>());
  if (j.contains("haptic")) {
    const auto& h = j["haptic"];
    check_keys(h, {"t1_vibe_ms", "t2_gap_s", "t3_min_s", "amplitude"}, "haptic.");
    overlay(h, "t1_vibe_ms", c.haptic.t1_vibe_ms);
    overlay(h, "t2_gap_s", c.haptic.t2_gap_s);
    overlay(h, "t3_min_s", c.haptic.t3_min_s);
    overlay(h, "amplitude", c.haptic.amplitude);
  }
  overlay(j, "split_gap", c.split_gap);
  overlay(j, "pass_fraction", c.pass_fraction);
  overlay(j, "options", c.options);
  overlay(j, "simulation_trials", c.simulation_trials);
  overlay(j, "seed", c.seed);
  overlay(j, "out_dir", c.out_dir);
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["schema_version"] = io::kSchemaVersion;
  j["profiles"] = c.profiles;
  j["profile_ids"] = c.profile_ids;
  j["noiseless"] = c.noiseless;
  j["protocol"] = {{"t1", c.protocol.t1},
                   {"t2", c.protocol.t2},
                   {"eps", c.protocol.eps},
                   {"sample_rate_hz", c.protocol.sample_rate_hz}};
  j["filler"] = {{"min_total", c.filler.min_total},         {"max_total", c.filler.max_total},
                 {"burst_min", c.filler.burst_min},         {"burst_max", c.filler.burst_max},
                 {"still_min", c.filler.still_min},         {"still_margin", c.filler.still_margin},
                 {"burst_amp_min", c.filler.burst_amp_min}, {"burst_amp_max", c.filler.burst_amp_max}};
  j["answers"] = c.answers;
  j["alphabet"] = alphabet_string(c.alphabet);
  j["training_per_symbol"] = c.training_per_symbol;
  j["training_pauses"] = c.training_pauses;
  j["classifier"] = std::string(to_string(c.classifier));
  j["logreg"] = {{"l2_lambda", c.logreg.l2_lambda},
                 {"max_iters", c.logreg.max_iters},
                 {"tol", c.logreg.tol},
                 {"standardize", c.logreg.standardize}};
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"max_features", c.forest.max_features},
                 {"min_leaf", c.forest.min_leaf},
                 {"seed", c.forest.seed}};
  j["channel"] = std::string(to_string(c.channel));
  j["haptic"] = {{"t1_vibe_ms", c.haptic.t1_vibe_ms},
                 {"t2_gap_s", c.haptic.t2_gap_s},
                 {"t3_min_s", c.haptic.t3_min_s},
                 {"amplitude", c.haptic.amplitude}};
  j["split_gap"] = c.split_gap;
  j["pass_fraction"] = c.pass_fraction;
  j["options"] = c.options;
  j["simulation_trials"] = c.simulation_trials;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string profile_dir_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "profile_%02d", id);
  return buf;
}

std::vector<FeatureVector> training_features(std::span<const LabeledTrace> training, std::vector<SymbolId>& labels) {
  std::vector<FeatureVector> out;
  labels.clear();
  for (const auto& lt : training) {
    out.push_back(extract(lt.trace));
    labels.push_back(lt.label);
  }
  return out;
}

Json pause_json(const PauseScore& p) {
  return {{"expected", p.expected},
          {"detected", p.detected},
          {"wrong_kind", p.wrong_kind},
          {"false_pauses", p.false_pauses}};
}

}  // namespace

Json cmd_synth(const ExperimentConfig& config) {
  config.validate();
  const fs::path root(config.out_dir);
  Json manifest;
  manifest["schema_version"] = io::kSchemaVersion;
  manifest["seed"] = config.seed;
  Json files = Json::array();
  for (const auto& profile : config.selected_profiles()) {
    const fs::path dir = root / profile_dir_name(profile.id);
    const std::uint64_t profile_seed = derive_seed(config.seed, static_cast<std::uint64_t>(profile.id));
    SessionScript script = make_script(config.answers, config.alphabet, profile_seed);
    script.filler = config.filler;
    const auto session = synth_session(profile, script, config.protocol);
    const auto training = synth_training_set(profile, config.alphabet, config.training_per_symbol,
                                             config.protocol.sample_rate_hz);
    std::vector<SymbolId> labels;
    const auto fv = training_features(training, labels);
    io::write_text(dir / "session.csv", io::trace_to_csv(session.trace));
    io::write_text(dir / "annotations.json",
                   io::dump(io::annotations_to_json(session.truth, config.protocol.sample_rate_hz)));
    io::write_text(dir / "training_features.csv", io::features_to_csv(fv, labels));
    files.push_back({{"profile", profile.id},
                     {"session", (fs::path(profile_dir_name(profile.id)) / "session.csv").generic_string()},
                     {"annotations", (fs::path(profile_dir_name(profile.id)) / "annotations.json").generic_string()},
                     {"training", (fs::path(profile_dir_name(profile.id)) / "training_features.csv").generic_string()},
                     {"answers", script.answers.size()},
                     {"training_samples", training.size()}});
  }
  manifest["profiles"] = std::move(files);
  io::write_text(root / "synth_manifest.json", io::dump(manifest));
  return manifest;
}

Json cmd_pipeline(const ExperimentConfig& config) {
  config.validate();
  const fs::path root(config.out_dir);
  const int n = config.answers;
  const int r = config.pass_mark();

  Json profiles = Json::array();
  std::vector<ConfusionMatrix> lr_conf;
  std::vector<ConfusionMatrix> rf_conf;
  long pauses_expected = 0;
  long pauses_detected = 0;
  long false_pauses = 0;
  double lr_sum = 0.0;
  double rf_sum = 0.0;
  double lr_min = 1.0;
  int rf_at_least_070 = 0;
  int passes = 0;
  long score_sum = 0;

  for (const auto& profile : config.selected_profiles()) {
    const ProfileRun run = run_profile(profile, config);
    const auto& o = run.outcome;
    const fs::path dir = root / profile_dir_name(profile.id);

    io::write_text(dir / "session.csv", io::trace_to_csv(run.session.trace));
    io::write_text(dir / "annotations.json",
                   io::dump(io::annotations_to_json(run.session.truth, config.protocol.sample_rate_hz)));
    io::write_text(dir / "segments.json", io::dump(io::segmentation_to_json(run.segmentation, o.threshold)));
    std::vector<SymbolId> labels;
    const auto fv = training_features(run.training, labels);
    io::write_text(dir / "training_features.csv", io::features_to_csv(fv, labels));
    io::write_text(dir / "model_logreg.json", io::dump(io::model_to_json(run.logreg_model)));
    io::write_text(dir / "model_forest.json", io::dump(io::model_to_json(run.forest_model)));
    io::write_text(dir / "evaluation_logreg.json", io::dump(io::evaluation_to_json(o.logreg.accuracy, o.logreg.confusion)));
    io::write_text(dir / "evaluation_forest.json", io::dump(io::evaluation_to_json(o.forest.accuracy, o.forest.confusion)));
    io::write_text(dir / "messages.jsonl", io::messages_to_jsonl(o.messages));
    if (config.channel == ChannelKind::Haptic) {
      io::write_text(dir / "schedule.csv", io::schedule_to_csv(run.schedule));
    } else {
      for (const auto& page : run.clock_pages) {
        char name[32];
        std::snprintf(name, sizeof name, "clock_page_%02d", page.page_index);
        io::write_text(dir / (std::string(name) + ".json"), io::dump(io::clock_to_json(page)));
        io::write_text(dir / (std::string(name) + ".svg"), render_clock_svg(page));
      }
    }

    const double accuracy = config.classifier == ClassifierKind::LogReg ? o.logreg.accuracy : o.forest.accuracy;
    theory::TheoryParams tp{1.0, accuracy, config.options, 1.0 / config.options, n, r};
    const double beta = theory::beta(tp.p, tp.alpha, tp.m);
    const double formula = theory::binom_tail(n, r, beta);
    const auto sim = theory::simulate_exam(tp, config.simulation_trials,
                                           derive_seed(config.seed ^ 0x5137ULL, static_cast<std::uint64_t>(profile.id)));
    const bool passed = o.exam_score >= r;

    pauses_expected += o.pauses.expected;
    pauses_detected += o.pauses.detected;
    false_pauses += o.pauses.false_pauses;
    lr_sum += o.logreg.accuracy;
    rf_sum += o.forest.accuracy;
    lr_min = std::min(lr_min, o.logreg.accuracy);
    rf_at_least_070 += o.forest.accuracy >= 0.70 ? 1 : 0;
    passes += passed ? 1 : 0;
    score_sum += o.exam_score;
    lr_conf.push_back(o.logreg.confusion);
    rf_conf.push_back(o.forest.confusion);

    Json pj;
    pj["id"] = profile.id;
    pj["threshold"] = o.threshold;
    pj["pauses"] = pause_json(o.pauses);
    pj["segments"] = o.segments;
    pj["accuracy"] = accuracy;
    pj["accuracy_logreg"] = o.logreg.accuracy;
    pj["accuracy_forest"] = o.forest.accuracy;
    pj["predicted"] = std::string((config.classifier == ClassifierKind::LogReg ? o.logreg : o.forest).predicted.begin(),
                                  (config.classifier == ClassifierKind::LogReg ? o.logreg : o.forest).predicted.end());
    pj["delivered"] = std::string(o.delivered.begin(), o.delivered.end());
    pj["exam_score"] = o.exam_score;
    pj["passed"] = passed;
    pj["theory"] = {{"p", tp.p},
                    {"alpha", tp.alpha},
                    {"beta", beta},
                    {"pass_probability", formula},
                    {"simulated", sim.estimate},
                    {"simulated_se", sim.standard_error}};
    profiles.push_back(std::move(pj));
  }

  const double count = static_cast<double>(profiles.size());
  const double mean_acc = (config.classifier == ClassifierKind::LogReg ? lr_sum : rf_sum) / count;
  theory::TheoryParams tp{1.0, mean_acc, config.options, 1.0 / config.options, n, r};
  const double beta = theory::beta(tp.p, tp.alpha, tp.m);
  const auto sim = theory::simulate_exam(tp, config.simulation_trials, derive_seed(config.seed ^ 0x5137ULL, 0));

  Json report;
  report["schema_version"] = io::kSchemaVersion;
  report["config"] = config_to_json(config);
  report["pass_mark"] = r;
  report["profiles"] = std::move(profiles);
  Json summary;
  summary["pause_detection_rate"] =
      pauses_expected == 0 ? 0.0 : static_cast<double>(pauses_detected) / static_cast<double>(pauses_expected);
  summary["false_pauses"] = false_pauses;
  summary["mean_accuracy_logreg"] = lr_sum / count;
  summary["min_accuracy_logreg"] = lr_min;
  summary["mean_accuracy_forest"] = rf_sum / count;
  summary["forest_profiles_at_least_0_70"] = rf_at_least_070;
  summary["mean_confusion_logreg"] = aggregate_confusions(lr_conf);
  summary["mean_confusion_forest"] = aggregate_confusions(rf_conf);
  summary["classes"] = lr_conf.front().classes;
  summary["mean_exam_score"] = static_cast<double>(score_sum) / count;
  summary["passes"] = passes;
  summary["theory"] = {{"p", tp.p},
                       {"alpha", tp.alpha},
                       {"beta", beta},
                       {"pass_probability", theory::binom_tail(n, r, beta)},
                       {"simulated", sim.estimate},
                       {"simulated_se", sim.standard_error}};
  report["summary"] = std::move(summary);
  io::write_text(root / "report.json", io::dump(report));
  return report;
}

Json cmd_cluster(const ExperimentConfig& config, int n_per_symbol) {
  config.validate();
  require(n_per_symbol >= 1, Errc::InvalidConfig, "need at least one sample per symbol");
  Json out;
  out["schema_version"] = io::kSchemaVersion;
  Json arr = Json::array();
  int separated = 0;
  for (const auto& profile : config.selected_profiles()) {
    KMeansConfig kc;
    kc.seed = config.seed;
    const auto c = cluster_symbols(profile, kc, n_per_symbol);
    Json clusters = Json::array();
    for (int k = 0; k < kc.k; ++k) {
      std::string members;
      for (std::size_t i = 0; i < c.symbols.size(); ++i) {
        if (c.clusters.assignment[i] == k) members.push_back(c.symbols[i]);
      }
      clusters.push_back(members);
    }
    separated += c.definitive_separated ? 1 : 0;
    arr.push_back({{"id", profile.id},
                   {"clusters", clusters},
                   {"inertia", c.clusters.inertia},
                   {"selected", alphabet_string(c.selected)},
                   {"definitive_separated", c.definitive_separated}});
  }
  out["profiles"] = std::move(arr);
  out["definitive_separated"] = separated;
  io::write_text(fs::path(config.out_dir) / "clusters.json", io::dump(out));
  return out;
}

// ---------------------------------------------------------------------------
// Argument handling

namespace {

struct TheoryArgs {
  double p = 0.9;
  double alpha = 0.9;
  int m = 4;
  double theta = -1.0;  // 1/m unless given
  int n = 100;
  int r = 90;
  std::string grade;
  std::int64_t trials = 100000;
  int grid = 51;
  std::string quantity = "mu";

  theory::TheoryParams params() const {
    theory::TheoryParams t{p, alpha, m, theta < 0.0 ? 1.0 / std::max(m, 1) : theta, n, r};
    if (!grade.empty()) {
      t.n = 100;
      t.r = theory::pass_mark_for_grade(grade);
    }
    return t;
  }
};

void add_theory_params(CLI::App* sub, TheoryArgs& a, bool with_exam) {
  sub->add_option("--p", a.p, "mercenary per-question knowledge");
  sub->add_option("--alpha", a.alpha, "channel recognition accuracy");
  sub->add_option("--m", a.m, "options per question");
  if (with_exam) {
    sub->add_option("--theta", a.theta, "clean-option per-question success (default 1/m)");
    sub->add_option("--n", a.n, "questions");
    sub->add_option("--r", a.r, "pass-mark");
    sub->add_option("--grade", a.grade, "A (r=90) or C (r=70) on n=100");
  }
}

std::vector<char> parse_option_list(const std::string& s) {
  std::vector<char> out;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    require(is_answer_option(c), Errc::UnknownOption, std::string("'") + c + "' is not an answer option");
    out.push_back(c);
  }
  return out;
}

/// Messages from a JSONL file, or a plain option list like "C,A,B" numbered
/// from question 1 with zero timestamps.
std::vector<AnswerMessage> load_answers(const std::string& path) {
  const std::string text = io::read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return io::messages_from_jsonl(text);
  std::vector<AnswerMessage> out;
  int q = 1;
  for (char c : parse_option_list(text)) out.push_back({q++, c, 0.0});
  return out;
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covert exam-answer channel toolkit: synthesis, decoding, delivery and odds"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");

  int profiles = 0;
  int answers = 0;
  bool noiseless = false;
  std::string classifier;
  std::string channel;
  int per_symbol = 30;

  auto* synth = app.add_subcommand("synth", "write synthetic sessions and training sets");
  auto* pipeline = app.add_subcommand("pipeline", "run the end-to-end attack and write report.json");
  auto* cluster = app.add_subcommand("cluster", "K-means symbol selection over the extended alphabet");
  for (auto* sub : {synth, pipeline, cluster}) {
    sub->add_option("--profiles", profiles, "number of default profiles (1..15)");
    sub->add_flag("--noiseless", noiseless, "use zero-noise profiles");
  }
  for (auto* sub : {synth, pipeline}) sub->add_option("--answers", answers, "answers per session");
  pipeline->add_option("--classifier", classifier, "logreg or forest");
  pipeline->add_option("--channel", channel, "haptic or clock");
  cluster->add_option("--per-symbol", per_symbol, "samples per symbol for the means");

  auto* theory_cmd = app.add_subcommand("theory", "exam-odds model");
  theory_cmd->require_subcommand(1);
  theory_cmd->fallthrough();
  TheoryArgs ta;
  auto* t_beta = theory_cmd->add_subcommand("beta", "per-question success under the attack");
  auto* t_mu = theory_cmd->add_subcommand("mu", "log10 of the pass-probability ratio");
  auto* t_threshold = theory_cmd->add_subcommand("threshold", "clean-option break-even theta");
  auto* t_derivative = theory_cmd->add_subcommand("derivative", "d theta_threshold / d alpha");
  auto* t_surface = theory_cmd->add_subcommand("surface", "CSV grid over (p, alpha)");
  auto* t_simulate = theory_cmd->add_subcommand("simulate", "Monte Carlo exam estimate");
  add_theory_params(t_beta, ta, false);
  add_theory_params(t_mu, ta, true);
  add_theory_params(t_threshold, ta, false);
  add_theory_params(t_derivative, ta, false);
  add_theory_params(t_surface, ta, true);
  add_theory_params(t_simulate, ta, true);
  t_threshold->add_option("--theta", ta.theta, "also report whether this theta prefers the attack");
  t_surface->add_option("--grid", ta.grid, "points per axis");
  t_surface->add_option("--quantity", ta.quantity, "mu or threshold");
  t_simulate->add_option("--trials", ta.trials, "Monte Carlo trials");

  auto* channel_cmd = app.add_subcommand("channel", "answer delivery codecs");
  channel_cmd->require_subcommand(1);
  channel_cmd->fallthrough();
  std::string in_path;
  std::string out_path;
  std::string options_inline;
  double split_gap = kDefaultSplitGap;
  double amplitude = 70.0;
  std::string placement = "wrist";
  double proctor_distance = 0.0;
  int question = 0;
  std::string option_arg;
  auto* c_henc = channel_cmd->add_subcommand("haptic-encode", "answers -> vibration schedule CSV");
  c_henc->add_option("--in", in_path, "answers (JSONL messages or option list)");
  c_henc->add_option("--options", options_inline, "inline option list, e.g. C,A,B");
  c_henc->add_option("--output", out_path, "schedule CSV (stdout if omitted)");
  c_henc->add_option("--amplitude", amplitude, "vibration amplitude");
  auto* c_hdec = channel_cmd->add_subcommand("haptic-decode", "vibration schedule CSV -> options");
  c_hdec->add_option("--in", in_path, "schedule CSV")->required();
  c_hdec->add_option("--split-gap", split_gap, "cluster split gap in seconds");
  c_hdec->add_option("--output", out_path, "JSONL messages (stdout if omitted)");
  auto* c_aud = channel_cmd->add_subcommand("audibility", "audible distance of the vibration motor");
  c_aud->add_option("--amplitude", amplitude, "device units (0, 250]");
  c_aud->add_option("--placement", placement, "wrist or table");
  c_aud->add_option("--proctor-distance", proctor_distance, "also classify as safe/unsafe at this distance");
  auto* c_render = channel_cmd->add_subcommand("clock-render", "clock state -> SVG");
  c_render->add_option("--in", in_path, "clock state JSON");
  c_render->add_option("--answers", options_inline, "answer history (JSONL) to replay instead");
  c_render->add_option("--question", question, "question to show (with --answers)");
  c_render->add_option("--option", option_arg, "answer for --question (defaults to the history's)");
  c_render->add_option("--output", out_path, "SVG (stdout if omitted)");
  auto* c_decode = channel_cmd->add_subcommand("clock-decode", "clock state JSON -> messages");
  c_decode->add_option("--in", in_path, "clock state JSON")->required();
  c_decode->add_option("--output", out_path, "JSONL messages (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    ExperimentConfig config;
    if (!config_path.empty()) config = config_from_json(io::parse_json(io::read_text(config_path)));
    if (app.count("--seed") > 0) config.seed = seed;
    if (app.count("--out") > 0) config.out_dir = out_dir;
    if (profiles > 0) {
      config.profiles = profiles;
      config.profile_ids.clear();
    }
    if (answers > 0) config.answers = answers;
    if (noiseless) config.noiseless = true;
    if (!classifier.empty()) config.classifier = classifier_from_string(classifier);
    if (!channel.empty()) config.channel = channel_from_string(channel);

    if (synth->parsed()) {
      config.validate();
      const auto m = cmd_synth(config);
      out << "wrote " << m["profiles"].size() << " profiles to " << config.out_dir << "\n";
      return 0;
    }
    if (pipeline->parsed()) {
      config.validate();
      try {
        const auto report = cmd_pipeline(config);
        const auto& s = report["summary"];
        out << "pause detection rate " << io::format_double(s["pause_detection_rate"].get<double>())
            << ", mean accuracy (logreg) " << io::format_fixed(s["mean_accuracy_logreg"].get<double>(), 3)
            << ", mean accuracy (forest) " << io::format_fixed(s["mean_accuracy_forest"].get<double>(), 3) << "\n"
            << "report: " << (fs::path(config.out_dir) / "report.json").string() << "\n";
      } catch (const StageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
      }
      return 0;
    }
    if (cluster->parsed()) {
      config.validate();
      const auto c = cmd_cluster(config, per_symbol);
      for (const auto& p : c["profiles"]) {
        out << "profile " << p["id"].get<int>() << ": selected " << p["selected"].get<std::string>() << "\n";
      }
      out << "A, B, C, E separated for " << c["definitive_separated"].get<int>() << " of " << c["profiles"].size()
          << " profiles\n";
      return 0;
    }

    if (theory_cmd->parsed()) {
      const auto tp = ta.params();
      if (t_beta->parsed()) {
        out << io::format_double(theory::beta(ta.p, ta.alpha, ta.m)) << "\n";
      } else if (t_mu->parsed()) {
        out << io::format_double(theory::log10_mu(tp)) << "\n";
      } else if (t_threshold->parsed()) {
        const double th = theory::theta_threshold(ta.p, ta.alpha, ta.m);
        out << io::format_double(th) << "\n";
        if (ta.theta >= 0.0) {
          out << (theory::prefers_attack(ta.theta, ta.p, ta.alpha, ta.m) ? "attack" : "clean") << "\n";
        }
      } else if (t_derivative->parsed()) {
        out << io::format_double(theory::dtheta_dalpha(ta.p, ta.m)) << "\n";
      } else if (t_surface->parsed()) {
        require(ta.grid >= 2, Errc::InvalidParams, "surface grid needs at least two points per axis");
        const auto axis = theory::linspace(0.0, 1.0, ta.grid);
        theory::SurfaceGrid g;
        std::string stem;
        if (ta.quantity == "mu") {
          tp.validate();
          g = theory::surface_grid(axis, axis, tp.m, tp.theta, tp.n, tp.r);
          stem = "surface_log10_mu";
        } else if (ta.quantity == "threshold") {
          g = theory::threshold_surface_grid(axis, axis, ta.m);
          stem = "surface_theta_threshold";
        } else {
          fail(Errc::InvalidParams, "quantity must be 'mu' or 'threshold'");
        }
        const fs::path dir(config.out_dir);
        io::write_text(dir / (stem + ".csv"), io::surface_to_csv(g));
        io::write_text(dir / (stem + ".json"), io::dump(io::surface_sidecar(g)));
        out << (dir / (stem + ".csv")).string() << "\n";
      } else if (t_simulate->parsed()) {
        const auto sim = theory::simulate_exam(tp, ta.trials, config.seed);
        const double formula = theory::binom_tail(tp.n, tp.r, theory::beta(tp.p, tp.alpha, tp.m));
        out << io::dump(io::simulation_to_json(tp, sim, formula));
      }
      return 0;
    }

    if (channel_cmd->parsed()) {
      if (c_henc->parsed()) {
        std::vector<AnswerMessage> msgs;
        if (!options_inline.empty()) {
          int q = 1;
          for (char c : parse_option_list(options_inline)) msgs.push_back({q++, c, 0.0});
        } else {
          require(!in_path.empty(), Errc::InvalidConfig, "haptic-encode needs --in or --options");
          msgs = load_answers(in_path);
        }
        HapticParams hp = config.haptic;
        if (c_henc->count("--amplitude") > 0) hp.amplitude = amplitude;
        emit(out, out_path, io::schedule_to_csv(encode_haptic(reorder_messages(msgs), hp)));
      } else if (c_hdec->parsed()) {
        const auto events = io::schedule_from_csv(io::read_text(in_path));
        const auto options = decode_haptic(events, split_gap, config.haptic);
        std::vector<AnswerMessage> msgs;
        int q = 1;
        for (char c : options) msgs.push_back({q++, c, 0.0});
        emit(out, out_path, io::messages_to_jsonl(msgs));
      } else if (c_aud->parsed()) {
        const Placement pl = placement_from_string(placement);
        out << io::format_double(audible_distance(amplitude, pl)) << "\n";
        if (proctor_distance > 0.0) {
          HapticParams hp = config.haptic;
          hp.amplitude = amplitude;
          out << (detectability_check(hp, pl, proctor_distance) == Detectability::Safe ? "safe" : "unsafe") << "\n";
        }
      } else if (c_render->parsed()) {
        ClockState state;
        if (!options_inline.empty()) {
          const auto history = load_answers(options_inline);
          require(question >= 1, Errc::InvalidQuestion, "--answers needs --question");
          char opt = 0;
          if (!option_arg.empty()) {
            require(option_arg.size() == 1, Errc::UnknownOption, "--option takes one letter");
            opt = option_arg[0];
          } else {
            for (const auto& m : reorder_messages(history)) {
              if (m.question_no == question) opt = m.option;
            }
            require(opt != 0, Errc::InvalidQuestion, "question not answered in the history");
          }
          state = apply_answer(history, question, opt);
        } else if (!in_path.empty()) {
          state = io::clock_from_json(io::parse_json(io::read_text(in_path)));
        }
        emit(out, out_path, render_clock_svg(state));
      } else if (c_decode->parsed()) {
        const auto state = io::clock_from_json(io::parse_json(io::read_text(in_path)));
        emit(out, out_path, io::messages_to_jsonl(decode_clock(state)));
      }
      return 0;
    }
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: ParseError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace wristlink::cli
