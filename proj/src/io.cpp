#include "wristlink/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wristlink/error.hpp"

namespace wristlink::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::ParseError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), Errc::InvalidConfig, "cannot write '" + path.string() + "'");
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto res = std::from_chars(first, last, v);
  require(res.ec == std::errc() && res.ptr == last && std::isfinite(v), Errc::ParseError,
          "line " + std::to_string(line_no) + ": '" + s + "' is not a finite number");
  return v;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::ParseError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == header, Errc::ParseError, "expected header '" + header + "', got '" + line + "'");
  const std::size_t cols = split(header, ',').size();
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line, ',');
    require(fields.size() == cols, Errc::ParseError,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " fields");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

void check_schema(const Json& j) {
  require(j.is_object(), Errc::ParseError, "expected a JSON object");
  require(get<int>(j, "schema_version") == kSchemaVersion, Errc::ParseError, "unsupported schema_version");
}

Json eigen_vector(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string trace_to_csv(const GyroTrace& trace) {
  std::string out = "t,x,y,z\n";
  for (const auto& s : trace.samples()) {
    out += format_fixed(s.t, 9) + ',' + format_fixed(s.x, 9) + ',' + format_fixed(s.y, 9) + ',' +
           format_fixed(s.z, 9) + '\n';
  }
  return out;
}

GyroTrace trace_from_csv(const std::string& text, double sample_rate_hz) {
  const auto rows = read_numeric_csv(text, "t,x,y,z");
  double rate = sample_rate_hz;
  if (rate <= 0.0) {
    rate = kDefaultSampleRateHz;
    if (rows.size() >= 2) {
      const double dt = (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1);
      require(dt > 0.0, Errc::InvalidTrace, "timestamps must be strictly increasing");
      rate = std::round(1.0 / dt * 1e4) / 1e4;
    }
  }
  std::vector<GyroSample> samples;
  samples.reserve(rows.size());
  const double t0 = rows.empty() ? 0.0 : rows[0][0];
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    require(std::abs(rows[k][0] - t) <= 1e-6, Errc::InvalidTrace,
            "sample " + std::to_string(k) + " is off the uniform grid");
    samples.push_back({t, rows[k][1], rows[k][2], rows[k][3]});
  }
  return GyroTrace(rate, std::move(samples));
}

Json annotations_to_json(std::span<const Annotation> truth, double sample_rate_hz) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["sample_rate_hz"] = sample_rate_hz;
  Json arr = Json::array();
  for (const auto& a : truth) {
    Json e;
    e["kind"] = std::string(to_string(a.kind));
    e["start_t"] = a.start_t;
    e["end_t"] = a.end_t;
    e["symbol"] = a.symbol ? Json(std::string(1, *a.symbol)) : Json(nullptr);
    e["question_no"] = a.question_no ? Json(*a.question_no) : Json(nullptr);
    arr.push_back(std::move(e));
  }
  j["annotations"] = std::move(arr);
  return j;
}

std::vector<Annotation> annotations_from_json(const Json& j) {
  check_schema(j);
  std::vector<Annotation> out;
  for (const auto& e : get<Json>(j, "annotations")) {
    Annotation a;
    a.kind = segment_kind_from_string(get<std::string>(e, "kind"));
    a.start_t = get<double>(e, "start_t");
    a.end_t = get<double>(e, "end_t");
    if (e.contains("symbol") && !e["symbol"].is_null()) {
      const auto s = get<std::string>(e, "symbol");
      require(s.size() == 1, Errc::ParseError, "symbol must be a single character");
      a.symbol = s[0];
    }
    if (e.contains("question_no") && !e["question_no"].is_null()) a.question_no = get<int>(e, "question_no");
    out.push_back(a);
  }
  return out;
}

Json segmentation_to_json(const SegmentationResult& result, double threshold) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["threshold"] = threshold;
  Json pauses = Json::array();
  for (const auto& p : result.pauses) {
    pauses.push_back({{"kind", p.kind == PauseKind::Opening ? "opening" : "closing"},
                      {"start_t", p.start_t},
                      {"end_t", p.end_t}});
  }
  Json segs = Json::array();
  for (const auto& s : result.segments) {
    segs.push_back({{"index", s.index},
                    {"start_t", s.start_t},
                    {"end_t", s.end_t},
                    {"samples", s.trace_slice.size()}});
  }
  j["pauses"] = std::move(pauses);
  j["segments"] = std::move(segs);
  return j;
}

Json message_to_json(const AnswerMessage& m) {
  return {{"question_no", m.question_no}, {"option", std::string(1, m.option)}, {"timestamp", m.timestamp}};
}

AnswerMessage message_from_json(const Json& j) {
  require(j.is_object(), Errc::ParseError, "message must be a JSON object");
  AnswerMessage m;
  m.question_no = get<int>(j, "question_no");
  require(m.question_no >= 1, Errc::InvalidQuestion, "question numbers start at 1");
  const auto opt = get<std::string>(j, "option");
  require(opt.size() == 1 && is_answer_option(opt[0]), Errc::UnknownOption, "option must be one of A-D");
  m.option = opt[0];
  m.timestamp = j.contains("timestamp") ? get<double>(j, "timestamp") : 0.0;
  return m;
}

std::string messages_to_jsonl(std::span<const AnswerMessage> messages) {
  std::string out;
  for (const auto& m : messages) out += message_to_json(m).dump() + "\n";
  return out;
}

std::vector<AnswerMessage> messages_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<AnswerMessage> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    out.push_back(message_from_json(parse_json(line)));
  }
  return out;
}

std::string features_to_csv(std::span<const FeatureVector> features, std::span<const SymbolId> labels) {
  require(features.size() == labels.size(), Errc::ShapeMismatch, "one label per feature vector");
  std::string out;
  for (const auto& n : feature_names()) out += n + ',';
  out += "label\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) out += format_double(features[i][j]) + ',';
    out += labels[i];
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models

Json model_to_json(const LogRegModel& model) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = "logreg";
  j["classes"] = model.classes;
  j["standardized"] = model.standardized;
  if (model.standardized) {
    j["scaler"] = {{"mean", eigen_vector(model.scaler.mean)}, {"stddev", eigen_vector(model.scaler.stddev)}};
  }
  Json w = Json::array();
  for (Eigen::Index c = 0; c < model.weights.rows(); ++c) w.push_back(eigen_vector(model.weights.row(c).transpose()));
  j["weights"] = std::move(w);
  j["bias"] = eigen_vector(model.bias);
  return j;
}

Json model_to_json(const ForestModel& model) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = "forest";
  j["classes"] = model.classes;
  j["dimension"] = model.dimension;
  Json trees = Json::array();
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tr = model.trees[t];
    trees.push_back({{"seed", model.tree_seeds[t]},
                     {"feature", tr.feature},
                     {"threshold", tr.threshold},
                     {"left", tr.left},
                     {"right", tr.right},
                     {"value", tr.value}});
  }
  j["trees"] = std::move(trees);
  return j;
}

Json model_to_json(const Classifier& model) {
  return std::visit([](const auto& m) { return model_to_json(m); }, model);
}

Classifier model_from_json(const Json& j) {
  check_schema(j);
  const auto kind = get<std::string>(j, "model");
  if (kind == "logreg") {
    LogRegModel m;
    m.classes = get<std::vector<std::string>>(j, "classes");
    m.standardized = get<bool>(j, "standardized");
    const auto w = get<std::vector<std::vector<double>>>(j, "weights");
    const auto b = get<std::vector<double>>(j, "bias");
    require(w.size() == m.classes.size() && b.size() == m.classes.size(), Errc::ParseError,
            "one weight row and bias per class");
    const std::size_t d = w.empty() ? 0 : w.front().size();
    m.weights.resize(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(d));
    for (std::size_t c = 0; c < w.size(); ++c) {
      require(w[c].size() == d, Errc::ParseError, "ragged weight matrix");
      for (std::size_t k = 0; k < d; ++k) m.weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = w[c][k];
    }
    m.bias = to_eigen(b);
    if (m.standardized) {
      const auto& s = j.at("scaler");
      m.scaler.mean = to_eigen(get<std::vector<double>>(s, "mean"));
      m.scaler.stddev = to_eigen(get<std::vector<double>>(s, "stddev"));
      require(static_cast<std::size_t>(m.scaler.mean.size()) == d &&
                  static_cast<std::size_t>(m.scaler.stddev.size()) == d,
              Errc::ParseError, "scaler dimension mismatch");
    }
    return m;
  }
  if (kind == "forest") {
    ForestModel m;
    m.classes = get<std::vector<std::string>>(j, "classes");
    m.dimension = get<std::size_t>(j, "dimension");
    for (const auto& t : get<Json>(j, "trees")) {
      DecisionTree tr;
      tr.feature = get<std::vector<int>>(t, "feature");
      tr.threshold = get<std::vector<double>>(t, "threshold");
      tr.left = get<std::vector<int>>(t, "left");
      tr.right = get<std::vector<int>>(t, "right");
      tr.value = get<std::vector<std::vector<double>>>(t, "value");
      const std::size_t n = tr.feature.size();
      require(n >= 1 && tr.threshold.size() == n && tr.left.size() == n && tr.right.size() == n &&
                  tr.value.size() == n,
              Errc::ParseError, "tree arrays differ in length");
      for (std::size_t i = 0; i < n; ++i) {
        if (tr.feature[i] < 0) continue;
        require(static_cast<std::size_t>(tr.feature[i]) < m.dimension && tr.left[i] > static_cast<int>(i) &&
                    tr.right[i] > static_cast<int>(i) && static_cast<std::size_t>(tr.left[i]) < n &&
                    static_cast<std::size_t>(tr.right[i]) < n,
                Errc::ParseError, "tree node references out of range");
      }
      m.trees.push_back(std::move(tr));
      m.tree_seeds.push_back(get<std::uint64_t>(t, "seed"));
    }
    return m;
  }
  fail(Errc::ParseError, "unknown model kind '" + kind + "'");
}

Json evaluation_to_json(double accuracy, const ConfusionMatrix& confusion) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["accuracy"] = accuracy;
  j["classes"] = confusion.classes;
  j["confusion"] = confusion.counts;
  return j;
}

// ---------------------------------------------------------------------------
// Channel artifacts

std::string schedule_to_csv(const VibrationSchedule& schedule) {
  std::string out = "start_t,duration_ms,amplitude\n";
  for (const auto& e : schedule.events()) {
    out += format_double(e.start_t) + ',' + format_double(e.duration_ms) + ',' + format_double(e.amplitude) + '\n';
  }
  return out;
}

std::vector<VibrationEvent> schedule_from_csv(const std::string& text) {
  const auto rows = read_numeric_csv(text, "start_t,duration_ms,amplitude");
  std::vector<VibrationEvent> out;
  for (const auto& r : rows) {
    require(r[1] > 0.0, Errc::ParseError, "vibration durations must be positive");
    out.push_back({r[0], r[1], r[2]});
  }
  return out;
}

Json clock_to_json(const ClockState& state) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["page_index"] = state.page_index;
  Json slots = Json::array();
  for (auto s : state.slots) slots.push_back(std::string(to_string(s)));
  j["slots"] = std::move(slots);
  return j;
}

ClockState clock_from_json(const Json& j) {
  check_schema(j);
  ClockState s;
  s.page_index = get<int>(j, "page_index");
  const auto slots = get<std::vector<std::string>>(j, "slots");
  require(slots.size() == static_cast<std::size_t>(kClockSlots), Errc::ParseError, "a clock face has 12 slots");
  for (std::size_t i = 0; i < slots.size(); ++i) s.slots[i] = slot_state_from_string(slots[i]);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Theory artifacts

std::string surface_to_csv(const theory::SurfaceGrid& grid) {
  std::string out = "p,alpha,value\n";
  for (std::size_t i = 0; i < grid.p_axis.size(); ++i) {
    for (std::size_t k = 0; k < grid.alpha_axis.size(); ++k) {
      out += format_double(grid.p_axis[i]) + ',' + format_double(grid.alpha_axis[k]) + ',' +
             format_double(grid.values[i][k]) + '\n';
    }
  }
  return out;
}

Json surface_sidecar(const theory::SurfaceGrid& grid) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["quantity"] = grid.kind == theory::SurfaceKind::Log10Mu ? "log10_mu" : "theta_threshold";
  j["m"] = grid.m;
  if (grid.kind == theory::SurfaceKind::Log10Mu) {
    j["theta"] = grid.theta;
    j["n"] = grid.n;
    j["r"] = grid.r;
  }
  j["p_points"] = grid.p_axis.size();
  j["alpha_points"] = grid.alpha_axis.size();
  return j;
}

Json simulation_to_json(const theory::TheoryParams& params, const theory::SimulationResult& result,
                        double formula_value) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["params"] = {{"p", params.p},         {"alpha", params.alpha}, {"m", params.m},
                 {"theta", params.theta}, {"n", params.n},         {"r", params.r}};
  j["estimate"] = result.estimate;
  j["standard_error"] = result.standard_error;
  j["formula"] = formula_value;
  j["per_question_rate"] = result.per_question_rate;
  j["trials"] = result.trials;
  j["seed"] = result.seed;
  return j;
}

}  // namespace wristlink::io
