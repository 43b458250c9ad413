#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "wristlink/error.hpp"
#include "wristlink/cli.hpp"
#include "wristlink/io.hpp"

using namespace wristlink;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wristlink_test_" + name);
  fs::remove_all(p);
  return p;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "wristlink");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = wristlink::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("trace CSV round trip") {
  const auto t = synth_symbol(default_profiles()[0], 'C', 4);
  const auto csv = io::trace_to_csv(t);
  CHECK(csv.rfind("t,x,y,z\n", 0) == 0);
  const auto back = io::trace_from_csv(csv);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(back[i].z - t[i].z) <= 5e-10);
  CHECK(io::trace_to_csv(back) == csv);
  CHECK_THROWS_AS(io::trace_from_csv("t,x,y\n0,1,2\n"), Error);
}

TEST_CASE("re-emitting parsed artifacts is idempotent") {
  std::vector<AnswerMessage> m{{1, 'C', 0.5}, {2, 'A', 61.25}};
  const auto jsonl = io::messages_to_jsonl(m);
  CHECK(io::messages_to_jsonl(io::messages_from_jsonl(jsonl)) == jsonl);

  const auto sched = encode_haptic(m);
  const auto csv = io::schedule_to_csv(sched);
  CHECK(io::schedule_to_csv(VibrationSchedule(io::schedule_from_csv(csv))) == csv);

  const auto clock = apply_answer(m, 2, 'A');
  const auto cj = io::dump(io::clock_to_json(clock));
  CHECK(io::clock_from_json(io::parse_json(cj)) == clock);

  const auto session = synth_session(noiseless_profile(1), make_script(2, definitive_alphabet(), 1), ProtocolParams{});
  const auto aj = io::annotations_to_json(session.truth, 60.0);
  CHECK(io::annotations_from_json(aj) == session.truth);

  CHECK_THROWS_AS(io::parse_json("{not json"), Error);
  CHECK_THROWS_AS(io::messages_from_jsonl("{\"question_no\":1,\"option\":\"Q\",\"timestamp\":0}\n"), Error);
}

TEST_CASE("model JSON round trip preserves predictions") {
  const auto training = synth_training_set(default_profiles()[3], definitive_alphabet(), 6);
  std::vector<FeatureVector> fv;
  std::vector<SymbolId> labels;
  for (const auto& lt : training) {
    fv.push_back(extract(lt.trace));
    labels.push_back(lt.label);
  }
  const auto d = Dataset::from_features(fv, labels);
  ForestConfig fc;
  fc.n_trees = 8;
  for (const Classifier& m : {Classifier{train_logreg(d)}, Classifier{train_forest(d, fc)}}) {
    const auto j = io::model_to_json(m);
    const auto back = io::model_from_json(io::parse_json(io::dump(j)));
    CHECK(io::dump(io::model_to_json(back)) == io::dump(j));
    for (const auto& v : fv) CHECK(predict(back, v.values).probabilities == predict(m, v.values).probabilities);
  }
  CHECK_THROWS_AS(io::model_from_json(io::parse_json("{\"kind\":\"svm\"}")), Error);
}

TEST_CASE("config overlay") {
  const auto base = cli::config_from_json(io::parse_json("{}"));
  CHECK(base.answers == 50);
  const auto c = cli::config_from_json(
      io::parse_json(R"({"answers": 12, "forest": {"n_trees": 5}, "channel": "clock", "alphabet": "ABCE"})"));
  CHECK(c.answers == 12);
  CHECK(c.forest.n_trees == 5);
  CHECK(c.channel == ChannelKind::Clock);
  CHECK(cli::config_from_json(cli::config_to_json(c)).forest.n_trees == 5);
  CHECK_THROWS_AS(cli::config_from_json(io::parse_json(R"({"answer": 3})")), Error);
  CHECK_THROWS_AS(cli::config_from_json(io::parse_json(R"({"forest": {"trees": 3}})")), Error);
  CHECK_THROWS_AS(cli::config_from_json(io::parse_json(R"({"answers": "many"})")), Error);
}

TEST_CASE("cli theory commands") {
  auto r = invoke({"theory", "beta", "--p", "1", "--alpha", "1", "--m", "4"});
  CHECK(r.code == 0);
  CHECK(r.out == "1\n");
  r = invoke({"theory", "derivative", "--p", "0.25", "--m", "4"});
  CHECK(r.out == "0\n");
  r = invoke({"theory", "beta", "--m", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("InvalidOptions") != std::string::npos);
  r = invoke({"theory", "mu", "--theta", "0"});
  CHECK(r.code == 2);
  r = invoke({"theory", "simulate", "--p", "0.9", "--alpha", "0.9", "--m", "4", "--n", "50", "--r", "35", "--trials",
           "20000"});
  REQUIRE(r.code == 0);
  const auto j = io::parse_json(r.out);
  CHECK(std::abs(j["estimate"].get<double>() - j["formula"].get<double>()) <= 3.0 * j["standard_error"].get<double>() + 1e-12);

  const auto dir = scratch("surface");
  r = invoke({"--out", dir.string(), "theory", "surface", "--grade", "A", "--grid", "11"});
  CHECK(r.code == 0);
  const auto side = io::parse_json(io::read_text(dir / "surface_log10_mu.json"));
  CHECK(side["r"] == 90);
  CHECK(side["n"] == 100);
  CHECK(invoke({"bogus"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("cli channel commands") {
  const auto dir = scratch("channel");
  fs::create_directories(dir);
  io::write_text(dir / "answers.txt", "C,A,B\n");
  auto r = invoke({"channel", "haptic-encode", "--in", (dir / "answers.txt").string(), "--output",
                (dir / "s.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(io::schedule_from_csv(io::read_text(dir / "s.csv")).size() == 6);
  r = invoke({"channel", "haptic-decode", "--in", (dir / "s.csv").string()});
  CHECK(r.code == 0);
  const auto back = io::messages_from_jsonl(r.out);
  REQUIRE(back.size() == 3);
  CHECK(back[0].option == 'C');

  r = invoke({"channel", "audibility", "--amplitude", "70", "--placement", "wrist"});
  CHECK(r.out == "0.5\n");
  r = invoke({"channel", "clock-render"});
  CHECK(r.code == 0);
  int purple = 0;
  for (auto p = r.out.find("fill=\"purple\""); p != std::string::npos; p = r.out.find("fill=\"purple\"", p + 1)) ++purple;
  CHECK(purple == 12);

  io::write_text(dir / "broken.csv", "start_t,duration_ms\n0,200\n");
  CHECK(invoke({"channel", "haptic-decode", "--in", (dir / "broken.csv").string()}).code == 2);
  CHECK(invoke({"channel", "haptic-decode", "--in", (dir / "missing.csv").string()}).code == 2);
}

TEST_CASE("synth and pipeline on a small configuration") {
  const auto dir = scratch("pipeline");
  auto r = invoke({"--out", dir.string(), "--seed", "3", "synth", "--profiles", "2", "--answers", "6"});
  REQUIRE(r.code == 0);
  const auto ann = io::annotations_from_json(io::parse_json(io::read_text(dir / "profile_01" / "annotations.json")));
  int symbols = 0;
  for (const auto& a : ann) symbols += a.kind == SegmentKind::Symbol ? 1 : 0;
  CHECK(symbols == 6);

  r = invoke({"--out", dir.string(), "pipeline", "--profiles", "2", "--answers", "6", "--noiseless"});
  REQUIRE(r.code == 0);
  const auto report = io::parse_json(io::read_text(dir / "report.json"));
  for (const auto& p : report["profiles"]) {
    CHECK(p["accuracy_logreg"] == 1.0);
    CHECK(p["accuracy_forest"] == 1.0);
    CHECK(p["exam_score"] == 6);
  }

  ExperimentConfig bad;
  bad.answers = 0;
  CHECK_THROWS_AS(cli::cmd_pipeline(bad), Error);
  io::write_text(dir / "bad.json", R"({"answers": 0})");
  CHECK(invoke({"--config", (dir / "bad.json").string(), "pipeline"}).code == 2);
}
