#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "wristlink/channel.hpp"
#include "wristlink/cli.hpp"
#include "wristlink/experiment.hpp"
#include "wristlink/features.hpp"
#include "wristlink/io.hpp"
#include "wristlink/protocol.hpp"
#include "wristlink/signal.hpp"
#include "wristlink/theory.hpp"

namespace py = pybind11;
using namespace wristlink;

namespace {

py::object to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

io::Json from_py(const py::object& o) {
  return io::parse_json(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

MercenaryProfile profile_by_id(int id, bool noiseless) {
  const auto all = default_profiles();
  require(id >= 1 && id <= static_cast<int>(all.size()), Errc::InvalidProfile, "profile id must be 1..15");
  const auto& p = all[static_cast<std::size_t>(id - 1)];
  return noiseless ? noiseless_profile(p.id, p.seed) : p;
}

py::dict trace_dict(const GyroTrace& t) {
  py::dict d;
  d["sample_rate_hz"] = t.sample_rate_hz();
  d["t"] = [&] {
    std::vector<double> v;
    for (const auto& s : t.samples()) v.push_back(s.t);
    return v;
  }();
  d["x"] = t.axis(Axis::X);
  d["y"] = t.axis(Axis::Y);
  d["z"] = t.axis(Axis::Z);
  return d;
}

std::vector<AnswerMessage> messages_from(const std::vector<std::string>& options) {
  std::vector<AnswerMessage> m;
  int q = 1;
  for (const auto& o : options) {
    require(o.size() == 1, Errc::UnknownOption, "options are single letters");
    m.push_back({q++, o[0], 0.0});
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wrist-gesture exam answer channel: synthesis, decoding, delivery and odds";

  static py::exception<Error> error(m, "WristlinkError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      py::object inst = exc(e.what());
      inst.attr("code") = std::string(errc_name(e.code()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def("beta", &theory::beta, py::arg("p"), py::arg("alpha"), py::arg("m") = 4);
  m.def("binom_tail", &theory::binom_tail, py::arg("n"), py::arg("r"), py::arg("q"));
  m.def("log10_binom_tail", &theory::log10_binom_tail, py::arg("n"), py::arg("r"), py::arg("q"));
  m.def(
      "log10_mu",
      [](double p, double alpha, int mm, double theta, int n, int r) {
        return theory::log10_mu({p, alpha, mm, theta, n, r});
      },
      py::arg("p"), py::arg("alpha"), py::arg("m") = 4, py::arg("theta") = 0.25, py::arg("n") = 100,
      py::arg("r") = 90);
  m.def("theta_threshold", &theory::theta_threshold, py::arg("p"), py::arg("alpha"), py::arg("m") = 4);
  m.def("prefers_attack", &theory::prefers_attack, py::arg("theta"), py::arg("p"), py::arg("alpha"),
        py::arg("m") = 4);
  m.def("dtheta_dalpha", &theory::dtheta_dalpha, py::arg("p"), py::arg("m") = 4);
  m.def(
      "simulate_exam",
      [](double p, double alpha, int mm, int n, int r, std::int64_t trials, std::uint64_t seed) {
        const theory::TheoryParams t{p, alpha, mm, 1.0 / mm, n, r};
        const auto s = theory::simulate_exam(t, trials, seed);
        return to_py(io::simulation_to_json(t, s, theory::binom_tail(n, r, theory::beta(p, alpha, mm))));
      },
      py::arg("p"), py::arg("alpha"), py::arg("m") = 4, py::arg("n") = 50, py::arg("r") = 35,
      py::arg("trials") = 100000, py::arg("seed") = 1);

  m.def(
      "synth_symbol",
      [](int profile, const std::string& symbol, std::uint64_t seed, bool noiseless) {
        require(symbol.size() == 1, Errc::UnknownSymbol, "symbols are single characters");
        return trace_dict(synth_symbol(profile_by_id(profile, noiseless), symbol[0], seed));
      },
      py::arg("profile"), py::arg("symbol"), py::arg("seed") = 0, py::arg("noiseless") = false);
  m.def(
      "extract_features",
      [](int profile, const std::string& symbol, std::uint64_t seed) {
        require(symbol.size() == 1, Errc::UnknownSymbol, "symbols are single characters");
        const auto fv = extract(synth_symbol(profile_by_id(profile, false), symbol[0], seed));
        return std::vector<double>(fv.values.begin(), fv.values.end());
      },
      py::arg("profile"), py::arg("symbol"), py::arg("seed") = 0);
  m.def("feature_names", &feature_names);

  m.def(
      "encode_haptic",
      [](const std::vector<std::string>& options) {
        std::vector<std::tuple<double, double, double>> out;
        const auto history = messages_from(options);
        const auto schedule = encode_haptic(history);
        for (const auto& e : schedule.events()) out.emplace_back(e.start_t, e.duration_ms, e.amplitude);
        return out;
      },
      py::arg("options"));
  m.def(
      "decode_haptic",
      [](const std::vector<std::tuple<double, double, double>>& events, double split_gap) {
        std::vector<VibrationEvent> ev;
        for (const auto& [s, d, a] : events) ev.push_back({s, d, a});
        std::vector<std::string> out;
        for (char c : decode_haptic(ev, split_gap)) out.emplace_back(1, c);
        return out;
      },
      py::arg("events"), py::arg("split_gap") = kDefaultSplitGap);
  m.def(
      "audible_distance",
      [](double amplitude, const std::string& placement) {
        return audible_distance(amplitude, placement_from_string(placement));
      },
      py::arg("amplitude"), py::arg("placement") = "wrist");
  m.def(
      "render_clock",
      [](const std::vector<std::string>& options, int question) {
        const auto history = messages_from(options);
        require(question >= 1 && question <= static_cast<int>(history.size()), Errc::InvalidQuestion,
                "question must index the given answers");
        return render_clock_svg(apply_answer(history, question, history[static_cast<std::size_t>(question - 1)].option));
      },
      py::arg("options"), py::arg("question") = 1);
  m.def(
      "clock_page",
      [](const std::vector<std::string>& options, int question) {
        const auto history = messages_from(options);
        require(question >= 1 && question <= static_cast<int>(history.size()), Errc::InvalidQuestion,
                "question must index the given answers");
        return to_py(io::clock_to_json(apply_answer(history, question, history[static_cast<std::size_t>(question - 1)].option)));
      },
      py::arg("options"), py::arg("question") = 1);

  m.def(
      "run_pipeline",
      [](const py::object& config, const std::string& out_dir) {
        ExperimentConfig c = cli::config_from_json(config.is_none() ? io::Json::object() : from_py(config));
        c.out_dir = out_dir;
        io::Json report;
        {
          py::gil_scoped_release release;
          report = cli::cmd_pipeline(c);
        }
        return to_py(report);
      },
      py::arg("config") = py::none(), py::arg("out_dir") = "out");
  m.def(
      "cluster_symbols",
      [](int profile, std::uint64_t seed, int per_symbol) {
        KMeansConfig kc;
        kc.seed = seed;
        const auto c = cluster_symbols(profile_by_id(profile, false), kc, per_symbol);
        std::vector<std::string> clusters(static_cast<std::size_t>(kc.k));
        for (std::size_t i = 0; i < c.symbols.size(); ++i) clusters[static_cast<std::size_t>(c.clusters.assignment[i])].push_back(c.symbols[i]);
        py::dict d;
        d["clusters"] = clusters;
        d["selected"] = std::string(c.selected.begin(), c.selected.end());
        d["definitive_separated"] = c.definitive_separated;
        return d;
      },
      py::arg("profile"), py::arg("seed") = 1, py::arg("per_symbol") = 30);
}
