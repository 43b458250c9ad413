#include "wristlink/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wristlink/error.hpp"
#include "wristlink/stats.hpp"

namespace wristlink {

DetectorConfig DetectorConfig::from_protocol(const ProtocolParams& params, double th) {
  params.validate();
  DetectorConfig c;
  c.th = th;
  c.opening_window = {params.t1 - params.eps, params.t1 + params.eps};
  c.closing_window = {params.t2 - params.eps, params.t2 + params.eps};
  return c;
}

void DetectorConfig::validate() const {
  require(std::isfinite(th) && th > 0.0, Errc::InvalidConfig, "threshold must be positive");
  require(opening_window.lo <= opening_window.hi && closing_window.lo <= closing_window.hi,
          Errc::InvalidConfig, "windows must be ordered intervals");
  require(closing_window.hi < opening_window.lo, Errc::InvalidConfig,
          "closing window must lie entirely below the opening window");
  require(min_run_s >= 0.0 && max_gap_samples >= 0, Errc::InvalidConfig,
          "run filters must be non-negative");
}

double calibrate_threshold(std::span<const GyroTrace> training_pauses) {
  std::vector<double> pooled;
  for (const auto& tr : training_pauses) {
    for (const auto& s : tr.samples()) {
      pooled.push_back(std::abs(s.x));
      pooled.push_back(std::abs(s.y));
      pooled.push_back(std::abs(s.z));
    }
  }
  require(!pooled.empty(), Errc::EmptyCalibration, "no pause samples to calibrate from");
  std::sort(pooled.begin(), pooled.end());
  const double th = 1.1 * stats::quantile_sorted(pooled, 0.99);
  return std::max(th, kThresholdFloor);
}

std::vector<StillRun> detect_still_runs(const GyroTrace& trace, double th) {
  DetectorConfig c;
  c.th = th;
  return detect_still_runs(trace, c);
}

std::vector<StillRun> detect_still_runs(const GyroTrace& trace, const DetectorConfig& config) {
  require(std::isfinite(config.th) && config.th > 0.0, Errc::InvalidConfig,
          "threshold must be positive");
  const double th = config.th;
  auto still = [&](const GyroSample& s) {
    const bool x_ok = s.x >= -th && s.x <= th;
    if (config.axis_mode == AxisMode::XOnly) return x_ok;
    return x_ok && s.y >= -th && s.y <= th && s.z >= -th && s.z <= th;
  };

  const auto samples = trace.samples();
  std::vector<StillRun> raw;
  std::size_t i = 0;
  while (i < samples.size()) {
    if (!still(samples[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < samples.size() && still(samples[j])) ++j;
    if (!raw.empty() && i - raw.back().last <= static_cast<std::size_t>(config.max_gap_samples)) {
      raw.back().last = j;
    } else {
      raw.push_back({i, j, 0.0, 0.0});
    }
    i = j;
  }

  std::vector<StillRun> out;
  const double dt = trace.sample_period();
  for (auto r : raw) {
    r.start_t = samples[r.first].t;
    r.end_t = samples[r.last - 1].t + dt;
    if (r.duration() + 1e-9 >= config.min_run_s) out.push_back(r);
  }
  return out;
}

SegmentationResult segment_session(const GyroTrace& trace, const DetectorConfig& config) {
  config.validate();
  const auto runs = detect_still_runs(trace, config);
  const Window gap{config.closing_window.hi, config.opening_window.lo};

  SegmentationResult result;
  bool capturing = false;
  const StillRun* opening = nullptr;
  for (const auto& run : runs) {
    const double d = run.duration();
    if (!capturing) {
      if (config.opening_window.contains(d)) {
        result.pauses.push_back({PauseKind::Opening, run.start_t, run.end_t});
        opening = &run;
        capturing = true;
      }
      continue;
    }
    if (config.closing_window.contains(d)) {
      result.pauses.push_back({PauseKind::Closing, run.start_t, run.end_t});
      AnswerSegment seg;
      seg.index = static_cast<int>(result.segments.size()) + 1;
      seg.trace_slice = trace.slice(opening->last, run.first);
      seg.start_t = opening->end_t;
      seg.end_t = run.start_t;
      result.segments.push_back(std::move(seg));
      capturing = false;
      opening = nullptr;
    } else if (d > gap.lo && d < gap.hi) {
      if (config.ambiguous_policy == AmbiguousPolicy::Error) {
        fail(Errc::AmbiguousRun, "still run of " + std::to_string(d) + " s at t=" +
                                     std::to_string(run.start_t) +
                                     " falls between the closing and opening windows");
      }
    }
  }
  if (capturing) {
    fail(Errc::UnterminatedSymbol,
         "trace ends before the closing pause of the answer opened at t=" +
             std::to_string(opening->start_t));
  }
  return result;
}

std::vector<AnswerMessage> reorder_messages(std::span<const AnswerMessage> messages) {
  std::vector<AnswerMessage> sorted(messages.begin(), messages.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const AnswerMessage& a, const AnswerMessage& b) {
    if (a.question_no != b.question_no) return a.question_no < b.question_no;
    return a.timestamp < b.timestamp;
  });
  std::vector<AnswerMessage> out;
  for (const auto& m : sorted) {
    if (!out.empty() && out.back().question_no == m.question_no) {
      out.back() = m;  // later in stable order means latest timestamp
    } else {
      out.push_back(m);
    }
  }
  return out;
}

bool is_answer_option(char option) { return option >= 'A' && option <= 'D'; }

char symbol_to_option(SymbolId symbol) {
  switch (symbol) {
    case 'A': return 'A';
    case 'B': return 'B';
    case 'C': return 'C';
    case 'E': return 'D';
    default: fail(Errc::UnknownSymbol, std::string("'") + symbol + "' is not an attack symbol");
  }
}

SymbolId option_to_symbol(char option) {
  switch (option) {
    case 'A': return 'A';
    case 'B': return 'B';
    case 'C': return 'C';
    case 'D': return 'E';
    default: fail(Errc::UnknownOption, std::string("'") + option + "' is not an answer option");
  }
}

}  // namespace wristlink
