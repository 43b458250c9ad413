#pragma once

#include <iosfwd>
#include <string>

#include "wristlink/experiment.hpp"
#include "wristlink/io.hpp"

namespace wristlink::cli {

/// Overlays the keys present in `j` onto `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const io::Json& j, ExperimentConfig base = {});
io::Json config_to_json(const ExperimentConfig& config);

/// Writes the session trace, annotations and training features of every
/// selected profile under config.out_dir; returns a manifest.
io::Json cmd_synth(const ExperimentConfig& config);

/// Runs the full pipeline for every selected profile, writes per-profile
/// artifacts plus report.json under config.out_dir and returns the report.
io::Json cmd_pipeline(const ExperimentConfig& config);

/// K-means symbol selection over the extended alphabet for each profile.
io::Json cmd_cluster(const ExperimentConfig& config, int n_per_symbol);

/// Entry point shared by the executable: 0 on success, 2 for invalid input
/// or configuration, 1 when a pipeline stage fails.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wristlink::cli
