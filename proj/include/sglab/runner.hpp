#pragma once

#include "sglab/config.hpp"
#include "sglab/io.hpp"

namespace sglab {

inline constexpr const char* kToolVersion = "0.1.0";

// Dispatches the configured experiment, writes its data files into cfg.out,
// and writes the manifest last so an interrupted run leaves none.
RunManifest run(const ExperimentConfig& cfg);

}  // namespace sglab
