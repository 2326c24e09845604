#pragma once

#include <string>

#include "tbsim/scenario.hpp"

namespace tbsim {

/// Serializes a scenario to the on-disk configuration format (JSON, field
/// names carry units, analyzer blocks optional).
std::string scenario_to_json(const ExperimentScenario& s, int indent = 2);

ExperimentScenario scenario_from_json(const std::string& text);

/// Loads and validates a scenario file.
ValidatedScenario load_scenario(const std::string& path);

void save_scenario(const ExperimentScenario& s, const std::string& path);

/// Stable hex digest over the physics-relevant fields (everything except
/// duration and seed); used to stamp outputs for replay checks.
std::string scenario_hash(const ExperimentScenario& s);

/// The canonical long-haul distribution scenario (150 km per arm, 2 GHz
/// pump, delay-line analyzers, tracked 300 ps window).
ExperimentScenario paper_300km_scenario();

/// The bare signal-to-noise configuration: 1 GHz pump, no fiber, no
/// analyzers, 600 ps window, wide histogram for unmatched-slot statistics.
ExperimentScenario source_noise_scenario();

}  // namespace tbsim
