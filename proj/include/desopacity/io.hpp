#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "desopacity/intruder.hpp"
#include "desopacity/structure.hpp"
#include "desopacity/synthesis.hpp"

namespace desopacity {

/// Table policy document:
///   {"type": "table", "default": [events...],
///    "entries": [{"observation": [events...], "decision": [events...]}, ...]}
/// "default" may be omitted, meaning Σ.
TablePolicy parse_table_policy(const PlantModel& model, std::string_view text);
std::string serialize_table_policy(const PlantModel& model, const TablePolicy& policy);

/// Structure document ("type": "structure") with decision/observation state
/// tables and both transition relations. Lossless.
std::string serialize_structure(const PlantModel& model, const ControlStructure& structure);
ControlStructure parse_structure(const PlantModel& model, std::string_view text);

/// Dispatches on "type": a table or a structure (decoded).
std::unique_ptr<FiniteMemoryPolicy> parse_policy(const PlantModel& model, std::string_view text);

/// Flow trace: one pair per line, `event=<name|->, decision={e1,e2}|-`.
/// Blank lines and lines starting with '#' are ignored.
InformationFlow parse_flow(const PlantModel& model, std::string_view text);
std::string format_flow(const PlantModel& model, const InformationFlow& flow);
std::string format_pair(const PlantModel& model, const ObservationPair& pair);

std::string format_estimator_state(const PlantModel& model, const EstimatorState& m);
std::string format_information_state(const PlantModel& model, const InformationState& info);

std::string dot_model(const PlantModel& model);
std::string dot_structure(const PlantModel& model, const ControlStructure& structure);
/// `rounds` marks states removed by pruning (red outline); recorded unsafe
/// targets are drawn filled with dashed incoming edges.
std::string dot_arena(const PlantModel& model, const Arena& arena, const std::vector<IncompleteStates>* rounds = nullptr);
/// Estimator states reachable in closed loop under a finite-memory policy.
std::string dot_estimator_slice(const PlantModel& model, const FiniteMemoryPolicy& policy, IssuanceMode mode);

/// Synthesis report as JSON. Wall time is omitted unless `timing` is set, so
/// that reports are reproducible byte for byte.
std::string synthesis_report(const PlantModel& model, const SynthesisConfig& cfg, const SynthesisOutcome& outcome,
                             bool timing);

}  // namespace desopacity
