#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "desopacity/structure.hpp"

namespace desopacity {

enum class ExtractionPolicy { first_feasible, locally_maximal, enumerate_all };

const char* to_string(ExtractionPolicy policy);

struct SynthesisConfig {
  IssuanceMode mode = IssuanceMode::observation_triggered;
  ExtractionPolicy extraction = ExtractionPolicy::first_feasible;
  /// Maximum number of arena states (decision + observation).
  std::size_t size_guard = 1'000'000;
  /// Maximum number of structures returned by enumerate_all.
  std::size_t enumerate_cap = 1024;
  /// Record the unsafe targets of rejected edges and keep the raw arena in the
  /// outcome (for DOT export and inspection).
  bool diagnostics = false;
};

struct DecisionEdge {
  ControlDecision decision;
  ObsId target = 0;
};

/// An edge dropped during expansion because its target is unsafe.
struct RejectedEdge {
  DecId source = 0;
  ControlDecision decision;
  std::uint32_t unsafe_state = 0;  // index into Arena::unsafe_states
};

struct ArenaDecisionState {
  std::optional<ObsId> source;
  std::optional<EventId> event;
  std::vector<DecisionEdge> edges;  // in Γ enumeration order
};

/// The solution space 𝔅: a control structure whose decision states may carry
/// several decisions. Every observation state is safe by construction.
/// decision_states[0] is ({m₀}, ε) unless the arena is empty.
struct Arena {
  IssuanceMode mode = IssuanceMode::observation_triggered;
  std::vector<ArenaDecisionState> decision_states;
  std::vector<ObservationState> observation_states;
  /// Populated only with SynthesisConfig::diagnostics.
  std::vector<InformationState> unsafe_states;
  std::vector<RejectedEdge> rejected_edges;

  bool empty() const { return decision_states.empty(); }
  std::size_t size() const { return decision_states.size() + observation_states.size(); }
  std::size_t num_edges() const;
};

/// Step 1: DFS expansion from ({m₀}, ε) over all of Γ, keeping only safe
/// observation states. Throws ResourceError when the state count exceeds
/// cfg.size_guard.
Arena expand_arena(const PlantModel& model, const SynthesisConfig& cfg);

struct IncompleteStates {
  std::vector<DecId> decision_states;
  std::vector<ObsId> observation_states;

  bool empty() const { return decision_states.empty() && observation_states.empty(); }
  std::size_t size() const { return decision_states.size() + observation_states.size(); }
};

/// Decision states without a decision, and observation states missing the
/// successor of some feasible observation.
IncompleteStates find_incomplete(const PlantModel& model, const Arena& arena);

struct PruneResult {
  Arena arena;
  /// States removed in each round, as ids of the input arena.
  std::vector<IncompleteStates> rounds;
  /// Removed because their source observation state was removed, or because
  /// they became unreachable from the initial state.
  std::size_t orphaned = 0;
};

/// Step 2: removes incomplete states to a fixpoint, then unreachable ones.
PruneResult prune_incomplete(const PlantModel& model, const Arena& arena);

struct ExtractedStructure {
  ControlStructure structure;
  /// For each structure decision state, the arena decision state it came from
  /// and the index of the chosen arena edge.
  std::vector<DecId> arena_decision_state;
  std::vector<std::size_t> chosen_edge;
};

struct SynthesisStats {
  std::size_t arena_decision_states = 0;
  std::size_t arena_observation_states = 0;
  std::size_t pruned_decision_states = 0;
  std::size_t pruned_observation_states = 0;
  std::size_t prune_rounds = 0;
  double wall_seconds = 0.0;
};

struct SynthesisOutcome {
  bool solved = false;
  std::vector<ExtractedStructure> structures;
  /// enumerate_all stopped at the cap.
  bool truncated = false;
  Arena pruned_arena;
  std::vector<IncompleteStates> prune_rounds;
  /// The arena before pruning; kept only with SynthesisConfig::diagnostics.
  std::optional<Arena> raw_arena;
  SynthesisStats stats;
};

/// Step 3 on a pruned arena. Returns solved == false ("no solution exists")
/// when the initial decision state did not survive.
SynthesisOutcome extract_structure(const Arena& pruned, const SynthesisConfig& cfg);

/// Calls `visit` for every structure extractable from a pruned arena, in
/// canonical choice order, until it returns false. Returns the number visited.
std::size_t for_each_structure(const Arena& pruned, const std::function<bool(const ExtractedStructure&)>& visit);

/// Steps 1–3.
SynthesisOutcome synthesize(const PlantModel& model, const SynthesisConfig& cfg);

}  // namespace desopacity
