#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "desopacity/index_set.hpp"

namespace desopacity {

inline constexpr StateId kNoState = static_cast<StateId>(-1);

using EventSequence = std::vector<EventId>;

/// The three independent event partitions. Complements are derived on demand.
struct EventPartitions {
  EventSet supervisor_observable;  // Σ_o
  EventSet intruder_observable;    // Σ_a
  EventSet controllable;           // Σ_c
};

/// A control pattern γ. Validity (Σ_uc ⊆ γ) is checked by
/// PlantModel::decision(); the raw constructor is for values already known to
/// be decisions, such as those read back from a released flow.
class ControlDecision {
 public:
  ControlDecision() = default;
  explicit ControlDecision(EventSet enabled) : enabled_(enabled) {}

  EventSet enabled() const { return enabled_; }
  bool enables(EventId e) const { return enabled_.contains(e); }

  bool operator==(const ControlDecision&) const = default;
  auto operator<=>(const ControlDecision&) const = default;

 private:
  EventSet enabled_;
};

/// Deterministic finite automaton G = (X, Σ, δ, x₀) with secret states and
/// event partitions. Immutable once built; identifiers are interned in order of
/// first appearance.
class PlantModel {
 public:
  PlantModel(std::vector<std::string> states, std::vector<std::string> events, StateId initial,
             StateSet secret, EventPartitions partitions);

  /// Adds δ(src, e) = dst. Throws SemanticError("nondeterministic transition")
  /// when (src, e) is already defined with a different target, and on exact
  /// duplicates as well.
  void add_transition(StateId src, EventId e, StateId dst);

  std::size_t num_states() const { return state_names_.size(); }
  std::size_t num_events() const { return event_names_.size(); }
  std::size_t num_transitions() const { return num_transitions_; }

  const std::string& state_name(StateId x) const { return state_names_.at(x); }
  const std::string& event_name(EventId e) const { return event_names_.at(e); }
  std::optional<StateId> find_state(std::string_view name) const;
  std::optional<EventId> find_event(std::string_view name) const;
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& event_names() const { return event_names_; }

  StateId initial() const { return initial_; }
  StateSet secret() const { return secret_; }
  const EventPartitions& partitions() const { return partitions_; }

  StateSet all_states() const { return StateSet::full(num_states()); }
  EventSet all_events() const { return EventSet::full(num_events()); }
  EventSet supervisor_observable() const { return partitions_.supervisor_observable; }
  EventSet supervisor_unobservable() const { return all_events() - partitions_.supervisor_observable; }
  EventSet intruder_observable() const { return partitions_.intruder_observable; }
  EventSet intruder_unobservable() const { return all_events() - partitions_.intruder_observable; }
  EventSet controllable() const { return partitions_.controllable; }
  EventSet uncontrollable() const { return all_events() - partitions_.controllable; }

  /// δ(x, e), or kNoState when undefined.
  StateId successor(StateId x, EventId e) const { return delta_[x * num_events() + e]; }
  /// Λ(x).
  EventSet active_events(StateId x) const { return active_[x]; }

  /// Γ membership check; throws SemanticError when Σ_uc ⊄ enabled.
  ControlDecision decision(EventSet enabled) const;
  bool is_valid(ControlDecision d) const { return uncontrollable().subset_of(d.enabled()) && d.enabled().subset_of(all_events()); }
  ControlDecision permissive() const { return ControlDecision(all_events()); }

  /// Γ in canonical order: subsets of Σ_c by increasing cardinality, ties by
  /// canonical event order, each unioned with Σ_uc.
  std::vector<ControlDecision> decisions() const;

  /// States with no outgoing transition. A non-empty result means the model is
  /// not live; nothing requires liveness, this is diagnostic only.
  StateSet deadlock_states() const;

  /// Renders a set as "{n1,n2,...}" in canonical order.
  std::string format(StateSet q) const;
  std::string format(EventSet e) const;
  std::string format(ControlDecision d) const { return format(d.enabled()); }
  std::string format_sequence(std::span<const EventId> s) const;

 private:
  std::vector<std::string> state_names_;
  std::vector<std::string> event_names_;
  std::unordered_map<std::string, StateId> state_index_;
  std::unordered_map<std::string, EventId> event_index_;
  StateId initial_;
  StateSet secret_;
  EventPartitions partitions_;
  std::vector<StateId> delta_;
  std::vector<EventSet> active_;
  std::size_t num_transitions_ = 0;
};

/// Parses the JSON model document. Throws ParseError (with line) on syntax
/// errors and SemanticError naming the violated invariant otherwise.
PlantModel parse_model(std::string_view text);

/// Canonical JSON rendering; parse_model(serialize_model(m)) reproduces m.
std::string serialize_model(const PlantModel& model);

/// Natural projection onto `obs`.
EventSequence project(std::span<const EventId> s, EventSet obs);

EventSet active_events(const PlantModel& model, StateSet q);

/// {δ(x, w) : x ∈ q, w ∈ (hidden ∩ γ)*}.
StateSet unobservable_reach(const PlantModel& model, StateSet q, ControlDecision gamma, EventSet hidden);

/// {δ(x, w) : x ∈ q, w ∈ (Σ_ua ∩ γ)* \ {ε}}.
StateSet unobservable_reach_plus(const PlantModel& model, StateSet q, ControlDecision gamma);

/// NX_σ(q) = {δ(x, σ) : x ∈ q}.
StateSet observable_reach(const PlantModel& model, StateSet q, EventId sigma);

/// Open-loop estimate for an observation over `obs`. Returns nullopt when the
/// observation is not produced by any string of L(G); that is distinct from an
/// empty estimate.
std::optional<StateSet> open_loop_estimate(const PlantModel& model, std::span<const EventId> observed,
                                           EventSet obs);

struct OpenLoopVerdict {
  bool opaque = true;
  std::optional<EventSequence> witness;  // shortest revealing Σ_a observation
};

OpenLoopVerdict verify_open_loop_opacity(const PlantModel& model);

}  // namespace desopacity
