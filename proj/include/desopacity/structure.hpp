#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "desopacity/intruder.hpp"
#include "desopacity/model.hpp"
#include "desopacity/policy.hpp"

namespace desopacity {

/// A set of estimator states: the supervisor's knowledge of the intruder's
/// knowledge. Members are kept sorted and unique, so equality is structural.
class InformationState {
 public:
  InformationState() = default;
  explicit InformationState(std::vector<EstimatorState> members);

  /// {m₀}.
  static InformationState initial();

  const std::vector<EstimatorState>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }
  bool is_initial() const { return members_.size() == 1 && members_.front().is_initial(); }

  /// All members share one decision.
  bool is_consistent() const;
  /// X(ı).
  StateSet plant_states() const;
  /// Q(ı), sorted and unique.
  std::vector<StateSet> estimates() const;
  /// Γ(ı); nullopt when empty, inconsistent, or {m₀}.
  std::optional<ControlDecision> decision() const;

  bool operator==(const InformationState&) const = default;
  auto operator<=>(const InformationState&) const = default;

 private:
  std::vector<EstimatorState> members_;
};

struct InformationStateHash {
  std::size_t operator()(const InformationState& s) const noexcept;
};

/// ℕ𝕏_(σ,γ)(ı). With `sigma` empty, ı must be {m₀} and the result is
/// {f(m₀, (ε, γ))}. Members where σ is not enabled are dropped.
InformationState nx_is(const Estimator& estimator, const InformationState& info, std::optional<EventId> sigma,
                       ControlDecision gamma);
InformationState nx_is(const PlantModel& model, const InformationState& info, std::optional<EventId> sigma,
                       ControlDecision gamma, IssuanceMode mode);

/// 𝕌ℝ_γ(ı): closure under supervisor-silent enabled events tagged with γ.
InformationState ur_is(const Estimator& estimator, const InformationState& info, ControlDecision gamma);
InformationState ur_is(const PlantModel& model, const InformationState& info, ControlDecision gamma,
                       IssuanceMode mode);

/// ∀q ∈ Q(ı): q ⊄ X_S.
bool is_safe(const InformationState& info, StateSet secret);

/// σ ∈ Σ_o ∩ Γ(ı) ∩ Λ(X(ı)).
EventSet feasible_observations(const PlantModel& model, const InformationState& info);

using ObsId = std::uint32_t;
using DecId = std::uint32_t;

struct ObservationState {
  InformationState info;
  /// h_OD, sorted by event.
  std::vector<std::pair<EventId, DecId>> successors;

  std::optional<DecId> successor(EventId e) const;
};

/// A decision state (ı, σ) is identified by its source observation state and
/// the observed event; the initial state ({m₀}, ε) has neither.
struct StructureDecisionState {
  std::optional<ObsId> source;
  std::optional<EventId> event;
  ControlDecision decision;
  ObsId target = 0;
};

/// IS-based control structure. decision_states[0] is the initial state.
struct ControlStructure {
  IssuanceMode mode = IssuanceMode::observation_triggered;
  std::vector<StructureDecisionState> decision_states;
  std::vector<ObservationState> observation_states;

  bool operator==(const ControlStructure& other) const;
};

/// The decoded supervisor of a control structure.
class DecodedSupervisor final : public FiniteMemoryPolicy {
 public:
  explicit DecodedSupervisor(std::shared_ptr<const ControlStructure> structure)
      : structure_(std::move(structure)) {}

  Memory initial_memory() const override { return 0; }
  std::optional<Memory> advance(Memory m, EventId e) const override;
  ControlDecision decision_at(Memory m) const override { return structure_->decision_states.at(m).decision; }

  const ControlStructure& structure() const { return *structure_; }

 private:
  std::shared_ptr<const ControlStructure> structure_;
};

struct StructureRun {
  DecId decision_state = 0;
  ObsId observation_state = 0;
  std::vector<ControlDecision> decisions;  // γ₀ … γₙ
};

/// Follows α through the structure. Throws PreconditionError naming the first
/// infeasible position.
StructureRun run_structure(const ControlStructure& structure, std::span<const EventId> observation);

struct SimulationResult {
  bool accepted = false;
  std::size_t rejected_at = 0;  // 1-based; 0 when accepted
  std::string reason;
  AugmentedString trace;
};

SimulationResult closed_loop_simulate(const PlantModel& model, const SupervisorPolicy& policy,
                                      std::span<const EventId> s);

/// ℰ_o^S(α). Throws PreconditionError when α ∉ P_o(L(S/G)).
StateSet supervisor_estimate(const PlantModel& model, const SupervisorPolicy& policy,
                             std::span<const EventId> observation);

struct ClosedLoopVerdict {
  bool opaque = true;
  /// False when the verdict only covers strings up to `bound`.
  bool exact = true;
  std::size_t bound = 0;
  std::optional<EventSequence> counterexample;
  std::optional<StateSet> revealed_estimate;
  std::size_t explored_states = 0;
};

/// Finite-memory policies (tables, decoded structures) are verified exactly by
/// reconstructing the reachable observation states and checking safety; the
/// counterexample is a shortest revealing string. Other policies, or any call
/// with `depth_bound`, get a bounded search over L(S/G).
ClosedLoopVerdict verify_closed_loop_opacity(const PlantModel& model, const SupervisorPolicy& policy,
                                             IssuanceMode mode, std::optional<std::size_t> depth_bound = {});

/// Reachable (memory, observation state) pairs of a finite-memory policy, in
/// BFS order.
std::vector<std::pair<FiniteMemoryPolicy::Memory, InformationState>> reachable_information_states(
    const PlantModel& model, const FiniteMemoryPolicy& policy, IssuanceMode mode);

}  // namespace desopacity
