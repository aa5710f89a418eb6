#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "desopacity/error.hpp"
#include "desopacity/model.hpp"
#include "desopacity/policy.hpp"

namespace desopacity {

/// Whether a decision is released after every supervisor observation, or only
/// when it differs from the decision in force.
enum class IssuanceMode { observation_triggered, decision_triggered };

const char* to_string(IssuanceMode mode);

/// One element of the intruder's information-flow: an observed event or ε,
/// and a released decision or ε. (ε, ε) never appears in a stored flow.
struct ObservationPair {
  std::optional<EventId> event;
  std::optional<ControlDecision> decision;

  bool operator==(const ObservationPair&) const = default;
};

using InformationFlow = std::vector<ObservationPair>;

/// An event (ε only for the first element) paired with the decision in force
/// after it.
struct AugmentedEvent {
  std::optional<EventId> event;
  ControlDecision decision;

  bool operator==(const AugmentedEvent&) const = default;
};

using AugmentedString = std::vector<AugmentedEvent>;

/// Estimator state m = (x, q, γ), or the initial marker m₀ (plant == kNoState).
struct EstimatorState {
  StateId plant = kNoState;
  StateSet estimate;
  ControlDecision decision;

  static EstimatorState initial() { return {}; }
  bool is_initial() const { return plant == kNoState; }

  bool operator==(const EstimatorState&) const = default;
  auto operator<=>(const EstimatorState&) const = default;
};

struct EstimatorStateHash {
  std::size_t operator()(const EstimatorState& m) const noexcept;
};

/// Raised when a string leaves L(S/G).
class DisabledStringError : public PreconditionError {
 public:
  DisabledStringError(const std::string& what, std::size_t position)
      : PreconditionError(what), position_(position) {}
  /// 1-based index of the first event not in L(S/G).
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

AugmentedString augment(const PlantModel& model, std::span<const EventId> s, const SupervisorPolicy& policy);

InformationFlow information_flow(const PlantModel& model, std::span<const EventId> s,
                                 const SupervisorPolicy& policy, IssuanceMode mode);

/// One transition of the intruder state estimator. Throws PreconditionError
/// ("event not enabled at estimator state") outside the domain of f.
EstimatorState estimator_step(const PlantModel& model, const EstimatorState& m, const AugmentedEvent& e,
                              IssuanceMode mode);

EstimatorState run_estimator(const PlantModel& model, std::span<const AugmentedEvent> s, IssuanceMode mode);

/// Intruder-side recursive estimate computed from the flow alone. Throws
/// PreconditionError when the flow does not start with (ε, γ₀) or contains a
/// silent pair.
StateSet estimate_from_flow(const PlantModel& model, std::span<const ObservationPair> flow, IssuanceMode mode);

/// Brute-force controlled state estimate: searches every decorated string
/// (event, decision, released/silent) whose induced flow equals `flow`, with
/// decorations memoized on (plant state, flow position). Independent of the
/// reach operators. Requires bound >= |flow| - 1 (the pairs after the initial
/// release; each needs at least one event).
StateSet oracle_controlled_estimate(const PlantModel& model, std::span<const ObservationPair> flow,
                                    IssuanceMode mode, std::size_t bound);

/// Same search without memoization, restricted to decorated strings of at
/// most `bound` events.
StateSet oracle_controlled_estimate_raw(const PlantModel& model, std::span<const ObservationPair> flow,
                                        IssuanceMode mode, std::size_t bound);

/// Lazily materialized estimator: memoizes estimator_step per (m, e). Safe for
/// concurrent use; results are identical to calling estimator_step directly.
class Estimator {
 public:
  Estimator(const PlantModel& model, IssuanceMode mode) : model_(&model), mode_(mode) {}
  Estimator(const Estimator&) = delete;
  Estimator& operator=(const Estimator&) = delete;

  const PlantModel& model() const { return *model_; }
  IssuanceMode mode() const { return mode_; }

  EstimatorState step(const EstimatorState& m, const AugmentedEvent& e) const;
  std::size_t cached_transitions() const;

 private:
  struct Key {
    EstimatorState from;
    EventId event;
    ControlDecision next;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  const PlantModel* model_;
  IssuanceMode mode_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Key, EstimatorState, KeyHash> cache_;
};

}  // namespace desopacity
