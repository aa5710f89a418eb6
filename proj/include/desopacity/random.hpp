#pragma once

#include <cstdint>
#include <random>

#include "desopacity/model.hpp"
#include "desopacity/policy.hpp"

namespace desopacity {

struct RandomModelParams {
  std::size_t min_states = 2;
  std::size_t max_states = 5;
  std::size_t min_events = 2;
  std::size_t max_events = 4;
  /// Probability that a given (state, event) pair has a transition.
  double density = 0.45;
  double secret_probability = 0.25;
  /// Each event is independently put in each partition with this probability.
  double observable_supervisor = 0.5;
  double observable_intruder = 0.5;
  double controllable = 0.5;
};

/// Random model with states "0".."n-1" and events "e0".."ek-1". Partitions are
/// drawn independently; the initial state is "0".
PlantModel random_model(std::mt19937_64& rng, const RandomModelParams& params = {});

/// Random table over supervisor observations of length <= depth; unlisted
/// observations fall back to a random decision.
TablePolicy random_table_policy(const PlantModel& model, std::mt19937_64& rng, std::size_t depth = 3,
                                std::size_t entries = 6);

ControlDecision random_decision(const PlantModel& model, std::mt19937_64& rng);

}  // namespace desopacity
