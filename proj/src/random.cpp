#include "desopacity/random.hpp"

namespace desopacity {

namespace {

std::size_t draw(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

PlantModel random_model(std::mt19937_64& rng, const RandomModelParams& params) {
  const std::size_t n = draw(rng, params.min_states, params.max_states);
  const std::size_t k = draw(rng, params.min_events, params.max_events);
  std::vector<std::string> states;
  std::vector<std::string> events;
  for (std::size_t i = 0; i < n; ++i) states.push_back(std::to_string(i));
  for (std::size_t i = 0; i < k; ++i) events.push_back("e" + std::to_string(i));

  StateSet secret;
  for (StateId x = 0; x < n; ++x)
    if (coin(rng, params.secret_probability)) secret.insert(x);
  EventPartitions parts;
  for (EventId e = 0; e < k; ++e) {
    if (coin(rng, params.observable_supervisor)) parts.supervisor_observable.insert(e);
    if (coin(rng, params.observable_intruder)) parts.intruder_observable.insert(e);
    if (coin(rng, params.controllable)) parts.controllable.insert(e);
  }
  PlantModel model(states, events, 0, secret, parts);
  for (StateId x = 0; x < n; ++x)
    for (EventId e = 0; e < k; ++e)
      if (coin(rng, params.density)) model.add_transition(x, e, static_cast<StateId>(draw(rng, 0, n - 1)));
  return model;
}

ControlDecision random_decision(const PlantModel& model, std::mt19937_64& rng) {
  EventSet enabled = model.uncontrollable();
  for (auto e : model.controllable())
    if (coin(rng, 0.6)) enabled.insert(e);
  return model.decision(enabled);
}

TablePolicy random_table_policy(const PlantModel& model, std::mt19937_64& rng, std::size_t depth,
                                std::size_t entries) {
  TablePolicy policy(random_decision(model, rng));
  const std::vector<EventId> obs(model.supervisor_observable().begin(), model.supervisor_observable().end());
  for (std::size_t i = 0; i < entries; ++i) {
    EventSequence alpha;
    const std::size_t len = obs.empty() ? 0 : draw(rng, 0, depth);
    for (std::size_t j = 0; j < len; ++j) alpha.push_back(obs[draw(rng, 0, obs.size() - 1)]);
    policy.set(alpha, random_decision(model, rng));
  }
  return policy;
}

}  // namespace desopacity
