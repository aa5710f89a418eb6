#include "desopacity/intruder.hpp"

#include <cassert>
#include <deque>
#include <functional>
#include <mutex>
#include <set>

namespace desopacity {

const char* to_string(IssuanceMode mode) {
  return mode == IssuanceMode::observation_triggered ? "observation" : "decision";
}

namespace {

std::size_t mix(std::size_t seed, std::uint64_t v) {
  return seed ^ (std::hash<std::uint64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::size_t EstimatorStateHash::operator()(const EstimatorState& m) const noexcept {
  std::size_t h = mix(0, m.plant);
  h = mix(h, m.estimate.bits());
  return mix(h, m.decision.enabled().bits());
}

AugmentedString augment(const PlantModel& model, std::span<const EventId> s, const SupervisorPolicy& policy) {
  EventSequence observed;
  ControlDecision current = policy.decide(observed);
  AugmentedString out{{std::nullopt, current}};
  StateId x = model.initial();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const EventId e = s[i];
    const StateId y = e < model.num_events() ? model.successor(x, e) : kNoState;
    if (y == kNoState)
      throw DisabledStringError("string leaves L(G) at position " + std::to_string(i + 1), i + 1);
    if (!current.enables(e))
      throw DisabledStringError("string disabled by supervisor at position " + std::to_string(i + 1) + " (" +
                                    model.event_name(e) + " not in " + model.format(current) + ")",
                                i + 1);
    ControlDecision next = current;
    if (model.supervisor_observable().contains(e)) {
      observed.push_back(e);
      next = policy.decide(observed);
    } else if (policy.decide(observed) != current) {
      // The supervisor saw nothing, so its decision cannot have changed.
      throw PreconditionError("policy is not a function of the supervisor observation");
    }
    out.push_back({e, next});
    current = next;
    x = y;
  }
  return out;
}

InformationFlow information_flow(const PlantModel& model, std::span<const EventId> s,
                                 const SupervisorPolicy& policy, IssuanceMode mode) {
  const AugmentedString aug = augment(model, s, policy);
  InformationFlow flow{{std::nullopt, aug.front().decision}};
  for (std::size_t i = 1; i < aug.size(); ++i) {
    const EventId e = *aug[i].event;
    const ControlDecision prev = aug[i - 1].decision;
    const ControlDecision next = aug[i].decision;
    const bool seen_by_intruder = model.intruder_observable().contains(e);
    bool released;
    if (mode == IssuanceMode::observation_triggered) {
      released = model.supervisor_observable().contains(e);
    } else {
      released = prev != next;
      assert(!released || model.supervisor_observable().contains(e));
    }
    ObservationPair pair;
    if (seen_by_intruder) pair.event = e;
    if (released) pair.decision = next;
    if (pair.event || pair.decision) flow.push_back(pair);
  }
  return flow;
}

EstimatorState estimator_step(const PlantModel& model, const EstimatorState& m, const AugmentedEvent& e,
                              IssuanceMode mode) {
  const EventSet hidden = model.intruder_unobservable();
  if (m.is_initial()) {
    if (e.event) throw PreconditionError("event not enabled at estimator state (m0 accepts only (ε, γ))");
    return {model.initial(), unobservable_reach(model, StateSet::singleton(model.initial()), e.decision, hidden),
            e.decision};
  }
  if (!e.event || *e.event >= model.num_events() || !model.active_events(m.plant).contains(*e.event) ||
      !m.decision.enables(*e.event))
    throw PreconditionError("event not enabled at estimator state");

  const EventId sigma = *e.event;
  const ControlDecision& gamma = m.decision;
  const ControlDecision& next = e.decision;
  const bool by_intruder = model.intruder_observable().contains(sigma);
  // The second discriminator is "supervisor observes σ" for observation-
  // triggered issuance and "decision changed" for decision-triggered issuance.
  const bool released = mode == IssuanceMode::observation_triggered
                            ? model.supervisor_observable().contains(sigma)
                            : gamma != next;

  StateSet q;
  if (by_intruder && !released)
    q = unobservable_reach(model, observable_reach(model, m.estimate, sigma), gamma, hidden);
  else if (!by_intruder && released)
    q = unobservable_reach(model, unobservable_reach_plus(model, m.estimate, gamma), next, hidden);
  else if (by_intruder && released)
    q = unobservable_reach(model, observable_reach(model, m.estimate, sigma), next, hidden);
  else
    q = m.estimate;
  return {model.successor(m.plant, sigma), q, next};
}

EstimatorState run_estimator(const PlantModel& model, std::span<const AugmentedEvent> s, IssuanceMode mode) {
  EstimatorState m = EstimatorState::initial();
  for (const auto& e : s) m = estimator_step(model, m, e, mode);
  return m;
}

StateSet estimate_from_flow(const PlantModel& model, std::span<const ObservationPair> flow, IssuanceMode mode) {
  if (flow.empty() || flow.front().event || !flow.front().decision)
    throw PreconditionError("malformed flow: missing initial decision (ε, γ0)");
  const EventSet hidden = model.intruder_unobservable();
  ControlDecision gamma = *flow.front().decision;
  StateSet q = unobservable_reach(model, StateSet::singleton(model.initial()), gamma, hidden);
  for (std::size_t i = 1; i < flow.size(); ++i) {
    const ObservationPair& p = flow[i];
    if (!p.event && !p.decision)
      throw PreconditionError("malformed flow: silent pair at position " + std::to_string(i + 1));
    if (p.event && !model.intruder_observable().contains(*p.event))
      throw PreconditionError("malformed flow: event at position " + std::to_string(i + 1) +
                              " is not intruder-observable");
    // A repeated decision cannot be released under decision-triggered issuance.
    if (p.decision && mode == IssuanceMode::decision_triggered && *p.decision == gamma) q = StateSet{};
    if (p.event) {
      if (!gamma.enables(*p.event)) q = StateSet{};
      const ControlDecision after = p.decision.value_or(gamma);
      q = unobservable_reach(model, observable_reach(model, q, *p.event), after, hidden);
      gamma = after;
    } else {
      q = unobservable_reach(model, unobservable_reach_plus(model, q, gamma), *p.decision, hidden);
      gamma = *p.decision;
    }
  }
  return q;
}

namespace {

// Decision in force before consuming flow[pos], for every pos in [1, |flow|].
std::vector<ControlDecision> decisions_in_force(std::span<const ObservationPair> flow) {
  std::vector<ControlDecision> out(flow.size() + 1);
  ControlDecision current = *flow.front().decision;
  for (std::size_t p = 1; p <= flow.size(); ++p) {
    out[p] = current;
    if (p < flow.size() && flow[p].decision) current = *flow[p].decision;
  }
  return out;
}

// Successor positions of one decorated step from plant state x at flow
// position pos, firing sigma. At most two: silent and released.
template <class Visit>
void decorated_moves(const PlantModel& model, std::span<const ObservationPair> flow, IssuanceMode mode,
                     const ControlDecision& current, std::size_t pos, EventId sigma, Visit&& visit) {
  const bool by_intruder = model.intruder_observable().contains(sigma);
  const std::optional<EventId> shown = by_intruder ? std::optional<EventId>(sigma) : std::nullopt;
  // silent: decision unchanged, nothing released
  if (!by_intruder) {
    visit(pos);
  } else if (pos < flow.size() && flow[pos].event == shown && !flow[pos].decision) {
    visit(pos + 1);
  }
  // released: the flow dictates the new decision
  if (pos < flow.size() && flow[pos].decision && flow[pos].event == shown) {
    if (mode == IssuanceMode::decision_triggered && *flow[pos].decision == current) return;
    visit(pos + 1);
  }
}

bool well_formed(std::span<const ObservationPair> flow) {
  if (flow.empty() || flow.front().event || !flow.front().decision) return false;
  for (std::size_t i = 1; i < flow.size(); ++i)
    if (!flow[i].event && !flow[i].decision) return false;
  return true;
}

}  // namespace

StateSet oracle_controlled_estimate(const PlantModel& model, std::span<const ObservationPair> flow,
                                    IssuanceMode mode, std::size_t bound) {
  // Every pair after the initial release needs at least one event.
  if (flow.size() > bound + 1) throw PreconditionError("oracle bound must be at least the flow length");
  if (!well_formed(flow)) return {};
  const auto in_force = decisions_in_force(flow);
  // Node (x, pos): a decorated string matching flow[0..pos) ends in x.
  const std::size_t n = model.num_states();
  std::vector<char> seen(n * (flow.size() + 1), 0);
  std::deque<std::pair<StateId, std::size_t>> queue;
  auto push = [&](StateId x, std::size_t pos) {
    char& s = seen[pos * n + x];
    if (!s) {
      s = 1;
      queue.emplace_back(x, pos);
    }
  };
  push(model.initial(), 1);
  StateSet result;
  while (!queue.empty()) {
    auto [x, pos] = queue.front();
    queue.pop_front();
    if (pos == flow.size()) result.insert(x);
    const ControlDecision& current = in_force[pos];
    for (auto sigma : model.active_events(x) & current.enabled()) {
      const StateId y = model.successor(x, sigma);
      decorated_moves(model, flow, mode, current, pos, sigma, [&](std::size_t next) { push(y, next); });
    }
  }
  return result;
}

StateSet oracle_controlled_estimate_raw(const PlantModel& model, std::span<const ObservationPair> flow,
                                        IssuanceMode mode, std::size_t bound) {
  if (!well_formed(flow)) return {};
  const auto in_force = decisions_in_force(flow);
  StateSet result;
  std::function<void(StateId, std::size_t, std::size_t)> dfs = [&](StateId x, std::size_t pos,
                                                                    std::size_t length) {
    if (pos == flow.size()) result.insert(x);
    if (length == bound) return;
    const ControlDecision& current = in_force[pos];
    for (auto sigma : model.active_events(x) & current.enabled()) {
      const StateId y = model.successor(x, sigma);
      decorated_moves(model, flow, mode, current, pos, sigma,
                      [&](std::size_t next) { dfs(y, next, length + 1); });
    }
  };
  dfs(model.initial(), 1, 0);
  return result;
}

std::size_t Estimator::KeyHash::operator()(const Key& k) const noexcept {
  std::size_t h = EstimatorStateHash{}(k.from);
  h = mix(h, k.event);
  return mix(h, k.next.enabled().bits());
}

EstimatorState Estimator::step(const EstimatorState& m, const AugmentedEvent& e) const {
  const Key key{m, e.event.value_or(kNoState), e.decision};
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  EstimatorState result = estimator_step(*model_, m, e, mode_);
  std::unique_lock lock(mutex_);
  return cache_.try_emplace(key, result).first->second;
}

std::size_t Estimator::cached_transitions() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace desopacity
