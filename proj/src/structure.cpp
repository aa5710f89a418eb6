#include "desopacity/structure.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace desopacity {

InformationState::InformationState(std::vector<EstimatorState> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

InformationState InformationState::initial() { return InformationState({EstimatorState::initial()}); }

bool InformationState::is_consistent() const {
  return std::all_of(members_.begin(), members_.end(),
                     [&](const EstimatorState& m) { return m.decision == members_.front().decision; });
}

StateSet InformationState::plant_states() const {
  StateSet out;
  for (const auto& m : members_)
    if (!m.is_initial()) out.insert(m.plant);
  return out;
}

std::vector<StateSet> InformationState::estimates() const {
  std::vector<StateSet> out;
  for (const auto& m : members_)
    if (!m.is_initial()) out.push_back(m.estimate);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<ControlDecision> InformationState::decision() const {
  if (members_.empty() || is_initial() || !is_consistent()) return std::nullopt;
  return members_.front().decision;
}

std::size_t InformationStateHash::operator()(const InformationState& s) const noexcept {
  std::size_t h = s.size();
  EstimatorStateHash mh;
  for (const auto& m : s.members()) h ^= mh(m) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

InformationState nx_is(const Estimator& estimator, const InformationState& info, std::optional<EventId> sigma,
                       ControlDecision gamma) {
  const PlantModel& model = estimator.model();
  if (!sigma) {
    if (!info.is_initial()) throw PreconditionError("nx_is without an event applies only to {m0}");
    return InformationState({estimator.step(EstimatorState::initial(), {std::nullopt, gamma})});
  }
  if (!info.is_consistent()) throw PreconditionError("nx_is requires a consistent information state");
  if (!model.supervisor_observable().contains(*sigma))
    throw PreconditionError("nx_is requires a supervisor-observable event");
  std::vector<EstimatorState> out;
  for (const auto& m : info.members()) {
    if (m.is_initial()) continue;
    if (model.active_events(m.plant).contains(*sigma) && m.decision.enables(*sigma))
      out.push_back(estimator.step(m, {sigma, gamma}));
  }
  return InformationState(std::move(out));
}

InformationState nx_is(const PlantModel& model, const InformationState& info, std::optional<EventId> sigma,
                       ControlDecision gamma, IssuanceMode mode) {
  Estimator estimator(model, mode);
  return nx_is(estimator, info, sigma, gamma);
}

InformationState ur_is(const Estimator& estimator, const InformationState& info, ControlDecision gamma) {
  const PlantModel& model = estimator.model();
  for (const auto& m : info.members())
    if (m.is_initial() || m.decision != gamma)
      throw PreconditionError("ur_is requires members carrying the decision in force");
  const EventSet silent = model.supervisor_unobservable() & gamma.enabled();
  std::unordered_set<EstimatorState, EstimatorStateHash> seen(info.members().begin(), info.members().end());
  std::vector<EstimatorState> work(info.members().begin(), info.members().end());
  while (!work.empty()) {
    const EstimatorState m = work.back();
    work.pop_back();
    for (auto e : model.active_events(m.plant) & silent) {
      EstimatorState next = estimator.step(m, {e, gamma});
      if (seen.insert(next).second) work.push_back(next);
    }
  }
  return InformationState(std::vector<EstimatorState>(seen.begin(), seen.end()));
}

InformationState ur_is(const PlantModel& model, const InformationState& info, ControlDecision gamma,
                       IssuanceMode mode) {
  Estimator estimator(model, mode);
  return ur_is(estimator, info, gamma);
}

bool is_safe(const InformationState& info, StateSet secret) {
  return std::none_of(info.members().begin(), info.members().end(), [&](const EstimatorState& m) {
    return !m.is_initial() && m.estimate.subset_of(secret);
  });
}

EventSet feasible_observations(const PlantModel& model, const InformationState& info) {
  auto gamma = info.decision();
  if (!gamma) return {};
  return model.supervisor_observable() & gamma->enabled() & active_events(model, info.plant_states());
}

std::optional<DecId> ObservationState::successor(EventId e) const {
  auto it = std::lower_bound(successors.begin(), successors.end(), std::make_pair(e, DecId{0}));
  if (it == successors.end() || it->first != e) return std::nullopt;
  return it->second;
}

bool ControlStructure::operator==(const ControlStructure& other) const {
  if (mode != other.mode || decision_states.size() != other.decision_states.size() ||
      observation_states.size() != other.observation_states.size())
    return false;
  for (std::size_t i = 0; i < decision_states.size(); ++i) {
    const auto& a = decision_states[i];
    const auto& b = other.decision_states[i];
    if (a.source != b.source || a.event != b.event || a.decision != b.decision || a.target != b.target)
      return false;
  }
  for (std::size_t i = 0; i < observation_states.size(); ++i) {
    if (observation_states[i].info != other.observation_states[i].info ||
        observation_states[i].successors != other.observation_states[i].successors)
      return false;
  }
  return true;
}

std::optional<FiniteMemoryPolicy::Memory> DecodedSupervisor::advance(Memory m, EventId e) const {
  const auto& d = structure_->decision_states.at(m);
  return structure_->observation_states.at(d.target).successor(e);
}

StructureRun run_structure(const ControlStructure& structure, std::span<const EventId> observation) {
  if (structure.decision_states.empty()) throw PreconditionError("empty control structure");
  StructureRun run;
  run.decision_state = 0;
  run.decisions.push_back(structure.decision_states[0].decision);
  run.observation_state = structure.decision_states[0].target;
  for (std::size_t i = 0; i < observation.size(); ++i) {
    auto next = structure.observation_states.at(run.observation_state).successor(observation[i]);
    if (!next) throw PreconditionError("observation infeasible in structure at position " + std::to_string(i + 1));
    run.decision_state = *next;
    const auto& d = structure.decision_states.at(*next);
    run.decisions.push_back(d.decision);
    run.observation_state = d.target;
  }
  return run;
}

SimulationResult closed_loop_simulate(const PlantModel& model, const SupervisorPolicy& policy,
                                      std::span<const EventId> s) {
  SimulationResult result;
  EventSequence observed;
  ControlDecision current = policy.decide(observed);
  result.trace.push_back({std::nullopt, current});
  StateId x = model.initial();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const EventId e = s[i];
    const StateId y = e < model.num_events() ? model.successor(x, e) : kNoState;
    if (y == kNoState || !current.enables(e)) {
      result.rejected_at = i + 1;
      result.reason = y == kNoState ? "not in L(G)" : model.event_name(e) + " disabled by " + model.format(current);
      result.trace.clear();
      return result;
    }
    if (model.supervisor_observable().contains(e)) {
      observed.push_back(e);
      current = policy.decide(observed);
    }
    result.trace.push_back({e, current});
    x = y;
  }
  result.accepted = true;
  return result;
}

StateSet supervisor_estimate(const PlantModel& model, const SupervisorPolicy& policy,
                             std::span<const EventId> observation) {
  const EventSet hidden = model.supervisor_unobservable();
  EventSequence prefix;
  ControlDecision gamma = policy.decide(prefix);
  StateSet q = unobservable_reach(model, StateSet::singleton(model.initial()), gamma, hidden);
  for (std::size_t i = 0; i < observation.size(); ++i) {
    const EventId e = observation[i];
    if (!model.supervisor_observable().contains(e) || !gamma.enables(e))
      throw PreconditionError("observation infeasible at position " + std::to_string(i + 1));
    StateSet next = observable_reach(model, q, e);
    if (next.empty()) throw PreconditionError("observation infeasible at position " + std::to_string(i + 1));
    prefix.push_back(e);
    gamma = policy.decide(prefix);
    q = unobservable_reach(model, next, gamma, hidden);
  }
  return q;
}

namespace {

struct MemoryInfoHash {
  std::size_t operator()(const std::pair<FiniteMemoryPolicy::Memory, InformationState>& p) const noexcept {
    return InformationStateHash{}(p.second) * 31 + p.first;
  }
};

struct MemoryEstimatorHash {
  std::size_t operator()(const std::pair<FiniteMemoryPolicy::Memory, EstimatorState>& p) const noexcept {
    return EstimatorStateHash{}(p.second) * 31 + p.first;
  }
};

// Shortest string of L(S/G) whose controlled estimate lies inside X_S, found
// by BFS over (policy memory, estimator state).
std::optional<std::pair<EventSequence, StateSet>> shortest_revealing_string(const PlantModel& model,
                                                                            const FiniteMemoryPolicy& policy,
                                                                            const Estimator& estimator) {
  using Node = std::pair<FiniteMemoryPolicy::Memory, EstimatorState>;
  struct Entry {
    Node node;
    std::size_t parent;
    EventId event;
  };
  std::vector<Entry> nodes;
  std::unordered_map<Node, std::size_t, MemoryEstimatorHash> index;
  const auto mem0 = policy.initial_memory();
  const Node start{mem0, estimator.step(EstimatorState::initial(), {std::nullopt, policy.decision_at(mem0)})};
  nodes.push_back({start, 0, 0});
  index.emplace(start, 0);
  const StateSet secret = model.secret();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [mem, m] = nodes[i].node;
    if (m.estimate.subset_of(secret)) {
      EventSequence s;
      for (std::size_t j = i; j != 0; j = nodes[j].parent) s.push_back(nodes[j].event);
      std::reverse(s.begin(), s.end());
      return std::make_pair(s, m.estimate);
    }
    for (auto e : model.active_events(m.plant) & m.decision.enabled()) {
      auto next_mem = mem;
      ControlDecision next_decision = m.decision;
      if (model.supervisor_observable().contains(e)) {
        auto adv = policy.advance(mem, e);
        if (!adv) throw PreconditionError("policy undefined for feasible observation " + model.event_name(e));
        next_mem = *adv;
        next_decision = policy.decision_at(next_mem);
      }
      Node next{next_mem, estimator.step(m, {e, next_decision})};
      if (index.emplace(next, nodes.size()).second) nodes.push_back({next, i, e});
    }
  }
  return std::nullopt;
}

ClosedLoopVerdict bounded_verification(const PlantModel& model, const SupervisorPolicy& policy,
                                       IssuanceMode mode, std::size_t bound) {
  struct Path {
    EventSequence s;
    EventSequence observed;
    EstimatorState m;
  };
  Estimator estimator(model, mode);
  ClosedLoopVerdict verdict;
  verdict.exact = false;
  verdict.bound = bound;
  std::deque<Path> queue;
  queue.push_back({{}, {}, estimator.step(EstimatorState::initial(), {std::nullopt, policy.decide({})})});
  while (!queue.empty()) {
    Path p = std::move(queue.front());
    queue.pop_front();
    ++verdict.explored_states;
    if (p.m.estimate.subset_of(model.secret())) {
      verdict.opaque = false;
      verdict.counterexample = p.s;
      verdict.revealed_estimate = p.m.estimate;
      return verdict;
    }
    if (p.s.size() == bound) continue;
    for (auto e : model.active_events(p.m.plant) & p.m.decision.enabled()) {
      Path next{p.s, p.observed, p.m};
      next.s.push_back(e);
      ControlDecision gamma = p.m.decision;
      if (model.supervisor_observable().contains(e)) {
        next.observed.push_back(e);
        gamma = policy.decide(next.observed);
      }
      next.m = estimator.step(p.m, {e, gamma});
      queue.push_back(std::move(next));
    }
  }
  return verdict;
}

}  // namespace

std::vector<std::pair<FiniteMemoryPolicy::Memory, InformationState>> reachable_information_states(
    const PlantModel& model, const FiniteMemoryPolicy& policy, IssuanceMode mode) {
  using Node = std::pair<FiniteMemoryPolicy::Memory, InformationState>;
  Estimator estimator(model, mode);
  std::vector<Node> order;
  std::unordered_set<Node, MemoryInfoHash> seen;
  const auto mem0 = policy.initial_memory();
  const ControlDecision gamma0 = policy.decision_at(mem0);
  Node start{mem0, ur_is(estimator, nx_is(estimator, InformationState::initial(), std::nullopt, gamma0), gamma0)};
  seen.insert(start);
  order.push_back(std::move(start));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto mem = order[i].first;
    const InformationState info = order[i].second;
    for (auto e : feasible_observations(model, info)) {
      auto next_mem = policy.advance(mem, e);
      if (!next_mem) throw PreconditionError("policy undefined for feasible observation " + model.event_name(e));
      const ControlDecision gamma = policy.decision_at(*next_mem);
      Node next{*next_mem, ur_is(estimator, nx_is(estimator, info, e, gamma), gamma)};
      if (seen.insert(next).second) order.push_back(std::move(next));
    }
  }
  return order;
}

ClosedLoopVerdict verify_closed_loop_opacity(const PlantModel& model, const SupervisorPolicy& policy,
                                             IssuanceMode mode, std::optional<std::size_t> depth_bound) {
  const auto* finite = dynamic_cast<const FiniteMemoryPolicy*>(&policy);
  if (depth_bound || !finite) return bounded_verification(model, policy, mode, depth_bound.value_or(8));

  ClosedLoopVerdict verdict;
  const auto states = reachable_information_states(model, *finite, mode);
  verdict.explored_states = states.size();
  verdict.opaque = std::all_of(states.begin(), states.end(),
                               [&](const auto& node) { return is_safe(node.second, model.secret()); });
  if (!verdict.opaque) {
    Estimator estimator(model, mode);
    if (auto found = shortest_revealing_string(model, *finite, estimator)) {
      verdict.counterexample = found->first;
      verdict.revealed_estimate = found->second;
    }
  }
  return verdict;
}

}  // namespace desopacity
