#pragma once

#include <deque>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>

#include "desopacity/io.hpp"
#include "desopacity/random.hpp"
#include "desopacity/synthesis.hpp"

namespace testing {

using namespace desopacity;

inline std::string read_text(const std::string& name) {
  std::ifstream in(std::string(DESOPACITY_TEST_DATA) + "/" + name, std::ios::binary);
  if (!in) throw std::runtime_error("missing test data " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PlantModel run_model() { return parse_model(read_text("run.json")); }
inline TablePolicy srun(const PlantModel& m) { return parse_table_policy(m, read_text("srun.json")); }
inline TablePolicy srun_prime(const PlantModel& m) { return parse_table_policy(m, read_text("srun_prime.json")); }

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline EventSequence seq(const PlantModel& m, const std::string& s) {
  EventSequence out;
  for (const auto& w : words(s)) out.push_back(*m.find_event(w));
  return out;
}

inline EventSet events(const PlantModel& m, const std::string& s) {
  EventSet out;
  for (const auto& w : words(s)) out.insert(*m.find_event(w));
  return out;
}

inline ControlDecision dec(const PlantModel& m, const std::string& s) { return m.decision(events(m, s)); }

inline StateSet states(const PlantModel& m, const std::string& s) {
  StateSet out;
  for (const auto& w : words(s)) out.insert(*m.find_state(w));
  return out;
}

inline EstimatorState est(const PlantModel& m, const std::string& x, const std::string& q, const std::string& g) {
  return {*m.find_state(x), states(m, q), dec(m, g)};
}

/// Calls visit(s) for every s ∈ L(S/G) with |s| <= n, prefixes first.
inline void for_each_controlled_string(const PlantModel& m, const SupervisorPolicy& policy, std::size_t n,
                                       const std::function<void(const EventSequence&)>& visit) {
  EventSequence s;
  EventSequence obs;
  std::function<void(StateId)> dfs = [&](StateId x) {
    visit(s);
    if (s.size() == n) return;
    const ControlDecision g = policy.decide(obs);
    for (auto e : m.active_events(x) & g.enabled()) {
      s.push_back(e);
      const bool seen = m.supervisor_observable().contains(e);
      if (seen) obs.push_back(e);
      dfs(m.successor(x, e));
      if (seen) obs.pop_back();
      s.pop_back();
    }
  };
  dfs(m.initial());
}

/// Every string of Σ* up to length n (not only L(G)).
inline void for_each_string(std::size_t num_events, std::size_t n, const std::function<void(const EventSequence&)>& visit) {
  EventSequence s;
  std::function<void()> rec = [&] {
    visit(s);
    if (s.size() == n) return;
    for (EventId e = 0; e < num_events; ++e) {
      s.push_back(e);
      rec();
      s.pop_back();
    }
  };
  rec();
}

/// The set of estimator states reached by run_estimator(augment(s)) over all
/// s ∈ L(S/G) with P_o(s) = alpha. Exact: the search memoizes on (position in
/// alpha, policy memory, estimator state), which determine every continuation.
inline std::set<EstimatorState> estimator_states_for(const PlantModel& m, const FiniteMemoryPolicy& policy,
                                                      std::span<const EventId> alpha, IssuanceMode mode) {
  using Node = std::tuple<std::size_t, FiniteMemoryPolicy::Memory, EstimatorState>;
  std::set<Node> seen;
  std::deque<Node> queue;
  std::set<EstimatorState> out;
  const auto m0 = policy.initial_memory();
  const EstimatorState first = estimator_step(m, EstimatorState::initial(), {std::nullopt, policy.decision_at(m0)}, mode);
  queue.emplace_back(0, m0, first);
  seen.insert(queue.back());
  while (!queue.empty()) {
    auto [pos, mem, e] = queue.front();
    queue.pop_front();
    if (pos == alpha.size()) out.insert(e);
    for (auto sigma : m.active_events(e.plant) & e.decision.enabled()) {
      std::size_t next_pos = pos;
      auto next_mem = mem;
      if (m.supervisor_observable().contains(sigma)) {
        if (pos == alpha.size() || alpha[pos] != sigma) continue;
        auto adv = policy.advance(mem, sigma);
        if (!adv) continue;
        next_mem = *adv;
        ++next_pos;
      }
      const EstimatorState next = estimator_step(m, e, {sigma, policy.decision_at(next_mem)}, mode);
      if (seen.emplace(next_pos, next_mem, next).second) queue.emplace_back(next_pos, next_mem, next);
    }
  }
  return out;
}

/// Supervisor observations α ∈ P_o(L(S/G)) with |α| <= n, via the closed loop.
inline std::set<EventSequence> feasible_observations_upto(const PlantModel& m, const FiniteMemoryPolicy& policy,
                                                          std::size_t n) {
  std::set<EventSequence> out;
  using Node = std::tuple<EventSequence, FiniteMemoryPolicy::Memory, StateId>;
  std::set<Node> seen;
  std::deque<Node> queue{{EventSequence{}, policy.initial_memory(), m.initial()}};
  seen.insert(queue.back());
  while (!queue.empty()) {
    auto [alpha, mem, x] = queue.front();
    queue.pop_front();
    out.insert(alpha);
    for (auto sigma : m.active_events(x) & policy.decision_at(mem).enabled()) {
      EventSequence a = alpha;
      auto next_mem = mem;
      if (m.supervisor_observable().contains(sigma)) {
        if (alpha.size() == n) continue;
        auto adv = policy.advance(mem, sigma);
        if (!adv) continue;
        next_mem = *adv;
        a.push_back(sigma);
      }
      Node node{a, next_mem, m.successor(x, sigma)};
      if (seen.insert(node).second) queue.push_back(std::move(node));
    }
  }
  return out;
}

/// True when `a` and `b` have the same feasible observations up to length n
/// and agree on the decision after each of them.
inline bool same_supervisor_upto(const PlantModel& m, const FiniteMemoryPolicy& a, const FiniteMemoryPolicy& b,
                                 std::size_t n) {
  const auto fa = feasible_observations_upto(m, a, n);
  if (fa != feasible_observations_upto(m, b, n)) return false;
  for (const auto& alpha : fa)
    if (a.decide(alpha) != b.decide(alpha)) return false;
  return true;
}

/// First structure, in enumeration order, whose decoded supervisor agrees
/// with `target` on observations up to length n.
inline std::optional<ControlStructure> find_matching_structure(const PlantModel& m, const Arena& pruned,
                                                               const FiniteMemoryPolicy& target, std::size_t n,
                                                               std::size_t* visited = nullptr) {
  std::vector<std::pair<EventSequence, ControlDecision>> expected;
  for (const auto& alpha : feasible_observations_upto(m, target, n)) expected.emplace_back(alpha, target.decide(alpha));
  std::optional<ControlStructure> found;
  const std::size_t count = for_each_structure(pruned, [&](const ExtractedStructure& s) {
    // Cheap filter: follow each expected observation through the structure.
    for (const auto& [alpha, gamma] : expected) {
      DecId d = 0;
      for (auto e : alpha) {
        auto next = s.structure.observation_states[s.structure.decision_states[d].target].successor(e);
        if (!next) return true;
        d = *next;
      }
      if (s.structure.decision_states[d].decision != gamma) return true;
    }
    const DecodedSupervisor decoded(std::make_shared<const ControlStructure>(s.structure));
    if (!same_supervisor_upto(m, decoded, target, n)) return true;
    found = s.structure;
    return false;
  });
  if (visited) *visited = count;
  return found;
}

/// The reference "no solution" verdict: exhaustive search for a complete safe
/// control structure embedded in the raw arena, by backtracking over one
/// decision per reached decision state. Returns nullopt when the node budget is
/// exhausted.
inline std::optional<bool> exists_complete_safe_substructure(const PlantModel& m, const Arena& raw,
                                                              std::size_t budget) {
  if (raw.decision_states.empty()) return false;
  // Observation states that are complete in the raw arena (every feasible σ
  // has a decision state) are the only ones a structure may use.
  std::vector<char> complete(raw.observation_states.size(), 1);
  for (std::size_t o = 0; o < raw.observation_states.size(); ++o)
    for (auto e : feasible_observations(m, raw.observation_states[o].info))
      if (!raw.observation_states[o].successor(e)) complete[o] = 0;

  std::size_t nodes = 0;
  std::vector<int> choice(raw.decision_states.size(), -1);
  std::vector<char> reached_obs(raw.observation_states.size(), 0);
  bool exhausted = false;
  std::function<bool(std::vector<DecId>)> search = [&](std::vector<DecId> pending) -> bool {
    if (++nodes > budget) {
      exhausted = true;
      return false;
    }
    if (pending.empty()) return true;
    const DecId d = pending.back();
    pending.pop_back();
    if (choice[d] >= 0) return search(pending);
    const auto& edges = raw.decision_states[d].edges;
    for (std::size_t k = 0; k < edges.size() && !exhausted; ++k) {
      const ObsId o = edges[k].target;
      if (!complete[o]) continue;
      choice[d] = static_cast<int>(k);
      std::vector<DecId> next = pending;
      const bool fresh = !reached_obs[o];
      if (fresh) {
        reached_obs[o] = 1;
        for (const auto& [e, d2] : raw.observation_states[o].successors) next.push_back(d2);
      }
      if (search(std::move(next))) return true;
      if (fresh) reached_obs[o] = 0;
      choice[d] = -1;
    }
    return false;
  };
  const bool found = search({0});
  if (exhausted) return std::nullopt;
  return found;
}

}  // namespace testing
