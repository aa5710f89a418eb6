#include "desopacity/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <unordered_map>

namespace desopacity {

const char* to_string(ExtractionPolicy policy) {
  switch (policy) {
    case ExtractionPolicy::first_feasible:
      return "first_feasible";
    case ExtractionPolicy::locally_maximal:
      return "locally_maximal";
    case ExtractionPolicy::enumerate_all:
      return "enumerate_all";
  }
  return "?";
}

std::size_t Arena::num_edges() const {
  std::size_t n = 0;
  for (const auto& d : decision_states) n += d.edges.size();
  for (const auto& o : observation_states) n += o.successors.size();
  return n;
}

Arena expand_arena(const PlantModel& model, const SynthesisConfig& cfg) {
  const Estimator estimator(model, cfg.mode);
  const std::vector<ControlDecision> gammas = model.decisions();
  Arena arena;
  arena.mode = cfg.mode;
  arena.decision_states.push_back({});
  std::unordered_map<InformationState, ObsId, InformationStateHash> known;
  std::unordered_map<InformationState, std::uint32_t, InformationStateHash> unsafe;
  const InformationState initial = InformationState::initial();

  // Explicit stack emulating the recursive expansion: a decision frame walks
  // Γ, an observation frame walks the feasible observations of a new state.
  struct Frame {
    bool decision;
    std::uint32_t id;
    std::size_t next = 0;
    std::vector<EventId> events{};
  };
  std::vector<Frame> stack{{true, 0}};
  auto check_guard = [&] {
    if (arena.size() > cfg.size_guard)
      throw ResourceError("arena exceeds size guard of " + std::to_string(cfg.size_guard) + " states",
                          arena.decision_states.size(), arena.observation_states.size());
  };

  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.decision) {
      if (top.next == gammas.size()) {
        stack.pop_back();
        continue;
      }
      const ControlDecision gamma = gammas[top.next++];
      const DecId d = top.id;
      const auto& source = arena.decision_states[d].source;
      const InformationState& from = source ? arena.observation_states[*source].info : initial;
      InformationState next = ur_is(estimator, nx_is(estimator, from, arena.decision_states[d].event, gamma), gamma);
      if (next.empty()) continue;
      if (!is_safe(next, model.secret())) {
        if (cfg.diagnostics) {
          auto [u, fresh] = unsafe.try_emplace(next, static_cast<std::uint32_t>(arena.unsafe_states.size()));
          if (fresh) arena.unsafe_states.push_back(next);
          arena.rejected_edges.push_back({d, gamma, u->second});
        }
        continue;
      }
      auto it = known.find(next);
      if (it != known.end()) {
        arena.decision_states[d].edges.push_back({gamma, it->second});
        continue;
      }
      const auto o = static_cast<ObsId>(arena.observation_states.size());
      const EventSet feasible = feasible_observations(model, next);
      known.emplace(next, o);
      arena.observation_states.push_back({std::move(next), {}});
      arena.decision_states[d].edges.push_back({gamma, o});
      check_guard();
      stack.push_back({false, o, 0, std::vector<EventId>(feasible.begin(), feasible.end())});
    } else {
      if (top.next == top.events.size()) {
        stack.pop_back();
        continue;
      }
      const EventId e = top.events[top.next++];
      const ObsId o = top.id;
      const auto d = static_cast<DecId>(arena.decision_states.size());
      arena.decision_states.push_back({o, e, {}});
      arena.observation_states[o].successors.emplace_back(e, d);
      check_guard();
      stack.push_back({true, d});
    }
  }
  return arena;
}

namespace {

struct Liveness {
  std::vector<char> decision;
  std::vector<char> observation;

  explicit Liveness(const Arena& a) : decision(a.decision_states.size(), 1), observation(a.observation_states.size(), 1) {}
};

IncompleteStates find_incomplete_live(const PlantModel& model, const Arena& arena, const Liveness& live) {
  IncompleteStates bad;
  for (DecId d = 0; d < arena.decision_states.size(); ++d) {
    if (!live.decision[d]) continue;
    const auto& edges = arena.decision_states[d].edges;
    if (std::none_of(edges.begin(), edges.end(), [&](const DecisionEdge& e) { return live.observation[e.target]; }))
      bad.decision_states.push_back(d);
  }
  for (ObsId o = 0; o < arena.observation_states.size(); ++o) {
    if (!live.observation[o]) continue;
    const auto& state = arena.observation_states[o];
    for (auto e : feasible_observations(model, state.info)) {
      auto succ = state.successor(e);
      if (!succ || !live.decision[*succ]) {
        bad.observation_states.push_back(o);
        break;
      }
    }
  }
  return bad;
}

}  // namespace

IncompleteStates find_incomplete(const PlantModel& model, const Arena& arena) {
  return find_incomplete_live(model, arena, Liveness(arena));
}

PruneResult prune_incomplete(const PlantModel& model, const Arena& arena) {
  PruneResult result;
  Liveness live(arena);
  while (true) {
    IncompleteStates bad = find_incomplete_live(model, arena, live);
    if (bad.empty()) break;
    for (auto d : bad.decision_states) live.decision[d] = 0;
    for (auto o : bad.observation_states) live.observation[o] = 0;
    // Decision states (ı, σ) of a removed ı lose their only incoming edge.
    for (DecId d = 0; d < arena.decision_states.size(); ++d) {
      const auto& src = arena.decision_states[d].source;
      if (live.decision[d] && src && !live.observation[*src]) {
        live.decision[d] = 0;
        ++result.orphaned;
      }
    }
    result.rounds.push_back(std::move(bad));
  }

  // Keep only what is reachable from the initial decision state.
  Liveness reach(arena);
  std::fill(reach.decision.begin(), reach.decision.end(), 0);
  std::fill(reach.observation.begin(), reach.observation.end(), 0);
  if (!arena.decision_states.empty() && live.decision[0]) {
    std::deque<DecId> queue{0};
    reach.decision[0] = 1;
    while (!queue.empty()) {
      const DecId d = queue.front();
      queue.pop_front();
      for (const auto& edge : arena.decision_states[d].edges) {
        if (!live.observation[edge.target] || reach.observation[edge.target]) continue;
        reach.observation[edge.target] = 1;
        for (const auto& [e, next] : arena.observation_states[edge.target].successors) {
          if (live.decision[next] && !reach.decision[next]) {
            reach.decision[next] = 1;
            queue.push_back(next);
          }
        }
      }
    }
  }
  for (DecId d = 0; d < arena.decision_states.size(); ++d)
    if (live.decision[d] && !reach.decision[d]) ++result.orphaned;
  for (ObsId o = 0; o < arena.observation_states.size(); ++o)
    if (live.observation[o] && !reach.observation[o]) ++result.orphaned;

  // Compact, preserving relative order.
  std::vector<DecId> dec_map(arena.decision_states.size(), kNoState);
  std::vector<ObsId> obs_map(arena.observation_states.size(), kNoState);
  Arena& out = result.arena;
  out.mode = arena.mode;
  for (DecId d = 0; d < arena.decision_states.size(); ++d)
    if (reach.decision[d]) dec_map[d] = static_cast<DecId>(out.decision_states.size()), out.decision_states.push_back({});
  for (ObsId o = 0; o < arena.observation_states.size(); ++o)
    if (reach.observation[o])
      obs_map[o] = static_cast<ObsId>(out.observation_states.size()), out.observation_states.push_back({});
  for (DecId d = 0; d < arena.decision_states.size(); ++d) {
    if (!reach.decision[d]) continue;
    const auto& src = arena.decision_states[d];
    auto& dst = out.decision_states[dec_map[d]];
    dst.source = src.source ? std::optional<ObsId>(obs_map[*src.source]) : std::nullopt;
    dst.event = src.event;
    for (const auto& edge : src.edges)
      if (reach.observation[edge.target]) dst.edges.push_back({edge.decision, obs_map[edge.target]});
  }
  for (ObsId o = 0; o < arena.observation_states.size(); ++o) {
    if (!reach.observation[o]) continue;
    auto& dst = out.observation_states[obs_map[o]];
    dst.info = arena.observation_states[o].info;
    for (const auto& [e, next] : arena.observation_states[o].successors)
      if (reach.decision[next]) dst.successors.emplace_back(e, dec_map[next]);
  }
  return result;
}

namespace {

// Builds the structure induced by one choice per reached decision state,
// discovering states depth-first in the same order as the expansion.
template <class Choose>
ExtractedStructure build_structure(const Arena& arena, Choose&& choose) {
  ExtractedStructure out;
  ControlStructure& s = out.structure;
  s.mode = arena.mode;
  std::vector<DecId> dec_map(arena.decision_states.size(), kNoState);
  std::vector<ObsId> obs_map(arena.observation_states.size(), kNoState);

  auto add_decision = [&](DecId arena_d, std::optional<ObsId> source, std::optional<EventId> event) {
    const auto id = static_cast<DecId>(s.decision_states.size());
    dec_map[arena_d] = id;
    s.decision_states.push_back({source, event, {}, 0});
    out.arena_decision_state.push_back(arena_d);
    out.chosen_edge.push_back(0);
    return id;
  };

  struct Frame {
    bool decision;
    std::uint32_t arena_id;
    std::size_t next = 0;
  };
  add_decision(0, std::nullopt, std::nullopt);
  std::vector<Frame> stack{{true, 0}};
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.decision) {
      const DecId arena_d = top.arena_id;
      stack.pop_back();
      const std::size_t k = choose(arena_d);
      const DecisionEdge& edge = arena.decision_states[arena_d].edges.at(k);
      const DecId d = dec_map[arena_d];
      s.decision_states[d].decision = edge.decision;
      out.chosen_edge[d] = k;
      if (obs_map[edge.target] == kNoState) {
        obs_map[edge.target] = static_cast<ObsId>(s.observation_states.size());
        s.observation_states.push_back({arena.observation_states[edge.target].info, {}});
        stack.push_back({false, edge.target});
      }
      s.decision_states[d].target = obs_map[edge.target];
    } else {
      const auto& succ = arena.observation_states[top.arena_id].successors;
      if (top.next == succ.size()) {
        stack.pop_back();
        continue;
      }
      const auto [e, arena_next] = succ[top.next++];
      const ObsId o = obs_map[top.arena_id];
      const bool fresh = dec_map[arena_next] == kNoState;
      if (fresh) add_decision(arena_next, o, e);
      s.observation_states[o].successors.emplace_back(e, dec_map[arena_next]);
      if (fresh) stack.push_back({true, arena_next});
    }
  }
  return out;
}

std::size_t locally_maximal_edge(const ArenaDecisionState& d) {
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    const EventSet g = d.edges[i].decision.enabled();
    const bool dominated = std::any_of(d.edges.begin(), d.edges.end(), [&](const DecisionEdge& other) {
      return other.decision.enabled() != g && g.subset_of(other.decision.enabled());
    });
    if (!dominated) return i;
  }
  return 0;
}

}  // namespace

std::size_t for_each_structure(const Arena& pruned, const std::function<bool(const ExtractedStructure&)>& visit) {
  if (pruned.empty()) return 0;
  std::vector<std::size_t> choice(pruned.decision_states.size(), 0);
  std::vector<char> reached_obs(pruned.observation_states.size(), 0);
  std::vector<char> reached_dec(pruned.decision_states.size(), 0);
  std::size_t count = 0;
  bool stop = false;

  // pending holds reached decision states whose choice is still open, in
  // discovery order.
  std::function<void(std::vector<DecId>)> branch = [&](std::vector<DecId> pending) {
    if (stop) return;
    if (pending.empty()) {
      ++count;
      if (!visit(build_structure(pruned, [&](DecId d) { return choice[d]; }))) stop = true;
      return;
    }
    const DecId d = pending.front();
    for (std::size_t k = 0; k < pruned.decision_states[d].edges.size() && !stop; ++k) {
      choice[d] = k;
      const ObsId o = pruned.decision_states[d].edges[k].target;
      std::vector<DecId> rest(pending.begin() + 1, pending.end());
      std::vector<DecId> added;
      if (!reached_obs[o]) {
        reached_obs[o] = 1;
        for (const auto& [e, next] : pruned.observation_states[o].successors) {
          if (!reached_dec[next]) {
            reached_dec[next] = 1;
            added.push_back(next);
            rest.push_back(next);
          }
        }
        branch(std::move(rest));
        for (auto a : added) reached_dec[a] = 0;
        reached_obs[o] = 0;
      } else {
        branch(std::move(rest));
      }
    }
  };
  reached_dec[0] = 1;
  branch({0});
  return count;
}

SynthesisOutcome extract_structure(const Arena& pruned, const SynthesisConfig& cfg) {
  SynthesisOutcome outcome;
  outcome.pruned_arena = pruned;
  if (pruned.empty()) return outcome;
  outcome.solved = true;
  switch (cfg.extraction) {
    case ExtractionPolicy::first_feasible:
      outcome.structures.push_back(build_structure(pruned, [](DecId) { return std::size_t{0}; }));
      break;
    case ExtractionPolicy::locally_maximal:
      outcome.structures.push_back(
          build_structure(pruned, [&](DecId d) { return locally_maximal_edge(pruned.decision_states[d]); }));
      break;
    case ExtractionPolicy::enumerate_all:
      for_each_structure(pruned, [&](const ExtractedStructure& s) {
        if (outcome.structures.size() == cfg.enumerate_cap) {
          outcome.truncated = true;
          return false;
        }
        outcome.structures.push_back(s);
        return true;
      });
      break;
  }
  return outcome;
}

SynthesisOutcome synthesize(const PlantModel& model, const SynthesisConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const Arena raw = expand_arena(model, cfg);
  PruneResult pruned = prune_incomplete(model, raw);
  SynthesisOutcome outcome = extract_structure(pruned.arena, cfg);
  outcome.prune_rounds = std::move(pruned.rounds);
  if (cfg.diagnostics) outcome.raw_arena = raw;
  outcome.stats.arena_decision_states = raw.decision_states.size();
  outcome.stats.arena_observation_states = raw.observation_states.size();
  outcome.stats.pruned_decision_states = outcome.pruned_arena.decision_states.size();
  outcome.stats.pruned_observation_states = outcome.pruned_arena.observation_states.size();
  outcome.stats.prune_rounds = outcome.prune_rounds.size();
  outcome.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

}  // namespace desopacity
