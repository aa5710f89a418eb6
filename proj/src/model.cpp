#include "desopacity/model.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "desopacity/error.hpp"
#include "json_util.hpp"

namespace desopacity {

PlantModel::PlantModel(std::vector<std::string> states, std::vector<std::string> events, StateId initial,
                       StateSet secret, EventPartitions partitions)
    : state_names_(std::move(states)),
      event_names_(std::move(events)),
      initial_(initial),
      secret_(secret),
      partitions_(partitions) {
  if (state_names_.empty()) throw SemanticError("model has no states");
  if (state_names_.size() > kMaxIndex) throw SemanticError("more than 64 states are not supported");
  if (event_names_.size() > kMaxIndex) throw SemanticError("more than 64 events are not supported");
  for (StateId i = 0; i < state_names_.size(); ++i) {
    if (!state_index_.emplace(state_names_[i], i).second)
      throw SemanticError("duplicate state '" + state_names_[i] + "'");
  }
  for (EventId i = 0; i < event_names_.size(); ++i) {
    if (!event_index_.emplace(event_names_[i], i).second)
      throw SemanticError("duplicate event '" + event_names_[i] + "'");
  }
  if (initial_ >= state_names_.size()) throw SemanticError("initial state is not a state");
  if (!secret_.subset_of(all_states())) throw SemanticError("secret states are not a subset of states");
  const EventSet sigma = all_events();
  if (!partitions_.supervisor_observable.subset_of(sigma) || !partitions_.intruder_observable.subset_of(sigma) ||
      !partitions_.controllable.subset_of(sigma))
    throw SemanticError("event partition is not a subset of events");
  delta_.assign(num_states() * num_events(), kNoState);
  active_.assign(num_states(), EventSet{});
}

void PlantModel::add_transition(StateId src, EventId e, StateId dst) {
  if (src >= num_states() || dst >= num_states()) throw SemanticError("transition endpoint is not a state");
  if (e >= num_events()) throw SemanticError("transition label is not an event");
  StateId& slot = delta_[src * num_events() + e];
  if (slot != kNoState) {
    if (slot == dst)
      throw SemanticError("duplicate transition (" + state_names_[src] + ", " + event_names_[e] + ")");
    throw SemanticError("nondeterministic transition (" + state_names_[src] + ", " + event_names_[e] + ")");
  }
  slot = dst;
  active_[src].insert(e);
  ++num_transitions_;
}

std::optional<StateId> PlantModel::find_state(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EventId> PlantModel::find_event(std::string_view name) const {
  auto it = event_index_.find(std::string(name));
  if (it == event_index_.end()) return std::nullopt;
  return it->second;
}

ControlDecision PlantModel::decision(EventSet enabled) const {
  if (!enabled.subset_of(all_events())) throw SemanticError("decision contains unknown events");
  if (!uncontrollable().subset_of(enabled))
    throw SemanticError("decision " + format(enabled) + " disables uncontrollable events " +
                        format(uncontrollable() - enabled));
  return ControlDecision(enabled);
}

std::vector<ControlDecision> PlantModel::decisions() const {
  std::vector<EventId> ctrl(controllable().begin(), controllable().end());
  const std::size_t k = ctrl.size();
  std::vector<ControlDecision> out;
  out.reserve(std::size_t{1} << std::min<std::size_t>(k, 20));
  // Combinations of each size in lexicographic index order.
  for (std::size_t size = 0; size <= k; ++size) {
    std::vector<std::size_t> pick(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      EventSet chosen = uncontrollable();
      for (auto i : pick) chosen.insert(ctrl[i]);
      out.emplace_back(chosen);
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == k - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

StateSet PlantModel::deadlock_states() const {
  StateSet out;
  for (StateId x = 0; x < num_states(); ++x)
    if (active_[x].empty()) out.insert(x);
  return out;
}

std::string PlantModel::format(StateSet q) const {
  std::string s = "{";
  bool first = true;
  for (auto x : q) {
    if (!first) s += ',';
    s += state_names_[x];
    first = false;
  }
  return s + "}";
}

std::string PlantModel::format(EventSet e) const {
  std::string s = "{";
  bool first = true;
  for (auto x : e) {
    if (!first) s += ',';
    s += event_names_[x];
    first = false;
  }
  return s + "}";
}

std::string PlantModel::format_sequence(std::span<const EventId> s) const {
  if (s.empty()) return "ε";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += event_names_[s[i]];
  }
  return out;
}

namespace {

std::string name_of(const json& j, const char* what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw SemanticError(std::string(what) + " identifiers must be strings");
}

std::vector<std::string> name_list(const json& doc, const char* key, bool required) {
  if (!doc.contains(key)) {
    if (required) throw SemanticError(std::string("missing key '") + key + "'");
    return {};
  }
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw SemanticError(std::string("'") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& v : arr) out.push_back(name_of(v, key));
  return out;
}

}  // namespace

PlantModel parse_model(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("model document must be a JSON object", 1);

  auto states = name_list(doc, "states", true);
  auto events = name_list(doc, "events", true);
  if (!doc.contains("initial")) throw SemanticError("missing key 'initial'");
  const std::string initial = name_of(doc.at("initial"), "initial");

  std::map<std::string, StateId> sidx;
  for (StateId i = 0; i < states.size(); ++i) sidx.emplace(states[i], i);
  std::map<std::string, EventId> eidx;
  for (EventId i = 0; i < events.size(); ++i) eidx.emplace(events[i], i);

  auto state_of = [&](const std::string& n) {
    auto it = sidx.find(n);
    if (it == sidx.end()) throw SemanticError("unknown state '" + n + "'");
    return it->second;
  };
  auto event_set = [&](const char* key) {
    EventSet out;
    for (const auto& n : name_list(doc, key, false)) {
      auto it = eidx.find(n);
      if (it == eidx.end()) throw SemanticError(std::string("unknown event '") + n + "' in '" + key + "'");
      out.insert(it->second);
    }
    return out;
  };

  if (states.size() > kMaxIndex) throw SemanticError("more than 64 states are not supported");
  if (events.size() > kMaxIndex) throw SemanticError("more than 64 events are not supported");

  StateSet secret;
  for (const auto& n : name_list(doc, "secret", false)) secret.insert(state_of(n));
  EventPartitions parts{event_set("observable_supervisor"), event_set("observable_intruder"),
                        event_set("controllable")};
  if (states.empty()) throw SemanticError("model has no states");
  PlantModel model(states, events, state_of(initial), secret, parts);

  if (!doc.contains("transitions")) throw SemanticError("missing key 'transitions'");
  const json& trans = doc.at("transitions");
  if (!trans.is_array()) throw SemanticError("'transitions' must be a list");
  for (const auto& t : trans) {
    if (!t.is_array() || t.size() != 3) throw SemanticError("transition must be [src, event, dst]");
    const std::string e = name_of(t[1], "event");
    auto it = eidx.find(e);
    if (it == eidx.end()) throw SemanticError("unknown event '" + e + "'");
    model.add_transition(state_of(name_of(t[0], "state")), it->second, state_of(name_of(t[2], "state")));
  }
  return model;
}

std::string serialize_model(const PlantModel& model) {
  ojson doc;
  doc["states"] = model.state_names();
  doc["events"] = model.event_names();
  doc["initial"] = model.state_name(model.initial());
  auto names = [&](EventSet s) {
    std::vector<std::string> out;
    for (auto e : s) out.push_back(model.event_name(e));
    return out;
  };
  std::vector<std::string> secret;
  for (auto x : model.secret()) secret.push_back(model.state_name(x));
  doc["secret"] = secret;
  ojson trans = ojson::array();
  for (StateId x = 0; x < model.num_states(); ++x)
    for (auto e : model.active_events(x))
      trans.push_back({model.state_name(x), model.event_name(e), model.state_name(model.successor(x, e))});
  doc["transitions"] = trans;
  doc["observable_supervisor"] = names(model.supervisor_observable());
  doc["observable_intruder"] = names(model.intruder_observable());
  doc["controllable"] = names(model.controllable());
  return doc.dump(2) + "\n";
}

EventSequence project(std::span<const EventId> s, EventSet obs) {
  EventSequence out;
  for (auto e : s)
    if (obs.contains(e)) out.push_back(e);
  return out;
}

EventSet active_events(const PlantModel& model, StateSet q) {
  EventSet out;
  for (auto x : q) out |= model.active_events(x);
  return out;
}

StateSet unobservable_reach(const PlantModel& model, StateSet q, ControlDecision gamma, EventSet hidden) {
  const EventSet moves = hidden & gamma.enabled();
  StateSet reached = q;
  StateSet frontier = q;
  while (!frontier.empty()) {
    StateSet next;
    for (auto x : frontier)
      for (auto e : model.active_events(x) & moves) next.insert(model.successor(x, e));
    frontier = next - reached;
    reached |= next;
  }
  return reached;
}

StateSet unobservable_reach_plus(const PlantModel& model, StateSet q, ControlDecision gamma) {
  const EventSet moves = model.intruder_unobservable() & gamma.enabled();
  StateSet first;
  for (auto x : q)
    for (auto e : model.active_events(x) & moves) first.insert(model.successor(x, e));
  return unobservable_reach(model, first, gamma, model.intruder_unobservable());
}

StateSet observable_reach(const PlantModel& model, StateSet q, EventId sigma) {
  StateSet out;
  for (auto x : q) {
    StateId y = model.successor(x, sigma);
    if (y != kNoState) out.insert(y);
  }
  return out;
}

std::optional<StateSet> open_loop_estimate(const PlantModel& model, std::span<const EventId> observed,
                                           EventSet obs) {
  const ControlDecision all = model.permissive();
  const EventSet hidden = model.all_events() - obs;
  StateSet q = unobservable_reach(model, StateSet::singleton(model.initial()), all, hidden);
  for (auto e : observed) {
    if (!obs.contains(e)) return std::nullopt;
    q = unobservable_reach(model, observable_reach(model, q, e), all, hidden);
    if (q.empty()) return std::nullopt;
  }
  return q;
}

OpenLoopVerdict verify_open_loop_opacity(const PlantModel& model) {
  // BFS over the Σ_a-observer; the first unsafe observer state found gives a
  // shortest witness.
  const ControlDecision all = model.permissive();
  const EventSet hidden = model.intruder_unobservable();
  const StateSet secret = model.secret();
  std::map<StateSet, EventSequence> seen;
  std::deque<StateSet> queue;
  StateSet q0 = unobservable_reach(model, StateSet::singleton(model.initial()), all, hidden);
  seen.emplace(q0, EventSequence{});
  queue.push_back(q0);
  while (!queue.empty()) {
    StateSet q = queue.front();
    queue.pop_front();
    if (q.subset_of(secret)) return {false, seen.at(q)};
    for (auto e : model.intruder_observable()) {
      StateSet next = unobservable_reach(model, observable_reach(model, q, e), all, hidden);
      if (next.empty() || seen.count(next)) continue;
      EventSequence path = seen.at(q);
      path.push_back(e);
      seen.emplace(next, std::move(path));
      queue.push_back(next);
    }
  }
  return {true, std::nullopt};
}

}  // namespace desopacity
