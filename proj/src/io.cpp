#include "desopacity/io.hpp"

#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace desopacity {

namespace {

std::string name_of(const json& j, const char* what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw SemanticError(std::string(what) + " identifiers must be strings");
}

const json& require(const json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key))
    throw SemanticError(std::string("missing key '") + key + "' in " + where);
  return obj.at(key);
}

const json& require_array(const json& obj, const char* key, const char* where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) throw SemanticError(std::string("'") + key + "' in " + where + " must be a list");
  return v;
}

EventId event_of(const PlantModel& model, const json& j) {
  const std::string n = name_of(j, "event");
  auto e = model.find_event(n);
  if (!e) throw SemanticError("unknown event '" + n + "'");
  return *e;
}

StateId state_of(const PlantModel& model, const json& j) {
  const std::string n = name_of(j, "state");
  auto x = model.find_state(n);
  if (!x) throw SemanticError("unknown state '" + n + "'");
  return *x;
}

EventSet event_set_of(const PlantModel& model, const json& arr, const char* what) {
  if (!arr.is_array()) throw SemanticError(std::string(what) + " must be a list of events");
  EventSet out;
  for (const auto& v : arr) out.insert(event_of(model, v));
  return out;
}

EventSequence sequence_of(const PlantModel& model, const json& arr) {
  if (!arr.is_array()) throw SemanticError("observation must be a list of events");
  EventSequence out;
  for (const auto& v : arr) out.push_back(event_of(model, v));
  return out;
}

std::vector<std::string> names(const PlantModel& model, EventSet s) {
  std::vector<std::string> out;
  for (auto e : s) out.push_back(model.event_name(e));
  return out;
}

std::vector<std::string> names(const PlantModel& model, StateSet s) {
  std::vector<std::string> out;
  for (auto x : s) out.push_back(model.state_name(x));
  return out;
}

std::vector<std::string> names(const PlantModel& model, std::span<const EventId> s) {
  std::vector<std::string> out;
  for (auto e : s) out.push_back(model.event_name(e));
  return out;
}

IssuanceMode mode_of(const json& j) {
  const std::string m = j.is_string() ? j.get<std::string>() : "";
  if (m == "observation") return IssuanceMode::observation_triggered;
  if (m == "decision") return IssuanceMode::decision_triggered;
  throw SemanticError("mode must be \"observation\" or \"decision\"");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// DOT string literal.
std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

}  // namespace

TablePolicy parse_table_policy(const PlantModel& model, std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("policy document must be a JSON object", 1);
  if (doc.contains("type") && doc.at("type") != "table") throw SemanticError("policy type must be \"table\"");
  ControlDecision fallback = model.permissive();
  if (doc.contains("default")) fallback = model.decision(event_set_of(model, doc.at("default"), "'default'"));
  TablePolicy policy(fallback);
  if (doc.contains("entries")) {
    const json& entries = require_array(doc, "entries", "policy");
    std::set<EventSequence> seen;
    for (const auto& entry : entries) {
      EventSequence obs = sequence_of(model, require(entry, "observation", "policy entry"));
      for (auto e : obs)
        if (!model.supervisor_observable().contains(e))
          throw SemanticError("observation lists event '" + model.event_name(e) +
                              "' that the supervisor cannot observe");
      if (!seen.insert(obs).second)
        throw SemanticError("duplicate policy entry for " + model.format_sequence(obs));
      policy.set(obs, model.decision(event_set_of(model, require(entry, "decision", "policy entry"), "decision")));
    }
  }
  return policy;
}

std::string serialize_table_policy(const PlantModel& model, const TablePolicy& policy) {
  ojson doc;
  doc["type"] = "table";
  doc["default"] = names(model, policy.fallback().enabled());
  ojson entries = ojson::array();
  for (const auto& [obs, d] : policy.entries()) {
    ojson entry;
    entry["observation"] = names(model, std::span<const EventId>(obs));
    entry["decision"] = names(model, d.enabled());
    entries.push_back(entry);
  }
  doc["entries"] = entries;
  return doc.dump(2) + "\n";
}

std::string serialize_structure(const PlantModel& model, const ControlStructure& structure) {
  ojson doc;
  doc["type"] = "structure";
  doc["mode"] = to_string(structure.mode);
  ojson dec = ojson::array();
  ojson do_rel = ojson::array();
  for (std::size_t d = 0; d < structure.decision_states.size(); ++d) {
    const auto& s = structure.decision_states[d];
    ojson row;
    row["id"] = d;
    row["source"] = s.source ? ojson(*s.source) : ojson(nullptr);
    row["event"] = s.event ? ojson(model.event_name(*s.event)) : ojson(nullptr);
    dec.push_back(row);
    do_rel.push_back(ojson{{"from", d}, {"decision", names(model, s.decision.enabled())}, {"to", s.target}});
  }
  ojson obs = ojson::array();
  ojson od_rel = ojson::array();
  for (std::size_t o = 0; o < structure.observation_states.size(); ++o) {
    const auto& s = structure.observation_states[o];
    ojson members = ojson::array();
    for (const auto& m : s.info.members())
      members.push_back(ojson{{"plant", model.state_name(m.plant)},
                              {"estimate", names(model, m.estimate)},
                              {"decision", names(model, m.decision.enabled())}});
    obs.push_back(ojson{{"id", o}, {"members", members}});
    for (const auto& [e, d] : s.successors)
      od_rel.push_back(ojson{{"from", o}, {"event", model.event_name(e)}, {"to", d}});
  }
  doc["decision_states"] = dec;
  doc["observation_states"] = obs;
  doc["do_transitions"] = do_rel;
  doc["od_transitions"] = od_rel;
  return doc.dump(2) + "\n";
}

ControlStructure parse_structure(const PlantModel& model, std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("structure document must be a JSON object", 1);
  if (doc.contains("type") && doc.at("type") != "structure") throw SemanticError("type must be \"structure\"");
  ControlStructure s;
  s.mode = mode_of(require(doc, "mode", "structure"));

  const json& dec = require_array(doc, "decision_states", "structure");
  const json& obs = require_array(doc, "observation_states", "structure");
  const std::size_t nd = dec.size();
  const std::size_t no = obs.size();
  auto index = [](const json& j, std::size_t limit, const char* what) -> std::uint32_t {
    if (!j.is_number_unsigned() || j.get<std::uint64_t>() >= limit)
      throw SemanticError(std::string(what) + " index out of range");
    return static_cast<std::uint32_t>(j.get<std::uint64_t>());
  };

  s.decision_states.resize(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    const json& row = dec[i];
    if (index(require(row, "id", "decision state"), nd, "decision state") != i)
      throw SemanticError("decision states must be listed in id order");
    const json& src = require(row, "source", "decision state");
    const json& ev = require(row, "event", "decision state");
    if (src.is_null() != ev.is_null()) throw SemanticError("decision state needs both source and event, or neither");
    if (!src.is_null()) {
      s.decision_states[i].source = index(src, no, "observation state");
      s.decision_states[i].event = event_of(model, ev);
    }
  }
  if (nd == 0 || s.decision_states[0].source) throw SemanticError("decision state 0 must be the initial state");

  s.observation_states.resize(no);
  for (std::size_t i = 0; i < no; ++i) {
    const json& row = obs[i];
    if (index(require(row, "id", "observation state"), no, "observation state") != i)
      throw SemanticError("observation states must be listed in id order");
    std::vector<EstimatorState> members;
    for (const auto& m : require_array(row, "members", "observation state")) {
      members.push_back({state_of(model, require(m, "plant", "member")),
                         StateSet{},
                         ControlDecision(event_set_of(model, require(m, "decision", "member"), "decision"))});
      for (const auto& x : require_array(m, "estimate", "member")) members.back().estimate.insert(state_of(model, x));
    }
    s.observation_states[i].info = InformationState(std::move(members));
  }

  std::vector<char> has_decision(nd, 0);
  for (const auto& t : require_array(doc, "do_transitions", "structure")) {
    const auto d = index(require(t, "from", "do transition"), nd, "decision state");
    if (has_decision[d]) throw SemanticError("decision state " + std::to_string(d) + " has two decisions");
    has_decision[d] = 1;
    s.decision_states[d].decision = model.decision(event_set_of(model, require(t, "decision", "do transition"), "decision"));
    s.decision_states[d].target = index(require(t, "to", "do transition"), no, "observation state");
  }
  for (std::size_t d = 0; d < nd; ++d)
    if (!has_decision[d]) throw SemanticError("decision state " + std::to_string(d) + " has no decision");

  for (const auto& t : require_array(doc, "od_transitions", "structure")) {
    const auto o = index(require(t, "from", "od transition"), no, "observation state");
    const EventId e = event_of(model, require(t, "event", "od transition"));
    const auto d = index(require(t, "to", "od transition"), nd, "decision state");
    if (!model.supervisor_observable().contains(e))
      throw SemanticError("od transition on unobservable event '" + model.event_name(e) + "'");
    if (s.observation_states[o].successor(e)) throw SemanticError("od transition defined twice");
    if (s.decision_states[d].source != o || s.decision_states[d].event != e)
      throw SemanticError("od transition disagrees with decision state " + std::to_string(d));
    s.observation_states[o].successors.emplace_back(e, d);
  }
  for (auto& o : s.observation_states) std::sort(o.successors.begin(), o.successors.end());
  return s;
}

std::unique_ptr<FiniteMemoryPolicy> parse_policy(const PlantModel& model, std::string_view text) {
  const json doc = parse_json(text);
  const std::string type = doc.is_object() && doc.contains("type") && doc.at("type").is_string()
                               ? doc.at("type").get<std::string>()
                               : "table";
  if (type == "table") return std::make_unique<TablePolicy>(parse_table_policy(model, text));
  if (type == "structure")
    return std::make_unique<DecodedSupervisor>(std::make_shared<const ControlStructure>(parse_structure(model, text)));
  throw SemanticError("unknown policy type '" + type + "'");
}

InformationFlow parse_flow(const PlantModel& model, std::string_view text) {
  InformationFlow flow;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string l = trim(raw);
    if (l.empty() || l.front() == '#') continue;
    const auto comma = l.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'event=..., decision=...'", line);
    const std::string ev = trim(std::string_view(l).substr(0, comma));
    const std::string de = trim(std::string_view(l).substr(comma + 1));
    if (ev.rfind("event=", 0) != 0) throw ParseError("expected 'event='", line);
    if (de.rfind("decision=", 0) != 0) throw ParseError("expected 'decision='", line);
    ObservationPair pair;
    const std::string en = trim(std::string_view(ev).substr(6));
    if (en.empty()) throw ParseError("empty event", line);
    if (en != "-") {
      auto e = model.find_event(en);
      if (!e) throw ParseError("unknown event '" + en + "'", line);
      pair.event = *e;
    }
    const std::string dn = trim(std::string_view(de).substr(9));
    if (dn != "-") {
      if (dn.size() < 2 || dn.front() != '{' || dn.back() != '}')
        throw ParseError("decision must be '{e1,e2,...}' or '-'", line);
      EventSet enabled;
      std::istringstream items(dn.substr(1, dn.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) {
        const std::string n = trim(item);
        if (n.empty()) continue;
        auto e = model.find_event(n);
        if (!e) throw ParseError("unknown event '" + n + "'", line);
        enabled.insert(*e);
      }
      try {
        pair.decision = model.decision(enabled);
      } catch (const SemanticError& err) {
        throw ParseError(err.what(), line);
      }
    }
    if (!pair.event && !pair.decision) throw ParseError("silent pair (-, -) is not part of a flow", line);
    flow.push_back(pair);
  }
  return flow;
}

std::string format_pair(const PlantModel& model, const ObservationPair& pair) {
  return "event=" + (pair.event ? model.event_name(*pair.event) : std::string("-")) +
         ", decision=" + (pair.decision ? model.format(*pair.decision) : std::string("-"));
}

std::string format_flow(const PlantModel& model, const InformationFlow& flow) {
  std::string out;
  for (const auto& p : flow) out += format_pair(model, p) + "\n";
  return out;
}

std::string format_estimator_state(const PlantModel& model, const EstimatorState& m) {
  if (m.is_initial()) return "m0";
  return "(" + model.state_name(m.plant) + "," + model.format(m.estimate) + "," + model.format(m.decision) + ")";
}

std::string format_information_state(const PlantModel& model, const InformationState& info) {
  std::string out = "{";
  for (std::size_t i = 0; i < info.size(); ++i) {
    if (i) out += ',';
    out += format_estimator_state(model, info.members()[i]);
  }
  return out + "}";
}

namespace {

// Label: {(x,q),...} with the shared decision on a second line.
std::string is_label(const PlantModel& model, const InformationState& info) {
  if (info.is_initial()) return "{m0}";
  std::string out = "{";
  for (std::size_t i = 0; i < info.size(); ++i) {
    const auto& m = info.members()[i];
    if (i) out += ',';
    out += "(" + model.state_name(m.plant) + "," + model.format(m.estimate) + ")";
  }
  out += "}";
  if (auto d = info.decision()) out += "\n" + model.format(*d);
  return out;
}

std::string decision_label(const PlantModel& model, std::optional<ObsId> source, std::optional<EventId> event) {
  if (!source) return "({m0}, ε)";
  return "(O" + std::to_string(*source) + ", " + model.event_name(*event) + ")";
}

constexpr const char* kHeader =
    "  rankdir=LR;\n  node [fontname=\"Helvetica\", fontsize=10];\n  edge [fontname=\"Helvetica\", fontsize=9];\n";

}  // namespace

std::string dot_model(const PlantModel& model) {
  std::ostringstream out;
  out << "digraph model {\n" << kHeader;
  out << "  __init [shape=point];\n";
  for (StateId x = 0; x < model.num_states(); ++x) {
    out << "  s" << x << " [label=" << quote(model.state_name(x)) << ", shape="
        << (model.secret().contains(x) ? "doublecircle, style=filled, fillcolor=\"#f4cccc\"" : "circle") << "];\n";
  }
  out << "  __init -> s" << model.initial() << ";\n";
  for (StateId x = 0; x < model.num_states(); ++x)
    for (auto e : model.active_events(x))
      out << "  s" << x << " -> s" << model.successor(x, e) << " [label=" << quote(model.event_name(e)) << "];\n";
  out << "}\n";
  return out.str();
}

std::string dot_structure(const PlantModel& model, const ControlStructure& structure) {
  std::ostringstream out;
  out << "digraph structure {\n" << kHeader;
  for (std::size_t d = 0; d < structure.decision_states.size(); ++d) {
    const auto& s = structure.decision_states[d];
    out << "  D" << d << " [shape=box, style=rounded, label=" << quote(decision_label(model, s.source, s.event))
        << "];\n";
  }
  for (std::size_t o = 0; o < structure.observation_states.size(); ++o) {
    const auto& info = structure.observation_states[o].info;
    out << "  O" << o << " [shape=box";
    if (!is_safe(info, model.secret())) out << ", style=filled, fillcolor=\"#e06666\"";
    out << ", label=" << quote("O" + std::to_string(o) + ": " + is_label(model, info)) << "];\n";
  }
  for (std::size_t d = 0; d < structure.decision_states.size(); ++d) {
    const auto& s = structure.decision_states[d];
    out << "  D" << d << " -> O" << s.target << " [label=" << quote(model.format(s.decision)) << "];\n";
  }
  for (std::size_t o = 0; o < structure.observation_states.size(); ++o)
    for (const auto& [e, d] : structure.observation_states[o].successors)
      out << "  O" << o << " -> D" << d << " [label=" << quote(model.event_name(e)) << "];\n";
  out << "}\n";
  return out.str();
}

std::string dot_arena(const PlantModel& model, const Arena& arena, const std::vector<IncompleteStates>* rounds) {
  std::vector<char> dead_d(arena.decision_states.size(), 0);
  std::vector<char> dead_o(arena.observation_states.size(), 0);
  if (rounds) {
    for (const auto& round : *rounds) {
      for (auto d : round.decision_states) dead_d[d] = 1;
      for (auto o : round.observation_states) dead_o[o] = 1;
    }
    // Orphans: sources removed.
    for (std::size_t d = 0; d < arena.decision_states.size(); ++d)
      if (const auto& src = arena.decision_states[d].source; src && dead_o[*src]) dead_d[d] = 1;
  }
  const char* red = ", color=\"#cc0000\", penwidth=2";
  std::ostringstream out;
  out << "digraph arena {\n" << kHeader;
  for (std::size_t d = 0; d < arena.decision_states.size(); ++d) {
    const auto& s = arena.decision_states[d];
    out << "  D" << d << " [shape=box, style=rounded" << (dead_d[d] ? red : "")
        << ", label=" << quote(decision_label(model, s.source, s.event)) << "];\n";
  }
  for (std::size_t o = 0; o < arena.observation_states.size(); ++o)
    out << "  O" << o << " [shape=box" << (dead_o[o] ? red : "")
        << ", label=" << quote("O" + std::to_string(o) + ": " + is_label(model, arena.observation_states[o].info))
        << "];\n";
  for (std::size_t u = 0; u < arena.unsafe_states.size(); ++u)
    out << "  U" << u << " [shape=box, style=filled, fillcolor=\"#e06666\", label="
        << quote(is_label(model, arena.unsafe_states[u])) << "];\n";
  for (std::size_t d = 0; d < arena.decision_states.size(); ++d)
    for (const auto& e : arena.decision_states[d].edges)
      out << "  D" << d << " -> O" << e.target << " [label=" << quote(model.format(e.decision)) << "];\n";
  for (const auto& r : arena.rejected_edges)
    out << "  D" << r.source << " -> U" << r.unsafe_state << " [style=dashed, label=" << quote(model.format(r.decision))
        << "];\n";
  for (std::size_t o = 0; o < arena.observation_states.size(); ++o)
    for (const auto& [e, d] : arena.observation_states[o].successors)
      out << "  O" << o << " -> D" << d << " [label=" << quote(model.event_name(e)) << "];\n";
  out << "}\n";
  return out.str();
}

std::string dot_estimator_slice(const PlantModel& model, const FiniteMemoryPolicy& policy, IssuanceMode mode) {
  const Estimator est(model, mode);
  using Node = std::pair<FiniteMemoryPolicy::Memory, EstimatorState>;
  std::map<EstimatorState, std::size_t> ids;
  std::set<std::tuple<std::size_t, std::size_t, std::string>> edges;
  std::set<Node> seen;
  std::deque<Node> queue;
  auto id_of = [&](const EstimatorState& m) { return ids.try_emplace(m, ids.size()).first->second; };
  auto visit = [&](Node n) {
    id_of(n.second);
    if (seen.insert(n).second) queue.push_back(std::move(n));
  };

  const auto m0 = policy.initial_memory();
  const ControlDecision g0 = policy.decision_at(m0);
  const EstimatorState first = est.step(EstimatorState::initial(), {std::nullopt, g0});
  edges.emplace(id_of(EstimatorState::initial()), id_of(first), "(ε," + model.format(g0) + ")");
  visit({m0, first});
  while (!queue.empty()) {
    auto [mem, m] = queue.front();
    queue.pop_front();
    for (auto e : model.active_events(m.plant) & m.decision.enabled()) {
      auto next_mem = mem;
      if (model.supervisor_observable().contains(e)) {
        auto adv = policy.advance(mem, e);
        if (!adv) continue;
        next_mem = *adv;
      }
      const ControlDecision g = policy.decision_at(next_mem);
      const EstimatorState next = est.step(m, {e, g});
      edges.emplace(ids.at(m), id_of(next), "(" + model.event_name(e) + "," + model.format(g) + ")");
      visit({next_mem, next});
    }
  }

  std::vector<const EstimatorState*> by_id(ids.size());
  for (const auto& [m, i] : ids) by_id[i] = &m;
  std::ostringstream out;
  out << "digraph estimator {\n" << kHeader;
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    const auto& m = *by_id[i];
    const bool revealed = !m.is_initial() && m.estimate.subset_of(model.secret());
    out << "  m" << i << " [shape=ellipse" << (revealed ? ", style=filled, fillcolor=\"#e06666\"" : "")
        << ", label=" << quote(format_estimator_state(model, m)) << "];\n";
  }
  for (const auto& [a, b, label] : edges) out << "  m" << a << " -> m" << b << " [label=" << quote(label) << "];\n";
  out << "}\n";
  return out.str();
}

std::string synthesis_report(const PlantModel& model, const SynthesisConfig& cfg, const SynthesisOutcome& outcome,
                             bool timing) {
  ojson doc;
  doc["mode"] = to_string(cfg.mode);
  doc["extraction_policy"] = to_string(cfg.extraction);
  doc["size_guard"] = cfg.size_guard;
  doc["solved"] = outcome.solved;
  if (!outcome.solved) doc["message"] = "no solution exists";
  ojson arena;
  arena["before_pruning"] = ojson{{"decision_states", outcome.stats.arena_decision_states},
                                  {"observation_states", outcome.stats.arena_observation_states}};
  arena["after_pruning"] = ojson{{"decision_states", outcome.stats.pruned_decision_states},
                                 {"observation_states", outcome.stats.pruned_observation_states}};
  doc["arena"] = arena;
  ojson rounds = ojson::array();
  for (const auto& r : outcome.prune_rounds)
    rounds.push_back(ojson{{"decision_states", r.decision_states}, {"observation_states", r.observation_states}});
  doc["pruning_iterations"] = outcome.stats.prune_rounds;
  doc["pruned_per_iteration"] = rounds;
  ojson structures = ojson::array();
  for (const auto& s : outcome.structures) {
    ojson choices = ojson::array();
    for (std::size_t d = 0; d < s.structure.decision_states.size(); ++d) {
      const auto& ds = s.structure.decision_states[d];
      choices.push_back(ojson{{"decision_state", d},
                              {"label", decision_label(model, ds.source, ds.event)},
                              {"arena_decision_state", s.arena_decision_state[d]},
                              {"alternatives", outcome.pruned_arena.decision_states[s.arena_decision_state[d]].edges.size()},
                              {"chosen", names(model, ds.decision.enabled())}});
    }
    structures.push_back(ojson{{"decision_states", s.structure.decision_states.size()},
                               {"observation_states", s.structure.observation_states.size()},
                               {"choices", choices}});
  }
  doc["structures"] = structures;
  if (cfg.extraction == ExtractionPolicy::enumerate_all) doc["truncated"] = outcome.truncated;
  if (timing) doc["wall_seconds"] = outcome.stats.wall_seconds;
  return doc.dump(2) + "\n";
}

}  // namespace desopacity
