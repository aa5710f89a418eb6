#include "desopacity/policy.hpp"

#include <functional>

#include "desopacity/error.hpp"

namespace desopacity {

ControlDecision FiniteMemoryPolicy::decide(std::span<const EventId> observation) const {
  Memory m = initial_memory();
  for (std::size_t i = 0; i < observation.size(); ++i) {
    auto next = advance(m, observation[i]);
    if (!next) throw PreconditionError("policy undefined after observation position " + std::to_string(i + 1));
    m = *next;
  }
  return decision_at(m);
}

TablePolicy::TablePolicy(ControlDecision fallback) : fallback_(fallback), nodes_(2) {}

void TablePolicy::set(std::span<const EventId> observation, ControlDecision decision) {
  Memory m = kRoot;
  for (auto e : observation) {
    auto it = nodes_[m].children.find(e);
    if (it == nodes_[m].children.end()) {
      const auto fresh = static_cast<Memory>(nodes_.size());
      nodes_[m].children.emplace(e, fresh);
      nodes_.emplace_back();
      m = fresh;
    } else {
      m = it->second;
    }
  }
  nodes_[m].decision = decision;
}

std::optional<FiniteMemoryPolicy::Memory> TablePolicy::advance(Memory m, EventId e) const {
  if (m == kSink) return kSink;
  auto it = nodes_.at(m).children.find(e);
  return it == nodes_[m].children.end() ? kSink : it->second;
}

ControlDecision TablePolicy::decision_at(Memory m) const {
  if (m == kSink) return fallback_;
  return nodes_.at(m).decision.value_or(fallback_);
}

std::vector<std::pair<EventSequence, ControlDecision>> TablePolicy::entries() const {
  std::vector<std::pair<EventSequence, ControlDecision>> out;
  EventSequence path;
  std::function<void(Memory)> walk = [&](Memory m) {
    if (nodes_[m].decision) out.emplace_back(path, *nodes_[m].decision);
    for (const auto& [e, child] : nodes_[m].children) {
      path.push_back(e);
      walk(child);
      path.pop_back();
    }
  };
  walk(kRoot);
  return out;
}

}  // namespace desopacity
