#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "desopacity/model.hpp"

namespace desopacity {

/// A supervisor S : P_o(L(G)) → Γ, given behaviorally.
class SupervisorPolicy {
 public:
  virtual ~SupervisorPolicy() = default;
  virtual ControlDecision decide(std::span<const EventId> observation) const = 0;
};

/// A policy whose dependence on the observation history factors through a
/// finite memory. Verification of such policies is exact.
class FiniteMemoryPolicy : public SupervisorPolicy {
 public:
  using Memory = std::uint32_t;

  virtual Memory initial_memory() const = 0;
  /// Memory after observing `e`, or nullopt when the policy has no successor
  /// for `e` (e.g. an infeasible observation in a control structure).
  virtual std::optional<Memory> advance(Memory m, EventId e) const = 0;
  virtual ControlDecision decision_at(Memory m) const = 0;

  ControlDecision decide(std::span<const EventId> observation) const override;
};

/// Finite table of observation → decision with a fallback for every other
/// observation. Stored as a trie plus one sink node for unlisted histories.
class TablePolicy final : public FiniteMemoryPolicy {
 public:
  explicit TablePolicy(ControlDecision fallback);

  void set(std::span<const EventId> observation, ControlDecision decision);

  Memory initial_memory() const override { return kRoot; }
  std::optional<Memory> advance(Memory m, EventId e) const override;
  ControlDecision decision_at(Memory m) const override;

  ControlDecision fallback() const { return fallback_; }
  /// Listed entries in trie (canonical) order.
  std::vector<std::pair<EventSequence, ControlDecision>> entries() const;

 private:
  static constexpr Memory kSink = 0;
  static constexpr Memory kRoot = 1;

  struct Node {
    std::map<EventId, Memory> children;
    std::optional<ControlDecision> decision;
  };

  ControlDecision fallback_;
  std::vector<Node> nodes_;
};

/// Adapts an arbitrary callable. Verification of such policies is bounded.
class CallbackPolicy final : public SupervisorPolicy {
 public:
  using Fn = std::function<ControlDecision(std::span<const EventId>)>;
  explicit CallbackPolicy(Fn fn) : fn_(std::move(fn)) {}
  ControlDecision decide(std::span<const EventId> observation) const override { return fn_(observation); }

 private:
  Fn fn_;
};

}  // namespace desopacity
