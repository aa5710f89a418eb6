#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iterator>

namespace desopacity {

using StateId = std::uint32_t;
using EventId = std::uint32_t;

inline constexpr std::size_t kMaxIndex = 64;

/// Fixed-width set of dense indices in [0, 64). Iteration is in increasing
/// index order, which is the canonical (document) order of states/events.
template <class Tag>
class IndexSet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = std::uint32_t;
    using difference_type = std::ptrdiff_t;
    using pointer = const std::uint32_t*;
    using reference = std::uint32_t;

    iterator() = default;
    explicit iterator(std::uint64_t rest) : rest_(rest) {}
    std::uint32_t operator*() const { return static_cast<std::uint32_t>(std::countr_zero(rest_)); }
    iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr IndexSet() = default;
  constexpr explicit IndexSet(std::uint64_t bits) : bits_(bits) {}
  IndexSet(std::initializer_list<std::uint32_t> members) {
    for (auto m : members) insert(m);
  }

  static constexpr IndexSet full(std::size_t n) {
    return IndexSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }
  static constexpr IndexSet singleton(std::uint32_t i) { return IndexSet(std::uint64_t{1} << i); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(std::uint32_t i) const { return (bits_ >> i) & 1U; }
  constexpr void insert(std::uint32_t i) { bits_ |= std::uint64_t{1} << i; }
  constexpr void erase(std::uint32_t i) { bits_ &= ~(std::uint64_t{1} << i); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool subset_of(IndexSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(IndexSet other) const { return (bits_ & other.bits_) != 0; }

  iterator begin() const { return iterator(bits_); }
  iterator end() const { return iterator(0); }

  constexpr IndexSet operator|(IndexSet o) const { return IndexSet(bits_ | o.bits_); }
  constexpr IndexSet operator&(IndexSet o) const { return IndexSet(bits_ & o.bits_); }
  constexpr IndexSet operator-(IndexSet o) const { return IndexSet(bits_ & ~o.bits_); }
  constexpr IndexSet& operator|=(IndexSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr IndexSet& operator&=(IndexSet o) {
    bits_ &= o.bits_;
    return *this;
  }

  constexpr bool operator==(const IndexSet&) const = default;
  constexpr auto operator<=>(const IndexSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

struct StateTag {};
struct EventTag {};

using StateSet = IndexSet<StateTag>;
using EventSet = IndexSet<EventTag>;

}  // namespace desopacity

template <class Tag>
struct std::hash<desopacity::IndexSet<Tag>> {
  std::size_t operator()(const desopacity::IndexSet<Tag>& s) const noexcept {
    return std::hash<std::uint64_t>{}(s.bits());
  }
};
