#ifndef MSE_ADJUST_NODE_SET_HPP_
#define MSE_ADJUST_NODE_SET_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <stdexcept>
#include <vector>

namespace mse_adjust {

/// Dense node index, 0..d-1. Labels live in the owning graph.
using NodeId = std::size_t;

/// A set of nodes of one graph, stored as a 64-bit mask.
///
/// Iteration visits members in ascending index order, which is the canonical
/// order used for equality, hashing and every printed representation.
class NodeSet {
 public:
  static constexpr std::size_t kMaxNodes = 64;

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = NodeId;
    using difference_type = std::ptrdiff_t;
    using pointer = const NodeId*;
    using reference = NodeId;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}

    constexpr NodeId operator*() const {
      return static_cast<NodeId>(std::countr_zero(rest_));
    }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    constexpr bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr NodeSet() = default;
  constexpr explicit NodeSet(std::uint64_t bits) : bits_(bits) {}
  NodeSet(std::initializer_list<NodeId> members) {
    for (NodeId v : members) insert(v);
  }

  template <typename Range>
  static NodeSet of(const Range& members) {
    NodeSet s;
    for (NodeId v : members) s.insert(v);
    return s;
  }

  /// {0, ..., count-1}
  static constexpr NodeSet first_n(std::size_t count) {
    return NodeSet(count >= kMaxNodes ? ~std::uint64_t{0}
                                      : (std::uint64_t{1} << count) - 1);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
  }
  constexpr bool contains(NodeId v) const {
    return v < kMaxNodes && ((bits_ >> v) & 1U) != 0;
  }
  void insert(NodeId v) {
    check(v);
    bits_ |= std::uint64_t{1} << v;
  }
  void erase(NodeId v) {
    check(v);
    bits_ &= ~(std::uint64_t{1} << v);
  }
  NodeSet with(NodeId v) const {
    NodeSet s = *this;
    s.insert(v);
    return s;
  }
  NodeSet without(NodeId v) const {
    NodeSet s = *this;
    s.erase(v);
    return s;
  }

  constexpr bool is_subset_of(NodeSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr bool intersects(NodeSet other) const {
    return (bits_ & other.bits_) != 0;
  }

  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

  std::vector<NodeId> members() const { return {begin(), end()}; }

  /// Position of `v` in the canonical member list.
  std::size_t rank_of(NodeId v) const {
    if (!contains(v)) throw std::invalid_argument("rank_of: node not in set");
    const std::uint64_t below = v == 0 ? 0 : (std::uint64_t{1} << v) - 1;
    return static_cast<std::size_t>(std::popcount(bits_ & below));
  }

  constexpr NodeSet operator|(NodeSet o) const { return NodeSet(bits_ | o.bits_); }
  constexpr NodeSet operator&(NodeSet o) const { return NodeSet(bits_ & o.bits_); }
  /// Set difference.
  constexpr NodeSet operator-(NodeSet o) const { return NodeSet(bits_ & ~o.bits_); }
  NodeSet& operator|=(NodeSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  NodeSet& operator&=(NodeSet o) {
    bits_ &= o.bits_;
    return *this;
  }
  NodeSet& operator-=(NodeSet o) {
    bits_ &= ~o.bits_;
    return *this;
  }
  constexpr bool operator==(const NodeSet&) const = default;

 private:
  static void check(NodeId v) {
    if (v >= kMaxNodes) throw std::out_of_range("node index exceeds NodeSet capacity");
  }

  std::uint64_t bits_ = 0;
};

/// Adjustment sets are node sets drawn from the covariates; see
/// `check_adjustment_set` in graph.hpp for the membership contract.
using AdjustmentSet = NodeSet;

/// Lexicographic order of the canonical member lists: {} < {0} < {0,1} < {1}.
inline bool lex_less(NodeSet a, NodeSet b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (*ia != *ib) return *ia < *ib;
  }
  return ia == a.end() && ib != b.end();
}

struct LexLess {
  bool operator()(NodeSet a, NodeSet b) const { return lex_less(a, b); }
};

/// Every subset of `universe`, ordered lexicographically.
std::vector<NodeSet> subsets_lexicographic(NodeSet universe);

}  // namespace mse_adjust

template <>
struct std::hash<mse_adjust::NodeSet> {
  std::size_t operator()(const mse_adjust::NodeSet& s) const noexcept {
    return std::hash<std::uint64_t>{}(s.bits());
  }
};

#endif  // MSE_ADJUST_NODE_SET_HPP_
