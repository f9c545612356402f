#ifndef MSE_ADJUST_GRAPH_HPP_
#define MSE_ADJUST_GRAPH_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mse_adjust/node_set.hpp"

namespace mse_adjust {

struct Edge {
  NodeId from;
  NodeId to;
  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

/// Immutable directed acyclic graph over at most 64 labelled nodes.
class Dag {
 public:
  /// Throws std::invalid_argument on cycles, self-loops, duplicate edges,
  /// duplicate or empty labels, or out-of-range endpoints.
  Dag(std::vector<std::string> labels, std::vector<Edge> edges);

  std::size_t size() const { return labels_.size(); }
  NodeSet all_nodes() const { return NodeSet::first_n(size()); }

  const std::string& label(NodeId v) const;
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;
  /// Like find(), but throws std::invalid_argument for unknown labels.
  NodeId index_of(std::string_view label) const;
  NodeSet set_of(std::span<const std::string> labels) const;

  NodeSet parents(NodeId v) const { return parents_.at(v); }
  NodeSet children(NodeId v) const { return children_.at(v); }
  NodeSet neighbours(NodeId v) const { return parents_.at(v) | children_.at(v); }
  bool has_edge(NodeId from, NodeId to) const { return children_.at(from).contains(to); }
  /// Edges sorted by (from, to).
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  /// Strict descendants (a node is not its own descendant).
  NodeSet descendants_of(NodeId v) const { return descendants_.at(v); }
  /// Nodes with a directed path into some member of `targets`, targets included.
  NodeSet ancestors_or_self(NodeSet targets) const;
  const std::vector<NodeId>& topological_order() const { return topo_; }

 private:
  std::vector<std::string> labels_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
  std::vector<NodeSet> descendants_;
  std::vector<NodeId> topo_;
};

/// A DAG with a designated treatment A and outcome Y.
///
/// Construction enforces the edge A -> Y and that no covariate descends from A
/// (all covariates are pre-treatment). The graph G' obtained by dropping A -> Y
/// is produced only by remove_treatment_edge() and carries a flag so that the
/// construction-time A -> Y requirement is not re-applied to it.
class CausalDag : public Dag {
 public:
  CausalDag(Dag dag, NodeId treatment, NodeId outcome);
  CausalDag(std::vector<std::string> labels, std::vector<Edge> edges,
            std::string_view treatment, std::string_view outcome);

  NodeId treatment() const { return treatment_; }
  NodeId outcome() const { return outcome_; }
  /// V \ {A, Y}
  NodeSet covariates() const;
  bool treatment_edge_removed() const { return treatment_edge_removed_; }
  const Dag& dag() const { return *this; }

 private:
  struct DerivedTag {};
  CausalDag(DerivedTag, Dag dag, NodeId treatment, NodeId outcome);
  friend CausalDag remove_treatment_edge(const CausalDag& g);

  NodeId treatment_;
  NodeId outcome_;
  bool treatment_edge_removed_ = false;
};

/// Throws std::invalid_argument unless `k` is a subset of V \ {A, Y}.
void check_adjustment_set(const CausalDag& g, AdjustmentSet k);

/// "W1+O2"; the empty set renders as "{}".
std::string format_set(const Dag& g, NodeSet s);
/// Labels in canonical order.
std::vector<std::string> set_labels(const Dag& g, NodeSet s);
/// Parses "W1+O2", "W1,O2" or "{}" into a node set.
NodeSet parse_set(const Dag& g, std::string_view text);

NodeSet descendants(const Dag& g, NodeId v);

/// G' = G without A -> Y.
CausalDag remove_treatment_edge(const CausalDag& g);

/// Reachability-based d-separation of single nodes x and y given z.
/// Throws std::invalid_argument if x == y or z contains x or y.
bool d_separated(const Dag& g, NodeId x, NodeId y, NodeSet z);

/// Covariate count beyond which quantified queries refuse to run unless forced.
inline constexpr std::size_t kQuantifiedCovariateLimit = 25;

/// True iff some Z with forced_in ⊆ Z ⊆ V \ {A, Y} \ forced_out \ {x, y}
/// d-connects x and y in `gprime`.
///
/// Decided per simple path: a path qualifies when none of its non-colliders is
/// forced in and every collider has itself or a descendant among the allowed
/// conditioning nodes that are not non-colliders of that path. Taking Z as
/// that maximal allowed set then d-connects x and y, and any d-connecting Z
/// yields such a path, so the test is exact.
bool exists_open_given_some_conditioning(const CausalDag& gprime, NodeId x, NodeId y,
                                         NodeSet forced_in, NodeSet forced_out = {},
                                         bool force = false);

bool is_valid_adjustment_set(const CausalDag& g, AdjustmentSet z);

/// Parents of the mediators (outcome included) minus mediators and A.
/// Under the pre-treatment restriction this is Pa(Y) \ {A}.
AdjustmentSet optimal_adjustment_set(const CausalDag& g);

/// Greedy completion of `k` to a valid set: start from all covariates and
/// delete members outside `k` one at a time in ascending index order, sweeping
/// until no single deletion keeps the set valid. Returns the added members
/// (empty when `k` is already valid). One irreducible completion among
/// possibly several.
AdjustmentSet irreducible_completion(const CausalDag& g, AdjustmentSet k);
/// Same, but deletions are attempted in the given order (must list every
/// covariate outside k exactly once).
AdjustmentSet irreducible_completion(const CausalDag& g, AdjustmentSet k,
                                     std::span<const NodeId> deletion_order);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_GRAPH_HPP_
