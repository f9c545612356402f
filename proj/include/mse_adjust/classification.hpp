#ifndef MSE_ADJUST_CLASSIFICATION_HPP_
#define MSE_ADJUST_CLASSIFICATION_HPP_

#include <map>

#include "mse_adjust/graph.hpp"

namespace mse_adjust {

/// Partition of the covariates by how they can be d-connected to A and Y in
/// G' under some conditioning set, plus the suboptimal subsets with the
/// lowest-index witness for each flagged variable.
struct VariableClassification {
  NodeSet precision;
  NodeSet extended_confounding;
  NodeSet irrelevant;
  std::map<NodeId, NodeId> suboptimal_precision;    // variable -> witness
  std::map<NodeId, NodeId> suboptimal_confounding;  // variable -> witness

  NodeSet suboptimal_precision_set() const;
  NodeSet suboptimal_confounding_set() const;
  /// (W \ S^W) ∪ (P \ S^P)
  NodeSet retained() const;
};

/// Full classification including both suboptimality flags.
VariableClassification classify(const CausalDag& g, bool force = false);

/// P in the precision set is flagged when some other precision variable P*
/// blocks every path from P to Y in G' whatever else is conditioned on.
std::map<NodeId, NodeId> suboptimal_precision(const CausalDag& g,
                                              const VariableClassification& cls,
                                              bool force = false);

/// W is flagged when some other extended confounder W* separates W from Y
/// and W separates W* from A, each for every additional conditioning set.
std::map<NodeId, NodeId> suboptimal_confounding(const CausalDag& g,
                                                const VariableClassification& cls,
                                                bool force = false);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_CLASSIFICATION_HPP_
