#include "mse_adjust/classification.hpp"

namespace mse_adjust {

namespace {

NodeSet keys(const std::map<NodeId, NodeId>& m) {
  NodeSet s;
  for (const auto& [v, w] : m) s.insert(v);
  return s;
}

}  // namespace

NodeSet VariableClassification::suboptimal_precision_set() const {
  return keys(suboptimal_precision);
}

NodeSet VariableClassification::suboptimal_confounding_set() const {
  return keys(suboptimal_confounding);
}

NodeSet VariableClassification::retained() const {
  return (extended_confounding - suboptimal_confounding_set()) |
         (precision - suboptimal_precision_set());
}

std::map<NodeId, NodeId> suboptimal_precision(const CausalDag& g,
                                              const VariableClassification& cls, bool force) {
  const CausalDag gp = remove_treatment_edge(g);
  std::map<NodeId, NodeId> out;
  for (NodeId p : cls.precision) {
    for (NodeId witness : cls.precision.without(p)) {
      if (!exists_open_given_some_conditioning(gp, p, g.outcome(), NodeSet{witness}, {}, force)) {
        out.emplace(p, witness);
        break;
      }
    }
  }
  return out;
}

std::map<NodeId, NodeId> suboptimal_confounding(const CausalDag& g,
                                                const VariableClassification& cls, bool force) {
  const CausalDag gp = remove_treatment_edge(g);
  std::map<NodeId, NodeId> out;
  for (NodeId w : cls.extended_confounding) {
    for (NodeId witness : cls.extended_confounding.without(w)) {
      if (exists_open_given_some_conditioning(gp, w, g.outcome(), NodeSet{witness}, {}, force)) {
        continue;
      }
      if (exists_open_given_some_conditioning(gp, witness, g.treatment(), NodeSet{w}, {}, force)) {
        continue;
      }
      out.emplace(w, witness);
      break;
    }
  }
  return out;
}

VariableClassification classify(const CausalDag& g, bool force) {
  const CausalDag gp = remove_treatment_edge(g);
  VariableClassification cls;
  for (NodeId v : g.covariates()) {
    const bool to_y = exists_open_given_some_conditioning(gp, v, g.outcome(), {}, {}, force);
    if (!to_y) {
      cls.irrelevant.insert(v);
      continue;
    }
    const bool to_a = exists_open_given_some_conditioning(gp, v, g.treatment(), {}, {}, force);
    if (to_a) {
      cls.extended_confounding.insert(v);
    } else {
      cls.precision.insert(v);
    }
  }
  cls.suboptimal_precision = suboptimal_precision(g, cls, force);
  cls.suboptimal_confounding = suboptimal_confounding(g, cls, force);
  return cls;
}

}  // namespace mse_adjust
