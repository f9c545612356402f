#include "mse_adjust/graph.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "mse_adjust/errors.hpp"

namespace mse_adjust {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

NodeId label_index(const std::vector<std::string>& labels, std::string_view l) {
  auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) throw std::invalid_argument("unknown node '" + std::string(l) + "'");
  return static_cast<NodeId>(it - labels.begin());
}

}  // namespace

Dag::Dag(std::vector<std::string> labels, std::vector<Edge> edges)
    : labels_(std::move(labels)) {
  const std::size_t d = labels_.size();
  if (d == 0) throw std::invalid_argument("graph has no nodes");
  if (d > NodeSet::kMaxNodes) {
    throw std::invalid_argument("graph has " + std::to_string(d) + " nodes; at most " +
                                std::to_string(NodeSet::kMaxNodes) + " are supported");
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw std::invalid_argument("empty node label");
    if (!seen.insert(l).second) throw std::invalid_argument("duplicate node label '" + l + "'");
  }

  parents_.assign(d, NodeSet{});
  children_.assign(d, NodeSet{});
  for (const Edge& e : edges) {
    if (e.from >= d || e.to >= d) throw std::invalid_argument("edge endpoint out of range");
    if (e.from == e.to) throw std::invalid_argument("self-loop on '" + labels_[e.from] + "'");
    if (children_[e.from].contains(e.to)) {
      throw std::invalid_argument("duplicate edge " + labels_[e.from] + " -> " + labels_[e.to]);
    }
    children_[e.from].insert(e.to);
    parents_[e.to].insert(e.from);
  }

  // Kahn's algorithm, always releasing the smallest ready index.
  std::vector<std::size_t> indeg(d);
  for (std::size_t v = 0; v < d; ++v) indeg[v] = parents_[v].size();
  NodeSet ready;
  for (std::size_t v = 0; v < d; ++v) {
    if (indeg[v] == 0) ready.insert(v);
  }
  while (!ready.empty()) {
    const NodeId v = *ready.begin();
    ready.erase(v);
    topo_.push_back(v);
    for (NodeId c : children_[v]) {
      if (--indeg[c] == 0) ready.insert(c);
    }
  }
  if (topo_.size() != d) throw std::invalid_argument("graph contains a directed cycle");

  descendants_.assign(d, NodeSet{});
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    for (NodeId c : children_[*it]) descendants_[*it] |= descendants_[c].with(c);
  }
}

const std::string& Dag::label(NodeId v) const {
  if (v >= labels_.size()) throw std::invalid_argument("unknown node id " + std::to_string(v));
  return labels_[v];
}

std::optional<NodeId> Dag::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  return std::nullopt;
}

NodeId Dag::index_of(std::string_view label) const {
  auto v = find(label);
  if (!v) throw std::invalid_argument("unknown node '" + std::string(label) + "'");
  return *v;
}

NodeSet Dag::set_of(std::span<const std::string> labels) const {
  NodeSet s;
  for (const auto& l : labels) s.insert(index_of(l));
  return s;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (std::size_t v = 0; v < size(); ++v) {
    for (NodeId c : children_[v]) out.push_back({v, c});
  }
  return out;
}

std::size_t Dag::edge_count() const {
  std::size_t m = 0;
  for (const auto& c : children_) m += c.size();
  return m;
}

NodeSet Dag::ancestors_or_self(NodeSet targets) const {
  NodeSet out = targets;
  for (auto it = topo_.rbegin(); it != topo_.rend(); ++it) {
    if (out.contains(*it)) out |= parents_[*it];
  }
  return out;
}

CausalDag::CausalDag(Dag dag, NodeId treatment, NodeId outcome)
    : Dag(std::move(dag)), treatment_(treatment), outcome_(outcome) {
  if (treatment_ >= size() || outcome_ >= size()) {
    throw std::invalid_argument("treatment or outcome is not a node of the graph");
  }
  if (treatment_ == outcome_) throw std::invalid_argument("treatment and outcome coincide");
  if (!has_edge(treatment_, outcome_)) {
    throw std::invalid_argument("graph lacks the edge " + label(treatment_) + " -> " +
                                label(outcome_));
  }
  const NodeSet post = descendants_of(treatment_).without(outcome_);
  if (!post.empty()) {
    throw std::invalid_argument("covariates must not descend from the treatment; offending: " +
                                format_set(*this, post));
  }
}

CausalDag::CausalDag(std::vector<std::string> labels, std::vector<Edge> edges,
                     std::string_view treatment, std::string_view outcome)
    : CausalDag(Dag(labels, std::move(edges)), label_index(labels, treatment),
                label_index(labels, outcome)) {}

CausalDag::CausalDag(DerivedTag, Dag dag, NodeId treatment, NodeId outcome)
    : Dag(std::move(dag)),
      treatment_(treatment),
      outcome_(outcome),
      treatment_edge_removed_(true) {}

NodeSet CausalDag::covariates() const {
  return all_nodes().without(treatment_).without(outcome_);
}

void check_adjustment_set(const CausalDag& g, AdjustmentSet k) {
  if (!k.is_subset_of(g.all_nodes())) {
    throw std::invalid_argument("adjustment set refers to nodes outside the graph");
  }
  if (k.contains(g.treatment()) || k.contains(g.outcome())) {
    throw std::invalid_argument("adjustment set must not contain the treatment or the outcome");
  }
}

std::string format_set(const Dag& g, NodeSet s) {
  if (s.empty()) return "{}";
  std::string out;
  for (NodeId v : s) {
    if (!out.empty()) out += '+';
    out += g.label(v);
  }
  return out;
}

std::vector<std::string> set_labels(const Dag& g, NodeSet s) {
  std::vector<std::string> out;
  for (NodeId v : s) out.push_back(g.label(v));
  return out;
}

NodeSet parse_set(const Dag& g, std::string_view text) {
  const std::string t = trim(text);
  if (t.empty() || t == "{}") return {};
  NodeSet s;
  std::string token;
  for (char c : t) {
    if (c == '+' || c == ',') {
      s.insert(g.index_of(trim(token)));
      token.clear();
    } else {
      token += c;
    }
  }
  s.insert(g.index_of(trim(token)));
  return s;
}

NodeSet descendants(const Dag& g, NodeId v) {
  if (v >= g.size()) throw std::invalid_argument("unknown node id " + std::to_string(v));
  return g.descendants_of(v);
}

CausalDag remove_treatment_edge(const CausalDag& g) {
  if (g.treatment_edge_removed()) return g;
  std::vector<Edge> edges = g.edges();
  std::erase(edges, Edge{g.treatment(), g.outcome()});
  return CausalDag(CausalDag::DerivedTag{}, Dag(g.labels(), std::move(edges)), g.treatment(),
                   g.outcome());
}

bool d_separated(const Dag& g, NodeId x, NodeId y, NodeSet z) {
  if (x >= g.size() || y >= g.size()) throw std::invalid_argument("unknown node id");
  if (x == y) throw std::invalid_argument("d_separated: x and y must differ");
  if (z.contains(x) || z.contains(y)) {
    throw std::invalid_argument("d_separated: conditioning set contains an endpoint");
  }
  if (!z.is_subset_of(g.all_nodes())) throw std::invalid_argument("unknown node in conditioning set");

  // Bayes-ball: a state is a node plus whether it was entered from a child
  // (travelling up) or from a parent (travelling down).
  const NodeSet anc_z = g.ancestors_or_self(z);
  NodeSet seen_up;
  NodeSet seen_down;
  std::vector<std::pair<NodeId, bool>> stack{{x, true}};
  while (!stack.empty()) {
    auto [v, up] = stack.back();
    stack.pop_back();
    NodeSet& seen = up ? seen_up : seen_down;
    if (seen.contains(v)) continue;
    seen.insert(v);
    if (v == y) return false;
    if (up) {
      if (z.contains(v)) continue;
      for (NodeId p : g.parents(v)) stack.emplace_back(p, true);
      for (NodeId c : g.children(v)) stack.emplace_back(c, false);
    } else {
      if (!z.contains(v)) {
        for (NodeId c : g.children(v)) stack.emplace_back(c, false);
      }
      if (anc_z.contains(v)) {
        for (NodeId p : g.parents(v)) stack.emplace_back(p, true);
      }
    }
  }
  return true;
}

namespace {

// Depth-first search over simple paths for the quantified query.
class OpenPathSearch {
 public:
  OpenPathSearch(const Dag& g, NodeId y, NodeSet forced_in, NodeSet allowed)
      : g_(g), y_(y), forced_in_(forced_in), allowed_(allowed) {
    desc_or_self_allowed_.resize(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
      desc_or_self_allowed_[v] = g.descendants_of(v).with(v) & allowed_;
    }
  }

  bool run(NodeId x) {
    path_.assign(1, x);
    on_path_ = NodeSet{x};
    return extend();
  }

 private:
  bool extend() {
    const NodeId cur = path_.back();
    for (NodeId next : g_.neighbours(cur)) {
      if (on_path_.contains(next)) continue;
      // With `next` fixed, `cur` (if interior) gets its collider status.
      NodeSet colliders = colliders_;
      NodeSet noncolliders = noncolliders_;
      if (path_.size() >= 2) {
        const NodeId prev = path_[path_.size() - 2];
        const bool collider = g_.has_edge(prev, cur) && g_.has_edge(next, cur);
        if (collider) {
          if (desc_or_self_allowed_[cur].empty()) continue;
          colliders.insert(cur);
        } else {
          if (forced_in_.contains(cur)) continue;
          noncolliders.insert(cur);
        }
      }
      if (next == y_) {
        if (colliders_open(colliders, noncolliders)) return true;
        continue;
      }
      const NodeSet saved_c = colliders_;
      const NodeSet saved_nc = noncolliders_;
      colliders_ = colliders;
      noncolliders_ = noncolliders;
      path_.push_back(next);
      on_path_.insert(next);
      const bool found = extend();
      path_.pop_back();
      on_path_.erase(next);
      colliders_ = saved_c;
      noncolliders_ = saved_nc;
      if (found) return true;
    }
    return false;
  }

  bool colliders_open(NodeSet colliders, NodeSet noncolliders) const {
    for (NodeId c : colliders) {
      if ((desc_or_self_allowed_[c] - noncolliders).empty()) return false;
    }
    return true;
  }

  const Dag& g_;
  NodeId y_;
  NodeSet forced_in_;
  NodeSet allowed_;
  std::vector<NodeSet> desc_or_self_allowed_;
  std::vector<NodeId> path_;
  NodeSet on_path_;
  NodeSet colliders_;
  NodeSet noncolliders_;
};

}  // namespace

bool exists_open_given_some_conditioning(const CausalDag& gprime, NodeId x, NodeId y,
                                         NodeSet forced_in, NodeSet forced_out, bool force) {
  if (!gprime.treatment_edge_removed()) {
    throw std::invalid_argument("quantified query expects the graph without the treatment edge");
  }
  if (x >= gprime.size() || y >= gprime.size()) throw std::invalid_argument("unknown node id");
  if (x == y) throw std::invalid_argument("quantified query: x and y must differ");
  if (!forced_in.is_subset_of(gprime.covariates())) {
    throw std::invalid_argument("forced-in nodes must be covariates");
  }
  if (forced_in.contains(x) || forced_in.contains(y)) {
    throw std::invalid_argument("forced-in nodes must not include the endpoints");
  }
  if (forced_in.intersects(forced_out)) {
    throw std::invalid_argument("a node cannot be both forced in and forced out");
  }
  const std::size_t ncov = gprime.covariates().size();
  if (ncov > kQuantifiedCovariateLimit && !force) {
    throw EnumerationLimitError("graph has " + std::to_string(ncov) +
                                " covariates; quantified d-separation is limited to " +
                                std::to_string(kQuantifiedCovariateLimit) +
                                " (use --force to override)");
  }
  // Pre-treatment covariates leave A and Y as sinks of G', so neither can
  // serve as a conditioned descendant of a collider.
  if (!gprime.descendants_of(gprime.treatment()).empty() ||
      !gprime.descendants_of(gprime.outcome()).empty()) {
    throw std::logic_error("treatment or outcome has descendants in the derived graph");
  }
  const NodeSet allowed =
      gprime.covariates() - forced_out - NodeSet{x} - NodeSet{y};
  OpenPathSearch search(gprime, y, forced_in, allowed);
  return search.run(x);
}

bool is_valid_adjustment_set(const CausalDag& g, AdjustmentSet z) {
  check_adjustment_set(g, z);
  const CausalDag gp = remove_treatment_edge(g);
  return d_separated(gp, g.treatment(), g.outcome(), z);
}

AdjustmentSet optimal_adjustment_set(const CausalDag& g) {
  const NodeId a = g.treatment();
  // Mediators: nodes other than A on a directed path from A to Y, Y included.
  NodeSet mediators = g.descendants_of(a) & g.ancestors_or_self(NodeSet{g.outcome()});
  NodeSet parents;
  for (NodeId m : mediators) parents |= g.parents(m);
  return parents - mediators - NodeSet{a};
}

AdjustmentSet irreducible_completion(const CausalDag& g, AdjustmentSet k) {
  const std::vector<NodeId> order = (g.covariates() - k).members();
  return irreducible_completion(g, k, order);
}

AdjustmentSet irreducible_completion(const CausalDag& g, AdjustmentSet k,
                                     std::span<const NodeId> deletion_order) {
  check_adjustment_set(g, k);
  const NodeSet rest = g.covariates() - k;
  if (NodeSet::of(deletion_order) != rest || deletion_order.size() != rest.size()) {
    throw std::invalid_argument("deletion order must list every covariate outside k once");
  }
  if (is_valid_adjustment_set(g, k)) return {};
  const CausalDag gp = remove_treatment_edge(g);
  NodeSet z = g.covariates();
  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId v : deletion_order) {
      if (!z.contains(v)) continue;
      if (d_separated(gp, g.treatment(), g.outcome(), z.without(v))) {
        z.erase(v);
        changed = true;
      }
    }
  }
  return z - k;
}

}  // namespace mse_adjust
