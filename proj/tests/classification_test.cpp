#include <random>

#include "doctest.h"
#include "mse_adjust/classification.hpp"
#include "mse_adjust/presets.hpp"
#include "oracles.hpp"

using namespace mse_adjust;

namespace {

NodeSet set_of(const Dag& g, std::initializer_list<const char*> labels) {
  NodeSet s;
  for (const char* l : labels) s.insert(g.index_of(l));
  return s;
}

void check_same(const VariableClassification& a, const VariableClassification& b) {
  CHECK(a.precision == b.precision);
  CHECK(a.extended_confounding == b.extended_confounding);
  CHECK(a.irrelevant == b.irrelevant);
  CHECK(a.suboptimal_precision == b.suboptimal_precision);
  CHECK(a.suboptimal_confounding == b.suboptimal_confounding);
}

}  // namespace

TEST_CASE("nine-covariate example") {
  const CausalDag g = preset_scm("g3-demo").dag();
  const VariableClassification cls = classify(g);
  CHECK(cls.irrelevant == set_of(g, {"I1"}));
  CHECK(cls.precision == set_of(g, {"O2", "O3", "O4", "S2", "S3", "P1"}));
  CHECK(cls.extended_confounding == set_of(g, {"S1", "O1"}));
  const NodeId o2 = g.index_of("O2");
  CHECK(cls.suboptimal_precision ==
        std::map<NodeId, NodeId>{{g.index_of("S2"), o2}, {g.index_of("S3"), o2}});
  CHECK_FALSE(cls.suboptimal_precision.contains(g.index_of("P1")));
  CHECK(cls.suboptimal_confounding ==
        std::map<NodeId, NodeId>{{g.index_of("S1"), g.index_of("O1")}});
}

TEST_CASE("confounder example with two routes into A") {
  const CausalDag g = preset_scm("m1").dag();
  const VariableClassification cls = classify(g);
  CHECK(cls.extended_confounding == set_of(g, {"W1", "W2", "O1", "O2"}));
  CHECK(cls.precision.empty());
  CHECK(cls.irrelevant.empty());
  // The path O1 <- W2 -> A stays open given W1.
  CHECK_FALSE(cls.suboptimal_confounding.contains(g.index_of("W1")));
  check_same(cls, oracle::classify_by_enumeration(g));
}

TEST_CASE("collider example") {
  const CausalDag g = preset_scm("m2").dag();
  const VariableClassification cls = classify(g);
  CHECK(cls.suboptimal_confounding ==
        std::map<NodeId, NodeId>{{g.index_of("W1"), g.index_of("O1")}});
  check_same(cls, oracle::classify_by_enumeration(g));
}

TEST_CASE("a lone precision variable has no witness") {
  const CausalDag g({"A", "Y", "P"}, {{0, 1}, {2, 1}}, "A", "Y");
  const VariableClassification cls = classify(g);
  CHECK(cls.precision == NodeSet{2});
  CHECK(cls.suboptimal_precision.empty());
}

TEST_CASE("classification properties on random DAGs") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 80; ++rep) {
    const CausalDag g = oracle::random_causal_dag(rng, 1 + rep % 5, 0.4);
    const VariableClassification cls = classify(g);
    CHECK((cls.precision | cls.extended_confounding | cls.irrelevant) == g.covariates());
    CHECK_FALSE(cls.precision.intersects(cls.extended_confounding));
    CHECK_FALSE(cls.precision.intersects(cls.irrelevant));
    CHECK_FALSE(cls.extended_confounding.intersects(cls.irrelevant));
    CHECK(cls.suboptimal_precision_set().is_subset_of(cls.precision));
    CHECK(cls.suboptimal_confounding_set().is_subset_of(cls.extended_confounding));
    check_same(cls, oracle::classify_by_enumeration(g));

    // Witnesses re-checked directly against the definitions.
    const CausalDag gp = remove_treatment_edge(g);
    for (const auto& [p, w] : cls.suboptimal_precision) {
      CHECK_FALSE(oracle::exists_open_by_enumeration(gp, p, g.outcome(), NodeSet{w}));
    }
    for (const auto& [v, w] : cls.suboptimal_confounding) {
      CHECK_FALSE(oracle::exists_open_by_enumeration(gp, v, g.outcome(), NodeSet{w}));
      CHECK_FALSE(oracle::exists_open_by_enumeration(gp, w, g.treatment(), NodeSet{v}));
    }
  }
}
