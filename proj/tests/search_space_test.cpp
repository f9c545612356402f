#include <algorithm>
#include <random>

#include "doctest.h"
#include "mse_adjust/errors.hpp"
#include "mse_adjust/presets.hpp"
#include "mse_adjust/search_space.hpp"
#include "oracles.hpp"

using namespace mse_adjust;

namespace {

NodeSet set_of(const Dag& g, std::initializer_list<const char*> labels) {
  NodeSet s;
  for (const char* l : labels) s.insert(g.index_of(l));
  return s;
}

std::vector<NodeSet> sorted(std::vector<NodeSet> v) {
  std::sort(v.begin(), v.end(), LexLess{});
  return v;
}

void check_space_invariants(const CausalDag& g, const VariableClassification& cls,
                            const CandidateSpace& space, bool equal_size) {
  CHECK(std::is_sorted(space.candidates.begin(), space.candidates.end(), LexLess{}));
  CHECK(std::adjacent_find(space.candidates.begin(), space.candidates.end()) ==
        space.candidates.end());
  CHECK(space.contains(optimal_adjustment_set(g)));
  const NodeSet banned =
      cls.irrelevant | cls.suboptimal_precision_set() | cls.suboptimal_confounding_set();
  const AdjustmentSet o = optimal_adjustment_set(g);
  for (AdjustmentSet s : space.candidates) {
    if (s == o) continue;
    CHECK_FALSE(s.intersects(banned));
    CHECK_FALSE(is_forbidden_combination(g, s));
  }
  for (NodeSet s : subsets_lexicographic(g.covariates())) {
    if (s == o || !is_valid_adjustment_set(g, s)) continue;
    if (s.size() > o.size() || (equal_size && s.size() == o.size())) {
      CHECK_FALSE(space.contains(s));
    }
  }
}

LinearGaussianScm g3_with_outcome_weight(double w) {
  std::vector<WeightedEdge> edges{{"A", "Y", 1.0},  {"S1", "O1", 1.0}, {"O1", "Y", 1.0},
                                  {"S1", "A", 1.0}, {"O2", "Y", w},    {"S2", "O2", 0.5},
                                  {"S3", "O2", 0.5}, {"P1", "O3", 1.0}, {"O3", "Y", 0.5},
                                  {"P1", "O4", 1.0}, {"O4", "Y", 0.5},  {"I1", "A", 1.0}};
  std::vector<std::string> nodes{"A", "Y", "S1", "O1", "O2", "S2", "S3", "P1", "O3", "O4", "I1"};
  return LinearGaussianScm::from_edges(nodes, edges, "A", "Y", std::vector<double>(11, 1.0));
}

}  // namespace

TEST_CASE("candidate space of the two-route confounder example") {
  const CausalDag g = preset_scm("m1").dag();
  const CandidateSpace space = build_candidate_space(g);
  CHECK(space.full_space_size == 16);
  const std::vector<NodeSet> expected = sorted(
      {{}, set_of(g, {"O1"}), set_of(g, {"O2"}), set_of(g, {"W1", "O2"}), set_of(g, {"W2", "O2"}),
       set_of(g, {"W1"}), set_of(g, {"W2"}), set_of(g, {"W1", "W2"}), set_of(g, {"O1", "O2"})});
  CHECK(space.candidates == expected);
  bool logged = false;
  for (const auto& e : space.pruning_log) {
    if (e.rule == PruneRule::kSuboptimalValid && e.excluded == set_of(g, {"W1", "W2", "O2"})) {
      logged = true;
    }
    if (e.rule == PruneRule::kForbiddenCombination) {
      CHECK((e.justification == set_of(g, {"W1", "O1"}) ||
             e.justification == set_of(g, {"W2", "O1"})));
    }
  }
  CHECK(logged);
  check_space_invariants(g, classify(g), space, false);
}

TEST_CASE("candidate space of the collider example") {
  const CausalDag g = preset_scm("m2").dag();
  const CandidateSpace space = build_candidate_space(g);
  const std::vector<NodeSet> expected =
      sorted({{}, set_of(g, {"O1"}), set_of(g, {"O2"}), set_of(g, {"C1"}),
              set_of(g, {"C1", "O2"}), set_of(g, {"O1", "O2"})});
  CHECK(space.candidates == expected);
  check_space_invariants(g, classify(g), space, false);
}

TEST_CASE("candidate space of the nine-covariate example") {
  const CausalDag g = preset_scm("g3-demo").dag();
  const VariableClassification cls = classify(g);
  const CandidateSpace space = build_candidate_space(g, cls);
  CHECK(space.full_space_size == 512);
  CHECK(space.candidates.size() == 28);
  const NodeSet combo = set_of(g, {"P1", "O3", "O4"});
  for (AdjustmentSet s : space.candidates) CHECK_FALSE(combo.is_subset_of(s));
  check_space_invariants(g, cls, space, false);

  // Dropping equal-size valid sets as well removes O1+O2+P1+O3 and O1+O2+P1+O4.
  CandidateSpaceOptions opts;
  opts.prune_equal_size_valid_sets = true;
  const CandidateSpace strict = build_candidate_space(g, cls, opts);
  CHECK(strict.candidates.size() == 26);
  CHECK_FALSE(strict.contains(set_of(g, {"O1", "O2", "P1", "O3"})));
  check_space_invariants(g, cls, strict, true);
}

TEST_CASE("candidate space invariants on random DAGs") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 60; ++rep) {
    const CausalDag g = oracle::random_causal_dag(rng, 1 + rep % 6, 0.4);
    const VariableClassification cls = classify(g);
    check_space_invariants(g, cls, build_candidate_space(g, cls), false);
    CandidateSpaceOptions opts;
    opts.prune_equal_size_valid_sets = true;
    check_space_invariants(g, cls, build_candidate_space(g, cls, opts), true);
  }
}

TEST_CASE("exact MSE-optimal set") {
  const LinearGaussianScm m = preset_scm("m1");
  const CausalDag& g = m.dag();
  const CandidateSpace space = build_candidate_space(g);
  CHECK(mse_optimal_set(m, space, 50).set == set_of(g, {"O1"}));
  CHECK(mse_optimal_set(m, space, 1000).set == set_of(g, {"W2"}));
  CHECK_THROWS_AS(mse_optimal_set(m, space, 3), SampleSizeTooSmallError);
  const MseOptimum small = mse_optimal_set(m, space, 5);
  CHECK_FALSE(small.skipped.empty());

  // Strong confounding: only the valid set survives at large n.
  const auto c = LinearGaussianScm::from_edges(
      {"A", "Y", "W"}, {{"A", "Y", 1.0}, {"W", "A", 10.0}, {"W", "Y", 10.0}}, "A", "Y",
      {1.0, 1.0, 1.0});
  CHECK(mse_optimal_set(c, build_candidate_space(c.dag()), 100000).set == NodeSet{2});
}

TEST_CASE("ties go to the smaller set, then lexicographic order") {
  // At n = 100 the singletons tie at (95/96)/96 and the pair is worse.
  const double single = (95.0 / 96.0) / 96.0;
  std::vector<SetProfile> p{{NodeSet{2, 3}, 0.0, 1.0}, {NodeSet{3}, 0.0, 95.0 / 96.0},
                            {NodeSet{2}, 0.0, 95.0 / 96.0}};
  MseOptimum r = mse_optimal_set(p, 100);
  CHECK(r.set == NodeSet{2});
  CHECK(r.argmin == std::vector<NodeSet>{NodeSet{2}, NodeSet{3}});

  p.push_back({NodeSet{}, 0.0, single * 97.0});
  r = mse_optimal_set(p, 100);
  CHECK(r.set == NodeSet{});
  CHECK(r.argmin.size() == 3);
}

TEST_CASE("sample-size criterion") {
  const LinearGaussianScm m = preset_scm("m1");
  const CausalDag& g = m.dag();
  const AdjustmentSet o = optimal_adjustment_set(g);
  const CriterionResult r = sample_size_criterion(m, set_of(g, {"O1"}), o, 100);
  CHECK(r.k_better);
  CHECK(r.branch == CriterionBranch::kSampleSizeBound);
  CHECK(r.bound.has_value());
  const CriterionResult same = sample_size_criterion(m, o, o, 100);
  CHECK_FALSE(same.k_better);
  CHECK(same.branch == CriterionBranch::kEqualBias);
  CHECK(sample_size_criterion(m, o, set_of(g, {"O1"}), 100).branch ==
        CriterionBranch::kDirectComparison);
  CHECK_THROWS_AS(sample_size_criterion(m, o, o, 5), SampleSizeTooSmallError);
}

TEST_CASE("sample-size criterion agrees with direct comparison on random SCMs") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const CausalDag g = oracle::random_causal_dag(rng, 2 + rep % 4, 0.5);
    const LinearGaussianScm m = oracle::random_scm(rng, g);
    const auto subsets = subsets_lexicographic(g.covariates());
    std::uniform_int_distribution<std::size_t> pick(0, subsets.size() - 1);
    for (int t = 0; t < 4; ++t) {
      const SetProfile k = profile(m, subsets[pick(rng)]);
      const SetProfile l = profile(m, subsets[pick(rng)]);
      const long long start = static_cast<long long>(std::max(k.set.size(), l.set.size())) + 4;
      for (long long n = start; n <= 10000; ++n) {
        const CriterionResult r = sample_size_criterion(k, l, n);
        if (r.k_better != (k.mse(n) < l.mse(n))) {
          FAIL("criterion disagrees at n = " << n);
        }
      }
    }
  }
}

TEST_CASE("crossover sample size") {
  const LinearGaussianScm m = preset_scm("m1");
  const CausalDag& g = m.dag();
  const auto n = crossover_n(m, set_of(g, {"O1"}), set_of(g, {"W2"}));
  REQUIRE(n.has_value());
  CHECK(*n > 500);
  CHECK(*n <= 1000);
  CHECK_FALSE(crossover_n(m, set_of(g, {"O1"}), set_of(g, {"O1"})).has_value());

  const LinearGaussianScm ce = preset_scm("counterexample");
  CHECK_FALSE(crossover_n(ce, {}, optimal_adjustment_set(ce.dag())).has_value());
}

TEST_CASE("the exact winner changes only at crossover points") {
  for (const char* name : {"m1", "m2"}) {
    const LinearGaussianScm m = preset_scm(name);
    const std::vector<SetProfile> p = profiles(m, build_candidate_space(m.dag()).candidates);
    auto find = [&](AdjustmentSet s) {
      return *std::find_if(p.begin(), p.end(), [&](const SetProfile& x) { return x.set == s; });
    };
    AdjustmentSet prev = mse_optimal_set(p, 6).set;
    for (long long n = 7; n <= 3000; ++n) {
      const AdjustmentSet cur = mse_optimal_set(p, n).set;
      if (cur != prev) {
        const auto points = crossover_points(find(prev), find(cur), 3000);
        CHECK(std::find(points.begin(), points.end(), n) != points.end());
      }
      prev = cur;
    }
  }
}

TEST_CASE("precision inclusion condition") {
  const auto flat = LinearGaussianScm::from_edges(
      {"A", "Y", "P"}, {{"A", "Y", 1.0}, {"P", "Y", 0.0}}, "A", "Y", {1.0, 1.0, 1.0});
  for (long long n = 5; n < 2000; n += 7) CHECK_FALSE(precision_inclusion(flat, {}, NodeSet{2}, n));

  const LinearGaussianScm strong = g3_with_outcome_weight(3.0);
  const NodeSet o2{strong.dag().index_of("O2")};
  CHECK(precision_inclusion(strong, {}, o2, 1000));
  const LinearGaussianScm weak = g3_with_outcome_weight(0.05);
  CHECK_FALSE(precision_inclusion(weak, {}, o2, 6));

  const NodeSet s1{strong.dag().index_of("S1")};
  CHECK_THROWS_AS(precision_inclusion(strong, {}, s1, 100), std::invalid_argument);
}

TEST_CASE("pruning keeps an MSE-optimal set on random SCMs") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    const CausalDag g = oracle::random_causal_dag(rng, 1 + rep % 6, 0.4);
    const LinearGaussianScm m = oracle::random_scm(rng, g);
    const std::vector<SetProfile> pruned = profiles(m, build_candidate_space(g).candidates);
    const auto all_sets = subsets_lexicographic(g.covariates());
    const std::vector<SetProfile> full = profiles(m, all_sets);
    for (const long long n : {10LL, 30LL, 100LL, 1000LL}) {
      const double a = *mse_optimal_set(pruned, n).summary.mse;
      const double b = *mse_optimal_set(full, n).summary.mse;
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
  }
}
