#include "mse_adjust/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mse_adjust/errors.hpp"
#include "mse_adjust/parallel.hpp"

namespace mse_adjust {

std::string_view rule_name(PruneRule rule) {
  switch (rule) {
    case PruneRule::kSuboptimalPrecision:
      return "suboptimal-precision";
    case PruneRule::kSuboptimalConfounding:
      return "suboptimal-confounding";
    case PruneRule::kIrrelevant:
      return "irrelevant";
    case PruneRule::kForbiddenCombination:
      return "forbidden-combination";
    case PruneRule::kSuboptimalValid:
      return "suboptimal-valid";
  }
  return "unknown";
}

bool CandidateSpace::contains(AdjustmentSet s) const {
  return std::binary_search(candidates.begin(), candidates.end(), s, LexLess{});
}

bool is_forbidden_combination(const CausalDag& g, NodeSet x_set, bool force) {
  check_adjustment_set(g, x_set);
  const CausalDag gp = remove_treatment_edge(g);
  for (NodeId x : x_set) {
    if (!exists_open_given_some_conditioning(gp, x, g.outcome(), x_set.without(x), {}, force)) {
      return true;
    }
  }
  return false;
}

CandidateSpace build_candidate_space(const CausalDag& g, const CandidateSpaceOptions& opts) {
  return build_candidate_space(g, classify(g, opts.force), opts);
}

CandidateSpace build_candidate_space(const CausalDag& g, const VariableClassification& cls,
                                     const CandidateSpaceOptions& opts) {
  CandidateSpace space;
  space.optimal = optimal_adjustment_set(g);
  space.full_space_size = std::ldexp(1.0, static_cast<int>(g.covariates().size()));

  for (const auto& [v, w] : cls.suboptimal_precision) {
    space.pruning_log.push_back({PruneRule::kSuboptimalPrecision, NodeSet{v}, NodeSet{w}});
  }
  for (const auto& [v, w] : cls.suboptimal_confounding) {
    space.pruning_log.push_back({PruneRule::kSuboptimalConfounding, NodeSet{v}, NodeSet{w}});
  }
  for (NodeId v : cls.irrelevant) {
    space.pruning_log.push_back({PruneRule::kIrrelevant, NodeSet{v}, NodeSet{}});
  }

  const std::vector<NodeId> retained = cls.retained().members();
  if (retained.size() > kMaxRetainedVariables) {
    throw EnumerationLimitError(std::to_string(retained.size()) +
                                " variables survive the variable-level pruning; the candidate "
                                "power set is limited to " +
                                std::to_string(kMaxRetainedVariables));
  }
  const std::size_t count = std::size_t{1} << retained.size();
  auto decode = [&](std::size_t code) {
    NodeSet s;
    for (std::size_t i = 0; i < retained.size(); ++i) {
      if ((code >> i) & 1U) s.insert(retained[i]);
    }
    return s;
  };

  // Every proper subset of a code has a smaller code, so a single ascending
  // pass sees subsets first. root[code] is the forbidden combination inside
  // the set (empty when the set is allowed).
  const CausalDag gp = remove_treatment_edge(g);
  std::vector<NodeSet> root(count);
  std::vector<char> forbidden(count, 0);
  std::vector<AdjustmentSet> kept;
  for (std::size_t code = 0; code < count; ++code) {
    for (std::size_t i = 0; i < retained.size() && !forbidden[code]; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      if ((code & bit) && forbidden[code ^ bit]) {
        forbidden[code] = 1;
        root[code] = root[code ^ bit];
      }
    }
    const NodeSet s = decode(code);
    if (!forbidden[code]) {
      for (NodeId x : s) {
        if (!exists_open_given_some_conditioning(gp, x, g.outcome(), s.without(x), {},
                                                 opts.force)) {
          forbidden[code] = 1;
          root[code] = s;
          break;
        }
      }
    }
    if (forbidden[code]) {
      space.pruning_log.push_back({PruneRule::kForbiddenCombination, s, root[code]});
      continue;
    }
    if (s != space.optimal) {
      const bool larger = opts.prune_equal_size_valid_sets ? s.size() >= space.optimal.size()
                                                           : s.size() > space.optimal.size();
      if (larger && d_separated(gp, g.treatment(), g.outcome(), s)) {
        space.pruning_log.push_back({PruneRule::kSuboptimalValid, s, space.optimal});
        continue;
      }
    }
    kept.push_back(s);
  }
  if (std::find(kept.begin(), kept.end(), space.optimal) == kept.end()) {
    kept.push_back(space.optimal);
  }
  std::sort(kept.begin(), kept.end(), LexLess{});
  space.candidates = std::move(kept);
  return space;
}

double SetProfile::mse(long long n) const {
  return bias * bias + finite_sample_variance(avar, set.size(), n);
}

SetProfile profile(const LinearGaussianScm& m, AdjustmentSet k) {
  return {k, population_bias(m, k), asymptotic_variance(m, k)};
}

std::vector<SetProfile> profiles(const LinearGaussianScm& m, std::span<const AdjustmentSet> sets) {
  std::vector<SetProfile> out(sets.size());
  parallel_for(sets.size(), [&](std::size_t i) { out[i] = profile(m, sets[i]); });
  return out;
}

MseOptimum mse_optimal_set(std::span<const SetProfile> candidates, long long n) {
  MseOptimum result;
  std::vector<std::pair<const SetProfile*, double>> scored;
  for (const SetProfile& c : candidates) {
    if (!c.defined_at(n)) {
      result.skipped.push_back(c.set);
      continue;
    }
    scored.emplace_back(&c, c.mse(n));
  }
  if (scored.empty()) {
    throw SampleSizeTooSmallError("no candidate adjustment set can be evaluated at n = " +
                                  std::to_string(n));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [c, v] : scored) best = std::min(best, v);
  const SetProfile* chosen = nullptr;
  for (const auto& [c, v] : scored) {
    if (v > best + kMseTieTolerance * std::abs(best)) continue;
    result.argmin.push_back(c->set);
    if (chosen == nullptr || c->set.size() < chosen->set.size() ||
        (c->set.size() == chosen->set.size() && lex_less(c->set, chosen->set))) {
      chosen = c;
    }
  }
  std::sort(result.argmin.begin(), result.argmin.end(), LexLess{});
  result.set = chosen->set;
  result.summary.set = chosen->set;
  result.summary.bias = chosen->bias;
  result.summary.avar = chosen->avar;
  result.summary.n = n;
  result.summary.fs_var = finite_sample_variance(chosen->avar, chosen->set.size(), n);
  result.summary.mse = chosen->mse(n);
  return result;
}

MseOptimum mse_optimal_set(const LinearGaussianScm& m, const CandidateSpace& space, long long n) {
  const std::vector<SetProfile> p = profiles(m, space.candidates);
  return mse_optimal_set(p, n);
}

std::string_view branch_name(CriterionBranch branch) {
  switch (branch) {
    case CriterionBranch::kSampleSizeBound:
      return "sample-size-bound";
    case CriterionBranch::kDirectComparison:
      return "direct";
    case CriterionBranch::kEqualBias:
      return "equal-bias";
  }
  return "unknown";
}

CriterionResult sample_size_criterion(const SetProfile& k, const SetProfile& l, long long n) {
  if (!k.defined_at(n) || !l.defined_at(n)) {
    throw SampleSizeTooSmallError("sample size " + std::to_string(n) +
                                  " is too small for the compared sets (need n > |K| + 3)");
  }
  CriterionResult r;
  r.mse_k = k.mse(n);
  r.mse_l = l.mse(n);
  const bool direct = r.mse_k < r.mse_l;
  const double b2k = k.bias * k.bias;
  const double b2l = l.bias * l.bias;
  const double db2 = b2k - b2l;
  if (std::abs(db2) <= 1e-24 + 1e-12 * std::max(b2k, b2l)) {
    r.branch = CriterionBranch::kEqualBias;
    r.k_better = direct;
    return r;
  }
  if (db2 < 0.0) {
    r.branch = CriterionBranch::kDirectComparison;
    r.k_better = direct;
    return r;
  }
  r.branch = CriterionBranch::kSampleSizeBound;
  const double dfk = static_cast<double>(n - static_cast<long long>(k.set.size()) - 3);
  const double dfl = static_cast<double>(n - static_cast<long long>(l.set.size()) - 3);
  const double bound =
      (l.avar - (dfl / dfk) * k.avar) / db2 + static_cast<double>(l.set.size()) + 3.0;
  r.bound = bound;
  const bool by_bound = static_cast<double>(n) < bound;
  if (by_bound != direct) {
    const double gap = std::abs(r.mse_k - r.mse_l);
    if (gap > 1e-9 * std::max(r.mse_k, r.mse_l)) {
      throw std::logic_error("sample-size bound and direct MSE comparison disagree");
    }
  }
  r.k_better = direct;
  return r;
}

CriterionResult sample_size_criterion(const LinearGaussianScm& m, AdjustmentSet k,
                                      AdjustmentSet l, long long n) {
  return sample_size_criterion(profile(m, k), profile(m, l), n);
}

int mse_comparison_sign(const SetProfile& k, const SetProfile& l, long long n) {
  const bool dk = k.defined_at(n);
  const bool dl = l.defined_at(n);
  if (!dk && !dl) return 0;
  if (!dk) return 1;
  if (!dl) return -1;
  // Cross-multiplied by both (positive) denominators.
  const long double dfk = n - static_cast<long long>(k.set.size()) - 3;
  const long double dfl = n - static_cast<long long>(l.set.size()) - 3;
  const long double bk = k.bias;
  const long double bl = l.bias;
  const long double diff =
      (bk * bk - bl * bl) * dfk * dfl + static_cast<long double>(k.avar) * dfl -
      static_cast<long double>(l.avar) * dfk;
  return (diff > 0) - (diff < 0);
}

std::vector<long long> crossover_points(const SetProfile& k, const SetProfile& l,
                                        long long horizon) {
  std::vector<long long> out;
  const long long start =
      static_cast<long long>(std::min(k.set.size(), l.set.size())) + 4;
  int prev = mse_comparison_sign(k, l, start);
  for (long long n = start + 1; n <= horizon; ++n) {
    const int s = mse_comparison_sign(k, l, n);
    if (s != prev) out.push_back(n);
    prev = s;
  }
  return out;
}

std::optional<long long> crossover_n(const SetProfile& k, const SetProfile& l,
                                     long long horizon) {
  const long long start =
      static_cast<long long>(std::min(k.set.size(), l.set.size())) + 4;
  int prev = mse_comparison_sign(k, l, start);
  for (long long n = start + 1; n <= horizon; ++n) {
    const int s = mse_comparison_sign(k, l, n);
    if (s != prev) return n;
  }
  return std::nullopt;
}

std::optional<long long> crossover_n(const LinearGaussianScm& m, AdjustmentSet k,
                                     AdjustmentSet l, long long horizon) {
  return crossover_n(profile(m, k), profile(m, l), horizon);
}

bool precision_inclusion(const LinearGaussianScm& m, AdjustmentSet k, NodeSet p, long long n) {
  const CausalDag& g = m.dag();
  check_adjustment_set(g, k);
  check_adjustment_set(g, p);
  if (k.intersects(p)) throw std::invalid_argument("precision set overlaps the adjustment set");
  const VariableClassification cls = classify(g);
  if (!p.is_subset_of(cls.precision)) {
    throw std::invalid_argument("{" + format_set(g, p - cls.precision) +
                                "} are not precision variables");
  }
  const long long df = n - static_cast<long long>(k.size()) - 3;
  if (n - static_cast<long long>((k | p).size()) - 3 <= 0) {
    throw SampleSizeTooSmallError("sample size " + std::to_string(n) + " is too small for {" +
                                  format_set(g, k | p) + "}");
  }
  const NodeSet a{g.treatment()};
  const NodeSet y{g.outcome()};
  const double syy_ak = conditional_cov(m.covariance(), y, y, k | a)(0, 0);
  const double syy_akp = conditional_cov(m.covariance(), y, y, k | p | a)(0, 0);
  const double lhs = static_cast<double>(p.size()) / static_cast<double>(df);
  const double rhs = 1.0 - syy_akp / syy_ak;
  const bool include = lhs < rhs;

  const double mse_kp = profile(m, k | p).mse(n);
  const double mse_k = profile(m, k).mse(n);
  if ((mse_kp < mse_k) != include &&
      std::abs(mse_kp - mse_k) > 1e-9 * std::max(mse_kp, mse_k) &&
      std::abs(lhs - rhs) > 1e-9) {
    throw std::logic_error("precision inclusion condition disagrees with the direct MSE comparison");
  }
  return include;
}

}  // namespace mse_adjust
