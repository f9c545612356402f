#ifndef MSE_ADJUST_SEARCH_SPACE_HPP_
#define MSE_ADJUST_SEARCH_SPACE_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mse_adjust/classification.hpp"
#include "mse_adjust/gaussian_scm.hpp"
#include "mse_adjust/graph.hpp"

namespace mse_adjust {

enum class PruneRule {
  kSuboptimalPrecision,
  kSuboptimalConfounding,
  kIrrelevant,
  kForbiddenCombination,
  kSuboptimalValid,
};

/// "suboptimal-precision", "suboptimal-confounding", "irrelevant",
/// "forbidden-combination", "suboptimal-valid".
std::string_view rule_name(PruneRule rule);

struct PruneLogEntry {
  PruneRule rule;
  /// A single variable for the variable-level rules, otherwise a whole set.
  NodeSet excluded;
  /// Witness variable, the forbidden combination contained in `excluded`, or O.
  NodeSet justification;
};

struct CandidateSpaceOptions {
  /// Also drop valid sets of the same size as O. The default drops only
  /// strictly larger valid sets.
  bool prune_equal_size_valid_sets = false;
  bool force = false;
};

/// Power set cap for the retained variables.
inline constexpr std::size_t kMaxRetainedVariables = 20;

struct CandidateSpace {
  AdjustmentSet optimal;
  std::vector<AdjustmentSet> candidates;  // lexicographic order
  std::vector<PruneLogEntry> pruning_log;
  /// 2^(number of covariates)
  double full_space_size = 0;

  bool contains(AdjustmentSet s) const;
};

CandidateSpace build_candidate_space(const CausalDag& g, const VariableClassification& cls,
                                     const CandidateSpaceOptions& opts = {});
CandidateSpace build_candidate_space(const CausalDag& g, const CandidateSpaceOptions& opts = {});

/// True when some x in `x_set` cannot be d-connected to Y in G' once the other
/// members are conditioned on, whatever else is added.
bool is_forbidden_combination(const CausalDag& g, NodeSet x_set, bool force = false);

/// Exact population bias and asymptotic variance of one adjustment set.
struct SetProfile {
  AdjustmentSet set;
  double bias = 0.0;
  double avar = 0.0;

  bool defined_at(long long n) const { return n > static_cast<long long>(set.size()) + 3; }
  /// bias^2 + avar/(n-|set|-3); throws SampleSizeTooSmallError when undefined.
  double mse(long long n) const;
};

SetProfile profile(const LinearGaussianScm& m, AdjustmentSet k);
std::vector<SetProfile> profiles(const LinearGaussianScm& m, std::span<const AdjustmentSet> sets);

/// Relative tolerance under which two MSE values count as tied.
inline constexpr double kMseTieTolerance = 1e-12;

struct MseOptimum {
  AdjustmentSet set;
  PopulationSummary summary;
  /// Every candidate within the tie tolerance of the minimum, lexicographic.
  std::vector<AdjustmentSet> argmin;
  /// Candidates too large for this n.
  std::vector<AdjustmentSet> skipped;
};

/// An MSE-optimal candidate at n; ties go to the smaller set, then the
/// lexicographically first. Throws SampleSizeTooSmallError if every candidate
/// is too large for n.
MseOptimum mse_optimal_set(std::span<const SetProfile> candidates, long long n);
MseOptimum mse_optimal_set(const LinearGaussianScm& m, const CandidateSpace& space, long long n);

enum class CriterionBranch {
  kSampleSizeBound,    // B^2(K) > B^2(L): the closed-form bound on n was used
  kDirectComparison,   // B^2(K) < B^2(L): compared the two MSE values directly
  kEqualBias,          // squared biases tie: compared directly
};
std::string_view branch_name(CriterionBranch branch);

struct CriterionResult {
  bool k_better = false;
  CriterionBranch branch = CriterionBranch::kDirectComparison;
  /// Right-hand side of the bound on n (sample-size branch only).
  std::optional<double> bound;
  double mse_k = 0.0;
  double mse_l = 0.0;
};

/// Whether K has strictly lower MSE than L at n. Both the bound on n and the
/// direct comparison are evaluated; a clear disagreement is a logic error.
CriterionResult sample_size_criterion(const SetProfile& k, const SetProfile& l, long long n);
CriterionResult sample_size_criterion(const LinearGaussianScm& m, AdjustmentSet k,
                                      AdjustmentSet l, long long n);

inline constexpr long long kDefaultCrossoverHorizon = 1'000'000;

/// Sign of MSE(K, n) - MSE(L, n); an undefined MSE counts as +infinity.
int mse_comparison_sign(const SetProfile& k, const SetProfile& l, long long n);

/// Every n in (start, horizon] at which the comparison sign differs from n-1,
/// scanning from start = min(|K|, |L|) + 4.
std::vector<long long> crossover_points(const SetProfile& k, const SetProfile& l,
                                        long long horizon = kDefaultCrossoverHorizon);
/// The first crossover point, if any.
std::optional<long long> crossover_n(const SetProfile& k, const SetProfile& l,
                                     long long horizon = kDefaultCrossoverHorizon);
std::optional<long long> crossover_n(const LinearGaussianScm& m, AdjustmentSet k,
                                     AdjustmentSet l,
                                     long long horizon = kDefaultCrossoverHorizon);

/// Whether adding the precision variables p to k lowers the MSE at n:
/// |P|/(n-|K|-3) < 1 - sigma_yy.akp/sigma_yy.ak.
bool precision_inclusion(const LinearGaussianScm& m, AdjustmentSet k, NodeSet p, long long n);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_SEARCH_SPACE_HPP_
