#ifndef MSE_ADJUST_SIMULATION_HPP_
#define MSE_ADJUST_SIMULATION_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mse_adjust/estimation.hpp"
#include "mse_adjust/gaussian_scm.hpp"
#include "mse_adjust/search_space.hpp"

namespace mse_adjust {

/// Ancestral sampling of n rows; identical (m, n, stream_key) give identical data.
Dataset sample(const LinearGaussianScm& m, std::size_t n, std::uint64_t stream_key);

enum class RuleKind {
  kFixedOptimal,  // always O
  kAlgorithm1,
  kMinVariance,
  kGroundTruth,  // the exact MSE minimiser over the candidate space at n
  kFixedSet,     // a user-chosen set
};

struct Rule {
  RuleKind kind = RuleKind::kFixedOptimal;
  AdjustmentSet set;  // kFixedSet only

  /// "fixed-O", "algorithm-1", "min-variance", "ground-truth-On", "fixed:W1+O2".
  std::string name(const Dag& g) const;
};

Rule parse_rule(const Dag& g, std::string_view text);

struct ExperimentConfig {
  std::vector<long long> sample_sizes;
  int seeds = 1000;
  int bootstrap_b = 1000;
  std::vector<Rule> rules;
  std::uint64_t base_seed = 0;
  /// 0 = default thread count.
  std::size_t threads = 0;
  CandidateSpaceOptions space_options;

  /// Throws std::invalid_argument if sizes are not strictly increasing,
  /// seeds < 1, bootstrap_b < 1 or no rule is given.
  void validate() const;
};

struct SeedOutcome {
  bool ok = false;
  double tau_hat = 0.0;
  double sq_error = 0.0;
  AdjustmentSet chosen;
  std::string error;
};

struct CellResult {
  Rule rule;
  long long n = 0;
  int seeds = 0;
  int failures = 0;
  /// More than 1% of the seeds failed.
  bool invalid = false;
  double mean_mse = 0.0;
  /// Standard deviation (n-1 denominator) of the per-seed squared errors.
  double sd_sq_error = 0.0;
  /// sqrt(mean_mse)
  double rmse = 0.0;
  /// Monte-Carlo standard error of mean_mse.
  double se_mse = 0.0;
  std::vector<SeedOutcome> per_seed;
  std::map<std::string, int> chosen_counts;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // rule-major, then n
  std::vector<std::pair<long long, AdjustmentSet>> ground_truth;

  const CellResult& cell(RuleKind kind, long long n) const;
};

/// Every (rule, n) cell over the same datasets: seed s at size n draws one
/// dataset which every rule then sees, so rule comparisons are paired.
ExperimentResult run_experiment(const LinearGaussianScm& m, const ExperimentConfig& cfg);

/// Aggregates per-seed outcomes into the cell statistics.
void summarize_cell(CellResult& cell, const Dag& g);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_SIMULATION_HPP_
