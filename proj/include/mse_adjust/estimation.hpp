#ifndef MSE_ADJUST_ESTIMATION_HPP_
#define MSE_ADJUST_ESTIMATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mse_adjust/graph.hpp"
#include "mse_adjust/search_space.hpp"

namespace mse_adjust {

/// n observations of every node, columns in the graph's node order.
struct Dataset {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;  // n x d

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  /// Throws std::invalid_argument on empty data, non-finite entries or a
  /// column layout that does not match `labels`.
  void validate() const;
};

/// Throws std::invalid_argument unless the dataset's columns are the graph's nodes in order.
void check_dataset_matches(const Dataset& d, const Dag& g);

struct FitResult {
  AdjustmentSet set;
  std::size_t n = 0;
  double tau_hat = 0.0;
  double rss_a_given_k = 0.0;
  double rss_y_given_ak = 0.0;
  double var_hat = 0.0;
  std::optional<double> bias_hat;
  std::optional<double> mse_hat;
};

/// Smallest-to-largest singular value ratio below which a design is rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// OLS of Y on an intercept, A and k. Throws SampleSizeTooSmallError unless
/// n > |k| + 2 and CollinearityError (naming the columns involved) when the
/// centred design is numerically rank deficient.
FitResult ols_fit(const Dataset& d, const CausalDag& g, AdjustmentSet k);

/// (RSS_y.ak / (n - |k| - 1)) / RSS_a.k
double estimate_variance(const Dataset& d, const CausalDag& g, AdjustmentSet k);

inline constexpr int kMaxBootstrapRedraws = 100;

struct BootstrapResult {
  double bias = 0.0;
  /// Standard error of the mean difference over resamples.
  double standard_error = 0.0;
  int redraws = 0;
};

/// Mean over b paired row resamples of tau_hat_K - tau_hat_O. Resamples on
/// which either fit is rank deficient are redrawn; more than
/// kMaxBootstrapRedraws redraws raise BootstrapDegeneracyError.
BootstrapResult bootstrap_bias_detail(const Dataset& d, const CausalDag& g, AdjustmentSet k,
                                      AdjustmentSet o, int b, std::uint64_t seed);
double bootstrap_bias(const Dataset& d, const CausalDag& g, AdjustmentSet k, AdjustmentSet o,
                      int b, std::uint64_t seed);

enum class SelectionRule {
  kAlgorithm1,   // bootstrap-bias MSE estimate, guarded by O's variance
  kMinVariance,  // smallest estimated variance among the candidates
};
std::string_view selection_rule_name(SelectionRule rule);

struct SelectionConfig {
  int bootstrap = 1000;
  std::uint64_t seed = 0;
  SelectionRule rule = SelectionRule::kAlgorithm1;
  /// 0 = default thread count.
  std::size_t threads = 0;
};

struct CandidateAudit {
  FitResult fit;
  /// "optimal", "compared", "variance-not-smaller", "chosen-by-variance" or "skipped".
  std::string status;
  std::string message;
};

struct SelectionResult {
  AdjustmentSet chosen;
  double tau_hat = 0.0;
  FitResult chosen_fit;
  std::vector<CandidateAudit> per_candidate;  // O first, then candidates in order
};

/// Selects an adjustment set from `space` (which must contain O) and fits it.
SelectionResult select_and_estimate(const Dataset& d, const CausalDag& g,
                                    const CandidateSpace& space, const SelectionConfig& cfg);
/// Builds the candidate space from the graph first.
SelectionResult select_and_estimate(const Dataset& d, const CausalDag& g,
                                    const SelectionConfig& cfg);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_ESTIMATION_HPP_
