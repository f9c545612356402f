#ifndef MSE_ADJUST_GAUSSIAN_SCM_HPP_
#define MSE_ADJUST_GAUSSIAN_SCM_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mse_adjust/graph.hpp"

namespace mse_adjust {

/// Symmetric covariance matrix over the nodes of one graph, in node index order.
class CovarianceMatrix {
 public:
  CovarianceMatrix(std::vector<std::string> labels, Eigen::MatrixXd entries);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double operator()(NodeId i, NodeId j) const { return entries_(i, j); }
  /// Sub-block with rows `rows` and columns `cols`, both in canonical order.
  Eigen::MatrixXd block(NodeSet rows, NodeSet cols) const;
  std::string describe(NodeSet s) const;

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd entries_;
};

struct WeightedEdge {
  std::string from;
  std::string to;
  double coef;
};

/// Linear structural equations V_i = sum_j beta_ij V_j + eps_i with
/// independent eps_i ~ N(0, sigma_i^2), over a CausalDag.
class LinearGaussianScm {
 public:
  /// `coef(parent, child)` for every edge of `dag`; noise variances in node order.
  /// Throws std::invalid_argument on missing/extra/non-finite coefficients or
  /// non-positive noise variances.
  LinearGaussianScm(CausalDag dag, const Eigen::MatrixXd& coef, std::vector<double> noise_var);

  /// Builds the graph and the coefficients from labelled edges.
  static LinearGaussianScm from_edges(std::vector<std::string> nodes,
                                      const std::vector<WeightedEdge>& edges,
                                      const std::string& treatment, const std::string& outcome,
                                      std::vector<double> noise_var);

  const CausalDag& dag() const { return dag_; }
  /// coef()(parent, child); zero where there is no edge.
  const Eigen::MatrixXd& coef() const { return coef_; }
  double coef(NodeId parent, NodeId child) const { return coef_(parent, child); }
  const std::vector<double>& noise_var() const { return noise_var_; }
  /// The treatment effect: the coefficient on A -> Y.
  double tau() const { return coef_(dag_.treatment(), dag_.outcome()); }
  const CovarianceMatrix& covariance() const { return covariance_; }

 private:
  CausalDag dag_;
  Eigen::MatrixXd coef_;
  std::vector<double> noise_var_;
  CovarianceMatrix covariance_;
};

/// Covariance implied by the structural equations, computed by recursion in
/// topological order.
CovarianceMatrix implied_covariance(const LinearGaussianScm& m);

/// Condition number of a covariance block above which it is treated as singular.
inline constexpr double kSingularConditionNumber = 1e12;

/// Sigma_xy - Sigma_xz Sigma_zz^{-1} Sigma_zy. Throws DegenerateModelError when
/// Sigma_zz is numerically singular.
Eigen::MatrixXd conditional_cov(const CovarianceMatrix& sigma, NodeSet x, NodeSet y, NodeSet z);

/// Population regression coefficients of y on `regressors` (canonical order).
Eigen::VectorXd population_ols_coef(const CovarianceMatrix& sigma, NodeId y, NodeSet regressors);

/// Population OLS coefficient of A when regressing Y on {A} ∪ k, minus tau.
double population_bias(const LinearGaussianScm& m, AdjustmentSet k);

/// sigma_yy.ak / sigma_aa.k
double asymptotic_variance(const LinearGaussianScm& m, AdjustmentSet k);

struct PopulationSummary {
  AdjustmentSet set;
  double bias = 0.0;
  double avar = 0.0;
  std::optional<long long> n;
  std::optional<double> fs_var;
  std::optional<double> mse;
};

/// Exact bias and asymptotic variance of the OLS estimator adjusting for k;
/// with n, also the finite-sample variance avar/(n-|k|-3) and the MSE.
/// Throws SampleSizeTooSmallError if n <= |k| + 3.
PopulationSummary population_summary(const LinearGaussianScm& m, AdjustmentSet k,
                                     std::optional<long long> n = std::nullopt);

/// Finite-sample variance and MSE at n from precomputed bias and avar.
double finite_sample_variance(double avar, std::size_t set_size, long long n);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_GAUSSIAN_SCM_HPP_
