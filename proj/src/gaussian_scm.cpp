#include "mse_adjust/gaussian_scm.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "mse_adjust/errors.hpp"

namespace mse_adjust {

namespace {

std::vector<NodeId> members(NodeSet s) { return s.members(); }

}  // namespace

CovarianceMatrix::CovarianceMatrix(std::vector<std::string> labels, Eigen::MatrixXd entries)
    : labels_(std::move(labels)), entries_(std::move(entries)) {
  const auto d = static_cast<Eigen::Index>(labels_.size());
  if (entries_.rows() != d || entries_.cols() != d) {
    throw std::invalid_argument("covariance matrix size does not match its labels");
  }
  const double scale = entries_.cwiseAbs().maxCoeff();
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0)) {
    throw std::invalid_argument("covariance matrix is not symmetric");
  }
}

Eigen::MatrixXd CovarianceMatrix::block(NodeSet rows, NodeSet cols) const {
  const auto r = members(rows);
  const auto c = members(cols);
  Eigen::MatrixXd out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = entries_(r[i], c[j]);
  }
  return out;
}

std::string CovarianceMatrix::describe(NodeSet s) const {
  if (s.empty()) return "{}";
  std::string out;
  for (NodeId v : s) {
    if (!out.empty()) out += '+';
    out += labels_.at(v);
  }
  return out;
}

LinearGaussianScm::LinearGaussianScm(CausalDag dag, const Eigen::MatrixXd& coef,
                                     std::vector<double> noise_var)
    : dag_(std::move(dag)),
      coef_(coef),
      noise_var_(std::move(noise_var)),
      covariance_(dag_.labels(), Eigen::MatrixXd::Identity(dag_.size(), dag_.size())) {
  const std::size_t d = dag_.size();
  if (coef_.rows() != static_cast<Eigen::Index>(d) || coef_.cols() != static_cast<Eigen::Index>(d)) {
    throw std::invalid_argument("coefficient matrix size does not match the graph");
  }
  if (noise_var_.size() != d) {
    throw std::invalid_argument("expected one noise variance per node");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(noise_var_[i]) || noise_var_[i] <= 0.0) {
      throw std::invalid_argument("noise variance of '" + dag_.label(i) + "' must be positive");
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double c = coef_(i, j);
      if (!std::isfinite(c)) {
        throw std::invalid_argument("non-finite coefficient on " + dag_.label(i) + " -> " +
                                    dag_.label(j));
      }
      if (!dag_.has_edge(i, j) && c != 0.0) {
        throw std::invalid_argument("coefficient given for missing edge " + dag_.label(i) +
                                    " -> " + dag_.label(j));
      }
    }
  }
  covariance_ = implied_covariance(*this);
}

LinearGaussianScm LinearGaussianScm::from_edges(std::vector<std::string> nodes,
                                                const std::vector<WeightedEdge>& edges,
                                                const std::string& treatment,
                                                const std::string& outcome,
                                                std::vector<double> noise_var) {
  auto index = [&](const std::string& l) -> NodeId {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i] == l) return i;
    }
    throw std::invalid_argument("edge refers to unknown node '" + l + "'");
  };
  std::vector<Edge> plain;
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(nodes.size(), nodes.size());
  for (const auto& e : edges) {
    const NodeId f = index(e.from);
    const NodeId t = index(e.to);
    plain.push_back({f, t});
    coef(f, t) = e.coef;
  }
  CausalDag g(std::move(nodes), std::move(plain), treatment, outcome);
  return LinearGaussianScm(std::move(g), coef, std::move(noise_var));
}

CovarianceMatrix implied_covariance(const LinearGaussianScm& m) {
  const CausalDag& g = m.dag();
  const auto d = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  std::vector<NodeId> done;
  for (NodeId v : g.topological_order()) {
    // cov(v, u) = sum_p beta_pv cov(p, u) for u earlier in the order.
    for (NodeId u : done) {
      double c = 0.0;
      for (NodeId p : g.parents(v)) c += m.coef(p, v) * s(p, u);
      s(v, u) = c;
      s(u, v) = c;
    }
    double var = m.noise_var()[v];
    for (NodeId p : g.parents(v)) var += m.coef(p, v) * s(p, v);
    s(v, v) = var;
    done.push_back(v);
  }
  return CovarianceMatrix(g.labels(), std::move(s));
}

Eigen::MatrixXd conditional_cov(const CovarianceMatrix& sigma, NodeSet x, NodeSet y, NodeSet z) {
  const Eigen::MatrixXd sxy = sigma.block(x, y);
  if (z.empty()) return sxy;
  const Eigen::MatrixXd szz = sigma.block(z, z);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(szz, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kSingularConditionNumber) {
    throw DegenerateModelError("covariance block of {" + sigma.describe(z) +
                               "} is numerically singular");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(szz);
  if (llt.info() != Eigen::Success) {
    throw DegenerateModelError("covariance block of {" + sigma.describe(z) +
                               "} is not positive definite");
  }
  return sxy - sigma.block(x, z) * llt.solve(sigma.block(z, y));
}

Eigen::VectorXd population_ols_coef(const CovarianceMatrix& sigma, NodeId y, NodeSet regressors) {
  if (regressors.empty()) throw std::invalid_argument("population_ols_coef: no regressors");
  if (regressors.contains(y)) {
    throw std::invalid_argument("population_ols_coef: response among the regressors");
  }
  const Eigen::MatrixXd srr = sigma.block(regressors, regressors);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(srr, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kSingularConditionNumber) {
    throw DegenerateModelError("covariance block of {" + sigma.describe(regressors) +
                               "} is numerically singular");
  }
  return srr.llt().solve(sigma.block(regressors, NodeSet{y})).col(0);
}

double population_bias(const LinearGaussianScm& m, AdjustmentSet k) {
  const CausalDag& g = m.dag();
  check_adjustment_set(g, k);
  const NodeSet regressors = k.with(g.treatment());
  const Eigen::VectorXd b = population_ols_coef(m.covariance(), g.outcome(), regressors);
  return b(static_cast<Eigen::Index>(regressors.rank_of(g.treatment()))) - m.tau();
}

double asymptotic_variance(const LinearGaussianScm& m, AdjustmentSet k) {
  const CausalDag& g = m.dag();
  check_adjustment_set(g, k);
  const NodeSet a{g.treatment()};
  const NodeSet y{g.outcome()};
  const double syy = conditional_cov(m.covariance(), y, y, k | a)(0, 0);
  const double saa = conditional_cov(m.covariance(), a, a, k)(0, 0);
  return syy / saa;
}

double finite_sample_variance(double avar, std::size_t set_size, long long n) {
  const long long df = n - static_cast<long long>(set_size) - 3;
  if (df <= 0) {
    throw SampleSizeTooSmallError("sample size " + std::to_string(n) +
                                  " is too small for an adjustment set of size " +
                                  std::to_string(set_size) + " (need n > |K| + 3)");
  }
  return avar / static_cast<double>(df);
}

PopulationSummary population_summary(const LinearGaussianScm& m, AdjustmentSet k,
                                     std::optional<long long> n) {
  PopulationSummary s;
  s.set = k;
  if (n && *n <= static_cast<long long>(k.size()) + 3) {
    throw SampleSizeTooSmallError("sample size " + std::to_string(*n) +
                                  " is too small for {" + format_set(m.dag(), k) +
                                  "} (need n > |K| + 3)");
  }
  s.bias = population_bias(m, k);
  s.avar = asymptotic_variance(m, k);
  if (n) {
    s.n = n;
    s.fs_var = finite_sample_variance(s.avar, k.size(), *n);
    s.mse = s.bias * s.bias + *s.fs_var;
  }
  return s;
}

}  // namespace mse_adjust
