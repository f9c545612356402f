#include "mse_adjust/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "mse_adjust/errors.hpp"
#include "mse_adjust/parallel.hpp"
#include "mse_adjust/rng.hpp"

namespace mse_adjust {

namespace {

std::string join_labels(const Dag& g, const std::vector<NodeId>& cols) {
  std::string out;
  for (NodeId c : cols) {
    if (!out.empty()) out += ", ";
    out += g.label(c);
  }
  return out;
}

// Centred cross-products of the selected columns under row weights.
Eigen::MatrixXd weighted_scatter(const Eigen::MatrixXd& x, const std::vector<std::uint32_t>& w,
                                 double total) {
  const Eigen::Index c = x.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(c);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (w[i] != 0) mean += static_cast<double>(w[i]) * x.row(i).transpose();
  }
  mean /= total;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(c, c);
  Eigen::VectorXd r(c);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (w[i] == 0) continue;
    r = x.row(i).transpose() - mean;
    s.selfadjointView<Eigen::Lower>().rankUpdate(r, static_cast<double>(w[i]));
  }
  return s.selfadjointView<Eigen::Lower>();
}

// Coefficient of the last regressor when regressing column `y` on `regs`,
// all indices into the scatter matrix. Empty when the regressors are
// numerically collinear.
std::optional<double> scatter_slope(const Eigen::MatrixXd& s, const std::vector<Eigen::Index>& regs,
                                    Eigen::Index y) {
  const auto p = static_cast<Eigen::Index>(regs.size());
  Eigen::MatrixXd srr(p, p);
  Eigen::VectorXd sry(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    sry(i) = s(regs[i], y);
    for (Eigen::Index j = 0; j < p; ++j) srr(i, j) = s(regs[i], regs[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(srr, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(p - 1);
  // Eigenvalues of the scatter are squared singular values of the design.
  if (!(hi > 0.0) || lo < kRankTolerance * kRankTolerance * hi) return std::nullopt;
  return srr.ldlt().solve(sry)(p - 1);
}

}  // namespace

void Dataset::validate() const {
  if (values.rows() < 1) throw std::invalid_argument("dataset has no rows");
  if (values.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("dataset column count does not match its labels");
  }
  if (!values.allFinite()) throw std::invalid_argument("dataset contains non-finite values");
}

void check_dataset_matches(const Dataset& d, const Dag& g) {
  d.validate();
  if (d.labels != g.labels()) {
    throw std::invalid_argument("dataset columns do not match the graph's nodes");
  }
}

FitResult ols_fit(const Dataset& d, const CausalDag& g, AdjustmentSet k) {
  check_dataset_matches(d, g);
  check_adjustment_set(g, k);
  const auto n = static_cast<Eigen::Index>(d.n());
  if (n <= static_cast<Eigen::Index>(k.size()) + 2) {
    throw SampleSizeTooSmallError("n = " + std::to_string(n) + " is too small to fit {" +
                                  format_set(g, k) + "} (need n > |K| + 2)");
  }
  std::vector<NodeId> cols = k.members();
  cols.push_back(g.treatment());
  const auto p = static_cast<Eigen::Index>(cols.size());

  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j) x.col(j) = d.values.col(cols[j]);
  Eigen::VectorXd y = d.values.col(g.outcome());
  // The intercept is handled by centring every column.
  x.rowwise() -= x.colwise().mean();
  y.array() -= y.mean();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(p - 1) < kRankTolerance * sv(0)) {
    const Eigen::VectorXd v = svd.matrixV().col(p - 1);
    const double vmax = v.cwiseAbs().maxCoeff();
    std::vector<NodeId> culprits;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!(sv(0) > 0.0) || std::abs(v(j)) > 0.1 * vmax) culprits.push_back(cols[j]);
    }
    throw CollinearityError("design for {" + format_set(g, k) +
                            "} is rank deficient; collinear columns: " +
                            join_labels(g, culprits));
  }

  const Eigen::VectorXd qty = qr.householderQ().adjoint() * y;
  const Eigen::VectorXd beta =
      r.topLeftCorner(p, p).triangularView<Eigen::Upper>().solve(qty.head(p));

  FitResult fit;
  fit.set = k;
  fit.n = d.n();
  fit.tau_hat = beta(p - 1);
  fit.rss_a_given_k = r(p - 1, p - 1) * r(p - 1, p - 1);
  fit.rss_y_given_ak = qty.tail(n - p).squaredNorm();
  if (!(fit.rss_a_given_k > 0.0)) {
    throw CollinearityError("treatment is perfectly explained by {" + format_set(g, k) + "}");
  }
  const double sigma_hat =
      fit.rss_y_given_ak / static_cast<double>(n - static_cast<Eigen::Index>(k.size()) - 1);
  fit.var_hat = sigma_hat / fit.rss_a_given_k;
  return fit;
}

double estimate_variance(const Dataset& d, const CausalDag& g, AdjustmentSet k) {
  return ols_fit(d, g, k).var_hat;
}

BootstrapResult bootstrap_bias_detail(const Dataset& d, const CausalDag& g, AdjustmentSet k,
                                      AdjustmentSet o, int b, std::uint64_t seed) {
  if (b < 1) throw std::invalid_argument("bootstrap count must be at least 1");
  check_dataset_matches(d, g);
  check_adjustment_set(g, k);
  check_adjustment_set(g, o);
  BootstrapResult result;
  if (k == o) return result;

  const std::size_t n = d.n();
  if (n <= std::max(k.size(), o.size()) + 2) {
    throw SampleSizeTooSmallError("n = " + std::to_string(n) +
                                  " is too small to bootstrap {" + format_set(g, k) + "}");
  }
  // Local layout: the union of both sets, then A, then Y.
  const std::vector<NodeId> covs = (k | o).members();
  const auto a_col = static_cast<Eigen::Index>(covs.size());
  const Eigen::Index y_col = a_col + 1;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), y_col + 1);
  for (std::size_t j = 0; j < covs.size(); ++j) x.col(j) = d.values.col(covs[j]);
  x.col(a_col) = d.values.col(g.treatment());
  x.col(y_col) = d.values.col(g.outcome());
  auto regressors = [&](AdjustmentSet s) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < covs.size(); ++j) {
      if (s.contains(covs[j])) idx.push_back(static_cast<Eigen::Index>(j));
    }
    idx.push_back(a_col);
    return idx;
  };
  const std::vector<Eigen::Index> k_regs = regressors(k);
  const std::vector<Eigen::Index> o_regs = regressors(o);

  RandomStream stream(
      derive_stream_key({seed, static_cast<std::uint64_t>(StreamTag::kBootstrap), k.bits()}));
  std::vector<std::uint32_t> counts(n);
  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(b));
  while (static_cast<int>(diffs.size()) < b) {
    std::fill(counts.begin(), counts.end(), 0U);
    for (std::size_t i = 0; i < n; ++i) ++counts[stream.below(n)];
    const Eigen::MatrixXd s = weighted_scatter(x, counts, static_cast<double>(n));
    const auto tk = scatter_slope(s, k_regs, y_col);
    const auto to = scatter_slope(s, o_regs, y_col);
    if (!tk || !to) {
      if (++result.redraws > kMaxBootstrapRedraws) {
        throw BootstrapDegeneracyError("more than " + std::to_string(kMaxBootstrapRedraws) +
                                       " degenerate bootstrap resamples for {" +
                                       format_set(g, k) + "}");
      }
      continue;
    }
    diffs.push_back(*tk - *to);
  }
  result.bias = pairwise_sum(diffs) / static_cast<double>(b);
  if (b > 1) {
    std::vector<double> sq(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      sq[i] = (diffs[i] - result.bias) * (diffs[i] - result.bias);
    }
    result.standard_error =
        std::sqrt(pairwise_sum(sq) / static_cast<double>(b - 1) / static_cast<double>(b));
  }
  return result;
}

double bootstrap_bias(const Dataset& d, const CausalDag& g, AdjustmentSet k, AdjustmentSet o,
                      int b, std::uint64_t seed) {
  return bootstrap_bias_detail(d, g, k, o, b, seed).bias;
}

std::string_view selection_rule_name(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::kAlgorithm1:
      return "algorithm-1";
    case SelectionRule::kMinVariance:
      return "min-variance";
  }
  return "unknown";
}

SelectionResult select_and_estimate(const Dataset& d, const CausalDag& g,
                                    const SelectionConfig& cfg) {
  return select_and_estimate(d, g, build_candidate_space(g), cfg);
}

SelectionResult select_and_estimate(const Dataset& d, const CausalDag& g,
                                    const CandidateSpace& space, const SelectionConfig& cfg) {
  check_dataset_matches(d, g);
  const AdjustmentSet o = space.optimal;
  SelectionResult result;
  const FitResult o_fit = ols_fit(d, g, o);
  result.per_candidate.push_back({o_fit, "optimal", ""});

  std::vector<AdjustmentSet> others;
  for (AdjustmentSet z : space.candidates) {
    if (z != o) others.push_back(z);
  }
  std::vector<CandidateAudit> audits(others.size());
  for (std::size_t i = 0; i < others.size(); ++i) {
    audits[i].fit.set = others[i];
    try {
      audits[i].fit = ols_fit(d, g, others[i]);
    } catch (const DomainError& e) {
      audits[i].status = "skipped";
      audits[i].message = e.what();
    }
  }

  AdjustmentSet best = o;
  FitResult best_fit = o_fit;
  if (cfg.rule == SelectionRule::kMinVariance) {
    for (auto& a : audits) {
      if (a.status == "skipped") continue;
      a.status = "variance-not-smaller";
      if (a.fit.var_hat < best_fit.var_hat) {
        best = a.fit.set;
        best_fit = a.fit;
      }
    }
    for (auto& a : audits) {
      if (a.status != "skipped" && a.fit.set == best) a.status = "chosen-by-variance";
    }
  } else {
    const double o_var = o_fit.var_hat;
    std::vector<std::size_t> need;
    for (std::size_t i = 0; i < audits.size(); ++i) {
      if (audits[i].status == "skipped") continue;
      if (audits[i].fit.var_hat < o_var) {
        need.push_back(i);
      } else {
        audits[i].status = "variance-not-smaller";
      }
    }
    parallel_for(
        need.size(),
        [&](std::size_t j) {
          CandidateAudit& a = audits[need[j]];
          try {
            a.fit.bias_hat = bootstrap_bias(d, g, a.fit.set, o, cfg.bootstrap, cfg.seed);
            a.fit.mse_hat = *a.fit.bias_hat * *a.fit.bias_hat + a.fit.var_hat;
            a.status = "compared";
          } catch (const DomainError& e) {
            a.status = "skipped";
            a.message = e.what();
          }
        },
        cfg.threads);
    double min_mse = o_var;
    for (const std::size_t i : need) {
      const CandidateAudit& a = audits[i];
      if (a.status == "compared" && *a.fit.mse_hat < min_mse) {
        min_mse = *a.fit.mse_hat;
        best = a.fit.set;
        best_fit = a.fit;
      }
    }
  }
  result.chosen = best;
  result.chosen_fit = best_fit;
  result.tau_hat = best_fit.tau_hat;
  for (auto& a : audits) result.per_candidate.push_back(std::move(a));
  return result;
}

}  // namespace mse_adjust
