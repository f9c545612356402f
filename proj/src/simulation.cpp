#include "mse_adjust/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include "mse_adjust/errors.hpp"
#include "mse_adjust/parallel.hpp"
#include "mse_adjust/rng.hpp"

namespace mse_adjust {

Dataset sample(const LinearGaussianScm& m, std::size_t n, std::uint64_t stream_key) {
  if (n < 1) throw std::invalid_argument("sample size must be at least 1");
  const CausalDag& g = m.dag();
  const auto rows = static_cast<Eigen::Index>(n);
  const auto d = static_cast<Eigen::Index>(g.size());
  RandomStream stream(stream_key);
  Eigen::MatrixXd noise(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index v = 0; v < d; ++v) noise(i, v) = stream.normal();
  }
  Dataset out{g.labels(), Eigen::MatrixXd(rows, d)};
  for (NodeId v : g.topological_order()) {
    Eigen::VectorXd col = std::sqrt(m.noise_var()[v]) * noise.col(v);
    for (NodeId p : g.parents(v)) col += m.coef(p, v) * out.values.col(p);
    out.values.col(v) = col;
  }
  return out;
}

std::string Rule::name(const Dag& g) const {
  switch (kind) {
    case RuleKind::kFixedOptimal:
      return "fixed-O";
    case RuleKind::kAlgorithm1:
      return "algorithm-1";
    case RuleKind::kMinVariance:
      return "min-variance";
    case RuleKind::kGroundTruth:
      return "ground-truth-On";
    case RuleKind::kFixedSet:
      return "fixed:" + format_set(g, set);
  }
  return "unknown";
}

Rule parse_rule(const Dag& g, std::string_view text) {
  if (text == "fixed-O") return {RuleKind::kFixedOptimal, {}};
  if (text == "algorithm-1") return {RuleKind::kAlgorithm1, {}};
  if (text == "min-variance") return {RuleKind::kMinVariance, {}};
  if (text == "ground-truth-On") return {RuleKind::kGroundTruth, {}};
  if (text.starts_with("fixed:")) return {RuleKind::kFixedSet, parse_set(g, text.substr(6))};
  throw std::invalid_argument("unknown rule '" + std::string(text) +
                              "' (expected fixed-O, algorithm-1, min-variance, "
                              "ground-truth-On or fixed:<set>)");
}

void ExperimentConfig::validate() const {
  if (sample_sizes.empty()) throw std::invalid_argument("no sample sizes given");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 1) throw std::invalid_argument("sample sizes must be positive");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) {
      throw std::invalid_argument("sample sizes must be strictly increasing");
    }
  }
  if (seeds < 1) throw std::invalid_argument("seed count must be at least 1");
  if (bootstrap_b < 1) throw std::invalid_argument("bootstrap count must be at least 1");
  if (rules.empty()) throw std::invalid_argument("no rules given");
}

const CellResult& ExperimentResult::cell(RuleKind kind, long long n) const {
  for (const auto& c : cells) {
    if (c.rule.kind == kind && c.n == n) return c;
  }
  throw std::invalid_argument("no such experiment cell");
}

void summarize_cell(CellResult& cell, const Dag& g) {
  std::vector<double> sq;
  cell.failures = 0;
  cell.chosen_counts.clear();
  for (const auto& s : cell.per_seed) {
    if (!s.ok) {
      ++cell.failures;
      continue;
    }
    sq.push_back(s.sq_error);
    ++cell.chosen_counts[format_set(g, s.chosen)];
  }
  cell.seeds = static_cast<int>(cell.per_seed.size());
  cell.invalid = cell.failures * 100 > cell.seeds;
  const auto m = static_cast<double>(sq.size());
  if (sq.empty()) {
    cell.mean_mse = cell.sd_sq_error = cell.rmse = cell.se_mse = std::nan("");
    return;
  }
  cell.mean_mse = pairwise_sum(sq) / m;
  cell.rmse = std::sqrt(cell.mean_mse);
  if (sq.size() > 1) {
    std::vector<double> dev(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
      dev[i] = (sq[i] - cell.mean_mse) * (sq[i] - cell.mean_mse);
    }
    cell.sd_sq_error = std::sqrt(pairwise_sum(dev) / (m - 1.0));
    cell.se_mse = cell.sd_sq_error / std::sqrt(m);
  } else {
    cell.sd_sq_error = 0.0;
    cell.se_mse = 0.0;
  }
}

ExperimentResult run_experiment(const LinearGaussianScm& m, const ExperimentConfig& cfg) {
  cfg.validate();
  const CausalDag& g = m.dag();
  const CandidateSpace space = build_candidate_space(g, cfg.space_options);
  const std::vector<SetProfile> prof = profiles(m, space.candidates);
  const double tau = m.tau();

  ExperimentResult result;
  for (const Rule& r : cfg.rules) {
    if (r.kind == RuleKind::kFixedSet) check_adjustment_set(g, r.set);
  }
  std::vector<std::vector<CellResult>> by_rule(cfg.rules.size());
  for (const long long n : cfg.sample_sizes) {
    AdjustmentSet truth = space.optimal;
    bool have_truth = false;
    try {
      truth = mse_optimal_set(prof, n).set;
      have_truth = true;
      result.ground_truth.emplace_back(n, truth);
    } catch (const SampleSizeTooSmallError&) {
      // Every seed of the ground-truth cell fails below.
    }

    const auto seeds = static_cast<std::size_t>(cfg.seeds);
    std::vector<std::vector<SeedOutcome>> outcomes(cfg.rules.size(),
                                                   std::vector<SeedOutcome>(seeds));
    parallel_for(
        seeds,
        [&](std::size_t s) {
          const Dataset data = sample(
              m, static_cast<std::size_t>(n),
              derive_stream_key({cfg.base_seed, static_cast<std::uint64_t>(StreamTag::kDataset),
                                 s, static_cast<std::uint64_t>(n)}));
          const std::uint64_t sel_seed = derive_stream_key(
              {cfg.base_seed, static_cast<std::uint64_t>(StreamTag::kSelection), s,
               static_cast<std::uint64_t>(n)});
          for (std::size_t r = 0; r < cfg.rules.size(); ++r) {
            SeedOutcome& out = outcomes[r][s];
            try {
              FitResult fit;
              switch (cfg.rules[r].kind) {
                case RuleKind::kFixedOptimal:
                  fit = ols_fit(data, g, space.optimal);
                  break;
                case RuleKind::kFixedSet:
                  fit = ols_fit(data, g, cfg.rules[r].set);
                  break;
                case RuleKind::kGroundTruth:
                  if (!have_truth) {
                    throw SampleSizeTooSmallError("no candidate is defined at n = " +
                                                  std::to_string(n));
                  }
                  fit = ols_fit(data, g, truth);
                  break;
                case RuleKind::kAlgorithm1:
                case RuleKind::kMinVariance: {
                  SelectionConfig sc;
                  sc.bootstrap = cfg.bootstrap_b;
                  sc.seed = sel_seed;
                  sc.threads = 1;
                  sc.rule = cfg.rules[r].kind == RuleKind::kAlgorithm1
                                ? SelectionRule::kAlgorithm1
                                : SelectionRule::kMinVariance;
                  fit = select_and_estimate(data, g, space, sc).chosen_fit;
                  break;
                }
              }
              out.ok = true;
              out.tau_hat = fit.tau_hat;
              out.sq_error = (fit.tau_hat - tau) * (fit.tau_hat - tau);
              out.chosen = fit.set;
            } catch (const DomainError& e) {
              out.ok = false;
              out.error = e.what();
            }
          }
        },
        cfg.threads);

    for (std::size_t r = 0; r < cfg.rules.size(); ++r) {
      CellResult cell;
      cell.rule = cfg.rules[r];
      cell.n = n;
      cell.per_seed = std::move(outcomes[r]);
      summarize_cell(cell, g);
      by_rule[r].push_back(std::move(cell));
    }
  }
  for (auto& cells : by_rule) {
    for (auto& c : cells) result.cells.push_back(std::move(c));
  }
  return result;
}

}  // namespace mse_adjust
