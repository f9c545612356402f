#include "mse_adjust/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mse_adjust/classification.hpp"
#include "mse_adjust/errors.hpp"
#include "mse_adjust/estimation.hpp"
#include "mse_adjust/io.hpp"
#include "mse_adjust/parallel.hpp"
#include "mse_adjust/presets.hpp"
#include "mse_adjust/rng.hpp"
#include "mse_adjust/search_space.hpp"
#include "mse_adjust/simulation.hpp"

namespace mse_adjust {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct ModelSource {
  std::string graph_path;
  std::string preset;

  void add_to(CLI::App* sub) {
    auto* g = sub->add_option("--graph", graph_path, "Graph JSON file");
    auto* p = sub->add_option("--preset", preset, "Built-in model: m1, m2, g3-demo, counterexample");
    g->excludes(p);
  }

  void require() const {
    if (graph_path.empty() && preset.empty()) {
      throw std::invalid_argument("one of --graph or --preset is required");
    }
  }

  LinearGaussianScm scm() const {
    require();
    if (!preset.empty()) return preset_scm(preset);
    return scm_from_json(read_json_file(graph_path));
  }

  CausalDag graph() const {
    require();
    if (!preset.empty()) return preset_scm(preset).dag();
    return graph_from_json(read_json_file(graph_path));
  }
};

ordered_json labels_json(const Dag& g, NodeSet s) { return set_labels(g, s); }

ordered_json classification_json(const CausalDag& g, const VariableClassification& cls) {
  ordered_json j;
  j["precision"] = labels_json(g, cls.precision);
  j["extended_confounding"] = labels_json(g, cls.extended_confounding);
  j["irrelevant"] = labels_json(g, cls.irrelevant);
  auto flagged = [&](const std::map<NodeId, NodeId>& m) {
    ordered_json arr = ordered_json::array();
    for (const auto& [v, w] : m) arr.push_back({{"var", g.label(v)}, {"witness", g.label(w)}});
    return arr;
  };
  j["suboptimal_precision"] = flagged(cls.suboptimal_precision);
  j["suboptimal_confounding"] = flagged(cls.suboptimal_confounding);
  return j;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write '" + path + "'");
  return f;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "NA";
}

// --- classify ---------------------------------------------------------------

struct ClassifyArgs {
  ModelSource model;
  bool force = false;
};

int run_classify(const ClassifyArgs& a, std::ostream& out) {
  const CausalDag g = a.model.graph();
  out << classification_json(g, classify(g, a.force)).dump(2) << '\n';
  return kExitOk;
}

// --- prune ------------------------------------------------------------------

struct PruneArgs {
  ModelSource model;
  bool force = false;
  bool equal_size = false;
};

int run_prune(const PruneArgs& a, std::ostream& out) {
  const CausalDag g = a.model.graph();
  CandidateSpaceOptions opts;
  opts.force = a.force;
  opts.prune_equal_size_valid_sets = a.equal_size;
  const VariableClassification cls = classify(g, a.force);
  const CandidateSpace space = build_candidate_space(g, cls, opts);
  ordered_json j;
  j["total_sets"] = space.full_space_size;
  j["candidate_count"] = space.candidates.size();
  j["optimal"] = labels_json(g, space.optimal);
  j["candidates"] = ordered_json::array();
  for (AdjustmentSet s : space.candidates) j["candidates"].push_back(labels_json(g, s));
  j["pruning_log"] = ordered_json::array();
  for (const PruneLogEntry& e : space.pruning_log) {
    j["pruning_log"].push_back({{"rule", rule_name(e.rule)},
                                {"excluded", labels_json(g, e.excluded)},
                                {"justification", labels_json(g, e.justification)}});
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  ModelSource model;
  std::vector<long long> sizes;
  bool long_format = false;
  bool all_sets = false;
  bool argmin_all = false;
  bool force = false;
};

int run_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const LinearGaussianScm m = a.model.scm();
  const CausalDag& g = m.dag();
  std::vector<AdjustmentSet> sets;
  if (a.all_sets) {
    if (g.covariates().size() > kMaxRetainedVariables) {
      throw EnumerationLimitError("too many covariates to enumerate every subset");
    }
    sets = subsets_lexicographic(g.covariates());
  } else {
    CandidateSpaceOptions opts;
    opts.force = a.force;
    sets = build_candidate_space(g, opts).candidates;
  }
  const std::vector<SetProfile> prof = profiles(m, sets);

  std::vector<MseOptimum> best;
  for (long long n : a.sizes) {
    best.push_back(mse_optimal_set(prof, n));
    if (!best.back().skipped.empty()) {
      err << "n=" << n << ": skipped " << best.back().skipped.size()
          << " candidate(s) with n <= |K| + 3\n";
    }
  }

  if (a.long_format) {
    out << "set,bias,avar,n,fs_var,mse\n";
    for (const SetProfile& p : prof) {
      for (long long n : a.sizes) {
        out << format_set(g, p.set) << ',' << format_number(p.bias) << ','
            << format_number(p.avar) << ',' << n << ',';
        if (p.defined_at(n)) {
          out << format_number(finite_sample_variance(p.avar, p.set.size(), n)) << ','
              << format_number(p.mse(n)) << '\n';
        } else {
          out << "NA,NA\n";
        }
      }
    }
  } else {
    out << "set,bias,avar";
    for (long long n : a.sizes) out << ",n=" << n;
    out << '\n';
    for (const SetProfile& p : prof) {
      out << format_set(g, p.set) << ',' << format_number(p.bias) << ',' << format_number(p.avar);
      for (long long n : a.sizes) out << ',' << (p.defined_at(n) ? format_number(p.mse(n)) : "NA");
      out << '\n';
    }
    out << "argmin,,";
    for (const MseOptimum& b : best) out << ',' << format_set(g, b.set);
    out << '\n';
  }
  if (a.argmin_all) {
    for (std::size_t i = 0; i < a.sizes.size(); ++i) {
      err << "n=" << a.sizes[i] << ": MSE-optimal candidates:";
      for (AdjustmentSet s : best[i].argmin) err << ' ' << format_set(g, s);
      err << '\n';
    }
  }
  return kExitOk;
}

// --- crossover --------------------------------------------------------------

struct CrossoverArgs {
  ModelSource model;
  std::string k;
  std::string l;
  long long horizon = kDefaultCrossoverHorizon;
};

int run_crossover(const CrossoverArgs& a, std::ostream& out) {
  const LinearGaussianScm m = a.model.scm();
  const AdjustmentSet k = parse_set(m.dag(), a.k);
  const AdjustmentSet l = parse_set(m.dag(), a.l);
  const auto n = crossover_n(m, k, l, a.horizon);
  if (n) {
    out << *n << '\n';
  } else {
    out << "none\n";
  }
  return kExitOk;
}

// --- select -----------------------------------------------------------------

struct SelectArgs {
  ModelSource model;
  std::string data;
  int bootstrap = 1000;
  std::uint64_t seed = 0;
  std::string rule = "algorithm-1";
  std::string audit;
  bool force = false;
};

int run_select(const SelectArgs& a, std::ostream& out) {
  const CausalDag g = a.model.graph();
  if (a.data.empty()) throw std::invalid_argument("--data is required");
  const Dataset d = read_dataset_csv(a.data, g);
  SelectionConfig cfg;
  cfg.bootstrap = a.bootstrap;
  cfg.seed = a.seed;
  if (a.rule == "algorithm-1") {
    cfg.rule = SelectionRule::kAlgorithm1;
  } else if (a.rule == "min-variance") {
    cfg.rule = SelectionRule::kMinVariance;
  } else {
    throw std::invalid_argument("unknown rule '" + a.rule + "'");
  }
  CandidateSpaceOptions opts;
  opts.force = a.force;
  const SelectionResult r = select_and_estimate(d, g, build_candidate_space(g, opts), cfg);

  ordered_json j;
  j["chosen"] = labels_json(g, r.chosen);
  j["tau_hat"] = r.tau_hat;
  j["var_hat"] = r.chosen_fit.var_hat;
  j["n"] = d.n();
  j["rule"] = selection_rule_name(cfg.rule);
  out << j.dump(2) << '\n';

  if (!a.audit.empty()) {
    std::ofstream f = open_output(a.audit);
    f << "set,status,tau_hat,var_hat,bias_hat,mse_hat,rss_a_given_k,rss_y_given_ak,message\n";
    for (const CandidateAudit& c : r.per_candidate) {
      const bool fitted = c.status != "skipped" || c.fit.n != 0;
      f << format_set(g, c.fit.set) << ',' << c.status << ','
        << (fitted ? format_number(c.fit.tau_hat) : "NA") << ','
        << (fitted ? format_number(c.fit.var_hat) : "NA") << ','
        << optional_number(c.fit.bias_hat) << ',' << optional_number(c.fit.mse_hat) << ','
        << (fitted ? format_number(c.fit.rss_a_given_k) : "NA") << ','
        << (fitted ? format_number(c.fit.rss_y_given_ak) : "NA") << ",\"" << c.message
        << "\"\n";
    }
  }
  return kExitOk;
}

// --- sample -----------------------------------------------------------------

struct SampleArgs {
  ModelSource model;
  std::size_t n = 100;
  std::uint64_t seed = 0;
};

int run_sample(const SampleArgs& a, std::ostream& out) {
  const LinearGaussianScm m = a.model.scm();
  const Dataset d = sample(
      m, a.n,
      derive_stream_key({a.seed, static_cast<std::uint64_t>(StreamTag::kDataset), 0,
                         static_cast<std::uint64_t>(a.n)}));
  write_dataset_csv(out, d);
  return kExitOk;
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  ModelSource model;
  std::vector<long long> sizes;
  int seeds = 0;
  int bootstrap = 0;
  std::vector<std::string> rules;
  std::optional<std::uint64_t> base_seed;
  std::string output_prefix;
  std::string details;
};

void write_tidy(std::ostream& f, const ExperimentResult& r, const Dag& g) {
  f << "rule,n,seeds,failures,invalid,mean_mse,sd_sq_error,rmse,se_mse,most_chosen\n";
  for (const CellResult& c : r.cells) {
    std::string top = "NA";
    int top_count = -1;
    for (const auto& [set, count] : c.chosen_counts) {
      if (count > top_count) {
        top = set;
        top_count = count;
      }
    }
    f << c.rule.name(g) << ',' << c.n << ',' << c.seeds << ',' << c.failures << ','
      << (c.invalid ? "true" : "false") << ',' << format_number(c.mean_mse) << ','
      << format_number(c.sd_sq_error) << ',' << format_number(c.rmse) << ','
      << format_number(c.se_mse) << ',' << top << '\n';
  }
}

void write_wide(std::ostream& f, const ExperimentResult& r, const Dag& g,
                const std::vector<long long>& sizes) {
  f << "rule";
  for (long long n : sizes) f << ",n=" << n;
  f << '\n';
  std::string current;
  for (const CellResult& c : r.cells) {
    const std::string name = c.rule.name(g);
    if (name != current) {
      if (!current.empty()) f << '\n';
      f << name;
      current = name;
    }
    std::ostringstream cell;
    cell << format_number(c.mean_mse) << " (" << format_number(c.sd_sq_error) << ")";
    if (c.invalid) cell << " invalid";
    f << ',' << cell.str();
  }
  f << '\n';
}

void write_plot(std::ostream& f, const ExperimentResult& r, const Dag& g) {
  f << "rule,n,rmse\n";
  for (const CellResult& c : r.cells) {
    f << c.rule.name(g) << ',' << c.n << ',' << format_number(c.rmse) << '\n';
  }
}

int run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  json cfg_json = json::object();
  if (!a.config.empty()) cfg_json = read_json_file(a.config);

  std::optional<LinearGaussianScm> scm;
  if (!a.model.graph_path.empty() || !a.model.preset.empty()) {
    scm = a.model.scm();
  } else if (cfg_json.contains("preset")) {
    scm = preset_scm(cfg_json.at("preset").get<std::string>());
  } else if (cfg_json.contains("graph")) {
    const json& gj = cfg_json.at("graph");
    scm = gj.is_string() ? scm_from_json(read_json_file(gj.get<std::string>()))
                         : scm_from_json(gj);
  } else {
    throw std::invalid_argument("no model given (use --graph, --preset or a config with "
                                "\"graph\" or \"preset\")");
  }
  const CausalDag& g = scm->dag();

  ExperimentConfig cfg;
  try {
    if (cfg_json.contains("sample_sizes")) {
      cfg.sample_sizes = cfg_json.at("sample_sizes").get<std::vector<long long>>();
    }
    if (cfg_json.contains("seeds")) cfg.seeds = cfg_json.at("seeds").get<int>();
    if (cfg_json.contains("bootstrap_b")) cfg.bootstrap_b = cfg_json.at("bootstrap_b").get<int>();
    if (cfg_json.contains("base_seed")) {
      cfg.base_seed = cfg_json.at("base_seed").get<std::uint64_t>();
    }
    if (cfg_json.contains("rules")) {
      for (const auto& r : cfg_json.at("rules")) cfg.rules.push_back(parse_rule(g, r.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
  std::string prefix = a.output_prefix;
  if (prefix.empty() && cfg_json.contains("output_path")) {
    prefix = cfg_json.at("output_path").get<std::string>();
  }
  if (!a.sizes.empty()) cfg.sample_sizes = a.sizes;
  if (a.seeds > 0) cfg.seeds = a.seeds;
  if (a.bootstrap > 0) cfg.bootstrap_b = a.bootstrap;
  if (a.base_seed) cfg.base_seed = *a.base_seed;
  if (!a.rules.empty()) {
    cfg.rules.clear();
    for (const auto& r : a.rules) cfg.rules.push_back(parse_rule(g, r));
  }
  if (cfg.rules.empty()) cfg.rules = {{RuleKind::kFixedOptimal, {}}, {RuleKind::kAlgorithm1, {}}};
  cfg.validate();

  std::optional<std::ofstream> wide, tidy, plot, details;
  if (!prefix.empty()) {
    wide = open_output(prefix + "_wide.csv");
    tidy = open_output(prefix + "_tidy.csv");
    plot = open_output(prefix + "_plot.csv");
  }
  if (!a.details.empty()) details = open_output(a.details);

  const ExperimentResult r = run_experiment(*scm, cfg);
  for (const auto& [n, s] : r.ground_truth) {
    err << "n=" << n << ": exact MSE-optimal candidate " << format_set(g, s) << '\n';
  }
  for (const CellResult& c : r.cells) {
    if (c.invalid) {
      err << "cell " << c.rule.name(g) << " n=" << c.n << " flagged invalid: " << c.failures
          << " of " << c.seeds << " seeds failed\n";
    }
  }
  if (prefix.empty()) {
    write_tidy(out, r, g);
  } else {
    write_wide(*wide, r, g, cfg.sample_sizes);
    write_tidy(*tidy, r, g);
    write_plot(*plot, r, g);
    err << "wrote " << prefix << "_wide.csv, " << prefix << "_tidy.csv, " << prefix
        << "_plot.csv\n";
  }
  if (details) {
    *details << "rule,n,seed,ok,tau_hat,sq_error,chosen,error\n";
    for (const CellResult& c : r.cells) {
      for (std::size_t s = 0; s < c.per_seed.size(); ++s) {
        const SeedOutcome& o = c.per_seed[s];
        *details << c.rule.name(g) << ',' << c.n << ',' << s << ',' << (o.ok ? 1 : 0) << ','
                 << (o.ok ? format_number(o.tau_hat) : "NA") << ','
                 << (o.ok ? format_number(o.sq_error) : "NA") << ','
                 << (o.ok ? format_set(g, o.chosen) : "NA") << ",\"" << o.error << "\"\n";
      }
    }
  }
  return kExitOk;
}

// --- preset -----------------------------------------------------------------

int run_preset(const std::string& name, std::ostream& out) {
  if (name.empty()) {
    for (const auto& p : preset_names()) out << p << '\n';
    return kExitOk;
  }
  out << scm_to_json(preset_scm(name)).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariate adjustment sets for linear Gaussian causal models: classification, "
               "search-space pruning, exact MSE analysis, selection and simulation"};
  app.name(args.empty() ? "mse-adjust" : args.front());
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (default: MSE_ADJUST_THREADS or the core count)")
      ->check(CLI::NonNegativeNumber);

  ClassifyArgs classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "Partition the covariates; JSON on stdout");
  classify_args.model.add_to(classify_cmd);
  classify_cmd->add_flag("--force", classify_args.force, "Lift the covariate-count limit");

  PruneArgs prune_args;
  auto* prune_cmd = app.add_subcommand("prune", "Pruned candidate adjustment sets; JSON on stdout");
  prune_args.model.add_to(prune_cmd);
  prune_cmd->add_flag("--force", prune_args.force, "Lift the covariate-count limit");
  prune_cmd->add_flag("--prune-equal-size", prune_args.equal_size,
                      "Also drop valid sets of the same size as O");

  AnalyzeArgs analyze_args;
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Exact population MSE per candidate and sample size; CSV");
  analyze_args.model.add_to(analyze_cmd);
  analyze_cmd->add_option("--n", analyze_args.sizes, "Sample sizes, comma separated")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_flag("--long", analyze_args.long_format,
                        "One row per (set, n): set,bias,avar,n,fs_var,mse");
  analyze_cmd->add_flag("--all-sets", analyze_args.all_sets,
                        "Evaluate every covariate subset instead of the pruned candidates");
  analyze_cmd->add_flag("--argmin-all", analyze_args.argmin_all,
                        "List every tied MSE-optimal candidate on stderr");
  analyze_cmd->add_flag("--force", analyze_args.force, "Lift the covariate-count limit");

  CrossoverArgs crossover_args;
  auto* crossover_cmd = app.add_subcommand(
      "crossover", "First sample size at which the MSE ordering of two sets changes");
  crossover_args.model.add_to(crossover_cmd);
  crossover_cmd->add_option("--k", crossover_args.k, "First set, e.g. O1 or W1+O2 or {}")
      ->required();
  crossover_cmd->add_option("--l", crossover_args.l, "Second set")->required();
  crossover_cmd->add_option("--horizon", crossover_args.horizon, "Largest n scanned")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SelectArgs select_args;
  auto* select_cmd =
      app.add_subcommand("select", "Select an adjustment set from data and estimate the effect");
  select_args.model.add_to(select_cmd);
  select_cmd->add_option("--data", select_args.data, "CSV with a header row of node labels");
  select_cmd->add_option("--bootstrap", select_args.bootstrap, "Bootstrap resamples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  select_cmd->add_option("--seed", select_args.seed, "Random seed")->capture_default_str();
  select_cmd->add_option("--rule", select_args.rule, "algorithm-1 or min-variance")
      ->check(CLI::IsMember({"algorithm-1", "min-variance"}))
      ->capture_default_str();
  select_cmd->add_option("--audit", select_args.audit, "Write the per-candidate audit CSV here");
  select_cmd->add_flag("--force", select_args.force, "Lift the covariate-count limit");

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a dataset from a model; CSV on stdout");
  sample_args.model.add_to(sample_cmd);
  sample_cmd->add_option("--n", sample_args.n, "Rows")->check(CLI::PositiveNumber)
      ->capture_default_str();
  sample_cmd->add_option("--seed", sample_args.seed, "Random seed")->capture_default_str();

  SimulateArgs simulate_args;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Monte-Carlo comparison of selection rules");
  simulate_cmd->add_option("--config", simulate_args.config,
                           "Experiment JSON: preset|graph, sample_sizes, seeds, bootstrap_b, "
                           "rules, base_seed, output_path");
  simulate_args.model.add_to(simulate_cmd);
  simulate_cmd->add_option("--n", simulate_args.sizes, "Sample sizes, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seeds", simulate_args.seeds, "Replications per cell")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--bootstrap", simulate_args.bootstrap, "Bootstrap resamples")
      ->check(CLI::PositiveNumber);
  simulate_cmd
      ->add_option("--rules", simulate_args.rules,
                   "fixed-O, algorithm-1, min-variance, ground-truth-On, fixed:<set>")
      ->delimiter(',');
  simulate_cmd->add_option("--base-seed", simulate_args.base_seed, "Base random seed");
  simulate_cmd->add_option("--out", simulate_args.output_prefix,
                           "Write <prefix>_wide.csv, <prefix>_tidy.csv and <prefix>_plot.csv");
  simulate_cmd->add_option("--details", simulate_args.details,
                           "Write one row per (rule, n, seed) to this CSV");

  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Print a built-in model as graph JSON");
  preset_cmd->add_option("name", preset_name, "Preset name (omit to list them)");

  try {
    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();
    app.parse(std::move(rest));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (threads > 0) set_default_thread_count(static_cast<std::size_t>(threads));
    if (*classify_cmd) return run_classify(classify_args, out);
    if (*prune_cmd) return run_prune(prune_args, out);
    if (*analyze_cmd) return run_analyze(analyze_args, out, err);
    if (*crossover_cmd) return run_crossover(crossover_args, out);
    if (*select_cmd) return run_select(select_args, out);
    if (*sample_cmd) return run_sample(sample_args, out);
    if (*simulate_cmd) return run_simulate(simulate_args, out, err);
    if (*preset_cmd) return run_preset(preset_name, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace mse_adjust
