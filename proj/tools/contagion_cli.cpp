// contagion: generate SBM graphs, simulate confounded peer-contagion data,
// train embeddings, estimate, and run the semi-synthetic benchmark.
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "contagion/diagnostics.hpp"
#include "contagion/estimators.hpp"
#include "contagion/experiment.hpp"
#include "contagion/graph.hpp"
#include "contagion/relerm.hpp"
#include "contagion/rng.hpp"
#include "contagion/sampler.hpp"
#include "contagion/sbm.hpp"
#include "contagion/simulate.hpp"

namespace fs = std::filesystem;
using namespace contagion;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "out";
  bool dry_run = false;
};

struct GenerateOpts {
  std::size_t n = 2000;
  std::size_t blocks = 3;
  double mean_degree = 20.0;
  double within_fraction = 0.9;
  double resample_rate = 0.0;
};

struct SimulateOpts {
  std::string graph;
  std::string covariates;
  std::string design = "continuous";
  double beta0 = 1.0;
  double beta1 = 0.0;
  double noise_sd = 1.0;
  std::string aggregator = "average";
  bool all_treatments = false;
};

struct TrainOpts {
  std::string graph;
  std::string dataset;
  SamplerConfig sampler = benchmark_sampler_config();
  TrainConfig train = benchmark_train_config();
  std::string schedule = to_string(benchmark_train_config().schedule);
};

struct EstimateOpts {
  std::string graph;
  std::string dataset;
  std::string params;
  std::string nodes;
  std::string aggregator = "average";
  std::size_t communities = 0;
  std::string label = "user";
  double beta1 = 0.0;
};

struct ExperimentOpts {
  ExperimentConfig cfg;
  std::string design = "continuous";
  std::string aggregator = "average";
  std::string schedule = to_string(benchmark_train_config().schedule);
  bool all_treatments = false;
  std::vector<std::string> confounders{"block:0", "block_r25:0.25", "block_r50:0.5"};
};

struct LlnOpts {
  LlnConfig cfg;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void add_training_options(CLI::App* sub, SamplerConfig& s, TrainConfig& t,
                          std::string& schedule) {
  sub->add_option("--walk-length", s.walk_length, "Random-walk steps per sample")
      ->capture_default_str();
  sub->add_option("--negatives", s.negatives_per_positive, "Negatives per positive pair")
      ->capture_default_str();
  sub->add_option("--window", s.window, "Positive pairs span up to this many walk steps")
      ->capture_default_str();
  sub->add_option("--q", t.q, "Outcome-loss weight in [0,1]")->capture_default_str();
  sub->add_option("--lr", t.learning_rate, "SGD learning rate")->capture_default_str();
  sub->add_option("--schedule", schedule, "Learning-rate schedule: constant or linear")
      ->capture_default_str();
  sub->add_option("--min-lr-fraction", t.min_lr_fraction,
                  "Final learning rate of the linear schedule, as a fraction")
      ->capture_default_str();
  sub->add_option("--steps", t.steps, "SGD steps")->capture_default_str();
  sub->add_option("--dim", t.dim, "Embedding dimension")->capture_default_str();
  sub->add_option("--init-scale", t.init_scale, "Standard deviation of initial embeddings")
      ->capture_default_str();
  sub->add_option("--eval-every", t.eval_every, "Held-out loss interval in steps (0: ends only)")
      ->capture_default_str();
}

fs::path prepare_out(const Globals& g) {
  fs::path dir(g.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

std::ifstream open_in(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + p + "'");
  return f;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

Covariates load_covariates(const std::string& path, std::size_t n) {
  auto in = open_in(path);
  auto cov = read_covariates_csv(in);
  if (cov.size() != n) throw UsageError("covariates file does not match the graph's node count");
  return cov;
}

Dataset load_dataset(const std::string& path, std::size_t n) {
  auto in = open_in(path);
  auto ds = read_dataset_csv(in);
  if (ds.outcomes.size() != n) throw UsageError("dataset does not match the graph's node count");
  return ds;
}

std::vector<NodeId> load_nodes(const std::string& path, std::size_t n) {
  auto in = open_in(path);
  std::vector<NodeId> nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t pos = 0;
    unsigned long long id = 0;
    try {
      id = std::stoull(line, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != line.size() || id >= n) {
      throw ParseError(lineno, "expected a node id below " + std::to_string(n));
    }
    nodes.push_back(static_cast<NodeId>(id));
  }
  return nodes;
}

std::vector<ConfounderVariant> parse_confounders(const std::vector<std::string>& specs) {
  std::vector<ConfounderVariant> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos || colon == 0) {
      throw UsageError("confounder '" + s + "' is not of the form label:rate");
    }
    ConfounderVariant v;
    v.label = s.substr(0, colon);
    try {
      std::size_t pos = 0;
      v.resample_rate = std::stod(s.substr(colon + 1), &pos);
      if (pos != s.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("confounder '" + s + "' has a malformed rate");
    }
    out.push_back(v);
  }
  return out;
}

int cmd_generate(const Globals& g, const GenerateOpts& o) {
  if (o.n == 0) throw UsageError("generate: n must be >= 1");
  if (o.blocks == 0) throw UsageError("generate: blocks must be >= 1");
  const auto spec = planted_partition_by_degree(o.n, o.blocks, o.mean_degree, o.within_fraction);
  spec.validate();
  if (g.dry_run) return 0;
  const auto graph = sbm_generate(spec, derive_seed(g.seed, "graph"));
  const auto conf = confounder_from_blocks(spec.block_of, spec.num_blocks(), o.resample_rate,
                                           derive_seed(g.seed, "confounder"));
  if (conf.missing_level) {
    std::cerr << "warning: covariate levels do not cover {-1, 0, 1} with " << o.blocks
              << " block(s)\n";
  }
  const auto dir = prepare_out(g);
  save_edge_list((dir / "graph.edges").string(), graph);
  auto cov_out = open_out(dir / "covariates.csv");
  write_covariates_csv(cov_out, conf.covariates);
  std::cout << summarize(graph).to_string() << '\n';
  return 0;
}

int cmd_simulate(const Globals& g, const SimulateOpts& o) {
  require(o.graph, "--graph");
  require(o.covariates, "--covariates");
  const Design design = parse_design(o.design);
  SimulationParams params;
  params.beta0 = o.beta0;
  params.beta1 = o.beta1;
  params.noise_sd = o.noise_sd;
  params.aggregator = parse_aggregator(o.aggregator);
  params.seed = derive_seed(g.seed, "data");
  if (!(params.noise_sd >= 0.0)) throw UsageError("simulate: noise-sd must be >= 0");
  if (g.dry_run) return 0;

  const auto loaded = load_edge_list(o.graph);
  const auto cov = load_covariates(o.covariates, loaded.graph.num_nodes());
  const auto dir = prepare_out(g);
  auto out = open_out(dir / "dataset.csv");
  if (design == Design::Continuous) {
    const auto sim = simulate_continuous(loaded.graph, cov, params);
    write_dataset_csv(out, cov, sim.treatments, sim.aggregated, sim.outcomes);
    std::cout << "oracle_contrast="
              << oracle_estimand(loaded.graph, cov, params, 1) -
                     oracle_estimand(loaded.graph, cov, params, 0)
              << '\n';
  } else {
    const auto t = draw_treatments(cov, derive_seed(params.seed, "treatment"));
    const auto vac = vaccination_design(loaded.graph, t, params.aggregator,
                                        derive_seed(g.seed, "split"), !o.all_treatments);
    write_dataset_csv(out, cov, vac.treatments, vac.aggregated, vac.outcomes);
    auto nodes = open_out(dir / "evaluation_nodes.txt");
    for (NodeId i : vac.evaluation_nodes) nodes << i << '\n';
    std::cout << "evaluation_nodes=" << vac.evaluation_nodes.size() << '\n';
  }
  return 0;
}

int cmd_train(const Globals& g, TrainOpts o) {
  require(o.graph, "--graph");
  require(o.dataset, "--dataset");
  o.train.schedule = parse_schedule(o.schedule);
  o.train.seed = g.seed;
  o.sampler.validate();
  o.train.validate();
  if (g.dry_run) return 0;

  const auto loaded = load_edge_list(o.graph);
  const auto ds = load_dataset(o.dataset, loaded.graph.num_nodes());
  const auto result = train(loaded.graph, ds.aggregated, ds.outcomes, o.sampler, o.train);
  const auto dir = prepare_out(g);
  save_params((dir / "params.txt").string(), result.params);
  auto log = open_out(dir / "train_log.csv");
  log << "step,eval_loss\n";
  for (std::size_t k = 0; k < result.eval_steps.size(); ++k) {
    log << result.eval_steps[k] << ',' << result.eval_losses[k] << '\n';
  }
  std::cout << "w_v=" << result.params.head.w_v << '\n';
  return 0;
}

int cmd_estimate(const Globals& g, const EstimateOpts& o) {
  require(o.graph, "--graph");
  require(o.dataset, "--dataset");
  require(o.params, "--params");
  const Aggregator agg = parse_aggregator(o.aggregator);
  if (g.dry_run) return 0;

  const auto loaded = load_edge_list(o.graph);
  const std::size_t n = loaded.graph.num_nodes();
  const auto ds = load_dataset(o.dataset, n);
  const auto params = load_params(o.params, n);
  std::vector<NodeId> nodes;
  NodeSet node_set = std::nullopt;
  if (!o.nodes.empty()) {
    nodes = load_nodes(o.nodes, n);
    node_set = std::span<const NodeId>(nodes);
  }

  std::vector<EstimateReport> reports;
  auto emb = embedding_estimate(loaded.graph, params, agg, node_set);
  emb.seed = g.seed;
  reports.push_back(emb);

  EstimateReport un;
  un.estimator = EstimatorKind::Unadjusted;
  const auto u = unadjusted_ols(ds.aggregated, ds.outcomes, node_set);
  un.t_star_contrast = u.coefficient;
  un.std_error = u.std_error;
  un.n_eligible = u.n_used;
  un.seed = g.seed;
  reports.push_back(un);

  EstimateReport pa;
  pa.estimator = EstimatorKind::Parametric;
  const std::size_t k =
      o.communities > 0 ? o.communities : default_community_count(n, params.dim());
  const auto p = parametric_baseline(loaded.graph, ds.aggregated, ds.outcomes, k, node_set);
  if (p.dropped_columns > 0) {
    std::cerr << "warning: dropped " << p.dropped_columns << " collinear membership column(s)\n";
  }
  pa.t_star_contrast = p.coefficient;
  pa.std_error = p.std_error;
  pa.n_eligible = p.n_used;
  pa.seed = g.seed;
  reports.push_back(pa);

  const auto dir = prepare_out(g);
  auto out = open_out(dir / "estimates.csv");
  out << estimate_csv_header() << '\n';
  std::cout << estimate_csv_header() << '\n';
  for (const auto& r : reports) {
    const auto row = estimate_csv_row(r, o.label, o.beta1);
    out << row << '\n';
    std::cout << row << '\n';
  }
  return 0;
}

int cmd_experiment(const Globals& g, ExperimentOpts o) {
  auto& cfg = o.cfg;
  cfg.design = parse_design(o.design);
  cfg.aggregator = parse_aggregator(o.aggregator);
  cfg.train.schedule = parse_schedule(o.schedule);
  cfg.surviving_only = !o.all_treatments;
  cfg.confounders = parse_confounders(o.confounders);
  cfg.seed = g.seed;
  cfg.validate();
  if (g.dry_run) return 0;

  const auto cells = run_experiment(cfg);
  const auto dir = prepare_out(g);
  {
    auto md = open_out(dir / "bias_table.md");
    md << bias_table_markdown(cells, cfg.design);
    auto csv = open_out(dir / "bias_table.csv");
    csv << bias_table_csv(cells);
    auto est = open_out(dir / "estimates.csv");
    est << estimate_csv_header() << '\n';
    for (const auto& c : cells) {
      auto emit = [&](EstimatorKind kind, const std::optional<EstimatorSummary>& s) {
        if (!s) return;
        for (std::size_t k = 0; k < s->values.size(); ++k) {
          EstimateReport r;
          r.estimator = kind;
          r.t_star_contrast = s->values[k];
          r.seed = kind == EstimatorKind::Embedding ? derive_seed(cfg.seed, "train", k) : cfg.seed;
          est << estimate_csv_row(r, c.confounder, c.beta1) << '\n';
        }
      };
      emit(EstimatorKind::Unadjusted, c.unadjusted);
      emit(EstimatorKind::Parametric, c.parametric);
      emit(EstimatorKind::Embedding, c.embedding);
    }
  }
  std::cout << bias_table_markdown(cells, cfg.design);
  int failed = 0;
  for (const auto& c : cells) {
    if (!c.error.empty()) {
      ++failed;
      std::cerr << "cell " << c.confounder << " beta1=" << c.beta1 << ": " << c.error << '\n';
    }
  }
  return failed == 0 ? 0 : 2;
}

int cmd_lln(const Globals& g, LlnOpts o) {
  o.cfg.seed = g.seed;
  o.cfg.validate();
  if (g.dry_run) return 0;
  const auto r = lln_study(o.cfg);
  const auto dir = prepare_out(g);
  auto out = open_out(dir / "lln.csv");
  write_lln_csv(out, r);
  write_lln_csv(std::cout, r);
  std::cout << "fitted_log_slope=" << r.fitted_log_slope << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-contagion estimation under latent homophily"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file; flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  app.add_option("--seed", g.seed, "Global seed; every random stream derives from it")
      ->capture_default_str();
  app.add_option("-o,--out", g.out, "Output directory (created if missing)")
      ->capture_default_str();
  app.add_flag("--dry-run", g.dry_run, "Print the resolved configuration and exit");

  GenerateOpts gen;
  auto* s_gen = app.add_subcommand("generate", "Generate a planted-partition SBM and covariates");
  s_gen->add_option("--n", gen.n, "Number of nodes")->capture_default_str();
  s_gen->add_option("--blocks", gen.blocks, "Number of equal-size blocks")->capture_default_str();
  s_gen->add_option("--mean-degree", gen.mean_degree, "Expected mean degree")
      ->capture_default_str();
  s_gen->add_option("--within-fraction", gen.within_fraction,
                    "Expected fraction of a node's edges inside its block")
      ->capture_default_str();
  s_gen->add_option("--resample-rate", gen.resample_rate,
                    "Probability of replacing a node's covariate by a uniform draw")
      ->capture_default_str();

  SimulateOpts sim;
  auto* s_sim = app.add_subcommand("simulate", "Simulate treatments and outcomes on a graph");
  s_sim->add_option("--graph", sim.graph, "Edge-list file");
  s_sim->add_option("--covariates", sim.covariates, "node_id,c CSV");
  s_sim->add_option("--design", sim.design, "continuous or vaccination")->capture_default_str();
  s_sim->add_option("--beta0", sim.beta0, "Peer-influence coefficient")->capture_default_str();
  s_sim->add_option("--beta1", sim.beta1, "Confounding coefficient")->capture_default_str();
  s_sim->add_option("--noise-sd", sim.noise_sd, "Outcome noise standard deviation")
      ->capture_default_str();
  s_sim->add_option("--aggregator", sim.aggregator, "average or or")->capture_default_str();
  s_sim->add_flag("--all-treatments", sim.all_treatments,
                  "Vaccination: aggregate the pre-deletion treatments");

  TrainOpts tr;
  auto* s_train = app.add_subcommand("train", "Fit embeddings and the outcome head");
  s_train->add_option("--graph", tr.graph, "Edge-list file");
  s_train->add_option("--dataset", tr.dataset, "Dataset CSV from simulate");
  add_training_options(s_train, tr.sampler, tr.train, tr.schedule);

  EstimateOpts est;
  auto* s_est = app.add_subcommand("estimate", "Evaluate all estimators on a trained model");
  s_est->add_option("--graph", est.graph, "Edge-list file");
  s_est->add_option("--dataset", est.dataset, "Dataset CSV from simulate");
  s_est->add_option("--params", est.params, "Parameters written by train");
  s_est->add_option("--nodes", est.nodes, "Restrict estimation to node ids listed one per line");
  s_est->add_option("--aggregator", est.aggregator, "average or or")->capture_default_str();
  s_est->add_option("--communities", est.communities,
                    "Spectral communities for the parametric baseline (0: automatic)")
      ->capture_default_str();
  s_est->add_option("--label", est.label, "Confounder label written to the CSV")
      ->capture_default_str();
  s_est->add_option("--beta1", est.beta1, "Confounding level written to the CSV")
      ->capture_default_str();

  ExperimentOpts ex;
  auto* s_ex = app.add_subcommand("experiment", "Run the semi-synthetic benchmark grid");
  s_ex->add_option("--n", ex.cfg.n, "Number of nodes")->capture_default_str();
  s_ex->add_option("--blocks", ex.cfg.num_blocks, "Number of SBM blocks")->capture_default_str();
  s_ex->add_option("--mean-degree", ex.cfg.mean_degree, "Expected mean degree")
      ->capture_default_str();
  s_ex->add_option("--within-fraction", ex.cfg.within_fraction,
                   "Expected fraction of within-block edges")
      ->capture_default_str();
  s_ex->add_option("--edge-list", ex.cfg.edge_list_path, "Use this graph instead of an SBM");
  s_ex->add_option("--covariates", ex.cfg.covariates_path, "Covariates for --edge-list");
  s_ex->add_option("--design", ex.design, "continuous or vaccination")->capture_default_str();
  s_ex->add_option("--beta0", ex.cfg.beta0, "Peer-influence coefficient")->capture_default_str();
  s_ex->add_option("--beta1", ex.cfg.beta1_grid, "Confounding levels")->capture_default_str();
  s_ex->add_option("--noise-sd", ex.cfg.noise_sd, "Outcome noise standard deviation")
      ->capture_default_str();
  s_ex->add_option("--aggregator", ex.aggregator, "average or or")->capture_default_str();
  s_ex->add_flag("--all-treatments", ex.all_treatments,
                 "Vaccination: aggregate the pre-deletion treatments");
  s_ex->add_option("--confounder", ex.confounders, "Confounder variants as label:resample_rate")
      ->capture_default_str();
  s_ex->add_option("--communities", ex.cfg.communities,
                   "Spectral communities for the parametric baseline (0: automatic)")
      ->capture_default_str();
  s_ex->add_option("--n-seeds", ex.cfg.n_seeds, "Training seeds per cell")->capture_default_str();
  add_training_options(s_ex, ex.cfg.sampler, ex.cfg.train, ex.schedule);

  LlnOpts lln;
  auto* s_lln = app.add_subcommand("lln-check", "Variance of the oracle estimand versus n");
  s_lln->add_option("--sizes", lln.cfg.n_grid, "Increasing graph sizes")->capture_default_str();
  s_lln->add_option("--replicates", lln.cfg.replicates, "Graphs per size")->capture_default_str();
  s_lln->add_option("--mean-degree", lln.cfg.mean_degree, "Expected degree c (p = c/n)")
      ->capture_default_str();
  s_lln->add_option("--blocks", lln.cfg.num_blocks, "Number of blocks")->capture_default_str();
  s_lln->add_option("--within-fraction", lln.cfg.within_fraction,
                    "Expected fraction of within-block edges")
      ->capture_default_str();
  s_lln->add_option("--beta0", lln.cfg.params.beta0, "Peer-influence coefficient")
      ->capture_default_str();
  s_lln->add_option("--beta1", lln.cfg.params.beta1, "Confounding coefficient")
      ->capture_default_str();
  s_lln->add_option("--t-star", lln.cfg.level_t_star, "Level estimand's intervention (0 or 1)")
      ->capture_default_str();
  s_lln->add_option("--variance-bound", lln.cfg.variance_bound,
                    "Constant M of the bound P(share) * M (0: automatic)")
      ->capture_default_str();
  s_lln->add_option("--pair-samples", lln.cfg.pair_sample_size,
                    "Pairs sampled for the shared-neighbor probability")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::string resolved = "seed=" + std::to_string(g.seed) + "\nout=\"" + g.out + "\"\n";
    for (const auto* sub : app.get_subcommands()) {
      resolved += "\n[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
    }
    if (g.dry_run) {
      std::cout << resolved;
    } else {
      const auto dir = prepare_out(g);
      auto f = open_out(dir / "resolved_config.toml");
      f << resolved;
    }
    if (s_gen->parsed()) return cmd_generate(g, gen);
    if (s_sim->parsed()) return cmd_simulate(g, sim);
    if (s_train->parsed()) return cmd_train(g, tr);
    if (s_est->parsed()) return cmd_estimate(g, est);
    if (s_ex->parsed()) return cmd_experiment(g, ex);
    if (s_lln->parsed()) return cmd_lln(g, lln);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
