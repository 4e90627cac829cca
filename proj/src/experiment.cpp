#include "contagion/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "contagion/rng.hpp"

namespace contagion {

std::string to_string(Design d) { return d == Design::Continuous ? "continuous" : "vaccination"; }

Design parse_design(const std::string& s) {
  if (s == "continuous") return Design::Continuous;
  if (s == "vaccination") return Design::Vaccination;
  throw std::invalid_argument("unknown design '" + s + "' (expected continuous|vaccination)");
}

std::vector<ConfounderVariant> default_confounder_variants() {
  return {{"block", 0.0}, {"block_r25", 0.25}, {"block_r50", 0.5}};
}

SamplerConfig benchmark_sampler_config() {
  SamplerConfig s;
  s.walk_length = 40;
  s.negatives_per_positive = 1;
  return s;
}

TrainConfig benchmark_train_config() {
  TrainConfig t;
  t.q = 0.2;
  t.learning_rate = 0.02;
  t.schedule = LearningRateSchedule::Linear;
  t.steps = 100000;
  t.dim = 32;
  return t;
}

void ExperimentConfig::validate() const {
  if (edge_list_path.empty()) {
    if (n < 2) throw std::invalid_argument("experiment: n must be >= 2");
    if (num_blocks < 1) throw std::invalid_argument("experiment: num_blocks must be >= 1");
    if (!(mean_degree > 0.0)) throw std::invalid_argument("experiment: mean_degree must be > 0");
  } else if (covariates_path.empty()) {
    throw std::invalid_argument("experiment: an edge list requires a covariates file");
  }
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("experiment: noise_sd must be >= 0");
  if (beta1_grid.empty()) throw std::invalid_argument("experiment: empty beta1 grid");
  if (confounders.empty()) throw std::invalid_argument("experiment: no confounder variants");
  for (const auto& c : confounders) {
    if (c.label.empty()) throw std::invalid_argument("experiment: confounder label is empty");
    if (!(c.resample_rate >= 0.0 && c.resample_rate <= 1.0)) {
      throw std::invalid_argument("experiment: resample rate outside [0,1]");
    }
  }
  if (n_seeds < 1) throw std::invalid_argument("experiment: n_seeds must be >= 1");
  sampler.validate();
  train.validate();
}

PreparedGraph prepare_graph(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedGraph pg;
  if (cfg.edge_list_path.empty()) {
    const auto spec =
        planted_partition_by_degree(cfg.n, cfg.num_blocks, cfg.mean_degree, cfg.within_fraction);
    pg.graph = sbm_generate(spec, derive_seed(cfg.seed, "graph"));
    pg.block_of = spec.block_of;
    pg.num_blocks = spec.num_blocks();
  } else {
    pg.graph = load_edge_list(cfg.edge_list_path).graph;
    std::ifstream in(cfg.covariates_path);
    if (!in) throw std::runtime_error("cannot open covariates '" + cfg.covariates_path + "'");
    pg.user_covariates = read_covariates_csv(in);
    if (pg.user_covariates.size() != pg.graph.num_nodes()) {
      throw std::invalid_argument("covariates file does not match the graph's node count");
    }
  }
  const std::size_t k = cfg.communities > 0
                            ? cfg.communities
                            : default_community_count(pg.graph.num_nodes(), cfg.train.dim);
  pg.memberships = spectral_memberships(pg.graph, k);
  return pg;
}

CellData simulate_cell(const PreparedGraph& pg, const ExperimentConfig& cfg,
                       std::size_t variant_index, double beta1) {
  const auto& variant = cfg.confounders.at(variant_index);
  const auto conf_seed = derive_seed(cfg.seed, "confounder", variant_index);
  CellData d;
  if (pg.block_of.empty()) {
    d.covariates = pg.user_covariates;
    if (variant.resample_rate > 0.0) {
      Rng rng(conf_seed);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::uniform_int_distribution<int> level(-1, 1);
      for (auto& c : d.covariates.values) {
        const bool resample = unif(rng) < variant.resample_rate;
        const int draw = level(rng);
        if (resample) c = static_cast<std::int8_t>(draw);
      }
    }
  } else {
    d.covariates =
        confounder_from_blocks(pg.block_of, pg.num_blocks, variant.resample_rate, conf_seed)
            .covariates;
  }

  SimulationParams params;
  params.beta0 = cfg.beta0;
  params.beta1 = beta1;
  params.noise_sd = cfg.noise_sd;
  params.aggregator = cfg.aggregator;
  params.seed = derive_seed(cfg.seed, "data");

  if (cfg.design == Design::Continuous) {
    auto sim = simulate_continuous(pg.graph, d.covariates, params);
    d.treatments = std::move(sim.treatments);
    d.aggregated = std::move(sim.aggregated);
    d.outcomes = std::move(sim.outcomes);
    d.oracle_contrast = oracle_estimand(pg.graph, d.covariates, params, 1) -
                        oracle_estimand(pg.graph, d.covariates, params, 0);
  } else {
    const auto t = draw_treatments(d.covariates, derive_seed(params.seed, "treatment"));
    auto vac = vaccination_design(pg.graph, t, cfg.aggregator, derive_seed(cfg.seed, "split"),
                                  cfg.surviving_only);
    d.treatments = std::move(vac.treatments);
    d.aggregated = std::move(vac.aggregated);
    d.outcomes = std::move(vac.outcomes);
    d.evaluation_nodes = std::move(vac.evaluation_nodes);
    d.oracle_contrast = 0.0;  // Y_i = T_i: no neighbor treatment enters any outcome
  }
  return d;
}

EstimateReport run_embedding(const PreparedGraph& pg, const CellData& data,
                             const ExperimentConfig& cfg, std::uint64_t train_seed) {
  TrainConfig tc = cfg.train;
  tc.seed = train_seed;
  const auto trained = train(pg.graph, data.aggregated, data.outcomes, cfg.sampler, tc);
  NodeSet nodes = std::nullopt;
  if (data.evaluation_nodes) nodes = std::span<const NodeId>(*data.evaluation_nodes);
  auto report = embedding_estimate(pg.graph, trained.params, cfg.aggregator, nodes);
  report.seed = train_seed;
  return report;
}

namespace {

EstimatorSummary summarize_values(std::vector<double> values) {
  EstimatorSummary s;
  s.n_seeds = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double x : values) ss += (x - s.mean) * (x - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.std_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  s.values = std::move(values);
  return s;
}

EstimatorSummary from_regression(const CoefficientEstimate& c) {
  return {c.coefficient, c.std_error, 1, {c.coefficient}};
}

void append_error(std::string& err, const std::string& what) {
  if (!err.empty()) err += "; ";
  err += what;
}

}  // namespace

CellResult seed_study(const PreparedGraph& pg, const ExperimentConfig& cfg,
                      std::size_t variant_index, double beta1, std::size_t n_seeds) {
  if (n_seeds < 1) throw std::invalid_argument("seed_study: n_seeds must be >= 1");
  CellResult cell;
  cell.confounder = cfg.confounders.at(variant_index).label;
  cell.beta1 = beta1;
  CellData data;
  try {
    data = simulate_cell(pg, cfg, variant_index, beta1);
  } catch (const std::exception& e) {
    cell.error = std::string("simulation: ") + e.what();
    return cell;
  }
  cell.oracle_contrast = data.oracle_contrast;
  NodeSet nodes = std::nullopt;
  if (data.evaluation_nodes) nodes = std::span<const NodeId>(*data.evaluation_nodes);

  try {
    cell.unadjusted = from_regression(unadjusted_ols(data.aggregated, data.outcomes, nodes));
  } catch (const std::exception& e) {
    append_error(cell.error, std::string("unadjusted: ") + e.what());
  }
  try {
    cell.parametric =
        from_regression(parametric_baseline(pg.memberships, data.aggregated, data.outcomes, nodes));
  } catch (const std::exception& e) {
    append_error(cell.error, std::string("parametric: ") + e.what());
  }
  try {
    std::vector<double> contrasts;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      contrasts.push_back(
          run_embedding(pg, data, cfg, derive_seed(cfg.seed, "train", s)).t_star_contrast);
    }
    cell.embedding = summarize_values(std::move(contrasts));
  } catch (const std::exception& e) {
    append_error(cell.error, std::string("embedding: ") + e.what());
  }
  return cell;
}

std::vector<CellResult> run_experiment(const ExperimentConfig& cfg) {
  const auto pg = prepare_graph(cfg);
  std::vector<CellResult> cells;
  // The vaccination design has no confounding coefficient: one cell per variant.
  const std::vector<double> grid =
      cfg.design == Design::Vaccination ? std::vector<double>{0.0} : cfg.beta1_grid;
  for (std::size_t v = 0; v < cfg.confounders.size(); ++v) {
    for (double beta1 : grid) cells.push_back(seed_study(pg, cfg, v, beta1, cfg.n_seeds));
  }
  return cells;
}

}  // namespace contagion
