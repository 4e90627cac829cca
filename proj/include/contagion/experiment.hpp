#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "contagion/estimators.hpp"
#include "contagion/graph.hpp"
#include "contagion/relerm.hpp"
#include "contagion/sampler.hpp"
#include "contagion/sbm.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

enum class Design { Continuous, Vaccination };

std::string to_string(Design d);
Design parse_design(const std::string& s);

// A latent-confounder variant: SBM block identity with each node's value
// resampled uniformly with probability resample_rate. Larger rates make the
// confounder less predictive of edges.
struct ConfounderVariant {
  std::string label;
  double resample_rate = 0.0;
};

std::vector<ConfounderVariant> default_confounder_variants();

// Settings used by the desk-scale benchmark: one negative per positive,
// d = 32, q = 0.2, learning rate 0.02 decayed linearly over 100000 steps.
// With the library defaults the outcome term diverges on n = 2000 graphs.
SamplerConfig benchmark_sampler_config();
TrainConfig benchmark_train_config();

// Everything needed to run the semi-synthetic benchmark.
struct ExperimentConfig {
  // Generated graph (ignored when edge_list_path is set).
  std::size_t n = 2000;
  std::size_t num_blocks = 3;
  double mean_degree = 20.0;
  double within_fraction = 0.9;
  // Optional user graph; then covariates_path must name a node_id,c CSV and
  // the confounder variants only control resampling.
  std::string edge_list_path;
  std::string covariates_path;

  Design design = Design::Continuous;
  double beta0 = 1.0;
  double noise_sd = 1.0;
  Aggregator aggregator = Aggregator::Average;
  bool surviving_only = true;
  std::vector<double> beta1_grid{0.0, 1.0, 10.0};
  std::vector<ConfounderVariant> confounders = default_confounder_variants();

  // Benchmark training settings; they differ from the library defaults (see
  // benchmark_sampler_config / benchmark_train_config).
  SamplerConfig sampler = benchmark_sampler_config();
  TrainConfig train = benchmark_train_config();
  std::size_t communities = 0;  // 0 -> default_community_count(n, train.dim)
  std::size_t n_seeds = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

// Graph plus per-node block labels (empty for user graphs), and the cached
// spectral memberships used by the parametric baseline.
struct PreparedGraph {
  Graph graph;
  std::vector<std::uint32_t> block_of;
  std::size_t num_blocks = 0;
  Covariates user_covariates;  // only for user-supplied graphs
  Eigen::MatrixXd memberships;
};

PreparedGraph prepare_graph(const ExperimentConfig& cfg);

// Observed data for one cell: what the estimators see, plus the ground truth.
struct CellData {
  Covariates covariates;
  TreatmentVector treatments;
  AggregatedTreatment aggregated;
  OutcomeVector outcomes;
  std::optional<std::vector<NodeId>> evaluation_nodes;
  double oracle_contrast = 0.0;
};

CellData simulate_cell(const PreparedGraph& pg, const ExperimentConfig& cfg,
                       std::size_t variant_index, double beta1);

struct EstimatorSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_seeds = 0;
  std::vector<double> values;
};

struct CellResult {
  std::string confounder;
  double beta1 = 0.0;
  double oracle_contrast = 0.0;
  std::optional<EstimatorSummary> unadjusted;
  std::optional<EstimatorSummary> parametric;
  std::optional<EstimatorSummary> embedding;
  std::string error;  // non-empty when any estimator failed
};

// Trains one embedding model on the cell's data with the given training seed
// and returns the plug-in contrast report.
EstimateReport run_embedding(const PreparedGraph& pg, const CellData& data,
                             const ExperimentConfig& cfg, std::uint64_t train_seed);

// Seed-variation protocol: the data are simulated once; the embedding
// estimator is retrained with n_seeds training seeds and summarized by mean and
// standard error across seeds; each baseline is fitted once and reported with
// the standard error of its regression coefficient.
CellResult seed_study(const PreparedGraph& pg, const ExperimentConfig& cfg,
                      std::size_t variant_index, double beta1, std::size_t n_seeds);

// Full grid (confounder variant x beta1).
std::vector<CellResult> run_experiment(const ExperimentConfig& cfg);

}  // namespace contagion
