#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "contagion/experiment.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

// Sparse-graph law-of-large-numbers study. For each n, `replicates` SBM graphs
// are drawn with i.i.d. uniform block labels and the expected degree held at
// mean_degree (so p scales as c/n); the confounder is the block identity.
struct LlnConfig {
  std::vector<std::size_t> n_grid{500, 1000, 2000, 4000};
  std::size_t replicates = 20;
  double mean_degree = 10.0;
  std::size_t num_blocks = 3;
  double within_fraction = 0.9;
  SimulationParams params{1.0, 10.0, 1.0, Aggregator::Average, 0};
  int level_t_star = 0;
  // M in Var(S_n / n) <= P(share) * M. Values <= 0 select the Popoviciu
  // bound (0.7 |beta1|)^2 / 4 on the per-node oracle term.
  double variance_bound = 0.0;
  std::size_t pair_sample_size = 1'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LlnStudyResult {
  std::vector<std::size_t> n_values;
  std::vector<double> variances;           // level estimand, across replicates
  std::vector<double> contrast_variances;  // psi(1) - psi(0), across replicates
  std::vector<double> shared_neighbor_probs;
  std::vector<double> variance_bounds;     // P(share) * M
  double variance_bound_m = 0.0;
  double fitted_log_slope = 0.0;           // slope of log variance on log n
};

LlnStudyResult lln_study(const LlnConfig& cfg);

void write_lln_csv(std::ostream& out, const LlnStudyResult& r);

// Table layout: rows Unadjusted / Parametric / Embedding, one column per cell,
// entries "mean ± stderr", failed cells marked "missing".
std::string bias_table_markdown(const std::vector<CellResult>& cells, Design design);

// confounder,beta1,estimator,mean,stderr,n_seeds
std::string bias_table_csv(const std::vector<CellResult>& cells);

}  // namespace contagion
