#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "contagion/graph.hpp"

namespace contagion {

enum class Aggregator { Average, Or };

std::string to_string(Aggregator a);
Aggregator parse_aggregator(const std::string& s);

// Latent confounder, one value in {-1, 0, 1} per node.
struct Covariates {
  std::vector<std::int8_t> values;

  std::size_t size() const { return values.size(); }
  bool valid() const;
};

struct BinnedCovariates {
  Covariates covariates;
  bool degenerate = false;  // input had zero variance
};

struct SimulationParams {
  double beta0 = 1.0;
  double beta1 = 0.0;
  double noise_sd = 1.0;
  Aggregator aggregator = Aggregator::Average;
  std::uint64_t seed = 0;
};

// T_i in {0,1}; observed[i] == 0 marks a treatment that was deleted and must
// not contribute to any neighbor's aggregate.
struct TreatmentVector {
  std::vector<std::uint8_t> value;
  std::vector<std::uint8_t> observed;

  std::size_t size() const { return value.size(); }
  static TreatmentVector constant(std::size_t n, std::uint8_t t);
};

struct AggregatedTreatment {
  std::vector<double> value;
  std::vector<std::uint8_t> eligible;

  std::size_t size() const { return value.size(); }
  std::size_t num_eligible() const;
};

struct OutcomeVector {
  std::vector<double> value;
  std::vector<std::uint8_t> defined;

  std::size_t size() const { return value.size(); }
};

// Standardizes, then assigns -1/0/+1 by empirical tertiles. A value goes to
// -1 if it is <= the ceil(n/3)-th smallest value, to 0 if <= the
// ceil(2n/3)-th smallest, else to +1, so ties land in the lower bin.
BinnedCovariates bin_covariate(std::span<const double> raw);

// g(c) = 0.5 + 0.35 c for c in {-1, 0, 1}.
double propensity(int c);

TreatmentVector draw_treatments(const Covariates& cov, std::uint64_t seed);

// V_i = mean (Average) or logical OR (Or) of the observed treatments of i's
// neighbors. Nodes without any observed neighbor treatment get V_i = 0 and
// are ineligible.
AggregatedTreatment aggregate_treatment(const Graph& g, const TreatmentVector& t,
                                        Aggregator aggregator);

// Y_i = beta0 V_i + beta1 g(C_i) + eps_i, eps_i ~ N(0, noise_sd^2). Every
// node gets an outcome; ineligible nodes are filtered by consumers.
OutcomeVector simulate_outcome_continuous(const AggregatedTreatment& v,
                                          const Covariates& cov,
                                          const SimulationParams& params,
                                          std::uint64_t seed);

struct SimulatedData {
  TreatmentVector treatments;
  AggregatedTreatment aggregated;
  OutcomeVector outcomes;
};

// Treatments and noise drawn from the "treatment" and "noise" sub-streams of
// params.seed.
SimulatedData simulate_continuous(const Graph& g, const Covariates& cov,
                                  const SimulationParams& params);

// Outcome-is-later-treatment design: a uniformly random half S of the nodes
// (floor(n/2) of them) gets Y_i = T_i and has T_i deleted. With
// surviving_only the aggregate is recomputed from the undeleted treatments;
// otherwise the full pre-deletion treatment vector is used. Estimation is
// restricted to S.
struct VaccinationData {
  TreatmentVector treatments;
  AggregatedTreatment aggregated;
  OutcomeVector outcomes;
  std::vector<NodeId> evaluation_nodes;  // S, ascending
};

VaccinationData vaccination_design(const Graph& g, const TreatmentVector& t,
                                   Aggregator aggregator, std::uint64_t seed,
                                   bool surviving_only = true);

// Ground truth (1/|E|) sum_{i in E} [beta0 v_i* + beta1 g(C_i)] over the
// eligible set E, where v_i* is the aggregate under T == t_star.
double oracle_estimand(const Graph& g, const Covariates& cov,
                       const SimulationParams& params, int t_star);

// Block identity as confounder: 1 block -> 0, 2 blocks -> {-1, 1},
// 3 blocks -> {-1, 0, 1}, more blocks -> tertiles of the block index. Each
// node's value is then replaced, with probability resample_rate, by a uniform
// draw from {-1, 0, 1}.
struct BlockConfounder {
  Covariates covariates;
  bool missing_level = false;  // some value of {-1,0,1} never occurs
};

BlockConfounder confounder_from_blocks(std::span<const std::uint32_t> block_of,
                                       std::size_t num_blocks, double resample_rate,
                                       std::uint64_t seed);

void write_covariates_csv(std::ostream& out, const Covariates& cov);
Covariates read_covariates_csv(std::istream& in);

// node_id,c,t,v,y,eligible; undefined t or y written as NA.
void write_dataset_csv(std::ostream& out, const Covariates& cov, const TreatmentVector& t,
                       const AggregatedTreatment& v, const OutcomeVector& y);

struct Dataset {
  Covariates covariates;
  TreatmentVector treatments;
  AggregatedTreatment aggregated;
  OutcomeVector outcomes;
};
Dataset read_dataset_csv(std::istream& in);

}  // namespace contagion
