#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contagion/graph.hpp"
#include "contagion/relerm.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

enum class EstimatorKind { Embedding, Unadjusted, Parametric };

std::string to_string(EstimatorKind k);

using NodeSet = std::optional<std::span<const NodeId>>;

struct EstimateReport {
  EstimatorKind estimator = EstimatorKind::Embedding;
  double t_star_contrast = 0.0;  // psi(1) - psi(0)
  double psi_at_1 = 0.0;
  double psi_at_0 = 0.0;
  double std_error = 0.0;  // regression standard error (baselines only)
  std::size_t n_eligible = 0;
  std::uint64_t seed = 0;
};

// Aggregate under the constant intervention T == t_star.
AggregatedTreatment intervene_aggregate(const Graph& g, int t_star, Aggregator aggregator);

// Plug-in estimate: mean of m(v_i*, lambda_i) over eligible nodes, restricted
// to node_set when given. Throws std::invalid_argument on an empty set.
double psi_hat(const Graph& g, const ModelParams& params, int t_star, Aggregator aggregator,
               NodeSet node_set = std::nullopt);

EstimateReport embedding_estimate(const Graph& g, const ModelParams& params,
                                  Aggregator aggregator, NodeSet node_set = std::nullopt);

// Ordinary least squares with classical standard errors.
struct LinearFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_error;
  double residual_variance = 0.0;
  std::size_t n = 0;
};

// Throws std::domain_error when X does not have full column rank or has no
// residual degrees of freedom.
LinearFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct CoefficientEstimate {
  double coefficient = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  std::size_t n_used = 0;
  std::size_t dropped_columns = 0;  // collinear membership columns removed
};

// Rows entering a baseline regression: eligible v, defined y, in node_set.
std::vector<NodeId> regression_rows(const AggregatedTreatment& v, const OutcomeVector& y,
                                    NodeSet node_set);

// Slope of y on [1, v]. Throws std::domain_error on a constant v.
CoefficientEstimate unadjusted_ols(const AggregatedTreatment& v, const OutcomeVector& y,
                                   NodeSet node_set = std::nullopt);

// Community-membership proxy: the k leading eigenvectors of
// D^{-1/2} A D^{-1/2}, one row per node, each row scaled to unit length
// (rows of isolated nodes stay zero). Column signs are fixed so the entry of
// largest magnitude is positive.
Eigen::MatrixXd spectral_memberships(const Graph& g, std::size_t k);

std::size_t default_community_count(std::size_t n, std::size_t dim);

// Coefficient of v in the regression of y on [1, v, memberships]. Membership
// columns collinear with earlier columns are dropped and counted.
CoefficientEstimate parametric_baseline(const Graph& g, const AggregatedTreatment& v,
                                        const OutcomeVector& y, std::size_t k,
                                        NodeSet node_set = std::nullopt);

// Same regression with precomputed memberships (n x k).
CoefficientEstimate parametric_baseline(const Eigen::MatrixXd& memberships,
                                        const AggregatedTreatment& v, const OutcomeVector& y,
                                        NodeSet node_set = std::nullopt);

// "estimator,confounder_label,beta1,estimate,seed"
std::string estimate_csv_header();
std::string estimate_csv_row(const EstimateReport& r, const std::string& confounder_label,
                             double beta1);

}  // namespace contagion
