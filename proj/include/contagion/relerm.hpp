#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "contagion/graph.hpp"
#include "contagion/sampler.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Linear vertex conditional outcome model m(v, lambda) = w_v v + w . lambda + b.
struct OutcomeHead {
  double w_v = 0.0;
  Eigen::VectorXd w;
  double b = 0.0;
};

struct ModelParams {
  EmbeddingMatrix embeddings;  // n x d, row i is lambda_i
  OutcomeHead head;

  std::size_t num_nodes() const { return static_cast<std::size_t>(embeddings.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(embeddings.cols()); }
  bool all_finite() const;

  // Embeddings i.i.d. N(0, init_scale^2), head at zero.
  static ModelParams initialize(std::size_t n, std::size_t d, double init_scale,
                                std::uint64_t seed);
};

enum class LearningRateSchedule { Constant, Linear };

std::string to_string(LearningRateSchedule s);
LearningRateSchedule parse_schedule(const std::string& s);

struct TrainConfig {
  double q = 1.0;
  double learning_rate = 0.025;
  // Linear decays the rate from learning_rate at step 0 to
  // learning_rate * min_lr_fraction at the last step.
  LearningRateSchedule schedule = LearningRateSchedule::Constant;
  double min_lr_fraction = 1e-3;
  std::size_t steps = 20000;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  std::size_t dim = 128;
  // Held-out samples for the evaluation-loss trace, re-scored every
  // eval_every steps (0 disables the trace).
  std::size_t eval_samples = 16;
  std::size_t eval_every = 0;

  void validate() const;
};

struct LossBreakdown {
  double outcome_term = 0.0;
  double reconstruction_term = 0.0;
  double total = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double predict_m(double v, const Eigen::Ref<const Eigen::VectorXd>& lambda,
                 const OutcomeHead& head);

// sigma(lambda_i . lambda_j)
double edge_logit(const Eigen::Ref<const Eigen::VectorXd>& lambda_i,
                  const Eigen::Ref<const Eigen::VectorXd>& lambda_j);

// Subsampled loss
//   q * sum_{i in vertices, observed} (y_i - m(v_i, lambda_i))^2
//     + sum_{positives} -ln sigma(lambda_i . lambda_j)
//     + sum_{negatives} -ln(1 - sigma(lambda_i . lambda_j)).
// A vertex is observed when y_i is defined and v_i is eligible; other vertices
// only enter through the pair terms.
LossBreakdown batch_loss(const SubgraphSample& sample, const AggregatedTreatment& v,
                         const OutcomeVector& y, const ModelParams& params, double q);

// Sparse gradient of batch_loss: only embedding rows touched by the sample
// are stored; every other row's gradient is zero.
struct Gradient {
  std::vector<NodeId> rows;
  EmbeddingMatrix row_grads;  // rows.size() x d, aligned with `rows`
  double w_v = 0.0;
  Eigen::VectorXd w;
  double b = 0.0;

  Eigen::VectorXd row(NodeId i) const;
};

Gradient gradients(const SubgraphSample& sample, const AggregatedTreatment& v,
                   const OutcomeVector& y, const ModelParams& params, double q);

struct TrainResult {
  ModelParams params;
  std::vector<double> step_losses;        // total batch loss before each update
  std::vector<std::size_t> eval_steps;    // step index of each eval point
  std::vector<double> eval_losses;        // mean total loss over the held samples
};

// Relational ERM by SGD: one sampler draw and one update per step. Sampler,
// initialization and evaluation draws come from sub-streams of train.seed.
// Throws TrainingDiverged if the loss or parameters become non-finite.
TrainResult train(const Graph& g, const AggregatedTreatment& v, const OutcomeVector& y,
                  const SamplerConfig& sampler, const TrainConfig& train);

void save_params(const std::string& path, const ModelParams& params);
// expected_n == 0 skips the node-count check.
ModelParams load_params(const std::string& path, std::size_t expected_n = 0);

}  // namespace contagion
