#include "contagion/relerm.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "contagion/rng.hpp"
#include "text_io.hpp"

namespace contagion {
namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kMagic = "contagion_params";

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(1 + e^x) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

bool observed(const AggregatedTreatment& v, const OutcomeVector& y, NodeId i) {
  return y.defined[i] && v.eligible[i];
}

void check_inputs(const AggregatedTreatment& v, const OutcomeVector& y,
                  const ModelParams& params) {
  const auto n = params.num_nodes();
  if (v.size() != n || y.size() != n) {
    throw std::invalid_argument("relerm: data and parameter node counts differ");
  }
  if (static_cast<std::size_t>(params.head.w.size()) != params.dim()) {
    throw std::invalid_argument("relerm: head dimension differs from embedding dimension");
  }
}

// Reusable buffers for the sparse gradient. slot[i] is the row of node i in
// row_grads, or -1 when the node is untouched by the current sample.
struct Workspace {
  std::vector<int> slot;
  std::vector<NodeId> rows;
  EmbeddingMatrix row_grads;
  double g_wv = 0.0;
  Eigen::VectorXd g_w;
  double g_b = 0.0;

  void reset(std::size_t n, std::size_t d) {
    if (slot.size() != n) slot.assign(n, -1);
    for (NodeId r : rows) slot[r] = -1;
    rows.clear();
    if (static_cast<std::size_t>(row_grads.cols()) != d) row_grads.resize(0, static_cast<Eigen::Index>(d));
    g_wv = 0.0;
    g_w.setZero(static_cast<Eigen::Index>(d));
    g_b = 0.0;
  }

  Eigen::Index row_of(NodeId i) {
    if (slot[i] < 0) {
      slot[i] = static_cast<int>(rows.size());
      rows.push_back(i);
      if (static_cast<std::size_t>(row_grads.rows()) < rows.size()) {
        const auto grow = std::max<Eigen::Index>(64, 2 * row_grads.rows());
        row_grads.conservativeResize(grow, row_grads.cols());
      }
      row_grads.row(slot[i]).setZero();
    }
    return slot[i];
  }
};

// Computes the loss and, when ws is non-null, accumulates its gradient.
LossBreakdown evaluate(const SubgraphSample& sample, const AggregatedTreatment& v,
                       const OutcomeVector& y, const ModelParams& params, double q,
                       Workspace* ws) {
  const auto& lam = params.embeddings;
  const auto& head = params.head;
  LossBreakdown loss;
  if (ws != nullptr) ws->reset(params.num_nodes(), params.dim());

  for (NodeId i : sample.vertices) {
    if (!observed(v, y, i)) continue;
    const double r = y.value[i] - predict_m(v.value[i], lam.row(i).transpose(), head);
    loss.outcome_term += r * r;
    if (ws != nullptr && q != 0.0) {
      const double dm = -2.0 * q * r;
      ws->g_wv += dm * v.value[i];
      ws->g_w.noalias() += dm * lam.row(i).transpose();
      ws->g_b += dm;
      ws->row_grads.row(ws->row_of(i)).noalias() += dm * head.w.transpose();
    }
  }

  auto pair_term = [&](const Edge& e, bool positive) {
    const auto [i, j] = e;
    const double x = lam.row(i).dot(lam.row(j));
    // -ln sigma(x) = softplus(-x);  -ln(1 - sigma(x)) = softplus(x)
    loss.reconstruction_term += positive ? softplus(-x) : softplus(x);
    if (ws != nullptr) {
      const double dx = positive ? sigmoid(x) - 1.0 : sigmoid(x);
      const auto ri = ws->row_of(i);
      const auto rj = ws->row_of(j);
      ws->row_grads.row(ri).noalias() += dx * lam.row(j);
      ws->row_grads.row(rj).noalias() += dx * lam.row(i);
    }
  };
  for (const auto& e : sample.positives) pair_term(e, true);
  for (const auto& e : sample.negatives) pair_term(e, false);

  loss.total = q * loss.outcome_term + loss.reconstruction_term;
  return loss;
}

}  // namespace

bool ModelParams::all_finite() const {
  return embeddings.allFinite() && head.w.allFinite() && std::isfinite(head.w_v) &&
         std::isfinite(head.b);
}

ModelParams ModelParams::initialize(std::size_t n, std::size_t d, double init_scale,
                                    std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("relerm: embedding dimension must be >= 1");
  ModelParams p;
  p.embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, init_scale);
  for (Eigen::Index i = 0; i < p.embeddings.rows(); ++i) {
    for (Eigen::Index k = 0; k < p.embeddings.cols(); ++k) p.embeddings(i, k) = normal(rng);
  }
  p.head.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  return p;
}

std::string to_string(LearningRateSchedule s) {
  return s == LearningRateSchedule::Constant ? "constant" : "linear";
}

LearningRateSchedule parse_schedule(const std::string& s) {
  if (s == "constant") return LearningRateSchedule::Constant;
  if (s == "linear") return LearningRateSchedule::Linear;
  throw std::invalid_argument("unknown learning-rate schedule '" + s + "'");
}

void TrainConfig::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("train: q must lie in [0,1]");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
  if (!(min_lr_fraction > 0.0 && min_lr_fraction <= 1.0)) {
    throw std::invalid_argument("train: min_lr_fraction must lie in (0,1]");
  }
  if (!(init_scale >= 0.0)) throw std::invalid_argument("train: init_scale must be >= 0");
  if (dim < 1) throw std::invalid_argument("train: dim must be >= 1");
}

double predict_m(double v, const Eigen::Ref<const Eigen::VectorXd>& lambda,
                 const OutcomeHead& head) {
  if (lambda.size() != head.w.size()) {
    throw std::invalid_argument("predict_m: embedding and head dimensions differ");
  }
  return head.w_v * v + head.w.dot(lambda) + head.b;
}

double edge_logit(const Eigen::Ref<const Eigen::VectorXd>& lambda_i,
                  const Eigen::Ref<const Eigen::VectorXd>& lambda_j) {
  if (lambda_i.size() != lambda_j.size()) {
    throw std::invalid_argument("edge_logit: embedding dimensions differ");
  }
  return sigmoid(lambda_i.dot(lambda_j));
}

LossBreakdown batch_loss(const SubgraphSample& sample, const AggregatedTreatment& v,
                         const OutcomeVector& y, const ModelParams& params, double q) {
  check_inputs(v, y, params);
  if (!params.all_finite()) throw std::invalid_argument("batch_loss: non-finite parameter");
  return evaluate(sample, v, y, params, q, nullptr);
}

Eigen::VectorXd Gradient::row(NodeId i) const {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] == i) return row_grads.row(static_cast<Eigen::Index>(k)).transpose();
  }
  return Eigen::VectorXd::Zero(w.size());
}

Gradient gradients(const SubgraphSample& sample, const AggregatedTreatment& v,
                   const OutcomeVector& y, const ModelParams& params, double q) {
  check_inputs(v, y, params);
  if (!params.all_finite()) throw std::invalid_argument("gradients: non-finite parameter");
  Workspace ws;
  evaluate(sample, v, y, params, q, &ws);
  Gradient g;
  g.rows = ws.rows;
  g.row_grads = ws.row_grads.topRows(static_cast<Eigen::Index>(ws.rows.size()));
  g.w_v = ws.g_wv;
  g.w = ws.g_w;
  g.b = ws.g_b;
  return g;
}

TrainResult train(const Graph& g, const AggregatedTreatment& v, const OutcomeVector& y,
                  const SamplerConfig& sampler_cfg, const TrainConfig& cfg) {
  cfg.validate();
  sampler_cfg.validate();
  if (g.num_edges() == 0) throw std::invalid_argument("train: graph has no edges");

  TrainResult result;
  result.params = ModelParams::initialize(g.num_nodes(), cfg.dim, cfg.init_scale,
                                          derive_seed(cfg.seed, "init"));
  auto& params = result.params;
  check_inputs(v, y, params);

  RandomWalkSampler sampler(g, sampler_cfg, derive_seed(cfg.seed, "sampler"));
  std::vector<SubgraphSample> held;
  if (cfg.eval_every > 0) {
    RandomWalkSampler eval_sampler(g, sampler_cfg, derive_seed(cfg.seed, "eval"));
    for (std::size_t k = 0; k < cfg.eval_samples; ++k) held.push_back(eval_sampler.next());
  }
  auto record_eval = [&](std::size_t step) {
    double sum = 0.0;
    for (const auto& s : held) sum += evaluate(s, v, y, params, cfg.q, nullptr).total;
    result.eval_steps.push_back(step);
    result.eval_losses.push_back(held.empty() ? 0.0 : sum / static_cast<double>(held.size()));
  };

  Workspace ws;
  result.step_losses.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cfg.eval_every > 0 && step % cfg.eval_every == 0) record_eval(step);

    const auto sample = sampler.next();
    const auto loss = evaluate(sample, v, y, params, cfg.q, &ws);
    if (!std::isfinite(loss.total)) {
      throw TrainingDiverged("train: loss became non-finite at step " + std::to_string(step));
    }
    result.step_losses.push_back(loss.total);

    double lr = cfg.learning_rate;
    if (cfg.schedule == LearningRateSchedule::Linear && cfg.steps > 1) {
      const double progress = static_cast<double>(step) / static_cast<double>(cfg.steps - 1);
      lr *= 1.0 - (1.0 - cfg.min_lr_fraction) * progress;
    }
    for (std::size_t k = 0; k < ws.rows.size(); ++k) {
      params.embeddings.row(ws.rows[k]).noalias() -=
          lr * ws.row_grads.row(static_cast<Eigen::Index>(k));
    }
    params.head.w_v -= lr * ws.g_wv;
    params.head.w.noalias() -= lr * ws.g_w;
    params.head.b -= lr * ws.g_b;
    if (!std::isfinite(params.head.w_v) || !std::isfinite(params.head.b) ||
        !params.head.w.allFinite()) {
      throw TrainingDiverged("train: parameters became non-finite at step " +
                             std::to_string(step));
    }
  }
  if (cfg.eval_every > 0) record_eval(cfg.steps);
  if (!params.all_finite()) throw TrainingDiverged("train: non-finite embeddings after training");
  return result;
}

void save_params(const std::string& path, const ModelParams& params) {
  if (path.empty()) throw std::runtime_error("save_params: empty path");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_params: cannot open '" + path + "'");
  const auto d = params.dim();
  out << kMagic << ' ' << kFormatVersion << ' ' << params.num_nodes() << ' ' << d << '\n';
  for (Eigen::Index i = 0; i < params.embeddings.rows(); ++i) {
    for (Eigen::Index k = 0; k < params.embeddings.cols(); ++k) {
      if (k > 0) out << ' ';
      out << detail::format_double(params.embeddings(i, k));
    }
    out << '\n';
  }
  out << detail::format_double(params.head.w_v);
  for (Eigen::Index k = 0; k < params.head.w.size(); ++k) {
    out << ' ' << detail::format_double(params.head.w(k));
  }
  out << ' ' << detail::format_double(params.head.b) << '\n';
  if (!out) throw std::runtime_error("save_params: write failed for '" + path + "'");
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t expected,
                              std::size_t line_no) {
  std::istringstream ls(line);
  std::vector<double> vals;
  vals.reserve(expected);
  std::string tok;
  while (ls >> tok) {
    double x = 0.0;
    if (!detail::parse_double(tok, x)) throw ParseError(line_no, "bad number '" + tok + "'");
    vals.push_back(x);
  }
  if (vals.size() != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) + " values, found " +
                                  std::to_string(vals.size()));
  }
  return vals;
}

}  // namespace

ModelParams load_params(const std::string& path, std::size_t expected_n) {
  if (path.empty()) throw std::runtime_error("load_params: empty path");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_params: cannot open '" + path + "'");
  std::string magic;
  int version = 0;
  std::size_t n = 0, d = 0;
  if (!(in >> magic >> version >> n >> d) || magic != kMagic) {
    throw std::runtime_error("load_params: '" + path + "' is not a parameter file");
  }
  if (version != kFormatVersion) {
    throw std::runtime_error("load_params: unsupported format version " +
                             std::to_string(version));
  }
  if (d < 1) throw std::runtime_error("load_params: dimension must be >= 1");
  if (expected_n != 0 && n != expected_n) {
    throw std::runtime_error("load_params: file has n=" + std::to_string(n) +
                             " but the graph has n=" + std::to_string(expected_n));
  }
  std::string line;
  std::getline(in, line);
  ModelParams p;
  p.embeddings.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ParseError(i + 2, "missing embedding row");
    const auto row = parse_row(line, d, i + 2);
    for (std::size_t k = 0; k < d; ++k) {
      p.embeddings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  if (!std::getline(in, line)) throw ParseError(n + 2, "missing head row");
  const auto head = parse_row(line, d + 2, n + 2);
  p.head.w_v = head[0];
  p.head.w = Eigen::Map<const Eigen::VectorXd>(head.data() + 1, static_cast<Eigen::Index>(d));
  p.head.b = head[d + 1];
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw std::runtime_error("load_params: trailing data after head row");
    }
  }
  return p;
}

}  // namespace contagion
