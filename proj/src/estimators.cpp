#include "contagion/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace contagion {
namespace {

std::vector<std::uint8_t> membership_mask(std::size_t n, NodeSet node_set) {
  if (!node_set) return std::vector<std::uint8_t>(n, 1);
  std::vector<std::uint8_t> mask(n, 0);
  for (NodeId i : *node_set) {
    if (i >= n) throw std::out_of_range("node set contains an out-of-range id");
    mask[i] = 1;
  }
  return mask;
}

constexpr double kRankTolerance = 1e-9;

}  // namespace

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Embedding: return "embedding";
    case EstimatorKind::Unadjusted: return "unadjusted";
    case EstimatorKind::Parametric: return "parametric";
  }
  return "unknown";
}

AggregatedTreatment intervene_aggregate(const Graph& g, int t_star, Aggregator aggregator) {
  if (t_star != 0 && t_star != 1) throw std::invalid_argument("t_star must be 0 or 1");
  return aggregate_treatment(
      g, TreatmentVector::constant(g.num_nodes(), static_cast<std::uint8_t>(t_star)),
      aggregator);
}

namespace {

struct PsiSum {
  double mean = 0.0;
  std::size_t count = 0;
};

PsiSum psi_impl(const Graph& g, const ModelParams& params, int t_star, Aggregator aggregator,
                NodeSet node_set) {
  if (params.num_nodes() != g.num_nodes()) {
    throw std::invalid_argument("psi_hat: parameter and graph node counts differ");
  }
  const auto v_star = intervene_aggregate(g, t_star, aggregator);
  const auto mask = membership_mask(g.num_nodes(), node_set);
  PsiSum s;
  double sum = 0.0;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (!mask[i] || !v_star.eligible[i]) continue;
    sum += predict_m(v_star.value[i], params.embeddings.row(i).transpose(), params.head);
    ++s.count;
  }
  if (s.count == 0) throw std::invalid_argument("psi_hat: no eligible nodes in the evaluation set");
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

}  // namespace

double psi_hat(const Graph& g, const ModelParams& params, int t_star, Aggregator aggregator,
               NodeSet node_set) {
  return psi_impl(g, params, t_star, aggregator, node_set).mean;
}

EstimateReport embedding_estimate(const Graph& g, const ModelParams& params,
                                  Aggregator aggregator, NodeSet node_set) {
  const auto one = psi_impl(g, params, 1, aggregator, node_set);
  const auto zero = psi_impl(g, params, 0, aggregator, node_set);
  EstimateReport r;
  r.estimator = EstimatorKind::Embedding;
  r.psi_at_1 = one.mean;
  r.psi_at_0 = zero.mean;
  r.t_star_contrast = one.mean - zero.mean;
  r.n_eligible = one.count;
  return r;
}

LinearFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (y.size() != n) throw std::invalid_argument("fit_ols: row count mismatch");
  if (n <= p) throw std::domain_error("fit_ols: no residual degrees of freedom");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p) throw std::domain_error("fit_ols: design matrix is rank deficient");

  LinearFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.coef = qr.solve(y);
  const Eigen::VectorXd resid = y - x * fit.coef;
  fit.residual_variance = resid.squaredNorm() / static_cast<double>(n - p);

  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();
  fit.std_error = (cov.diagonal() * fit.residual_variance).cwiseSqrt();
  return fit;
}

std::vector<NodeId> regression_rows(const AggregatedTreatment& v, const OutcomeVector& y,
                                    NodeSet node_set) {
  if (v.size() != y.size()) throw std::invalid_argument("regression: v and y sizes differ");
  const auto mask = membership_mask(v.size(), node_set);
  std::vector<NodeId> rows;
  for (NodeId i = 0; i < v.size(); ++i) {
    if (mask[i] && v.eligible[i] && y.defined[i]) rows.push_back(i);
  }
  return rows;
}

CoefficientEstimate unadjusted_ols(const AggregatedTreatment& v, const OutcomeVector& y,
                                   NodeSet node_set) {
  const auto rows = regression_rows(v, y, node_set);
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd yy(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    x(r, 1) = v.value[rows[r]];
    yy(r) = y.value[rows[r]];
  }
  const bool constant_v =
      n == 0 || (x.col(1).array() == x(0, 1)).all();
  if (constant_v) throw std::domain_error("unadjusted_ols: aggregated treatment is constant");
  const auto fit = fit_ols(x, yy);
  return {fit.coef(1), fit.std_error(1), fit.coef(0), rows.size(), 0};
}

Eigen::MatrixXd spectral_memberships(const Graph& g, std::size_t k) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  if (k < 1 || static_cast<Eigen::Index>(k) > n) {
    throw std::invalid_argument("spectral_memberships: need 1 <= k <= n");
  }
  std::vector<double> inv_sqrt_deg(g.num_nodes(), 0.0);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto d = g.degree(i);
    if (d > 0) inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j : g.neighbors(i)) a(i, j) = inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("spectral_memberships: eigen-decomposition failed");
  }
  // Eigenvalues come back ascending; take the k largest, largest first.
  Eigen::MatrixXd m = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(k)).rowwise().reverse();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index arg = 0;
    m.col(c).cwiseAbs().maxCoeff(&arg);
    if (m(arg, c) < 0.0) m.col(c) *= -1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = m.row(i).norm();
    if (inv_sqrt_deg[i] == 0.0 || norm == 0.0) {
      m.row(i).setZero();
    } else {
      m.row(i) /= norm;
    }
  }
  return m;
}

std::size_t default_community_count(std::size_t n, std::size_t dim) {
  return std::max<std::size_t>(1, std::min(dim, n / 20));
}

CoefficientEstimate parametric_baseline(const Eigen::MatrixXd& memberships,
                                        const AggregatedTreatment& v, const OutcomeVector& y,
                                        NodeSet node_set) {
  if (static_cast<std::size_t>(memberships.rows()) != v.size()) {
    throw std::invalid_argument("parametric_baseline: membership rows differ from node count");
  }
  const auto rows = regression_rows(v, y, node_set);
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = memberships.cols();
  Eigen::MatrixXd base(n, 2);
  Eigen::MatrixXd mem(n, k);
  Eigen::VectorXd yy(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    base(r, 0) = 1.0;
    base(r, 1) = v.value[rows[r]];
    mem.row(r) = memberships.row(rows[r]);
    yy(r) = y.value[rows[r]];
  }
  if (n == 0 || (base.col(1).array() == base(0, 1)).all()) {
    throw std::domain_error("parametric_baseline: aggregated treatment is constant");
  }

  // Keep a maximal set of membership columns independent of [1, v] and of
  // each other: residualize on [1, v], then rank-reveal with column pivoting.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> base_qr(base);
  const Eigen::MatrixXd resid = mem - base * base_qr.solve(mem);
  std::vector<Eigen::Index> keep;
  if (k > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(resid);
    // Absolute cutoff on the residual pivots, scaled to the membership
    // columns (Eigen's threshold is relative to the largest pivot).
    const double abs_tol = 1e-8 * std::sqrt(static_cast<double>(n)) *
                           std::max(1.0, mem.cwiseAbs().maxCoeff());
    qr.setThreshold(std::min(1.0, abs_tol / std::max(1e-300, qr.maxPivot())));
    for (Eigen::Index c = 0; c < qr.rank(); ++c) keep.push_back(qr.colsPermutation().indices()(c));
    std::sort(keep.begin(), keep.end());
  }

  Eigen::MatrixXd x(n, 2 + static_cast<Eigen::Index>(keep.size()));
  x.leftCols(2) = base;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    x.col(2 + static_cast<Eigen::Index>(c)) = mem.col(keep[c]);
  }
  const auto fit = fit_ols(x, yy);
  return {fit.coef(1), fit.std_error(1), fit.coef(0), rows.size(),
          static_cast<std::size_t>(k) - keep.size()};
}

CoefficientEstimate parametric_baseline(const Graph& g, const AggregatedTreatment& v,
                                        const OutcomeVector& y, std::size_t k,
                                        NodeSet node_set) {
  return parametric_baseline(spectral_memberships(g, k), v, y, node_set);
}

std::string estimate_csv_header() { return "estimator,confounder_label,beta1,estimate,seed"; }

std::string estimate_csv_row(const EstimateReport& r, const std::string& confounder_label,
                             double beta1) {
  std::ostringstream os;
  os << to_string(r.estimator) << ',' << confounder_label << ',' << detail::format_double(beta1)
     << ',' << detail::format_double(r.t_star_contrast) << ',' << r.seed;
  return os.str();
}

}  // namespace contagion
