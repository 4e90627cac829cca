#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "contagion/estimators.hpp"
#include "contagion/experiment.hpp"
#include "contagion/rng.hpp"

using namespace contagion;

namespace {

Graph make(std::size_t n, std::vector<Edge> edges) { return Graph::from_edges(n, edges); }

AggregatedTreatment eligible(std::vector<double> v) {
  return {v, std::vector<std::uint8_t>(v.size(), 1)};
}

OutcomeVector defined(std::vector<double> y) {
  return {y, std::vector<std::uint8_t>(y.size(), 1)};
}

Graph two_cliques(std::size_t size) {
  std::vector<Edge> e;
  for (std::size_t c = 0; c < 2; ++c)
    for (NodeId i = 0; i < size; ++i)
      for (NodeId j = i + 1; j < size; ++j) e.emplace_back(c * size + i, c * size + j);
  return make(2 * size, e);
}

ModelParams random_params(std::size_t n, std::size_t d, std::uint64_t seed) {
  auto p = ModelParams::initialize(n, d, 1.0, seed);
  p.head.w_v = 1.7;
  for (Eigen::Index k = 0; k < p.head.w.size(); ++k) p.head.w(k) = 0.3 * (k + 1);
  p.head.b = -0.4;
  return p;
}

}  // namespace

TEST(Ols, ExactLine) {
  const auto r = unadjusted_ols(eligible({0, 0.5, 1, 0.25}), defined({0, 1, 2, 0.5}));
  EXPECT_NEAR(r.coefficient, 2.0, 1e-12);
  EXPECT_NEAR(r.intercept, 0.0, 1e-12);
}

TEST(Ols, ThreePoints) {
  const auto r = unadjusted_ols(eligible({0, 1, 2}), defined({1, 1, 4}));
  EXPECT_NEAR(r.coefficient, 1.5, 1e-12);
  EXPECT_EQ(r.n_used, 3u);
}

TEST(Ols, ConstantRegressorFails) {
  EXPECT_THROW(unadjusted_ols(eligible({0.5, 0.5, 0.5}), defined({1, 2, 3})), std::domain_error);
}

TEST(Ols, SkipsIneligibleAndUndefinedRows) {
  AggregatedTreatment v{{0, 1, 2, 3, 4}, {1, 1, 1, 0, 1}};
  OutcomeVector y{{1, 1, 4, 100, -7}, {1, 1, 1, 1, 0}};
  EXPECT_NEAR(unadjusted_ols(v, y).coefficient, 1.5, 1e-12);
  EXPECT_EQ(unadjusted_ols(v, y).n_used, 3u);
}

TEST(Ols, StandardErrorMatchesClosedForm) {
  // Simple regression: se(slope) = sqrt(s^2 / Sxx).
  const std::vector<double> x{0, 1, 2, 3, 4}, yv{0.1, 1.3, 1.8, 3.4, 3.9};
  Eigen::MatrixXd design(5, 2);
  Eigen::VectorXd y(5);
  double mx = 2.0, sxx = 0, sxy = 0, my = 0;
  for (int i = 0; i < 5; ++i) {
    design(i, 0) = 1;
    design(i, 1) = x[i];
    y(i) = yv[i];
    my += yv[i] / 5;
  }
  for (int i = 0; i < 5; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (yv[i] - my);
  }
  const double slope = sxy / sxx, icpt = my - slope * mx;
  double rss = 0;
  for (int i = 0; i < 5; ++i) rss += std::pow(yv[i] - icpt - slope * x[i], 2);
  const auto fit = fit_ols(design, y);
  EXPECT_NEAR(fit.coef(1), slope, 1e-12);
  EXPECT_NEAR(fit.std_error(1), std::sqrt(rss / 3 / sxx), 1e-12);
}

TEST(Ols, RankDeficientFails) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, 1, 2, 1, 2, 1, 2;
  EXPECT_THROW(fit_ols(x, Eigen::VectorXd::Ones(4)), std::domain_error);
}

TEST(Spectral, DisconnectedCliquesSeparate) {
  const auto g = two_cliques(6);
  const auto z = spectral_memberships(g, 2);
  ASSERT_EQ(z.rows(), 12);
  ASSERT_EQ(z.cols(), 2);
  // Rows of the same clique coincide; rows of different cliques are orthogonal.
  std::size_t agree = 0, pairs = 0;
  for (Eigen::Index i = 0; i < 12; ++i) {
    EXPECT_NEAR(z.row(i).norm(), 1.0, 1e-9);
    for (Eigen::Index j = i + 1; j < 12; ++j) {
      const bool same = (i < 6) == (j < 6);
      const double dot = z.row(i).dot(z.row(j));
      if ((same && dot > 0.95) || (!same && std::abs(dot) < 0.05)) ++agree;
      ++pairs;
    }
  }
  EXPECT_GE(static_cast<double>(agree) / pairs, 0.95);
}

TEST(Spectral, IsolatedRowsStayZero) {
  const auto g = make(4, {{0, 1}, {1, 2}});
  const auto z = spectral_memberships(g, 2);
  EXPECT_EQ(z.row(3).norm(), 0.0);
}

TEST(Parametric, CompleteGraphMatchesUnadjusted) {
  // One community: the membership column is constant and collinear with the
  // intercept, so it is dropped and the slope reduces to plain OLS.
  std::vector<Edge> e;
  for (NodeId i = 0; i < 8; ++i)
    for (NodeId j = i + 1; j < 8; ++j) e.emplace_back(i, j);
  const auto g = make(8, e);
  const auto v = eligible({0.1, 0.3, 0.2, 0.9, 0.5, 0.7, 0.0, 0.4});
  const auto y = defined({0.0, 1.2, 0.1, 2.2, 0.9, 1.9, -0.3, 0.8});
  const auto p = parametric_baseline(g, v, y, 1);
  const auto u = unadjusted_ols(v, y);
  EXPECT_NEAR(p.coefficient, u.coefficient, 1e-9);
  EXPECT_EQ(p.dropped_columns, 1u);
}

TEST(Parametric, RemovesBlockConfounding) {
  // y depends on v and on a block offset that is correlated with v.
  const auto g = two_cliques(20);
  std::vector<double> v(40), y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    const double block = i < 20 ? 0.0 : 1.0;
    v[i] = 0.2 + 0.5 * block + 0.01 * static_cast<double>(i % 7);
    y[i] = 3.0 * v[i] + 5.0 * block;
  }
  const auto p = parametric_baseline(g, eligible(v), defined(y), 2);
  EXPECT_NEAR(p.coefficient, 3.0, 1e-8);
  EXPECT_GT(unadjusted_ols(eligible(v), defined(y)).coefficient, 5.0);
}

TEST(Parametric, NoConfoundingAtScale) {
  // Single simulation with the default seed.
  ExperimentConfig cfg;
  const auto pg = prepare_graph(cfg);
  const auto data = simulate_cell(pg, cfg, 0, 0.0);
  const auto r = parametric_baseline(pg.memberships, data.aggregated, data.outcomes);
  EXPECT_NEAR(r.coefficient, 1.0, 0.15);
}

TEST(Parametric, DefaultCommunityCount) {
  EXPECT_EQ(default_community_count(2000, 32), 32u);
  EXPECT_EQ(default_community_count(300, 32), 15u);
  EXPECT_EQ(default_community_count(10, 32), 1u);
}

TEST(Intervene, Examples) {
  const auto path = make(3, {{0, 1}, {1, 2}});
  const auto ones = intervene_aggregate(path, 1, Aggregator::Average);
  EXPECT_EQ(ones.value, (std::vector<double>{1, 1, 1}));
  const auto zeros = intervene_aggregate(path, 0, Aggregator::Or);
  EXPECT_EQ(zeros.value, (std::vector<double>{0, 0, 0}));
  const auto iso = intervene_aggregate(make(2, {}), 1, Aggregator::Average);
  EXPECT_EQ(iso.eligible, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_THROW(intervene_aggregate(path, 2, Aggregator::Average), std::invalid_argument);
}

TEST(PsiHat, ZeroHeadGivesBias) {
  ModelParams p = ModelParams::initialize(3, 2, 1.0, 1);
  p.head.b = 2.5;
  const auto g = make(3, {{0, 1}, {1, 2}});
  EXPECT_DOUBLE_EQ(psi_hat(g, p, 1, Aggregator::Average), 2.5);
  EXPECT_DOUBLE_EQ(psi_hat(g, p, 0, Aggregator::Average), 2.5);
}

TEST(PsiHat, MeanOverEligibleNodes) {
  const auto g = make(4, {{0, 1}, {1, 2}});
  const auto p = random_params(4, 3, 5);
  double sum = 0;
  for (NodeId i = 0; i < 3; ++i) sum += predict_m(1.0, p.embeddings.row(i).transpose(), p.head);
  EXPECT_NEAR(psi_hat(g, p, 1, Aggregator::Average), sum / 3, 1e-14);
  const std::vector<NodeId> only{2};
  EXPECT_NEAR(psi_hat(g, p, 1, Aggregator::Average, only),
              predict_m(1.0, p.embeddings.row(2).transpose(), p.head), 1e-14);
  const std::vector<NodeId> isolated{3};
  EXPECT_THROW(psi_hat(g, p, 1, Aggregator::Average, isolated), std::invalid_argument);
  const std::vector<NodeId> none;
  EXPECT_THROW(psi_hat(g, p, 1, Aggregator::Average, none), std::invalid_argument);
}

TEST(PsiHat, ContrastEqualsPeerWeight) {
  const auto g = two_cliques(5);
  for (Aggregator a : {Aggregator::Average, Aggregator::Or}) {
    const auto p = random_params(10, 4, 8);
    const auto r = embedding_estimate(g, p, a);
    EXPECT_NEAR(r.t_star_contrast, p.head.w_v, 1e-10);
    EXPECT_NEAR(r.psi_at_1 - r.psi_at_0, r.t_star_contrast, 1e-15);
    EXPECT_EQ(r.n_eligible, 10u);
  }
}

TEST(PsiHat, InvariantUnderRelabeling) {
  const auto g = make(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 2}});
  const auto p = random_params(5, 3, 9);
  const std::vector<NodeId> perm{4, 2, 0, 1, 3};
  const auto gp = g.permuted(perm);
  ModelParams pp = p;
  for (NodeId i = 0; i < 5; ++i) pp.embeddings.row(perm[i]) = p.embeddings.row(i);
  EXPECT_NEAR(psi_hat(g, p, 1, Aggregator::Average), psi_hat(gp, pp, 1, Aggregator::Average),
              1e-14);
}

TEST(EstimateCsv, Row) {
  EstimateReport r;
  r.estimator = EstimatorKind::Parametric;
  r.t_star_contrast = 0.25;
  r.seed = 7;
  EXPECT_EQ(estimate_csv_header(), "estimator,confounder_label,beta1,estimate,seed");
  EXPECT_EQ(estimate_csv_row(r, "block", 10.0), "parametric,block,10,0.25,7");
}
