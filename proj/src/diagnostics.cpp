#include "contagion/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "contagion/rng.hpp"
#include "contagion/sbm.hpp"
#include "text_io.hpp"

namespace contagion {
namespace {

double sample_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

std::uint64_t cell_index(std::size_t n, std::size_t rep) {
  return (static_cast<std::uint64_t>(n) << 20) ^ rep;
}

}  // namespace

void LlnConfig::validate() const {
  if (n_grid.size() < 2) throw std::invalid_argument("lln_study: grid needs at least two sizes");
  for (std::size_t k = 1; k < n_grid.size(); ++k) {
    if (n_grid[k] <= n_grid[k - 1]) throw std::invalid_argument("lln_study: grid must increase");
  }
  if (replicates < 10) throw std::invalid_argument("lln_study: replicates must be >= 10");
  if (level_t_star != 0 && level_t_star != 1) {
    throw std::invalid_argument("lln_study: level_t_star must be 0 or 1");
  }
}

LlnStudyResult lln_study(const LlnConfig& cfg) {
  cfg.validate();
  LlnStudyResult out;
  out.variance_bound_m = cfg.variance_bound > 0.0
                             ? cfg.variance_bound
                             : std::pow(0.7 * std::abs(cfg.params.beta1), 2) / 4.0;
  for (std::size_t n : cfg.n_grid) {
    std::vector<double> levels, contrasts;
    double share = 0.0;
    for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
      auto spec = planted_partition_by_degree(n, cfg.num_blocks, cfg.mean_degree,
                                              cfg.within_fraction);
      Rng label_rng = make_rng(cfg.seed, "blocks", cell_index(n, rep));
      std::uniform_int_distribution<std::uint32_t> label(
          0, static_cast<std::uint32_t>(cfg.num_blocks - 1));
      for (auto& b : spec.block_of) b = label(label_rng);
      const auto g = sbm_generate(spec, derive_seed(cfg.seed, "graph", cell_index(n, rep)));
      const auto cov = confounder_from_blocks(spec.block_of, cfg.num_blocks, 0.0, 0).covariates;

      const double level = oracle_estimand(g, cov, cfg.params, cfg.level_t_star);
      levels.push_back(level);
      contrasts.push_back(oracle_estimand(g, cov, cfg.params, 1) -
                          oracle_estimand(g, cov, cfg.params, 0));
      share += shared_neighbor_probability(g, cfg.pair_sample_size,
                                           derive_seed(cfg.seed, "pairs", cell_index(n, rep)));
    }
    out.n_values.push_back(n);
    out.variances.push_back(sample_variance(levels));
    out.contrast_variances.push_back(sample_variance(contrasts));
    out.shared_neighbor_probs.push_back(share / static_cast<double>(cfg.replicates));
    out.variance_bounds.push_back(out.shared_neighbor_probs.back() * out.variance_bound_m);
  }

  // Least-squares slope of log variance against log n.
  bool positive = true;
  for (double v : out.variances) positive = positive && v > 0.0;
  if (!positive) {
    out.fitted_log_slope = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const auto k = static_cast<double>(out.n_values.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < out.n_values.size(); ++i) {
    mx += std::log(static_cast<double>(out.n_values[i]));
    my += std::log(out.variances[i]);
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < out.n_values.size(); ++i) {
    const double dx = std::log(static_cast<double>(out.n_values[i])) - mx;
    sxy += dx * (std::log(out.variances[i]) - my);
    sxx += dx * dx;
  }
  out.fitted_log_slope = sxy / sxx;
  return out;
}

void write_lln_csv(std::ostream& out, const LlnStudyResult& r) {
  out << "n,variance,contrast_variance,shared_neighbor_prob,variance_bound\n";
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    out << r.n_values[i] << ',' << detail::format_double(r.variances[i]) << ','
        << detail::format_double(r.contrast_variances[i]) << ','
        << detail::format_double(r.shared_neighbor_probs[i]) << ','
        << detail::format_double(r.variance_bounds[i]) << '\n';
  }
}

namespace {

std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string cell_entry(const std::optional<EstimatorSummary>& s) {
  if (!s) return "missing";
  return fixed2(s->mean) + " ± " + fixed2(s->std_error);
}

}  // namespace

std::string bias_table_markdown(const std::vector<CellResult>& cells, Design design) {
  std::ostringstream os;
  os << "| Estimator |";
  for (const auto& c : cells) {
    os << ' ' << c.confounder;
    if (design == Design::Continuous) os << " β1=" << fixed2(c.beta1);
    os << " |";
  }
  os << "\n|---|";
  for (std::size_t i = 0; i < cells.size(); ++i) os << "---|";
  os << "\n| Ground truth |";
  for (const auto& c : cells) os << ' ' << fixed2(c.oracle_contrast) << " |";
  const char* names[] = {"Unadjusted", "Parametric", "Embedding"};
  for (int row = 0; row < 3; ++row) {
    os << "\n| " << names[row] << " |";
    for (const auto& c : cells) {
      const auto& s = row == 0 ? c.unadjusted : (row == 1 ? c.parametric : c.embedding);
      os << ' ' << cell_entry(s) << " |";
    }
  }
  os << '\n';
  return os.str();
}

std::string bias_table_csv(const std::vector<CellResult>& cells) {
  std::ostringstream os;
  os << "confounder,beta1,estimator,mean,stderr,n_seeds\n";
  for (const auto& c : cells) {
    const std::pair<const char*, const std::optional<EstimatorSummary>*> rows[] = {
        {"unadjusted", &c.unadjusted}, {"parametric", &c.parametric}, {"embedding", &c.embedding}};
    for (const auto& [name, s] : rows) {
      os << c.confounder << ',' << detail::format_double(c.beta1) << ',' << name << ',';
      if (*s) {
        os << detail::format_double((*s)->mean) << ',' << detail::format_double((*s)->std_error)
           << ',' << (*s)->n_seeds;
      } else {
        os << "NA,NA,0";
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace contagion
