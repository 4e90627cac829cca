#include "contagion/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "contagion/rng.hpp"
#include "text_io.hpp"

namespace contagion {

std::string to_string(Aggregator a) { return a == Aggregator::Average ? "average" : "or"; }

Aggregator parse_aggregator(const std::string& s) {
  if (s == "average") return Aggregator::Average;
  if (s == "or") return Aggregator::Or;
  throw std::invalid_argument("unknown aggregator '" + s + "' (expected average|or)");
}

bool Covariates::valid() const {
  return std::all_of(values.begin(), values.end(),
                     [](std::int8_t c) { return c >= -1 && c <= 1; });
}

TreatmentVector TreatmentVector::constant(std::size_t n, std::uint8_t t) {
  return {std::vector<std::uint8_t>(n, t), std::vector<std::uint8_t>(n, 1)};
}

std::size_t AggregatedTreatment::num_eligible() const {
  return static_cast<std::size_t>(std::count(eligible.begin(), eligible.end(), 1));
}

BinnedCovariates bin_covariate(std::span<const double> raw) {
  const std::size_t n = raw.size();
  BinnedCovariates out;
  out.covariates.values.assign(n, 0);
  if (n == 0) return out;

  const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : raw) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0)) {
    out.degenerate = true;
    return out;
  }
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (raw[i] - mean) / sd;

  std::vector<double> sorted = z;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t r1 = (n + 2) / 3;          // ceil(n/3)
  const std::size_t r2 = (2 * n + 2) / 3;      // ceil(2n/3)
  const double cut_low = sorted[r1 - 1];
  const double cut_mid = sorted[r2 - 1];
  for (std::size_t i = 0; i < n; ++i) {
    out.covariates.values[i] = z[i] <= cut_low ? -1 : (z[i] <= cut_mid ? 0 : 1);
  }
  return out;
}

double propensity(int c) {
  if (c < -1 || c > 1) {
    throw std::invalid_argument("propensity: covariate must be -1, 0 or 1");
  }
  return 0.5 + 0.35 * c;
}

TreatmentVector draw_treatments(const Covariates& cov, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TreatmentVector t = TreatmentVector::constant(cov.size(), 0);
  for (std::size_t i = 0; i < cov.size(); ++i) {
    t.value[i] = unif(rng) < propensity(cov.values[i]) ? 1 : 0;
  }
  return t;
}

AggregatedTreatment aggregate_treatment(const Graph& g, const TreatmentVector& t,
                                        Aggregator aggregator) {
  const std::size_t n = g.num_nodes();
  if (t.value.size() != n || t.observed.size() != n) {
    throw std::invalid_argument("aggregate_treatment: treatment vector size mismatch");
  }
  AggregatedTreatment v{std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  for (NodeId i = 0; i < n; ++i) {
    std::size_t count = 0;
    std::size_t treated = 0;
    for (NodeId j : g.neighbors(i)) {
      if (!t.observed[j]) continue;
      ++count;
      treated += t.value[j] ? 1 : 0;
    }
    if (count == 0) continue;
    v.eligible[i] = 1;
    v.value[i] = aggregator == Aggregator::Average
                     ? static_cast<double>(treated) / static_cast<double>(count)
                     : (treated > 0 ? 1.0 : 0.0);
  }
  return v;
}

OutcomeVector simulate_outcome_continuous(const AggregatedTreatment& v, const Covariates& cov,
                                          const SimulationParams& params,
                                          std::uint64_t seed) {
  if (v.size() != cov.size()) {
    throw std::invalid_argument("simulate_outcome_continuous: size mismatch");
  }
  if (!(params.noise_sd >= 0.0)) {
    throw std::invalid_argument("simulate_outcome_continuous: noise_sd must be >= 0");
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  OutcomeVector y{std::vector<double>(v.size()), std::vector<std::uint8_t>(v.size(), 1)};
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Always consume the noise draw so noise_sd only rescales Y.
    const double eps = noise(rng) * params.noise_sd;
    y.value[i] = params.beta0 * v.value[i] + params.beta1 * propensity(cov.values[i]) + eps;
  }
  return y;
}

SimulatedData simulate_continuous(const Graph& g, const Covariates& cov,
                                  const SimulationParams& params) {
  SimulatedData d;
  d.treatments = draw_treatments(cov, derive_seed(params.seed, "treatment"));
  d.aggregated = aggregate_treatment(g, d.treatments, params.aggregator);
  d.outcomes = simulate_outcome_continuous(d.aggregated, cov, params,
                                           derive_seed(params.seed, "noise"));
  return d;
}

VaccinationData vaccination_design(const Graph& g, const TreatmentVector& t,
                                   Aggregator aggregator, std::uint64_t seed,
                                   bool surviving_only) {
  const std::size_t n = g.num_nodes();
  if (n < 2) throw std::invalid_argument("vaccination_design: need n >= 2");
  if (t.size() != n) throw std::invalid_argument("vaccination_design: size mismatch");

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n / 2);
  std::sort(order.begin(), order.end());

  VaccinationData out;
  out.treatments = t;
  out.outcomes = {std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  for (NodeId i : order) {
    out.outcomes.value[i] = t.value[i];
    out.outcomes.defined[i] = 1;
    out.treatments.observed[i] = 0;
  }
  out.aggregated = aggregate_treatment(g, surviving_only ? out.treatments : t, aggregator);
  out.evaluation_nodes = std::move(order);
  return out;
}

double oracle_estimand(const Graph& g, const Covariates& cov, const SimulationParams& params,
                       int t_star) {
  if (t_star != 0 && t_star != 1) throw std::invalid_argument("oracle_estimand: t_star must be 0 or 1");
  if (cov.size() != g.num_nodes()) throw std::invalid_argument("oracle_estimand: size mismatch");
  const auto v_star = aggregate_treatment(
      g, TreatmentVector::constant(g.num_nodes(), static_cast<std::uint8_t>(t_star)),
      params.aggregator);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < cov.size(); ++i) {
    if (!v_star.eligible[i]) continue;
    sum += params.beta0 * v_star.value[i] + params.beta1 * propensity(cov.values[i]);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("oracle_estimand: no eligible nodes");
  return sum / static_cast<double>(count);
}

BlockConfounder confounder_from_blocks(std::span<const std::uint32_t> block_of,
                                       std::size_t num_blocks, double resample_rate,
                                       std::uint64_t seed) {
  if (!(resample_rate >= 0.0 && resample_rate <= 1.0)) {
    throw std::invalid_argument("confounder_from_blocks: resample_rate must lie in [0,1]");
  }
  BlockConfounder out;
  auto& c = out.covariates.values;
  c.resize(block_of.size());
  if (num_blocks <= 3) {
    static constexpr std::int8_t kOne[] = {0};
    static constexpr std::int8_t kTwo[] = {-1, 1};
    static constexpr std::int8_t kThree[] = {-1, 0, 1};
    const std::int8_t* table = num_blocks == 1 ? kOne : (num_blocks == 2 ? kTwo : kThree);
    for (std::size_t i = 0; i < block_of.size(); ++i) {
      if (block_of[i] >= num_blocks) throw std::invalid_argument("confounder_from_blocks: bad block id");
      c[i] = table[block_of[i]];
    }
  } else {
    std::vector<double> raw(block_of.begin(), block_of.end());
    c = bin_covariate(raw).covariates.values;
  }

  if (resample_rate > 0.0) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> level(-1, 1);
    for (auto& ci : c) {
      const bool resample = unif(rng) < resample_rate;
      const int draw = level(rng);
      if (resample) ci = static_cast<std::int8_t>(draw);
    }
  }
  bool seen[3] = {false, false, false};
  for (auto ci : c) seen[ci + 1] = true;
  out.missing_level = !c.empty() && !(seen[0] && seen[1] && seen[2]);
  return out;
}

void write_covariates_csv(std::ostream& out, const Covariates& cov) {
  out << "node_id,c\n";
  for (std::size_t i = 0; i < cov.size(); ++i) out << i << ',' << int(cov.values[i]) << '\n';
}

Covariates read_covariates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != "node_id,c") {
    throw std::runtime_error("covariates csv: missing header 'node_id,c'");
  }
  Covariates cov;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim_cr(line);
    if (trimmed.empty()) continue;
    const auto f = detail::split(trimmed, ',');
    std::size_t id = 0;
    int c = 0;
    if (f.size() != 2 || !detail::parse_int(f[0], id) || !detail::parse_int(f[1], c) ||
        c < -1 || c > 1) {
      throw ParseError(line_no, "malformed covariate row");
    }
    if (id != cov.size()) throw ParseError(line_no, "node ids must be dense and ascending");
    cov.values.push_back(static_cast<std::int8_t>(c));
  }
  return cov;
}

void write_dataset_csv(std::ostream& out, const Covariates& cov, const TreatmentVector& t,
                       const AggregatedTreatment& v, const OutcomeVector& y) {
  const std::size_t n = cov.size();
  if (t.size() != n || v.size() != n || y.size() != n) {
    throw std::invalid_argument("write_dataset_csv: size mismatch");
  }
  out << "node_id,c,t,v,y,eligible\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << i << ',' << int(cov.values[i]) << ',';
    if (t.observed[i]) {
      out << int(t.value[i]);
    } else {
      out << "NA";
    }
    out << ',' << detail::format_double(v.value[i]) << ',';
    if (y.defined[i]) {
      out << detail::format_double(y.value[i]);
    } else {
      out << "NA";
    }
    out << ',' << int(v.eligible[i]) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != "node_id,c,t,v,y,eligible") {
    throw std::runtime_error("dataset csv: missing header 'node_id,c,t,v,y,eligible'");
  }
  Dataset d;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim_cr(line);
    if (trimmed.empty()) continue;
    const auto f = detail::split(trimmed, ',');
    if (f.size() != 6) throw ParseError(line_no, "expected 6 fields");
    std::size_t id = 0;
    int c = 0, t = 0, elig = 0;
    double v = 0.0, y = 0.0;
    const bool t_na = f[2] == "NA";
    const bool y_na = f[4] == "NA";
    if (!detail::parse_int(f[0], id) || id != d.covariates.size() ||
        !detail::parse_int(f[1], c) || c < -1 || c > 1 ||
        (!t_na && (!detail::parse_int(f[2], t) || (t != 0 && t != 1))) ||
        !detail::parse_double(f[3], v) || (!y_na && !detail::parse_double(f[4], y)) ||
        !detail::parse_int(f[5], elig) || (elig != 0 && elig != 1)) {
      throw ParseError(line_no, "malformed dataset row");
    }
    d.covariates.values.push_back(static_cast<std::int8_t>(c));
    d.treatments.value.push_back(static_cast<std::uint8_t>(t));
    d.treatments.observed.push_back(t_na ? 0 : 1);
    d.aggregated.value.push_back(v);
    d.aggregated.eligible.push_back(static_cast<std::uint8_t>(elig));
    d.outcomes.value.push_back(y);
    d.outcomes.defined.push_back(y_na ? 0 : 1);
  }
  return d;
}

}  // namespace contagion
