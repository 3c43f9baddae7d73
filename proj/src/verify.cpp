#include "selfieboost/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "selfieboost/error.hpp"
#include "selfieboost/rng.hpp"

namespace selfieboost {

namespace {

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::ranges::max_element(v);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double lse_inequality_deficit(std::span<const double> theta, std::span<const double> lambda) {
  if (theta.empty() || theta.size() != lambda.size()) {
    throw DomainError("theta and lambda must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i]) || !std::isfinite(lambda[i])) throw DomainError("vectors must be finite");
    if (theta[i] - lambda[i] > 1.0) {
      throw DomainError(fmt::format("theta[{0}] - lambda[{0}] = {1} exceeds 1", i, theta[i] - lambda[i]));
    }
  }
  const double log_z = log_sum_exp(theta);
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double p = std::exp(theta[i] - log_z);
    const double d = lambda[i] - theta[i];
    linear += p * d;
    quadratic += p * d * d;
  }
  const double rhs = log_z + linear + 0.5 * quadratic;
  return rhs - log_sum_exp(lambda);
}

VirtualCandidate oracle_step(const MarginCache& cache, std::span<const int> labels) {
  if (labels.size() != cache.raw_scores.size()) throw ShapeError("labels do not match the cache");
  VirtualCandidate g;
  g.scores.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) g.scores[i] = cache.raw_scores[i] + labels[i];
  return g;
}

BoundReport theorem_bound_report(std::span<const IterationRecord> records, std::size_t m,
                                 double initial_potential, double rho) {
  if (m == 0) throw ValidationError("dataset size must be positive");
  if (!std::isfinite(initial_potential)) throw ValidationError("initial potential must be finite");
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");

  BoundReport report;
  report.worst_step_slack = std::numeric_limits<double>::infinity();
  std::size_t prev_t = 0;
  for (const auto& r : records) {
    if (r.t <= prev_t) throw ValidationError(fmt::format("record t={} is out of order", r.t));
    if (!std::isfinite(r.edge) || !std::isfinite(r.potential_before) || !std::isfinite(r.potential_after)) {
      throw ValidationError(fmt::format("record t={} has non-finite values", r.t));
    }
    if (r.mistakes > m) throw ValidationError(fmt::format("record t={} has more mistakes than examples", r.t));
    prev_t = r.t;
    const double slack = (r.potential_before - rho + 1e-9) - r.potential_after;
    report.worst_step_slack = std::min(report.worst_step_slack, slack);
    if (slack < 0.0 && report.holds) {
      report.holds = false;
      report.failure = fmt::format("t={}: potential fell by {} < rho", r.t, r.potential_before - r.potential_after);
    }
  }
  if (records.empty()) report.worst_step_slack = 0.0;

  const double k = static_cast<double>(records.size());
  const double bound = std::exp(initial_potential - rho * k) + 1e-9;
  // With no records the final network is f_1, whose mistakes never exceed
  // e^{L(f_1)}; nothing further to compare.
  const double final_mistakes = records.empty() ? 0.0 : static_cast<double>(records.back().mistakes);
  report.final_slack = records.empty() ? bound : bound - final_mistakes;
  if (report.final_slack < 0.0 && report.holds) {
    report.holds = false;
    report.failure = fmt::format("final mistakes {} exceed e^(L(f_1) - rho k) = {}", final_mistakes, bound);
  }
  return report;
}

bool theorem_bound_check(const TrainResult& result, std::size_t m, double initial_potential) {
  return theorem_bound_report(result.records, m, initial_potential, result.rho).holds;
}

double chained_potential_excess(std::span<const IterationRecord> records) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) worst = std::max(worst, (r.potential_after - r.potential_before) - r.edge);
  return records.empty() ? 0.0 : worst;
}

std::size_t iteration_count_for(double epsilon, double rho) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("rho must be positive");
  const double q = -std::log(epsilon) / rho;
  const double nearest = std::round(q);
  if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(q));
}

// ---------------------------------------------------------------------------
// Suites

namespace {

SuiteResult lse_pairs(std::string name, std::uint64_t seed, std::size_t pairs, double gap_lo) {
  SeededRng rng(derive_seed(seed, Stream::kVerify, gap_lo < 0.0 ? 1 : 2));
  SuiteResult r{std::move(name), pairs, std::numeric_limits<double>::infinity(), true};
  std::vector<double> theta, lambda;
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t dim = 1 + rng.uniform_index(64);
    const double spread = 0.1 + 4.9 * rng.uniform();
    theta.resize(dim);
    lambda.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      theta[i] = spread * rng.normal();
      const double gap = gap_lo + (1.0 - gap_lo) * rng.uniform();  // theta_i - lambda_i
      lambda[i] = theta[i] - gap;
    }
    const double deficit = lse_inequality_deficit(theta, lambda);
    r.worst = std::min(r.worst, deficit);
  }
  r.pass = r.worst >= -1e-9;
  return r;
}

Dataset random_dataset(SeededRng& rng, std::size_t m, std::size_t d) {
  std::vector<double> features(m * d);
  for (double& v : features) v = rng.normal();
  std::vector<int> labels(m);
  for (int& y : labels) y = rng.uniform() < 0.5 ? -1 : 1;
  return Dataset(std::move(features), d, std::move(labels));
}

}  // namespace

SuiteResult lse_suite(std::uint64_t seed, std::size_t pairs) { return lse_pairs("lse", seed, pairs, -1.0); }

SuiteResult lse_descent_suite(std::uint64_t seed, std::size_t pairs) {
  return lse_pairs("lse-descent", seed, pairs, 0.0);
}

SuiteResult lemma_suite(std::uint64_t seed, std::size_t states) {
  SeededRng rng(derive_seed(seed, Stream::kVerify, 3));
  SuiteResult r{"lemma", states, 0.0, true};
  for (std::size_t k = 0; k < states; ++k) {
    const std::size_t m = 1 + rng.uniform_index(200);
    const std::size_t d = 1 + rng.uniform_index(10);
    const Dataset data = random_dataset(rng, m, d);
    const std::size_t width = 1 + rng.uniform_index(16);
    const auto act = rng.uniform() < 0.5 ? Activation::kTanh : Activation::kRelu;
    const double scale = 4.0 * rng.uniform();
    const FeedForwardNet net = init_network(NetworkArchitecture(d, {width}, act), rng.next_u64(), scale);
    const MarginCache cache = margins(net, data);
    const VirtualCandidate g = oracle_step(cache, data.labels());
    const EdgeReport rep = edge(cache, g.scores, 0.1);
    r.worst = std::max({r.worst, std::abs(rep.edge + 0.5), std::abs(rep.max_margin_diff - 1.0)});
  }
  r.pass = r.worst <= 1e-12;
  return r;
}

SuiteResult grad_suite(std::uint64_t seed, std::size_t nets_per_activation) {
  SeededRng rng(derive_seed(seed, Stream::kVerify, 4));
  SuiteResult r{"grad", 2 * nets_per_activation, 0.0, true};
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    for (std::size_t k = 0; k < nets_per_activation; ++k) {
      const std::size_t d = 1 + rng.uniform_index(10);
      std::vector<std::size_t> hidden(1 + rng.uniform_index(2));
      for (auto& w : hidden) w = 1 + rng.uniform_index(16);
      const FeedForwardNet net = init_network(NetworkArchitecture(d, hidden, act), rng.next_u64(), 1.0);
      std::vector<double> x(d);
      for (double& v : x) v = rng.normal();
      r.worst = std::max(r.worst, grad_check(net, x, 1e-4));
    }
  }
  r.pass = r.worst <= 1e-6;
  return r;
}

SuiteResult bound_suite(std::span<const IterationRecord> records, std::size_t m, double initial_potential,
                        double rho) {
  const BoundReport rep = theorem_bound_report(records, m, initial_potential, rho);
  return {"bound", records.size(), std::min(rep.worst_step_slack, rep.final_slack), rep.holds};
}

std::string format_suite_line(const SuiteResult& r) {
  return fmt::format("{:<12} instances={:<6} worst={:<24.17g} {}", r.name, r.instances, r.worst,
                     r.pass ? "PASS" : "FAIL");
}

}  // namespace selfieboost
