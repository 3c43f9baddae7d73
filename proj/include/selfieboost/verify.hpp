#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfieboost/boost.hpp"

namespace selfieboost {

/// A classifier known only through its scores on the training sample.
struct VirtualCandidate {
  std::vector<double> scores;
};

/// RHS - LHS of the log-sum-exp quadratic upper bound
///   log sum e^lambda <= log sum e^theta + sum p_i (lambda_i - theta_i)
///                       + 1/2 sum p_i (lambda_i - theta_i)^2,  p = softmax(theta).
/// Throws DomainError unless max_i (theta_i - lambda_i) <= 1 and the
/// vectors are finite and of equal, nonzero length.
double lse_inequality_deficit(std::span<const double> theta, std::span<const double> lambda);

/// The function-space step g(x_i) = f(x_i) + y_i.
VirtualCandidate oracle_step(const MarginCache& cache, std::span<const int> labels);

/// Outcome of checking recorded iterations against the convergence bound.
struct BoundReport {
  bool holds = true;
  /// min over accepted records of (potential_before - rho + 1e-9) - potential_after.
  double worst_step_slack = 0.0;
  /// e^{initial_potential - rho k} + 1e-9 - final mistakes.
  double final_slack = 0.0;
  std::string failure;
};

/// (a) every record lowers the potential by at least rho (1e-9 slack);
/// (b) final mistakes <= e^{initial_potential - rho k} + 1e-9, which is
///     err <= e^{-rho k} when initial_potential = log m.
/// Throws ValidationError for malformed records.
BoundReport theorem_bound_report(std::span<const IterationRecord> records, std::size_t m,
                                 double initial_potential, double rho);
bool theorem_bound_check(const TrainResult& result, std::size_t m, double initial_potential);

/// max over records of (potential_after - potential_before) - edge; the
/// per-step bound holds when this is <= 1e-9.
double chained_potential_excess(std::span<const IterationRecord> records);

/// ceil(log(1/epsilon) / rho); quotients within 1e-9 of an integer snap to it.
std::size_t iteration_count_for(double epsilon, double rho);

// Suites driven by the `verify` subcommand and the acceptance runner.

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  double worst = 0.0;  // meaning depends on the suite
  bool pass = false;
};

/// Random (theta, lambda) pairs, dims 1..64, theta_i - lambda_i uniform in
/// [-1, 1]. worst = smallest deficit; passes when every deficit >= -1e-9.
SuiteResult lse_suite(std::uint64_t seed, std::size_t pairs = 10000);
/// As lse_suite but with lambda <= theta componentwise.
SuiteResult lse_descent_suite(std::uint64_t seed, std::size_t pairs = 10000);
/// Random nets and datasets; worst = max |edge + 1/2| and |max_margin_diff - 1|.
SuiteResult lemma_suite(std::uint64_t seed, std::size_t states = 100);
/// 10 tanh and 10 relu nets; worst = max grad_check value.
SuiteResult grad_suite(std::uint64_t seed, std::size_t nets_per_activation = 10);
/// Bound on recorded metrics; worst = min slack over (a) and (b).
SuiteResult bound_suite(std::span<const IterationRecord> records, std::size_t m, double initial_potential,
                        double rho);

std::string format_suite_line(const SuiteResult& r);

}  // namespace selfieboost
