#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "selfieboost/data.hpp"
#include "selfieboost/nnet.hpp"
#include "selfieboost/rng.hpp"
#include "selfieboost/sampling.hpp"

namespace selfieboost {

struct SgdParams {
  std::size_t steps = 500;
  double lr = 0.05;
  std::size_t batch = 32;
  /// Evaluate the acceptance test along the SGD trajectory (see
  /// checkpoint_schedule) instead of only after the last step.
  bool checkpoints = true;
};

/// Step counts at which a candidate is tested: 1, 2, 3, 4, 6, 8, 12, ...
/// (powers of two and 1.5 times powers of two) below `steps`, then `steps`.
/// Only {steps} when checkpoints are off.
std::vector<std::size_t> checkpoint_schedule(const SgdParams& params);

/// Escalation applied after a rejected candidate: SGD steps are multiplied
/// by sgd_growth, the learning rate by lr_shrink when the candidate broke
/// the margin-difference clip (or diverged), and the learner gains
/// widen_units hidden units when that is nonzero. S is redrawn each time.
struct RetryPolicy {
  std::size_t max_retries = 5;
  double sgd_growth = 2.0;
  std::size_t widen_units = 0;
  double lr_shrink = 0.5;
};

struct BoostConfig {
  double rho = 0.1;
  std::size_t T = 50;
  std::optional<std::size_t> n;  // working-set size; min(m, 256) when unset
  SgdParams sgd;
  RetryPolicy retry;
  std::uint64_t seed = 0;
  /// Scale of the learner's output layer at start. 0 gives f_1 == 0 while
  /// the hidden layers still get a unit-scale random init.
  double init_scale = 0.0;
  std::vector<std::size_t> hidden{32};
  Activation activation = Activation::kTanh;
  /// Workers for full-dataset sweeps. Results do not depend on it.
  unsigned threads = 1;

  /// Throws DomainError unless rho is in (0, 1/4) and every count is valid.
  void validate() const;
  std::size_t working_set_size(std::size_t m) const;
};

/// Cached scores of f_t on the whole training set.
struct MarginCache {
  std::vector<int> labels;
  std::vector<double> raw_scores;  // f_t(x_i)
  std::vector<double> margins;     // y_i f_t(x_i)
  WeightTable weights;             // D_i
  double potential = 0.0;          // L(f_t) = log sum_i exp(-margin_i)
  std::size_t mistakes = 0;        // #{i : margin_i <= 0}
};

MarginCache margins(const FeedForwardNet& net, const Dataset& data, unsigned threads = 1);
MarginCache margin_cache_from_scores(std::vector<double> scores, std::span<const int> labels,
                                     unsigned threads = 1);

double potential(const MarginCache& cache);

/// Examples with y_i f(x_i) <= 0.
std::size_t mistakes(const FeedForwardNet& net, const Dataset& data, unsigned threads = 1);
double error_rate(const FeedForwardNet& net, const Dataset& data, unsigned threads = 1);

struct EdgeReport {
  double edge = 0.0;             // sum_i D_i [-delta_i + delta_i^2 / 2]
  double max_margin_diff = 0.0;  // max_i delta_i, delta_i = y_i (g(x_i) - f_t(x_i))
  std::size_t violation_count = 0;
  bool accepted = false;         // edge < -rho and max_margin_diff <= 1
};

EdgeReport edge(const MarginCache& cache, std::span<const double> candidate_scores, double rho,
                unsigned threads = 1);

/// Per-example surrogate y (f - g) + (g - f)^2 / 2 and its derivative in g.
double surrogate_loss(int y, double f_score, double g_score);
double surrogate_derivative(int y, double f_score, double g_score);

/// Minibatch SGD on the surrogate over the working set S, starting from
/// `candidate` (normally a copy of f_t). Batches are drawn uniformly with
/// replacement from S; f_t enters only through snapshot_scores. Throws
/// NumericError if the loss becomes non-finite.
FeedForwardNet sgd_inner(const Dataset& data, std::span<const std::size_t> working_set,
                         std::span<const double> snapshot_scores, FeedForwardNet candidate,
                         const SgdParams& params, SeededRng& rng);

struct IterationRecord {
  std::size_t t = 0;
  double edge = 0.0;
  double potential_before = 0.0;
  double potential_after = 0.0;
  double train_err = 0.0;
  std::size_t mistakes = 0;
  std::size_t retries_used = 0;
  std::size_t sgd_steps_used = 0;
  std::size_t widened_to = 0;  // width of the last hidden layer
  double wall_ms = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

enum class StopReason { kCompletedT, kNoCandidateFound, kZeroTrainingError };
std::string_view to_string(StopReason reason);

/// Records hold the accepted iterations only, in order.
struct TrainResult {
  FeedForwardNet final_net;
  std::vector<IterationRecord> records;
  std::size_t accepted_count = 0;
  StopReason stop_reason = StopReason::kCompletedT;
  double initial_potential = 0.0;  // L(f_1)
  std::size_t initial_mistakes = 0;
  double rho = 0.0;
  std::size_t m = 0;
};

/// Builds f_1 for a config: unit-scale hidden layers, output layer scaled by
/// init_scale.
FeedForwardNet initial_learner(const BoostConfig& config, std::size_t input_dim);

TrainResult run_selfieboost(const Dataset& data, const BoostConfig& config);

inline constexpr std::string_view kMetricsHeader =
    "t,edge,potential_before,potential_after,train_err,mistakes,retries,sgd_steps,widened_to,wall_ms";

/// With include_timing false, wall_ms is written as 0 so that identical runs
/// give identical files.
std::string metrics_csv(std::span<const IterationRecord> records, bool include_timing);
std::vector<IterationRecord> metrics_from_csv(std::string_view text);

}  // namespace selfieboost
