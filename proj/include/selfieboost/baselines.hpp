#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "selfieboost/boost.hpp"
#include "selfieboost/data.hpp"
#include "selfieboost/nnet.hpp"

namespace selfieboost {

/// Weighted-majority vote over member networks. Each member votes
/// sign(f(x)) with sign(0) = +1, and a zero total also resolves to +1.
struct EnsembleModel {
  std::vector<FeedForwardNet> members;
  std::vector<double> alphas;
};

int ensemble_predict(const EnsembleModel& model, std::span<const double> x);
std::size_t ensemble_mistakes(const EnsembleModel& model, const Dataset& data);

struct CostReport {
  std::size_t network_evals_per_prediction = 0;
  std::size_t total_params_evaluated = 0;
};

CostReport cost(const EnsembleModel& model);
CostReport cost(const FeedForwardNet& net);

struct WeakLearnerConfig {
  std::vector<std::size_t> hidden{32};
  Activation activation = Activation::kTanh;
  SgdParams sgd;
  std::size_t n = 256;  // resample size per round
  double init_scale = 1.0;
};

struct AdaBoostRound {
  std::size_t round = 0;
  double weighted_error = 0.0;  // epsilon_t under the round's distribution
  double alpha = 0.0;           // 0 for discarded learners
  bool kept = false;
  double ensemble_train_err = 0.0;
};

struct AdaBoostResult {
  EnsembleModel model;
  std::vector<AdaBoostRound> rounds;
  /// prod over kept rounds of 2 sqrt(eps (1 - eps)).
  double training_error_bound() const;
  double final_train_err() const { return rounds.empty() ? 1.0 : rounds.back().ensemble_train_err; }
};

struct AdaBoostWeighting {
  double weighted_error = 0.0;
  double alpha = 0.0;
  bool kept = false;
};

/// One distribution update for weak-learner votes h_i in {-1, +1}.
/// epsilon >= 1/2: not kept, dist untouched. epsilon = 0: kept with alpha =
/// 1 + prior_alpha_sum (outvotes every earlier member), dist untouched.
/// Otherwise alpha = log((1 - eps) / eps) / 2 and dist_i *= exp(-alpha y_i h_i),
/// renormalized.
AdaBoostWeighting adaboost_reweight(std::vector<double>& dist, std::span<const int> votes,
                                    std::span<const int> labels, double prior_alpha_sum, unsigned threads = 1);

/// Resampling AdaBoost with an SGD-trained weak network. The weak learner
/// fits labels by squared loss on n draws from the current distribution.
/// The run stops at the first learner with weighted error >= 1/2 (which is
/// discarded) or with zero weighted error (which is kept).
/// Throws NoWeakLearnerError when no learner is kept.
AdaBoostResult run_adaboost(const Dataset& data, const WeakLearnerConfig& weak, std::size_t T, std::uint64_t seed,
                            unsigned threads = 1);

struct PlainSgdResult {
  FeedForwardNet net;
  std::vector<double> train_err;  // after every `record_every` steps, starting with the initial net
};

/// Uniform-sampling SGD on the linear loss 1 - y f(x), applied only to
/// examples with y f(x) < 1.
PlainSgdResult run_plain_sgd(const Dataset& data, const NetworkArchitecture& arch, std::size_t steps, double lr,
                             std::size_t batch, std::uint64_t seed, double init_scale = 1.0,
                             std::size_t record_every = 100);

inline constexpr int kEnsembleFormatVersion = 1;

std::string ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(std::string_view text);
void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path);
EnsembleModel load_ensemble(const std::filesystem::path& path);

}  // namespace selfieboost
