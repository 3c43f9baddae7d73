#include "selfieboost/baselines.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "model_json.hpp"
#include "selfieboost/error.hpp"
#include "selfieboost/parallel.hpp"
#include "selfieboost/rng.hpp"
#include "selfieboost/sampling.hpp"

namespace selfieboost {

namespace {

int vote(double score) { return score >= 0.0 ? 1 : -1; }

}  // namespace

int ensemble_predict(const EnsembleModel& model, std::span<const double> x) {
  if (model.members.empty()) throw DomainError("ensemble has no members");
  if (model.members.size() != model.alphas.size()) throw ShapeError("ensemble members and alphas differ in count");
  double total = 0.0;
  for (std::size_t t = 0; t < model.members.size(); ++t) total += model.alphas[t] * vote(forward(model.members[t], x));
  return vote(total);
}

std::size_t ensemble_mistakes(const EnsembleModel& model, const Dataset& data) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (ensemble_predict(model, data.x(i)) != data.y(i)) ++count;
  }
  return count;
}

CostReport cost(const EnsembleModel& model) {
  CostReport r;
  r.network_evals_per_prediction = model.members.size();
  for (const auto& net : model.members) r.total_params_evaluated += net.parameter_count();
  return r;
}

CostReport cost(const FeedForwardNet& net) { return {1, net.parameter_count()}; }

double AdaBoostResult::training_error_bound() const {
  double bound = 1.0;
  for (const auto& r : rounds) {
    if (r.kept) bound *= 2.0 * std::sqrt(r.weighted_error * (1.0 - r.weighted_error));
  }
  return bound;
}

AdaBoostWeighting adaboost_reweight(std::vector<double>& dist, std::span<const int> votes,
                                    std::span<const int> labels, double prior_alpha_sum, unsigned threads) {
  const std::size_t m = dist.size();
  if (votes.size() != m || labels.size() != m) throw ShapeError("distribution, votes and labels differ in length");
  AdaBoostWeighting w;
  w.weighted_error = chunked_sum(m, threads, [&](std::size_t i) { return votes[i] != labels[i] ? dist[i] : 0.0; });
  if (!(w.weighted_error < 0.5)) return w;
  w.kept = true;
  if (w.weighted_error == 0.0) {
    w.alpha = 1.0 + prior_alpha_sum;
    return w;
  }
  w.alpha = 0.5 * std::log((1.0 - w.weighted_error) / w.weighted_error);
  for (std::size_t i = 0; i < m; ++i) dist[i] *= std::exp(-w.alpha * labels[i] * votes[i]);
  const double z = chunked_sum(m, threads, [&](std::size_t i) { return dist[i]; });
  for (double& p : dist) p /= z;
  return w;
}

AdaBoostResult run_adaboost(const Dataset& data, const WeakLearnerConfig& weak, std::size_t T, std::uint64_t seed,
                            unsigned threads) {
  if (T == 0) throw DomainError("AdaBoost needs T >= 1");
  if (weak.n == 0 || weak.sgd.batch == 0) throw DomainError("weak learner needs n >= 1 and batch >= 1");
  const std::size_t m = data.size();
  const NetworkArchitecture arch(data.dim(), weak.hidden, weak.activation);

  std::vector<double> dist(m, 1.0 / static_cast<double>(m));
  std::vector<double> ensemble_score(m, 0.0);  // sum_t alpha_t h_t(x_i)
  SeededRng rng(derive_seed(seed, Stream::kAdaBoost));
  AdaBoostResult result;

  for (std::size_t t = 1; t <= T; ++t) {
    const AliasTable alias = build_alias(dist);
    const auto sample = sample_indices(alias, weak.n, rng);

    FeedForwardNet net = init_network(arch, rng.next_u64(), weak.init_scale);
    GradientBuffer buf(net);
    ForwardTrace trace;
    const double inv_batch = 1.0 / static_cast<double>(weak.sgd.batch);
    for (std::size_t step = 0; step < weak.sgd.steps; ++step) {
      for (std::size_t b = 0; b < weak.sgd.batch; ++b) {
        const std::size_t i = sample[rng.uniform_index(sample.size())];
        const double g = forward_trace(net, data.x(i), trace);
        backprop_trace(net, trace, (g - data.y(i)) * inv_batch, buf);
      }
      sgd_step(net, buf, weak.sgd.lr);
    }

    const auto scores = forward_batch(net, data.matrix(), threads);
    std::vector<int> h(m);
    for (std::size_t i = 0; i < m; ++i) h[i] = vote(scores[i]);
    const double prior = std::accumulate(result.model.alphas.begin(), result.model.alphas.end(), 0.0);
    const AdaBoostWeighting w = adaboost_reweight(dist, h, data.labels(), prior, threads);

    AdaBoostRound round;
    round.round = t;
    round.weighted_error = w.weighted_error;
    round.alpha = w.alpha;
    round.kept = w.kept;
    if (!w.kept) {
      round.ensemble_train_err = result.rounds.empty() ? 1.0 : result.rounds.back().ensemble_train_err;
      result.rounds.push_back(round);
      break;
    }
    result.model.members.push_back(std::move(net));
    result.model.alphas.push_back(w.alpha);

    std::size_t wrong = 0;
    for (std::size_t i = 0; i < m; ++i) {
      ensemble_score[i] += w.alpha * h[i];
      if (vote(ensemble_score[i]) != data.y(i)) ++wrong;
    }
    round.ensemble_train_err = static_cast<double>(wrong) / static_cast<double>(m);
    result.rounds.push_back(round);
    if (w.weighted_error == 0.0) break;
  }

  if (result.model.members.empty()) throw NoWeakLearnerError("every weak learner had weighted error >= 1/2");
  return result;
}

PlainSgdResult run_plain_sgd(const Dataset& data, const NetworkArchitecture& arch, std::size_t steps, double lr,
                             std::size_t batch, std::uint64_t seed, double init_scale, std::size_t record_every) {
  if (batch == 0) throw DomainError("batch must be positive");
  if (arch.input_dim() != data.dim()) throw ShapeError("architecture input does not match the dataset");
  SeededRng rng(derive_seed(seed, Stream::kPlainSgd));
  PlainSgdResult result{init_network(arch, rng.next_u64(), init_scale), {}};
  const auto record = [&] { result.train_err.push_back(error_rate(result.net, data)); };
  record();

  GradientBuffer buf(result.net);
  ForwardTrace trace;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t step = 1; step <= steps; ++step) {
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t i = rng.uniform_index(data.size());
      const double g = forward_trace(result.net, data.x(i), trace);
      if (data.y(i) * g < 1.0) backprop_trace(result.net, trace, -data.y(i) * inv_batch, buf);
    }
    sgd_step(result.net, buf, lr);
    if (record_every > 0 && step % record_every == 0) record();
  }
  return result;
}

std::string ensemble_to_json(const EnsembleModel& model) {
  nlohmann::json doc;
  doc["format_version"] = kEnsembleFormatVersion;
  doc["alphas"] = model.alphas;
  doc["members"] = nlohmann::json::array();
  for (const auto& net : model.members) doc["members"].push_back(detail::model_object(net));
  return doc.dump() + "\n";
}

EnsembleModel ensemble_from_json(std::string_view text) {
  const auto doc = detail::parse_json_text(text, "ensemble");
  detail::check_format_version(doc, kEnsembleFormatVersion);
  if (!doc.contains("alphas") || !doc["alphas"].is_array()) throw ParseError("ensemble.alphas: expected an array");
  if (!doc.contains("members") || !doc["members"].is_array()) throw ParseError("ensemble.members: expected an array");
  const auto& alphas = doc["alphas"];
  const auto& members = doc["members"];
  if (alphas.size() != members.size()) throw ParseError("ensemble: alphas and members differ in count");
  if (members.empty()) throw ParseError("ensemble: no members");
  EnsembleModel model;
  for (std::size_t t = 0; t < members.size(); ++t) {
    if (!alphas[t].is_number()) throw ParseError(fmt::format("ensemble.alphas[{}]: expected a number", t));
    model.alphas.push_back(alphas[t].get<double>());
    model.members.push_back(detail::model_from_object(members[t], fmt::format("ensemble.members[{}]", t)));
  }
  return model;
}

void save_ensemble(const EnsembleModel& model, const std::filesystem::path& path) {
  detail::write_text_file(path, ensemble_to_json(model));
}

EnsembleModel load_ensemble(const std::filesystem::path& path) {
  return ensemble_from_json(detail::read_text_file(path));
}

}  // namespace selfieboost
