#include "selfieboost/boost.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "selfieboost/error.hpp"
#include "selfieboost/parallel.hpp"

namespace selfieboost {

void BoostConfig::validate() const {
  if (!(rho > 0.0 && rho < 0.25)) throw DomainError(fmt::format("rho = {} is outside (0, 1/4)", rho));
  if (n && *n == 0) throw DomainError("working-set size n must be positive");
  if (sgd.batch == 0) throw DomainError("sgd.batch must be positive");
  if (!(sgd.lr > 0.0) || !std::isfinite(sgd.lr)) throw DomainError("sgd.lr must be positive");
  if (!(retry.sgd_growth >= 1.0)) throw DomainError("retry.sgd_growth must be >= 1");
  if (!(retry.lr_shrink > 0.0 && retry.lr_shrink <= 1.0)) throw DomainError("retry.lr_shrink must be in (0, 1]");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) throw DomainError("init_scale must be >= 0");
  if (retry.widen_units > 0 && hidden.empty()) {
    throw DomainError("retry.widen_units needs a learner with a hidden layer");
  }
  for (std::size_t w : hidden) {
    if (w == 0) throw DomainError("hidden widths must be positive");
  }
}

std::size_t BoostConfig::working_set_size(std::size_t m) const { return n ? *n : std::min<std::size_t>(m, 256); }

MarginCache margin_cache_from_scores(std::vector<double> scores, std::span<const int> labels, unsigned threads) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  MarginCache cache;
  cache.labels.assign(labels.begin(), labels.end());
  cache.raw_scores = std::move(scores);
  cache.margins.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cache.margins[i] = labels[i] * cache.raw_scores[i];
    if (cache.margins[i] <= 0.0) ++cache.mistakes;
  }
  cache.weights = weights_from_margins(cache.margins, threads);
  cache.potential = cache.weights.normalizer_log;
  return cache;
}

MarginCache margins(const FeedForwardNet& net, const Dataset& data, unsigned threads) {
  return margin_cache_from_scores(forward_batch(net, data.matrix(), threads), data.labels(), threads);
}

double potential(const MarginCache& cache) { return cache.weights.normalizer_log; }

std::size_t mistakes(const FeedForwardNet& net, const Dataset& data, unsigned threads) {
  const auto scores = forward_batch(net, data.matrix(), threads);
  std::size_t count = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (data.y(i) * scores[i] <= 0.0) ++count;
  }
  return count;
}

double error_rate(const FeedForwardNet& net, const Dataset& data, unsigned threads) {
  return static_cast<double>(mistakes(net, data, threads)) / static_cast<double>(data.size());
}

EdgeReport edge(const MarginCache& cache, std::span<const double> candidate_scores, double rho,
                unsigned threads) {
  const std::size_t m = cache.raw_scores.size();
  const auto& labels = cache.labels;
  if (candidate_scores.size() != m || labels.size() != m) {
    throw ShapeError("candidate scores must cover the whole dataset");
  }
  const auto& probs = cache.weights.probs;
  const auto delta = [&](std::size_t i) { return labels[i] * (candidate_scores[i] - cache.raw_scores[i]); };

  EdgeReport report;
  report.edge = chunked_sum(m, threads, [&](std::size_t i) {
    const double d = delta(i);
    return probs[i] * (-d + 0.5 * d * d);
  });
  report.max_margin_diff = delta(0);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = delta(i);
    report.max_margin_diff = std::max(report.max_margin_diff, d);
    if (d > 1.0) ++report.violation_count;
  }
  report.accepted = report.edge < -rho && report.max_margin_diff <= 1.0;
  return report;
}

double surrogate_loss(int y, double f_score, double g_score) {
  const double diff = g_score - f_score;
  return y * (f_score - g_score) + 0.5 * diff * diff;
}

double surrogate_derivative(int y, double f_score, double g_score) { return -y + (g_score - f_score); }

FeedForwardNet sgd_inner(const Dataset& data, std::span<const std::size_t> working_set,
                         std::span<const double> snapshot_scores, FeedForwardNet candidate,
                         const SgdParams& params, SeededRng& rng) {
  if (snapshot_scores.size() != data.size()) throw ShapeError("snapshot scores must cover the whole dataset");
  if (params.steps == 0) return candidate;
  if (working_set.empty()) throw DomainError("working set is empty");
  if (params.batch == 0) throw DomainError("batch size must be positive");

  GradientBuffer buf(candidate);
  ForwardTrace trace;
  const double inv_batch = 1.0 / static_cast<double>(params.batch);
  for (std::size_t step = 0; step < params.steps; ++step) {
    for (std::size_t b = 0; b < params.batch; ++b) {
      const std::size_t i = working_set[rng.uniform_index(working_set.size())];
      const double g = forward_trace(candidate, data.x(i), trace);
      const double f = snapshot_scores[i];
      if (!std::isfinite(surrogate_loss(data.y(i), f, g))) {
        throw NumericError(fmt::format("surrogate loss diverged at SGD step {}", step));
      }
      backprop_trace(candidate, trace, surrogate_derivative(data.y(i), f, g) * inv_batch, buf);
    }
    sgd_step(candidate, buf, params.lr);
  }
  return candidate;
}

std::vector<std::size_t> checkpoint_schedule(const SgdParams& params) {
  std::vector<std::size_t> out;
  if (params.checkpoints) {
    for (std::size_t p = 1; p < params.steps; p *= 2) {
      out.push_back(p);
      if (p >= 2 && p + p / 2 < params.steps) out.push_back(p + p / 2);
    }
  }
  out.push_back(params.steps);
  return out;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kCompletedT:
      return "completed_T";
    case StopReason::kNoCandidateFound:
      return "no_candidate_found";
    case StopReason::kZeroTrainingError:
      return "zero_training_error";
  }
  return "unknown";
}

FeedForwardNet initial_learner(const BoostConfig& config, std::size_t input_dim) {
  NetworkArchitecture arch(input_dim, config.hidden, config.activation);
  FeedForwardNet net = init_network(arch, derive_seed(config.seed, Stream::kLearnerInit), 1.0);
  DenseLayer& out = net.mutable_layers().back();
  for (double& w : out.weights) w *= config.init_scale;
  for (double& b : out.biases) b *= config.init_scale;
  return net;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::ranges::all_of(v, [](double x) { return std::isfinite(x); });
}

std::size_t last_hidden_width(const FeedForwardNet& net) {
  const auto& h = net.architecture().hidden();
  return h.empty() ? 0 : h.back();
}

}  // namespace

TrainResult run_selfieboost(const Dataset& data, const BoostConfig& config) {
  config.validate();
  const std::size_t m = data.size();
  const std::size_t n = config.working_set_size(m);
  const unsigned threads = config.threads;

  FeedForwardNet current = initial_learner(config, data.dim());
  MarginCache cache = margins(current, data, threads);

  TrainResult result{current, {}, 0, StopReason::kCompletedT, cache.potential, cache.mistakes, config.rho, m};
  if (config.T > 0 && cache.mistakes == 0) {
    result.stop_reason = StopReason::kZeroTrainingError;
    return result;
  }

  SeededRng rng(derive_seed(config.seed, Stream::kBoost));
  std::size_t widen_count = 0;

  for (std::size_t t = 1; t <= config.T; ++t) {
    const auto started = std::chrono::steady_clock::now();
    const AliasTable alias = build_alias(cache.weights.probs);

    SgdParams sgd = config.sgd;
    FeedForwardNet base = current;
    bool accepted = false;
    bool only_numeric_failures = true;
    std::string last_numeric;

    for (std::size_t attempt = 0; attempt <= config.retry.max_retries; ++attempt) {
      const auto working_set = sample_indices(alias, n, rng);
      bool diverged = false;
      bool clip_broken = false;

      // Best accepted checkpoint of this attempt's SGD trajectory.
      std::optional<FeedForwardNet> best_net;
      std::vector<double> best_scores;
      EdgeReport best_report;
      std::size_t best_steps = 0;

      FeedForwardNet candidate = base;
      std::size_t done = 0;
      try {
        for (std::size_t checkpoint : checkpoint_schedule(sgd)) {
          candidate = sgd_inner(data, working_set, cache.raw_scores, std::move(candidate),
                                SgdParams{checkpoint - done, sgd.lr, sgd.batch, false}, rng);
          done = checkpoint;
          auto scores = forward_batch(candidate, data.matrix(), threads);
          if (!all_finite(scores)) throw NumericError("candidate produced non-finite scores");
          const EdgeReport report = edge(cache, scores, config.rho, threads);
          if (!std::isfinite(report.edge)) throw NumericError("candidate edge is not finite");
          only_numeric_failures = false;
          if (report.max_margin_diff > 1.0) clip_broken = true;
          if (report.accepted && (!best_net || report.edge < best_report.edge)) {
            best_net = candidate;
            best_scores = std::move(scores);
            best_report = report;
            best_steps = checkpoint;
          }
        }
      } catch (const NumericError& e) {
        diverged = true;
        last_numeric = e.what();
      }

      if (best_net) {
        MarginCache next = margin_cache_from_scores(std::move(best_scores), data.labels(), threads);
        const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
        IterationRecord rec;
        rec.t = t;
        rec.edge = best_report.edge;
        rec.potential_before = cache.potential;
        rec.potential_after = next.potential;
        rec.mistakes = next.mistakes;
        rec.train_err = static_cast<double>(next.mistakes) / static_cast<double>(m);
        rec.retries_used = attempt;
        rec.sgd_steps_used = best_steps;
        rec.widened_to = last_hidden_width(*best_net);
        rec.wall_ms = elapsed.count();
        result.records.push_back(rec);
        current = std::move(*best_net);
        cache = std::move(next);
        accepted = true;
        break;
      }

      sgd.steps = static_cast<std::size_t>(std::ceil(static_cast<double>(sgd.steps) * config.retry.sgd_growth));
      if (diverged || clip_broken) sgd.lr *= config.retry.lr_shrink;
      if (config.retry.widen_units > 0) {
        base = widen(base, config.retry.widen_units, derive_seed(config.seed, Stream::kWiden, widen_count++));
      }
    }

    if (!accepted) {
      if (only_numeric_failures) {
        throw NumericError(fmt::format("iteration {}: every attempt diverged ({})", t, last_numeric));
      }
      result.stop_reason = StopReason::kNoCandidateFound;
      break;
    }
    if (cache.mistakes == 0) {
      result.stop_reason = StopReason::kZeroTrainingError;
      break;
    }
  }

  result.final_net = std::move(current);
  result.accepted_count = result.records.size();
  return result;
}

// ---------------------------------------------------------------------------
// Metrics CSV

std::string metrics_csv(std::span<const IterationRecord> records, bool include_timing) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{},{:.17g}\n", r.t, r.edge, r.potential_before,
                       r.potential_after, r.train_err, r.mistakes, r.retries_used, r.sgd_steps_used, r.widened_to,
                       include_timing ? r.wall_ms : 0.0);
  }
  return out;
}

namespace {

template <typename T>
T parse_field(std::string_view s, std::size_t line, std::string_view name) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(fmt::format("metrics line {}: field '{}' has invalid value '{}'", line, name, s));
  }
  return v;
}

}  // namespace

std::vector<IterationRecord> metrics_from_csv(std::string_view text) {
  std::vector<IterationRecord> records;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kMetricsHeader) throw ParseError("metrics line 1: unexpected header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 10) throw ParseError(fmt::format("metrics line {}: expected 10 fields", line_no));
    IterationRecord r;
    r.t = parse_field<std::size_t>(f[0], line_no, "t");
    r.edge = parse_field<double>(f[1], line_no, "edge");
    r.potential_before = parse_field<double>(f[2], line_no, "potential_before");
    r.potential_after = parse_field<double>(f[3], line_no, "potential_after");
    r.train_err = parse_field<double>(f[4], line_no, "train_err");
    r.mistakes = parse_field<std::size_t>(f[5], line_no, "mistakes");
    r.retries_used = parse_field<std::size_t>(f[6], line_no, "retries");
    r.sgd_steps_used = parse_field<std::size_t>(f[7], line_no, "sgd_steps");
    r.widened_to = parse_field<std::size_t>(f[8], line_no, "widened_to");
    r.wall_ms = parse_field<double>(f[9], line_no, "wall_ms");
    records.push_back(r);
  }
  if (!header_seen) throw ParseError("metrics file is empty");
  return records;
}

}  // namespace selfieboost
