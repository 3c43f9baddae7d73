#include "selfieboost/sampling.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "selfieboost/error.hpp"
#include "selfieboost/parallel.hpp"

namespace selfieboost {

WeightTable weights_from_margins(std::span<const double> margins, unsigned threads) {
  if (margins.empty()) throw EmptyDatasetError("cannot weight an empty set of examples");
  double shift = -margins[0];
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (!std::isfinite(margins[i])) throw NumericError(fmt::format("margin {} is not finite", i));
    shift = std::max(shift, -margins[i]);
  }

  WeightTable table;
  table.log_weights.resize(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) table.log_weights[i] = -margins[i] - shift;

  const double sum = chunked_sum(margins.size(), threads,
                                 [&](std::size_t i) { return std::exp(table.log_weights[i]); });
  table.normalizer_log = shift + std::log(sum);
  table.probs.resize(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) table.probs[i] = std::exp(table.log_weights[i]) / sum;
  return table;
}

AliasTable build_alias(std::span<const double> probs) {
  const std::size_t m = probs.size();
  if (m == 0) throw EmptyDatasetError("cannot build an alias table over zero outcomes");
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw NumericError(fmt::format("probability {} is negative or not finite", i));
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw NumericError(fmt::format("probabilities sum to {}, not 1", total));

  AliasTable table;
  table.prob.assign(m, 0.0);
  table.alias.resize(m);
  for (std::size_t i = 0; i < m; ++i) table.alias[i] = i;

  std::vector<double> scaled(m);
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < m; ++i) {
    scaled[i] = probs[i] * static_cast<double>(m);
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    table.prob[s] = scaled[s];
    table.alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (std::size_t i : large) table.prob[i] = 1.0;
  for (std::size_t i : small) table.prob[i] = 1.0;
  return table;
}

std::size_t AliasTable::draw(SeededRng& rng) const {
  const std::size_t column = rng.uniform_index(prob.size());
  return rng.uniform() < prob[column] ? column : alias[column];
}

std::vector<double> AliasTable::reconstruct() const {
  const std::size_t m = prob.size();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] += prob[i];
    if (alias[i] != i) out[alias[i]] += 1.0 - prob[i];
  }
  for (double& v : out) v /= static_cast<double>(m);
  return out;
}

std::vector<std::size_t> sample_indices(const AliasTable& table, std::size_t n, SeededRng& rng) {
  if (n == 0) throw DomainError("sample size must be positive");
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = table.draw(rng);
  return out;
}

}  // namespace selfieboost
