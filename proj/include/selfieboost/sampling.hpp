#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "selfieboost/rng.hpp"

namespace selfieboost {

/// Example weights D_i proportional to exp(-margin_i), kept in both the log
/// and the linear domain.
struct WeightTable {
  std::vector<double> log_weights;  // -margin_i - max_j(-margin_j)
  std::vector<double> probs;        // D_i
  double normalizer_log = 0.0;      // log sum_j exp(-margin_j)
};

/// Stable softmax of the negated margins. Throws EmptyDatasetError for an
/// empty input and NumericError for non-finite margins.
WeightTable weights_from_margins(std::span<const double> margins, unsigned threads = 1);

/// Walker/Vose alias table for O(1) draws from a fixed distribution.
struct AliasTable {
  std::vector<double> prob;
  std::vector<std::size_t> alias;

  std::size_t size() const { return prob.size(); }
  std::size_t draw(SeededRng& rng) const;
  /// Distribution implied by the table, for checking the construction.
  std::vector<double> reconstruct() const;
};

AliasTable build_alias(std::span<const double> probs);

/// n i.i.d. draws with replacement.
std::vector<std::size_t> sample_indices(const AliasTable& table, std::size_t n, SeededRng& rng);

}  // namespace selfieboost
