#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfieboost/nnet.hpp"

namespace selfieboost {

struct DatasetProvenance {
  std::string teacher_path;
  double margin_floor = 1.0;
  std::uint64_t seed = 0;
};

/// m labelled examples; features are stored row-major.
class Dataset {
 public:
  /// Validates: m >= 1, d >= 1, labels in {-1, +1}, finite features.
  Dataset(std::vector<double> features, std::size_t dim, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> x(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  int y(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }
  MatrixView matrix() const { return MatrixView(features_, size(), dim_); }

  std::optional<DatasetProvenance> provenance;

  bool operator==(const Dataset& other) const {
    return dim_ == other.dim_ && labels_ == other.labels_ && features_ == other.features_;
  }

 private:
  std::vector<double> features_;
  std::size_t dim_;
  std::vector<int> labels_;
};

struct TeacherSpec {
  std::vector<std::size_t> hidden{4};
  Activation activation = Activation::kTanh;
  double tau = 0.1;
  std::uint64_t seed = 0;
};

struct RealizableData {
  Dataset data;
  FeedForwardNet teacher;
  std::size_t rejected = 0;
};

/// Draws standard-normal points, labels them by the sign of a random teacher
/// and keeps only points with |raw teacher score| >= tau. The teacher's
/// output layer is then divided by tau, so y_i f*(x_i) >= 1 on every kept
/// point. Throws DegenerateTeacherError after 100 m draws.
RealizableData gen_realizable(std::size_t m, std::size_t d, const TeacherSpec& teacher);

/// Header f0,...,f{d-1},label; values written with 17 significant digits.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(std::string_view text);
void save_csv(const Dataset& data, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

}  // namespace selfieboost
