#include "selfieboost/data.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "model_json.hpp"
#include "selfieboost/error.hpp"
#include "selfieboost/rng.hpp"

namespace selfieboost {

Dataset::Dataset(std::vector<double> features, std::size_t dim, std::vector<int> labels)
    : features_(std::move(features)), dim_(dim), labels_(std::move(labels)) {
  if (labels_.empty()) throw EmptyDatasetError("dataset has no examples");
  if (dim_ == 0) throw ShapeError("dataset dimension must be at least 1");
  if (features_.size() != labels_.size() * dim_) {
    throw ShapeError(fmt::format("{} feature values do not form {} rows of dimension {}", features_.size(),
                                 labels_.size(), dim_));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1 && labels_[i] != -1) {
      throw DomainError(fmt::format("label of example {} is {}, expected -1 or 1", i, labels_[i]));
    }
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw NumericError("dataset features must be finite");
  }
}

RealizableData gen_realizable(std::size_t m, std::size_t d, const TeacherSpec& spec) {
  if (m == 0 || d == 0) throw DomainError("gen_realizable needs m >= 1 and d >= 1");
  if (!(spec.tau > 0.0)) throw DomainError("tau must be positive");

  NetworkArchitecture arch(d, spec.hidden, spec.activation);
  FeedForwardNet teacher = init_network(arch, derive_seed(spec.seed, Stream::kTeacher), 1.0);
  DenseLayer& out = teacher.mutable_layers().back();
  for (double& w : out.weights) w /= spec.tau;
  for (double& b : out.biases) b /= spec.tau;

  // Rejection is decided on the rescaled teacher so that the stored
  // margins are >= 1 without any rounding slack.
  SeededRng rng(derive_seed(spec.seed, Stream::kFeatures));
  std::vector<double> features;
  std::vector<int> labels;
  features.reserve(m * d);
  labels.reserve(m);
  std::vector<double> x(d);
  std::size_t rejected = 0;
  const std::size_t cap = 100 * m;
  for (std::size_t attempt = 0; labels.size() < m; ++attempt) {
    if (attempt >= cap) {
      throw DegenerateTeacherError(
          fmt::format("teacher rejected too many points ({} of {} draws); try another seed", rejected, attempt));
    }
    for (double& v : x) v = rng.normal();
    const double score = forward(teacher, x);
    if (std::abs(score) < 1.0) {
      ++rejected;
      continue;
    }
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(score > 0.0 ? 1 : -1);
  }

  Dataset data(std::move(features), d, std::move(labels));
  data.provenance = DatasetProvenance{"", 1.0, spec.seed};
  return {std::move(data), std::move(teacher), rejected};
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim(); ++j) out += fmt::format("f{},", j);
  out += "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x(i)) out += fmt::format("{:.17g},", v);
    out += data.y(i) > 0 ? "1\n" : "-1\n";
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view s, std::size_t line, std::size_t col) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ParseError(fmt::format("line {}, column {}: '{}' is not a number", line, col + 1, s));
  }
  return v;
}

}  // namespace

Dataset dataset_from_csv(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view header;
  if (!next_line(header) || header.empty()) throw EmptyDatasetError("dataset file is empty");
  const auto names = split_fields(header);
  if (names.size() < 2 || names.back() != "label") {
    throw ParseError("line 1: header must be f0,...,f{d-1},label");
  }
  const std::size_t d = names.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (names[j] != fmt::format("f{}", j)) {
      throw ParseError(fmt::format("line 1: column {} should be named f{}", j + 1, j));
    }
  }

  std::vector<double> features;
  std::vector<int> labels;
  std::string_view line;
  while (next_line(line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d + 1) {
      throw ParseError(fmt::format("line {}: expected {} fields, found {}", line_no, d + 1, fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const double v = parse_double(fields[j], line_no, j);
      if (!std::isfinite(v)) throw ParseError(fmt::format("line {}, column {}: value is not finite", line_no, j + 1));
      features.push_back(v);
    }
    if (fields[d] == "1" || fields[d] == "+1") {
      labels.push_back(1);
    } else if (fields[d] == "-1") {
      labels.push_back(-1);
    } else {
      throw ParseError(fmt::format("line {}: label '{}' must be -1 or 1", line_no, fields[d]));
    }
  }
  if (labels.empty()) throw EmptyDatasetError("dataset file has a header but no rows");
  return Dataset(std::move(features), d, std::move(labels));
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  detail::write_text_file(path, dataset_to_csv(data));
}

Dataset load_csv(const std::filesystem::path& path) { return dataset_from_csv(detail::read_text_file(path)); }

}  // namespace selfieboost
