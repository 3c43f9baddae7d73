#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace selfieboost {

enum class Activation { kTanh, kRelu };

std::string_view to_string(Activation act);
Activation activation_from_string(std::string_view name);

/// Shape of a scalar-output feed-forward network. Hidden layers use the
/// configured activation; the output is a single linear unit. An empty
/// hidden list is a plain affine model.
class NetworkArchitecture {
 public:
  NetworkArchitecture(std::size_t input_dim, std::vector<std::size_t> hidden,
                      Activation activation = Activation::kTanh);

  std::size_t input_dim() const { return input_dim_; }
  const std::vector<std::size_t>& hidden() const { return hidden_; }
  Activation activation() const { return activation_; }

  /// {d, h1, ..., hk, 1}
  std::vector<std::size_t> dims() const;
  std::size_t layer_count() const { return hidden_.size() + 1; }
  /// Network size: total number of weights and biases.
  std::size_t parameter_count() const;

  bool operator==(const NetworkArchitecture&) const = default;

 private:
  friend class FeedForwardNet;
  std::size_t input_dim_;
  std::vector<std::size_t> hidden_;
  Activation activation_;
};

/// Dense affine map. `weights` is row-major, out x in.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weights(in_dim * out_dim, 0.0), biases(out_dim, 0.0) {}

  double& w(std::size_t row, std::size_t col) { return weights[row * in + col]; }
  double w(std::size_t row, std::size_t col) const { return weights[row * in + col]; }

  bool operator==(const DenseLayer&) const = default;
};

class FeedForwardNet {
 public:
  /// All-zero network (computes f == 0).
  explicit FeedForwardNet(NetworkArchitecture arch);
  /// Checks every layer against the architecture and rejects non-finite values.
  FeedForwardNet(NetworkArchitecture arch, std::vector<DenseLayer> layers);

  const NetworkArchitecture& architecture() const { return arch_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  std::size_t parameter_count() const { return arch_.parameter_count(); }

  /// Visits every parameter in storage order: per layer, weights then biases.
  template <typename Fn>
  void for_each_parameter(Fn&& fn) {
    for (auto& layer : layers_) {
      for (double& w : layer.weights) fn(w);
      for (double& b : layer.biases) fn(b);
    }
  }

  bool operator==(const FeedForwardNet&) const = default;

 private:
  NetworkArchitecture arch_;
  std::vector<DenseLayer> layers_;
};

/// d(loss)/d(parameter) with the same layout as the owning network.
class GradientBuffer {
 public:
  explicit GradientBuffer(const FeedForwardNet& net);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  void zero();
  bool is_zero() const;
  bool matches(const FeedForwardNet& net) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Row-major m x d view over feature storage.
class MatrixView {
 public:
  MatrixView(std::span<const double> data, std::size_t rows, std::size_t cols);
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const { return data_.subspan(i * cols_, cols_); }

 private:
  std::span<const double> data_;
  std::size_t rows_;
  std::size_t cols_;
};

/// Weights uniform in [-scale/sqrt(fan_in), +scale/sqrt(fan_in)), biases zero.
FeedForwardNet init_network(const NetworkArchitecture& arch, std::uint64_t seed, double scale);

double forward(const FeedForwardNet& net, std::span<const double> x);

/// forward() for every row. Rows may be spread over `threads` workers; each
/// output is computed exactly as forward() would.
std::vector<double> forward_batch(const FeedForwardNet& net, const MatrixView& x,
                                  unsigned threads = 1);

/// Intermediate values of one forward pass, reused by backprop_trace().
struct ForwardTrace {
  std::vector<std::vector<double>> activations;  // [0] is the input
  std::vector<std::vector<double>> pre_activations;
  double output = 0.0;
};

double forward_trace(const FeedForwardNet& net, std::span<const double> x, ForwardTrace& trace);
void backprop_trace(const FeedForwardNet& net, const ForwardTrace& trace, double upstream,
                    GradientBuffer& buf);

/// buf += upstream * d forward(net, x) / d theta, accumulated output layer first.
void backprop_scalar(const FeedForwardNet& net, std::span<const double> x, double upstream,
                     GradientBuffer& buf);

/// theta -= lr * grad, then zeroes the buffer.
void sgd_step(FeedForwardNet& net, GradientBuffer& buf, double lr);

/// Adds `extra_units` to the last hidden layer. New incoming weights are
/// random (unit init scale), new outgoing weights are zero, so the function
/// computed is unchanged.
FeedForwardNet widen(const FeedForwardNet& net, std::size_t extra_units, std::uint64_t seed);

/// Max relative error |a-b| / max(1e-8, |a|+|b|) between backprop and
/// central differences. For relu, parameters whose perturbation flips the
/// sign of any pre-activation are skipped.
double grad_check(const FeedForwardNet& net, std::span<const double> x, double eps);

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const FeedForwardNet& net);
FeedForwardNet model_from_json(std::string_view text);
void save_model(const FeedForwardNet& net, const std::filesystem::path& path);
FeedForwardNet load_model(const std::filesystem::path& path);

}  // namespace selfieboost
