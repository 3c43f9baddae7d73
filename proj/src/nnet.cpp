#include "selfieboost/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "model_json.hpp"
#include "selfieboost/error.hpp"
#include "selfieboost/parallel.hpp"
#include "selfieboost/rng.hpp"

namespace selfieboost {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw DomainError(fmt::format("unknown activation '{}'", name));
}

NetworkArchitecture::NetworkArchitecture(std::size_t input_dim, std::vector<std::size_t> hidden,
                                         Activation activation)
    : input_dim_(input_dim), hidden_(std::move(hidden)), activation_(activation) {
  if (input_dim_ == 0) throw DomainError("input_dim must be at least 1");
  for (std::size_t w : hidden_) {
    if (w == 0) throw DomainError("hidden layer widths must be at least 1");
  }
}

std::vector<std::size_t> NetworkArchitecture::dims() const {
  std::vector<std::size_t> d;
  d.reserve(hidden_.size() + 2);
  d.push_back(input_dim_);
  d.insert(d.end(), hidden_.begin(), hidden_.end());
  d.push_back(1);
  return d;
}

std::size_t NetworkArchitecture::parameter_count() const {
  const auto d = dims();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < d.size(); ++l) n += d[l] * d[l + 1] + d[l + 1];
  return n;
}

namespace {

std::vector<DenseLayer> zero_layers(const NetworkArchitecture& arch) {
  const auto d = arch.dims();
  std::vector<DenseLayer> layers;
  layers.reserve(d.size() - 1);
  for (std::size_t l = 0; l + 1 < d.size(); ++l) layers.emplace_back(d[l], d[l + 1]);
  return layers;
}

bool same_shapes(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].in != b[l].in || a[l].out != b[l].out || a[l].weights.size() != b[l].weights.size() ||
        a[l].biases.size() != b[l].biases.size()) {
      return false;
    }
  }
  return true;
}

double activate(Activation act, double z) {
  return act == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the pre-activation; relu'(0) := 0.
double activate_derivative(Activation act, double z, double a) {
  return act == Activation::kTanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
}

void check_input(const FeedForwardNet& net, std::span<const double> x) {
  if (x.size() != net.architecture().input_dim()) {
    throw ShapeError(fmt::format("input has dimension {}, network expects {}", x.size(),
                                 net.architecture().input_dim()));
  }
}

void affine(const DenseLayer& layer, std::span<const double> in, std::vector<double>& out) {
  out.resize(layer.out);
  for (std::size_t r = 0; r < layer.out; ++r) {
    const double* row = layer.weights.data() + r * layer.in;
    double acc = layer.biases[r];
    for (std::size_t c = 0; c < layer.in; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

}  // namespace

FeedForwardNet::FeedForwardNet(NetworkArchitecture arch)
    : arch_(std::move(arch)), layers_(zero_layers(arch_)) {}

FeedForwardNet::FeedForwardNet(NetworkArchitecture arch, std::vector<DenseLayer> layers)
    : arch_(std::move(arch)), layers_(std::move(layers)) {
  if (!same_shapes(layers_, zero_layers(arch_))) {
    throw ShapeError("layer shapes do not match the architecture");
  }
  for (const auto& layer : layers_) {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::ranges::all_of(layer.weights, finite) || !std::ranges::all_of(layer.biases, finite)) {
      throw NumericError("network parameters must be finite");
    }
  }
}

GradientBuffer::GradientBuffer(const FeedForwardNet& net) : layers_(zero_layers(net.architecture())) {}

void GradientBuffer::zero() {
  for (auto& layer : layers_) {
    std::ranges::fill(layer.weights, 0.0);
    std::ranges::fill(layer.biases, 0.0);
  }
}

bool GradientBuffer::is_zero() const {
  const auto z = [](double v) { return v == 0.0; };
  return std::ranges::all_of(layers_, [&](const DenseLayer& l) {
    return std::ranges::all_of(l.weights, z) && std::ranges::all_of(l.biases, z);
  });
}

bool GradientBuffer::matches(const FeedForwardNet& net) const { return same_shapes(layers_, net.layers()); }

MatrixView::MatrixView(std::span<const double> data, std::size_t rows, std::size_t cols)
    : data_(data), rows_(rows), cols_(cols) {
  if (data.size() != rows * cols) {
    throw ShapeError(fmt::format("matrix storage has {} values, expected {}x{}", data.size(), rows, cols));
  }
}

FeedForwardNet init_network(const NetworkArchitecture& arch, std::uint64_t seed, double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw DomainError("init scale must be finite and >= 0");
  FeedForwardNet net(arch);
  SeededRng rng(seed);
  for (auto& layer : net.mutable_layers()) {
    const double bound = scale / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.weights) w = (2.0 * rng.uniform() - 1.0) * bound;
  }
  return net;
}

double forward_trace(const FeedForwardNet& net, std::span<const double> x, ForwardTrace& trace) {
  check_input(net, x);
  const auto& layers = net.layers();
  const Activation act = net.architecture().activation();
  trace.activations.resize(layers.size());
  trace.pre_activations.resize(layers.size());
  trace.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    auto& z = trace.pre_activations[l];
    affine(layers[l], trace.activations[l], z);
    auto& a = trace.activations[l + 1];
    a.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) a[j] = activate(act, z[j]);
  }
  auto& out = trace.pre_activations.back();
  affine(layers.back(), trace.activations.back(), out);
  trace.output = out[0];
  return trace.output;
}

double forward(const FeedForwardNet& net, std::span<const double> x) {
  check_input(net, x);
  const auto& layers = net.layers();
  const Activation act = net.architecture().activation();
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    affine(layers[l], a, z);
    a.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) a[j] = activate(act, z[j]);
  }
  affine(layers.back(), a, z);
  return z[0];
}

std::vector<double> forward_batch(const FeedForwardNet& net, const MatrixView& x, unsigned threads) {
  if (x.rows() > 0 && x.cols() != net.architecture().input_dim()) {
    throw ShapeError(fmt::format("batch has {} columns, network expects {}", x.cols(),
                                 net.architecture().input_dim()));
  }
  std::vector<double> out(x.rows());
  for_each_chunk(x.rows(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = forward(net, x.row(i));
  });
  return out;
}

void backprop_trace(const FeedForwardNet& net, const ForwardTrace& trace, double upstream,
                    GradientBuffer& buf) {
  if (!buf.matches(net)) throw ShapeError("gradient buffer does not match the network");
  if (upstream == 0.0) return;
  const auto& layers = net.layers();
  auto& grads = buf.mutable_layers();
  const Activation act = net.architecture().activation();

  // delta holds d(upstream * f)/d(pre-activation) of the current layer.
  std::vector<double> delta{upstream};
  std::vector<double> next;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    DenseLayer& g = grads[l];
    const auto& input = trace.activations[l];
    for (std::size_t r = 0; r < layer.out; ++r) {
      g.biases[r] += delta[r];
      double* row = g.weights.data() + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) row[c] += delta[r] * input[c];
    }
    if (l == 0) break;
    next.assign(layer.in, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double* row = layer.weights.data() + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) next[c] += row[c] * delta[r];
    }
    const auto& z = trace.pre_activations[l - 1];
    for (std::size_t c = 0; c < layer.in; ++c) next[c] *= activate_derivative(act, z[c], input[c]);
    delta.swap(next);
  }
}

void backprop_scalar(const FeedForwardNet& net, std::span<const double> x, double upstream,
                     GradientBuffer& buf) {
  ForwardTrace trace;
  forward_trace(net, x, trace);
  backprop_trace(net, trace, upstream, buf);
}

void sgd_step(FeedForwardNet& net, GradientBuffer& buf, double lr) {
  if (!buf.matches(net)) throw ShapeError("gradient buffer does not match the network");
  auto& layers = net.mutable_layers();
  auto& grads = buf.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t k = 0; k < layers[l].weights.size(); ++k) layers[l].weights[k] -= lr * grads[l].weights[k];
    for (std::size_t k = 0; k < layers[l].biases.size(); ++k) layers[l].biases[k] -= lr * grads[l].biases[k];
  }
  buf.zero();
}

FeedForwardNet widen(const FeedForwardNet& net, std::size_t extra_units, std::uint64_t seed) {
  const auto& arch = net.architecture();
  if (arch.hidden().empty()) throw UnsupportedArchitectureError("widen needs at least one hidden layer");
  if (extra_units == 0) return net;

  auto hidden = arch.hidden();
  hidden.back() += extra_units;
  NetworkArchitecture wider(arch.input_dim(), hidden, arch.activation());

  std::vector<DenseLayer> layers = net.layers();
  DenseLayer& last_hidden = layers[layers.size() - 2];
  DenseLayer& output = layers.back();

  SeededRng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(last_hidden.in));
  last_hidden.out += extra_units;
  for (std::size_t k = 0; k < extra_units * last_hidden.in; ++k) {
    last_hidden.weights.push_back((2.0 * rng.uniform() - 1.0) * bound);
  }
  last_hidden.biases.resize(last_hidden.out, 0.0);

  // The output layer is 1 x width, so appending columns appends values.
  output.in += extra_units;
  output.weights.resize(output.in, 0.0);

  return FeedForwardNet(std::move(wider), std::move(layers));
}

namespace {

// Sign pattern of every hidden pre-activation; used to detect relu kinks.
std::vector<signed char> kink_signature(const FeedForwardNet& net, std::span<const double> x) {
  ForwardTrace trace;
  forward_trace(net, x, trace);
  std::vector<signed char> sig;
  for (std::size_t l = 0; l + 1 < trace.pre_activations.size(); ++l) {
    for (double z : trace.pre_activations[l]) sig.push_back(z > 0.0 ? 1 : (z < 0.0 ? -1 : 0));
  }
  return sig;
}

}  // namespace

double grad_check(const FeedForwardNet& net, std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw DomainError("grad_check eps must be positive");
  GradientBuffer buf(net);
  backprop_scalar(net, x, 1.0, buf);

  std::vector<double> analytic;
  for (const auto& layer : buf.layers()) {
    analytic.insert(analytic.end(), layer.weights.begin(), layer.weights.end());
    analytic.insert(analytic.end(), layer.biases.begin(), layer.biases.end());
  }

  const bool relu = net.architecture().activation() == Activation::kRelu;
  const auto base_sig = relu ? kink_signature(net, x) : std::vector<signed char>{};

  FeedForwardNet probe = net;
  double worst = 0.0;
  std::size_t k = 0;
  probe.for_each_parameter([&](double& theta) {
    const double saved = theta;
    theta = saved + eps;
    const double plus = forward(probe, x);
    const bool plus_kink = relu && kink_signature(probe, x) != base_sig;
    theta = saved - eps;
    const double minus = forward(probe, x);
    const bool minus_kink = relu && kink_signature(probe, x) != base_sig;
    theta = saved;
    if (!plus_kink && !minus_kink) {
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[k];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
    ++k;
  });
  return worst;
}

// ---------------------------------------------------------------------------
// Model files

namespace detail {

nlohmann::json model_object(const FeedForwardNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < layer.out; ++r) {
      rows.push_back(std::vector<double>(layer.weights.begin() + static_cast<std::ptrdiff_t>(r * layer.in),
                                         layer.weights.begin() + static_cast<std::ptrdiff_t>((r + 1) * layer.in)));
    }
    layers.push_back({{"w", rows}, {"b", layer.biases}});
  }
  nlohmann::json obj;
  obj["activation"] = std::string(to_string(net.architecture().activation()));
  obj["dims"] = net.architecture().dims();
  obj["layers"] = std::move(layers);
  return obj;
}

namespace {

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(fmt::format("{}: expected a JSON object", where));
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(fmt::format("{}: missing field '{}'", where, key));
  return *it;
}

double number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: expected a number", where));
  return v.get<double>();
}

std::vector<double> number_array(const nlohmann::json& v, std::size_t expected, const std::string& where) {
  if (!v.is_array()) throw ParseError(fmt::format("{}: expected an array", where));
  if (v.size() != expected) {
    throw ParseError(fmt::format("{}: expected {} values, found {}", where, expected, v.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], fmt::format("{}[{}]", where, i)));
  return out;
}

}  // namespace

FeedForwardNet model_from_object(const nlohmann::json& obj, const std::string& where) {
  const auto& act_field = field(obj, "activation", where);
  if (!act_field.is_string()) throw ParseError(fmt::format("{}.activation: expected a string", where));
  Activation act;
  try {
    act = activation_from_string(act_field.get<std::string>());
  } catch (const DomainError& e) {
    throw ParseError(fmt::format("{}.activation: {}", where, e.what()));
  }

  const auto& dims_field = field(obj, "dims", where);
  if (!dims_field.is_array() || dims_field.size() < 2) {
    throw ParseError(fmt::format("{}.dims: expected an array [d, h1, ..., 1]", where));
  }
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < dims_field.size(); ++i) {
    const auto& v = dims_field[i];
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
      throw ParseError(fmt::format("{}.dims[{}]: expected a positive integer", where, i));
    }
    dims.push_back(v.get<std::size_t>());
  }
  if (dims.back() != 1) throw ParseError(fmt::format("{}.dims: output width must be 1", where));

  NetworkArchitecture arch(dims.front(), std::vector<std::size_t>(dims.begin() + 1, dims.end() - 1), act);

  const auto& layers_field = field(obj, "layers", where);
  if (!layers_field.is_array() || layers_field.size() != dims.size() - 1) {
    throw ParseError(fmt::format("{}.layers: expected {} layers", where, dims.size() - 1));
  }
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string lw = fmt::format("{}.layers[{}]", where, l);
    DenseLayer layer(dims[l], dims[l + 1]);
    const auto& rows = field(layers_field[l], "w", lw);
    if (!rows.is_array() || rows.size() != layer.out) {
      throw ParseError(fmt::format("{}.w: expected {} rows", lw, layer.out));
    }
    for (std::size_t r = 0; r < layer.out; ++r) {
      auto row = number_array(rows[r], layer.in, fmt::format("{}.w[{}]", lw, r));
      std::ranges::copy(row, layer.weights.begin() + static_cast<std::ptrdiff_t>(r * layer.in));
    }
    layer.biases = number_array(field(layers_field[l], "b", lw), layer.out, lw + ".b");
    layers.push_back(std::move(layer));
  }
  try {
    return FeedForwardNet(std::move(arch), std::move(layers));
  } catch (const NumericError& e) {
    throw ParseError(fmt::format("{}: {}", where, e.what()));
  }
}

void check_format_version(const nlohmann::json& doc, int expected) {
  const auto& v = field(doc, "format_version", "document");
  if (!v.is_number_integer()) throw ParseError("document.format_version: expected an integer");
  if (v.get<long long>() != expected) {
    throw VersionError(fmt::format("unsupported format_version {} (expected {})", v.get<long long>(), expected));
  }
}

nlohmann::json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offset -> line number for the message.
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(fmt::format("{}: malformed JSON near line {}: {}", what, line, e.what()));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace detail

std::string model_to_json(const FeedForwardNet& net) {
  nlohmann::json doc = detail::model_object(net);
  doc["format_version"] = kModelFormatVersion;
  return doc.dump() + "\n";
}

FeedForwardNet model_from_json(std::string_view text) {
  const auto doc = detail::parse_json_text(text, "model");
  detail::check_format_version(doc, kModelFormatVersion);
  return detail::model_from_object(doc, "model");
}

void save_model(const FeedForwardNet& net, const std::filesystem::path& path) {
  detail::write_text_file(path, model_to_json(net));
}

FeedForwardNet load_model(const std::filesystem::path& path) {
  return model_from_json(detail::read_text_file(path));
}

}  // namespace selfieboost
