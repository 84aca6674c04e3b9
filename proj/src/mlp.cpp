#include "cgx/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "cgx/errors.hpp"
#include "cgx/random.hpp"

namespace cgx {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softmax") return Activation::kSoftmax;
  throw ParameterError("unknown activation '" + name + "'");
}

void MlpModel::validate() const {
  if (layers.size() < 2) throw ShapeError("model needs at least one hidden layer");
  if (input_std.size() != input_mean.size()) throw ShapeError("standardization size mismatch");
  std::size_t width = input_dim();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.inputs != width) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(layer.inputs) + " inputs, previous width is " +
                       std::to_string(width));
    }
    if (layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs) {
      throw ShapeError("layer " + std::to_string(l) + " parameter sizes are inconsistent");
    }
    const bool last = l + 1 == layers.size();
    if (last != (layer.activation == Activation::kSoftmax)) {
      throw ShapeError("softmax must be the output activation and only there");
    }
    width = layer.outputs;
  }
  if (width != 2) throw ShapeError("output layer must have two units");
}

namespace {

void check_width(const MlpModel& model, const Matrix& X) {
  if (X.cols() != model.input_dim()) {
    throw ShapeError("model expects " + std::to_string(model.input_dim()) +
                     " features, data has " + std::to_string(X.cols()));
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Pre-activations (z) and post-activations (a) for one sample; a[0] is the
// standardized input.
struct Forward {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> a;
};

void forward(const MlpModel& model, std::span<const double> x, Forward& f) {
  const std::size_t n_layers = model.layers.size();
  f.z.resize(n_layers);
  f.a.resize(n_layers + 1);
  f.a[0].resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    f.a[0][j] = (x[j] - model.input_mean[j]) / model.input_std[j];
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const DenseLayer& layer = model.layers[l];
    const auto& in = f.a[l];
    auto& z = f.z[l];
    auto& out = f.a[l + 1];
    z.resize(layer.outputs);
    out.resize(layer.outputs);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* w = layer.weights.data() + o * layer.inputs;
      double sum = layer.bias[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) sum += w[i] * in[i];
      z[o] = sum;
    }
    switch (layer.activation) {
      case Activation::kRelu:
        for (std::size_t o = 0; o < z.size(); ++o) out[o] = z[o] > 0.0 ? z[o] : 0.0;
        break;
      case Activation::kSigmoid:
        for (std::size_t o = 0; o < z.size(); ++o) out[o] = sigmoid(z[o]);
        break;
      case Activation::kSoftmax: {
        const double peak = *std::max_element(z.begin(), z.end());
        double total = 0.0;
        for (std::size_t o = 0; o < z.size(); ++o) {
          out[o] = std::exp(z[o] - peak);
          total += out[o];
        }
        for (auto& v : out) v /= total;
        break;
      }
    }
  }
}

// -log softmax(z)[label], computed from logits.
double cross_entropy(const std::vector<double>& logits, int label) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double v : logits) total += std::exp(v - peak);
  return peak + std::log(total) - logits[static_cast<std::size_t>(label)];
}

std::size_t parameter_count(const MlpModel& model) {
  std::size_t n = 0;
  for (const auto& layer : model.layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

// Adds d(loss_i)/d(theta) for one sample into grad (flattened layout).
double accumulate_gradient(const MlpModel& model, std::span<const double> x, int label,
                           Forward& f, std::vector<double>& delta,
                           std::vector<double>& next_delta, std::vector<double>& grad) {
  forward(model, x, f);
  const std::size_t n_layers = model.layers.size();
  const double sample_loss = cross_entropy(f.z.back(), label);

  // Parameter offsets per layer.
  std::vector<std::size_t> offset(n_layers);
  std::size_t acc = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offset[l] = acc;
    acc += model.layers[l].weights.size() + model.layers[l].bias.size();
  }

  delta = f.a.back();
  delta[static_cast<std::size_t>(label)] -= 1.0;
  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = model.layers[l];
    const auto& in = f.a[l];
    double* gw = grad.data() + offset[l];
    double* gb = gw + layer.weights.size();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      double* row = gw + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) row[i] += d * in[i];
      gb[o] += d;
    }
    if (l == 0) break;
    next_delta.assign(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = layer.weights.data() + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) next_delta[i] += w[i] * d;
    }
    const DenseLayer& below = model.layers[l - 1];
    const auto& z_below = f.z[l - 1];
    const auto& a_below = f.a[l];
    for (std::size_t i = 0; i < next_delta.size(); ++i) {
      if (below.activation == Activation::kRelu) {
        if (z_below[i] <= 0.0) next_delta[i] = 0.0;
      } else {
        next_delta[i] *= a_below[i] * (1.0 - a_below[i]);
      }
    }
    std::swap(delta, next_delta);
  }
  return sample_loss;
}

}  // namespace

std::vector<double> flatten_parameters(const MlpModel& model) {
  std::vector<double> out;
  out.reserve(parameter_count(model));
  for (const auto& layer : model.layers) {
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

void assign_parameters(MlpModel& model, const std::vector<double>& params) {
  if (params.size() != parameter_count(model)) throw ShapeError("parameter count mismatch");
  auto it = params.begin();
  for (auto& layer : model.layers) {
    std::copy_n(it, layer.weights.size(), layer.weights.begin());
    it += static_cast<std::ptrdiff_t>(layer.weights.size());
    std::copy_n(it, layer.bias.size(), layer.bias.begin());
    it += static_cast<std::ptrdiff_t>(layer.bias.size());
  }
}

LossGradient loss_and_gradient(const MlpModel& model, const Matrix& X, const Labels& y) {
  check_width(model, X);
  if (y.size() != X.rows() || X.rows() == 0) throw ShapeError("label count mismatch");
  LossGradient out;
  out.gradient.assign(parameter_count(model), 0.0);
  Forward f;
  std::vector<double> delta;
  std::vector<double> next_delta;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    out.loss += accumulate_gradient(model, X.row(i), y[i], f, delta, next_delta, out.gradient);
  }
  const double scale = 1.0 / static_cast<double>(X.rows());
  out.loss *= scale;
  for (auto& g : out.gradient) g *= scale;
  return out;
}

double loss(const MlpModel& model, const Matrix& X, const Labels& y) {
  check_width(model, X);
  if (y.size() != X.rows() || X.rows() == 0) throw ShapeError("label count mismatch");
  Forward f;
  double total = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    forward(model, X.row(i), f);
    total += cross_entropy(f.z.back(), y[i]);
  }
  return total / static_cast<double>(X.rows());
}

TrainResult train(const Matrix& X, const Labels& y, const TrainOptions& options) {
  if (options.topology.empty()) throw ParameterError("topology must list at least one hidden layer");
  if (options.epochs < 1) throw ParameterError("epochs must be >= 1");
  if (options.batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(options.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(options.weight_decay >= 0.0)) throw ParameterError("weight_decay must be >= 0");
  if (options.hidden_activation == Activation::kSoftmax) {
    throw ParameterError("softmax is reserved for the output layer");
  }
  if (X.rows() == 0 || y.size() != X.rows()) throw ShapeError("training data is empty or mislabelled");
  for (std::size_t w : options.topology) {
    if (w == 0) throw ParameterError("hidden layer width must be positive");
  }

  TrainResult result;
  MlpModel& model = result.model;
  model.seed = options.seed;

  const std::size_t n = X.rows();
  const std::size_t dims = X.cols();
  model.input_mean.assign(dims, 0.0);
  model.input_std.assign(dims, 1.0);
  for (std::size_t j = 0; j < dims; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (X(i, j) - mean) * (X(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.input_mean[j] = mean;
    model.input_std[j] = sd > 1e-12 ? sd : 1.0;
  }

  Rng init_rng(mix_seed(options.seed, 1));
  std::size_t width = dims;
  std::vector<std::size_t> widths = options.topology;
  widths.push_back(2);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    DenseLayer layer;
    layer.inputs = width;
    layer.outputs = widths[l];
    const bool output = l + 1 == widths.size();
    layer.activation = output ? Activation::kSoftmax : options.hidden_activation;
    // He-uniform for relu, Glorot-uniform otherwise.
    const double limit = layer.activation == Activation::kRelu
                             ? std::sqrt(6.0 / static_cast<double>(layer.inputs))
                             : std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
    layer.weights.resize(layer.inputs * layer.outputs);
    for (auto& w : layer.weights) w = (2.0 * uniform01(init_rng) - 1.0) * limit;
    layer.bias.assign(layer.outputs, 0.0);
    model.layers.push_back(std::move(layer));
    width = widths[l];
  }

  std::vector<double> params = flatten_parameters(model);
  // L2 penalty applies to weights, not biases.
  std::vector<double> decay;
  decay.reserve(params.size());
  for (const auto& layer : model.layers) {
    decay.insert(decay.end(), layer.weights.size(), options.weight_decay);
    decay.insert(decay.end(), layer.bias.size(), 0.0);
  }
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<double> grad(params.size(), 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(mix_seed(options.seed, 2));
  Forward f;
  std::vector<double> delta;
  std::vector<double> next_delta;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), shuffle_rng);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        accumulate_gradient(model, X.row(order[b]), y[order[b]], f, delta, next_delta, grad);
      }
      const double scale = options.learning_rate / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double g = scale * grad[p] + options.learning_rate * decay[p] * params[p];
        velocity[p] = options.momentum * velocity[p] - g;
        params[p] += velocity[p];
      }
      assign_parameters(model, params);
    }
    const double epoch_loss = loss(model, X, y);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch + 1) +
                          " (non-finite loss); try a smaller learning rate");
    }
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

Matrix predict_proba(const MlpModel& model, const Matrix& X) {
  check_width(model, X);
  Matrix out(X.rows(), 2);
  Forward f;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    forward(model, X.row(i), f);
    out(i, 0) = f.a.back()[0];
    out(i, 1) = f.a.back()[1];
  }
  return out;
}

Labels predict_labels(const MlpModel& model, const Matrix& X) {
  const Matrix proba = predict_proba(model, X);
  Labels out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = proba(i, 1) > proba(i, 0) ? 1 : 0;
  return out;
}

ActivationTrace hidden_activations(const MlpModel& model, const Matrix& X) {
  check_width(model, X);
  const std::size_t d = model.hidden_layer_count();
  ActivationTrace trace;
  for (std::size_t l = 0; l < d; ++l) trace.emplace_back(X.rows(), model.layers[l].outputs);
  Forward f;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    forward(model, X.row(i), f);
    for (std::size_t l = 0; l < d; ++l) {
      std::copy(f.a[l + 1].begin(), f.a[l + 1].end(), trace[l].row(i).begin());
    }
  }
  return trace;
}

std::string encode_doubles(const std::vector<double>& values) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(values.size() * 16);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kDigits[(bits >> shift) & 0xF]);
  }
  return out;
}

std::vector<double> decode_doubles(const std::string& hex) {
  if (hex.size() % 16 != 0) throw LoadError("hex array length is not a multiple of 16");
  std::vector<double> out(hex.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (std::size_t c = 0; c < 16; ++c) {
      const char ch = hex[i * 16 + c];
      std::uint64_t nibble = 0;
      if (ch >= '0' && ch <= '9') {
        nibble = static_cast<std::uint64_t>(ch - '0');
      } else if (ch >= 'a' && ch <= 'f') {
        nibble = static_cast<std::uint64_t>(ch - 'a' + 10);
      } else if (ch >= 'A' && ch <= 'F') {
        nibble = static_cast<std::uint64_t>(ch - 'A' + 10);
      } else {
        throw LoadError("invalid hex digit in weight array");
      }
      bits = (bits << 4) | nibble;
    }
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

std::string model_to_json(const MlpModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "cgx-mlp";
  j["seed"] = model.seed;
  j["input_dim"] = model.input_dim();
  j["input_mean"] = encode_doubles(model.input_mean);
  j["input_std"] = encode_doubles(model.input_std);
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : model.layers) {
    j["layers"].push_back({{"inputs", layer.inputs},
                           {"outputs", layer.outputs},
                           {"activation", activation_name(layer.activation)},
                           {"weights", encode_doubles(layer.weights)},
                           {"bias", encode_doubles(layer.bias)}});
  }
  return j.dump(1);
}

MlpModel model_from_json(const std::string& text) {
  MlpModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "cgx-mlp") throw LoadError("not a model file");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw LoadError("unsupported model format_version " + std::to_string(version));
    }
    model.seed = j.at("seed").get<std::uint64_t>();
    model.input_mean = decode_doubles(j.at("input_mean").get<std::string>());
    model.input_std = decode_doubles(j.at("input_std").get<std::string>());
    if (model.input_mean.size() != j.at("input_dim").get<std::size_t>()) {
      throw LoadError("input_dim does not match standardization arrays");
    }
    for (const auto& lj : j.at("layers")) {
      DenseLayer layer;
      layer.inputs = lj.at("inputs").get<std::size_t>();
      layer.outputs = lj.at("outputs").get<std::size_t>();
      layer.activation = parse_activation(lj.at("activation").get<std::string>());
      layer.weights = decode_doubles(lj.at("weights").get<std::string>());
      layer.bias = decode_doubles(lj.at("bias").get<std::string>());
      model.layers.push_back(std::move(layer));
    }
    model.validate();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("corrupt model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw LoadError(std::string("corrupt model file: ") + e.what());
  } catch (const ParameterError& e) {
    throw LoadError(std::string("corrupt model file: ") + e.what());
  }
  return model;
}

void save(const MlpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << model_to_json(model) << '\n';
}

MlpModel load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace cgx
