#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cgx/data.hpp"

namespace cgx {

enum class Activation : std::uint8_t { kRelu, kSigmoid, kSoftmax };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

// Fully connected layer: out = act(W * in + b), W stored row-major (out x in).
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kRelu;
};

// Feedforward binary classifier. Hidden layers are h_1..h_d; the last layer
// is a two-unit softmax. Inputs are standardized with stored statistics.
struct MlpModel {
  std::vector<DenseLayer> layers;
  std::vector<double> input_mean;
  std::vector<double> input_std;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return input_mean.size(); }
  std::size_t hidden_layer_count() const { return layers.empty() ? 0 : layers.size() - 1; }
  // Throws ShapeError on inconsistent dimensions.
  void validate() const;
};

struct TrainOptions {
  std::vector<std::size_t> topology = {64, 32};
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  double momentum = 0.9;
  // L2 penalty on weights, added to the update (the reported loss excludes it).
  double weight_decay = 0.01;
  std::size_t batch_size = 32;
  Activation hidden_activation = Activation::kRelu;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpModel model;
  // Mean cross-entropy on the training set after each epoch.
  std::vector<double> loss_history;
};

TrainResult train(const Matrix& X, const Labels& y, const TrainOptions& options);
inline TrainResult train(const Dataset& ds, const TrainOptions& options) {
  return train(ds.features, ds.labels, options);
}

// Per-sample class probabilities, n x 2.
Matrix predict_proba(const MlpModel& model, const Matrix& X);
// argmax of the output layer, ties resolved to class 0.
Labels predict_labels(const MlpModel& model, const Matrix& X);

// Post-activation values of hidden layers 1..d, one matrix per layer.
using ActivationTrace = std::vector<Matrix>;
ActivationTrace hidden_activations(const MlpModel& model, const Matrix& X);

// Mean cross-entropy and its gradient with respect to every parameter,
// flattened layer by layer as [weights..., bias...].
struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};
LossGradient loss_and_gradient(const MlpModel& model, const Matrix& X, const Labels& y);
double loss(const MlpModel& model, const Matrix& X, const Labels& y);

std::vector<double> flatten_parameters(const MlpModel& model);
void assign_parameters(MlpModel& model, const std::vector<double>& params);

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save(const MlpModel& model, const std::string& path);
MlpModel load(const std::string& path);

// Doubles as 16 hex digits of their IEEE-754 bit pattern, concatenated.
std::string encode_doubles(const std::vector<double>& values);
std::vector<double> decode_doubles(const std::string& hex);

}  // namespace cgx
