#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genesift/dataset.hpp"
#include "genesift/matrix.hpp"
#include "genesift/rng.hpp"

namespace genesift {

enum class Updater { Nesterov, Adadelta, Rmsprop, Adam };
enum class Activation { Relu, Tanh };

struct NetworkConfig {
  std::vector<std::size_t> hidden_sizes;  // empty = auto {min(256,d), 64, 16}
  Activation hidden_activation = Activation::Relu;
  double learning_rate = 0.1;
  double bias_learning_rate = 0.01;
  double momentum = 0.9;                  // nesterov only
  Updater updater = Updater::Nesterov;
  double grad_norm_threshold = 1.0;
  double adadelta_rho = 0.0;
  double adadelta_epsilon = 1e-6;
  double rmsprop_decay = 0.95;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  std::size_t epochs = 10;
  std::size_t batch_size = 100;
  double bias_init = 1.0;
  std::uint64_t seed = 1;
};

// Full layer chain [d_in, hidden..., n_classes] for this config.
std::vector<std::size_t> layer_chain(std::size_t d_in, std::size_t n_classes, const NetworkConfig& cfg);

// One gradient (or parameter-delta) slot per layer.
struct Gradients {
  std::vector<Matrix> w;               // fan_out x fan_in
  std::vector<std::vector<double>> b;  // fan_out
};

// Gaussian entries with variance 2 / (fan_in + fan_out); result is fan_out x fan_in.
Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

std::vector<double> softmax(const std::vector<double>& logits);
void softmax_rows(Matrix& m);

// Mean over rows of -log(probs[i][labels[i]]), probabilities floored at 1e-12.
double mcxent_loss(const Matrix& probs, const std::vector<int>& labels);

double global_grad_norm(const Gradients& g);

// Scales all entries by threshold / norm when the global L2 norm exceeds it.
void clip_by_norm(Gradients& g, double threshold);

// Feedforward softmax classifier trained by mini-batch gradient descent.
class Network {
 public:
  Network(std::vector<std::size_t> layer_sizes, NetworkConfig cfg);

  const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
  const NetworkConfig& config() const { return cfg_; }
  std::size_t n_layers() const { return weights_.size(); }

  const Matrix& weight(std::size_t l) const { return weights_[l]; }
  Matrix& weight(std::size_t l) { return weights_[l]; }
  const std::vector<double>& bias(std::size_t l) const { return biases_[l]; }
  std::vector<double>& bias(std::size_t l) { return biases_[l]; }

  // activations[0] is the input batch, activations.back() the softmax probs.
  std::vector<Matrix> forward(const Matrix& batch) const;

  Gradients backward(const std::vector<Matrix>& activations, const std::vector<int>& labels) const;

  // Turns gradients into parameter deltas per the configured update rule,
  // mutating the per-parameter accumulator state.
  Gradients updater_step(const Gradients& grads);

  void apply_deltas(const Gradients& deltas);

  // Nesterov lookahead: batch gradients are taken at theta + momentum *
  // velocity. shift moves the parameters there, unshift restores them; both
  // are no-ops for the other updaters.
  void shift_to_lookahead();
  void unshift_from_lookahead();

 private:
  std::vector<std::size_t> layer_sizes_;
  NetworkConfig cfg_;
  std::vector<Matrix> weights_;
  std::vector<std::vector<double>> biases_;

  // Accumulators for the active update rule only.
  std::vector<Matrix> w_slot1_, w_slot2_;
  std::vector<std::vector<double>> b_slot1_, b_slot2_;
  std::uint64_t step_count_ = 0;
};

// Shuffled mini-batch passes; returns per-epoch mean loss.
std::vector<double> train(Network& net, const Matrix& x, const std::vector<int>& y);
std::vector<double> train(Network& net, const Dataset& ds);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

EvalResult evaluate(const Network& net, const Matrix& x, const std::vector<int>& y);
EvalResult evaluate(const Network& net, const Dataset& ds);

// Mean stratified k-fold accuracy of a freshly trained network per fold.
// folds == n runs leave-one-out; otherwise every class needs >= folds samples.
double kfold_accuracy(const Matrix& x, const std::vector<int>& y, int n_classes,
                      const NetworkConfig& cfg, std::size_t folds, std::uint64_t seed);

// Plain-text model serialization; lossless round trip.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace genesift
