#include "genesift/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "genesift/errors.hpp"
#include "genesift/kernels.hpp"
#include "genesift/text.hpp"

namespace genesift {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr double kUpdaterEpsilon = 1e-8;

void validate_config(const NetworkConfig& cfg) {
  if (cfg.learning_rate < 0 || cfg.bias_learning_rate < 0)
    throw Error(ErrorKind::Config, "learning rates must be nonnegative");
  auto in_unit = [](double v) { return v >= 0.0 && v < 1.0; };
  if (!in_unit(cfg.momentum) || !in_unit(cfg.adadelta_rho) || !in_unit(cfg.rmsprop_decay) ||
      !in_unit(cfg.adam_beta1) || !in_unit(cfg.adam_beta2))
    throw Error(ErrorKind::Config, "momentum/rho/decay/beta parameters must lie in [0,1)");
  if (cfg.grad_norm_threshold <= 0)
    throw Error(ErrorKind::Config, "grad_norm_threshold must be positive");
  if (cfg.batch_size == 0) throw Error(ErrorKind::Config, "batch_size must be positive");
}

void apply_hidden_activation(Matrix& m, Activation act) {
  if (act == Activation::Relu) {
    for (double& v : m.data) v = v > 0.0 ? v : 0.0;
  } else {
    for (double& v : m.data) v = std::tanh(v);
  }
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), x.cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(x.row(rows[i]), x.row(rows[i]) + x.cols, out.row(i));
  return out;
}

}  // namespace

std::vector<std::size_t> layer_chain(std::size_t d_in, std::size_t n_classes, const NetworkConfig& cfg) {
  std::vector<std::size_t> chain{d_in};
  if (cfg.hidden_sizes.empty()) {
    chain.push_back(std::min<std::size_t>(256, d_in));
    chain.push_back(64);
    chain.push_back(16);
  } else {
    chain.insert(chain.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  }
  chain.push_back(n_classes);
  return chain;
}

Matrix xavier_init(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_out, fan_in);
  for (double& v : w.data) v = stddev * rng.next_gaussian();
  return w;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double z : logits) zmax = std::max(zmax, z);
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - zmax);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

void softmax_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double* r = m.row(i);
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m.cols; ++j) zmax = std::max(zmax, r[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      r[j] = std::exp(r[j] - zmax);
      sum += r[j];
    }
    for (std::size_t j = 0; j < m.cols; ++j) r[j] /= sum;
  }
}

double mcxent_loss(const Matrix& probs, const std::vector<int>& labels) {
  if (labels.size() != probs.rows)
    throw Error(ErrorKind::Shape, "mcxent_loss: label count != prob rows");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= probs.cols)
      throw Error(ErrorKind::Shape, "mcxent_loss: label out of range");
    total += -std::log(std::max(probs(i, label), kLogFloor));
  }
  return total / static_cast<double>(probs.rows);
}

double global_grad_norm(const Gradients& g) {
  double sq = 0.0;
  for (const auto& w : g.w)
    for (double v : w.data) sq += v * v;
  for (const auto& b : g.b)
    for (double v : b) sq += v * v;
  return std::sqrt(sq);
}

void clip_by_norm(Gradients& g, double threshold) {
  if (threshold <= 0) throw Error(ErrorKind::Config, "clip threshold must be positive");
  const double norm = global_grad_norm(g);
  if (norm <= threshold) return;
  const double scale = threshold / norm;
  for (auto& w : g.w)
    for (double& v : w.data) v *= scale;
  for (auto& b : g.b)
    for (double& v : b) v *= scale;
}

Network::Network(std::vector<std::size_t> layer_sizes, NetworkConfig cfg)
    : layer_sizes_(std::move(layer_sizes)), cfg_(std::move(cfg)) {
  validate_config(cfg_);
  if (layer_sizes_.size() < 3)
    throw Error(ErrorKind::Config, "layer chain needs at least one hidden layer");
  for (std::size_t s : layer_sizes_)
    if (s == 0) throw Error(ErrorKind::Config, "zero-width layer");

  const std::size_t n_layers = layer_sizes_.size() - 1;
  weights_.reserve(n_layers);
  biases_.reserve(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    Rng rng(cfg_.seed, l, 0x57);
    weights_.push_back(xavier_init(layer_sizes_[l], layer_sizes_[l + 1], rng));
    biases_.emplace_back(layer_sizes_[l + 1], cfg_.bias_init);
  }

  const bool two_slots = cfg_.updater == Updater::Adadelta || cfg_.updater == Updater::Adam;
  for (std::size_t l = 0; l < n_layers; ++l) {
    w_slot1_.emplace_back(layer_sizes_[l + 1], layer_sizes_[l]);
    b_slot1_.emplace_back(layer_sizes_[l + 1], 0.0);
    if (two_slots) {
      w_slot2_.emplace_back(layer_sizes_[l + 1], layer_sizes_[l]);
      b_slot2_.emplace_back(layer_sizes_[l + 1], 0.0);
    }
  }
}

std::vector<Matrix> Network::forward(const Matrix& batch) const {
  if (batch.cols != layer_sizes_.front())
    throw Error(ErrorKind::Shape, "forward: batch has " + std::to_string(batch.cols) +
                                      " columns, expected " + std::to_string(layer_sizes_.front()));
  std::vector<Matrix> acts;
  acts.reserve(n_layers() + 1);
  acts.push_back(batch);
  for (std::size_t l = 0; l < n_layers(); ++l) {
    Matrix z;
    kernels::gemm_nt(acts.back(), weights_[l], z);
    for (std::size_t i = 0; i < z.rows; ++i) {
      double* r = z.row(i);
      for (std::size_t j = 0; j < z.cols; ++j) r[j] += biases_[l][j];
    }
    if (l + 1 < n_layers())
      apply_hidden_activation(z, cfg_.hidden_activation);
    else
      softmax_rows(z);
    acts.push_back(std::move(z));
  }
  return acts;
}

Gradients Network::backward(const std::vector<Matrix>& activations, const std::vector<int>& labels) const {
  if (activations.size() != n_layers() + 1)
    throw Error(ErrorKind::Shape, "backward: activation stack does not match network depth");
  const Matrix& probs = activations.back();
  const std::size_t n = probs.rows;
  if (labels.size() != n) throw Error(ErrorKind::Shape, "backward: label count != batch rows");

  Gradients grads;
  grads.w.resize(n_layers());
  grads.b.resize(n_layers());

  // Softmax + cross-entropy: output delta is (probs - onehot) / n.
  Matrix delta = probs;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* r = delta.row(i);
    for (std::size_t j = 0; j < delta.cols; ++j) r[j] *= inv_n;
    r[labels[i]] -= inv_n;
  }

  for (std::size_t l = n_layers(); l-- > 0;) {
    kernels::gemm_tn(delta, activations[l], grads.w[l]);
    grads.b[l].assign(delta.cols, 0.0);
    for (std::size_t i = 0; i < delta.rows; ++i) {
      const double* r = delta.row(i);
      for (std::size_t j = 0; j < delta.cols; ++j) grads.b[l][j] += r[j];
    }
    if (l == 0) break;
    Matrix prev;
    kernels::gemm_nn(delta, weights_[l], prev);
    const Matrix& act = activations[l];
    if (cfg_.hidden_activation == Activation::Relu) {
      for (std::size_t i = 0; i < prev.size(); ++i)
        prev.data[i] = act.data[i] > 0.0 ? prev.data[i] : 0.0;
    } else {
      for (std::size_t i = 0; i < prev.size(); ++i)
        prev.data[i] *= 1.0 - act.data[i] * act.data[i];
    }
    delta = std::move(prev);
  }
  return grads;
}

Gradients Network::updater_step(const Gradients& grads) {
  if (grads.w.size() != n_layers() || grads.b.size() != n_layers())
    throw Error(ErrorKind::Shape, "updater_step: gradient stack does not match network depth");
  ++step_count_;
  const auto t = static_cast<double>(step_count_);

  Gradients deltas;
  deltas.w.resize(n_layers());
  deltas.b.resize(n_layers());

  auto update_span = [&](const double* g, double* s1, double* s2, double* out, std::size_t n,
                         double lr, std::size_t layer) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(g[i]))
        throw Error(ErrorKind::Numeric, "non-finite gradient in layer " + std::to_string(layer));
    }
    switch (cfg_.updater) {
      case Updater::Nesterov:
        // Velocity update with the gradient taken at the stored (lookahead)
        // parameters; the velocity itself is the applied delta.
        for (std::size_t i = 0; i < n; ++i) {
          s1[i] = cfg_.momentum * s1[i] - lr * g[i];
          out[i] = s1[i];
        }
        break;
      case Updater::Adadelta:
        for (std::size_t i = 0; i < n; ++i) {
          const double rho = cfg_.adadelta_rho, eps = cfg_.adadelta_epsilon;
          s1[i] = rho * s1[i] + (1.0 - rho) * g[i] * g[i];
          const double step = -(std::sqrt(s2[i] + eps) / std::sqrt(s1[i] + eps)) * g[i];
          s2[i] = rho * s2[i] + (1.0 - rho) * step * step;
          out[i] = step;
        }
        break;
      case Updater::Rmsprop:
        for (std::size_t i = 0; i < n; ++i) {
          const double d = cfg_.rmsprop_decay;
          s1[i] = d * s1[i] + (1.0 - d) * g[i] * g[i];
          out[i] = -lr * g[i] / std::sqrt(s1[i] + kUpdaterEpsilon);
        }
        break;
      case Updater::Adam:
        for (std::size_t i = 0; i < n; ++i) {
          const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
          s1[i] = b1 * s1[i] + (1.0 - b1) * g[i];
          s2[i] = b2 * s2[i] + (1.0 - b2) * g[i] * g[i];
          const double m_hat = s1[i] / (1.0 - std::pow(b1, t));
          const double v_hat = s2[i] / (1.0 - std::pow(b2, t));
          out[i] = -lr * m_hat / (std::sqrt(v_hat) + kUpdaterEpsilon);
        }
        break;
    }
  };

  for (std::size_t l = 0; l < n_layers(); ++l) {
    deltas.w[l] = Matrix(grads.w[l].rows, grads.w[l].cols);
    deltas.b[l].assign(grads.b[l].size(), 0.0);
    double* w2 = w_slot2_.empty() ? nullptr : w_slot2_[l].data.data();
    double* b2 = b_slot2_.empty() ? nullptr : b_slot2_[l].data();
    update_span(grads.w[l].data.data(), w_slot1_[l].data.data(), w2, deltas.w[l].data.data(),
                grads.w[l].size(), cfg_.learning_rate, l);
    update_span(grads.b[l].data(), b_slot1_[l].data(), b2, deltas.b[l].data(),
                grads.b[l].size(), cfg_.bias_learning_rate, l);
  }
  return deltas;
}

void Network::apply_deltas(const Gradients& deltas) {
  for (std::size_t l = 0; l < n_layers(); ++l) {
    for (std::size_t i = 0; i < weights_[l].size(); ++i) weights_[l].data[i] += deltas.w[l].data[i];
    for (std::size_t i = 0; i < biases_[l].size(); ++i) biases_[l][i] += deltas.b[l][i];
  }
}

void Network::shift_to_lookahead() {
  if (cfg_.updater != Updater::Nesterov || cfg_.momentum == 0.0) return;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    for (std::size_t i = 0; i < weights_[l].size(); ++i)
      weights_[l].data[i] += cfg_.momentum * w_slot1_[l].data[i];
    for (std::size_t i = 0; i < biases_[l].size(); ++i)
      biases_[l][i] += cfg_.momentum * b_slot1_[l][i];
  }
}

void Network::unshift_from_lookahead() {
  if (cfg_.updater != Updater::Nesterov || cfg_.momentum == 0.0) return;
  for (std::size_t l = 0; l < n_layers(); ++l) {
    for (std::size_t i = 0; i < weights_[l].size(); ++i)
      weights_[l].data[i] -= cfg_.momentum * w_slot1_[l].data[i];
    for (std::size_t i = 0; i < biases_[l].size(); ++i)
      biases_[l][i] -= cfg_.momentum * b_slot1_[l][i];
  }
}

std::vector<double> train(Network& net, const Matrix& x, const std::vector<int>& y) {
  const NetworkConfig& cfg = net.config();
  const std::size_t n = x.rows;
  if (y.size() != n) throw Error(ErrorKind::Shape, "train: label count != sample count");
  if (x.cols != net.layer_sizes().front())
    throw Error(ErrorKind::Shape, "train: feature count != input width");

  std::vector<double> history;
  if (cfg.epochs == 0) return history;

  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(cfg.seed, epoch, 0x7A);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_index(i)]);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
      const std::size_t count = std::min(batch, n - start);
      std::vector<std::size_t> rows(order.begin() + start, order.begin() + start + count);
      Matrix xb = gather_rows(x, rows);
      std::vector<int> yb(count);
      for (std::size_t i = 0; i < count; ++i) yb[i] = y[rows[i]];

      net.shift_to_lookahead();
      auto acts = net.forward(xb);
      const double loss = mcxent_loss(acts.back(), yb);
      if (!std::isfinite(loss))
        throw Error(ErrorKind::Numeric, "non-finite loss at epoch " + std::to_string(epoch) +
                                            ", batch " + std::to_string(batch_index));
      auto grads = net.backward(acts, yb);
      net.unshift_from_lookahead();
      clip_by_norm(grads, cfg.grad_norm_threshold);
      net.apply_deltas(net.updater_step(grads));
      loss_sum += loss * static_cast<double>(count);
    }
    history.push_back(loss_sum / static_cast<double>(n));
  }
  return history;
}

std::vector<double> train(Network& net, const Dataset& ds) { return train(net, ds.x, ds.y); }

EvalResult evaluate(const Network& net, const Matrix& x, const std::vector<int>& y) {
  if (y.size() != x.rows) throw Error(ErrorKind::Shape, "evaluate: label count != sample count");
  const std::size_t c = net.layer_sizes().back();
  auto acts = net.forward(x);
  const Matrix& probs = acts.back();

  EvalResult res;
  res.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double* r = probs.row(i);
    std::size_t pred = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (r[j] > r[pred]) pred = j;  // ties keep the lower class index
    const int label = y[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c)
      throw Error(ErrorKind::Shape, "evaluate: label out of range");
    ++res.confusion[label][pred];
    if (pred == static_cast<std::size_t>(label)) ++correct;
  }
  res.accuracy = x.rows == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(x.rows);
  return res;
}

EvalResult evaluate(const Network& net, const Dataset& ds) { return evaluate(net, ds.x, ds.y); }

double kfold_accuracy(const Matrix& x, const std::vector<int>& y, int n_classes,
                      const NetworkConfig& cfg, std::size_t folds, std::uint64_t seed) {
  const std::size_t n = x.rows;
  if (folds < 2) throw Error(ErrorKind::Eval, "need at least 2 folds");
  if (folds > n) throw Error(ErrorKind::Eval, "more folds than samples");

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] < 0 || y[i] >= n_classes) throw Error(ErrorKind::Eval, "label out of range");
    by_class[y[i]].push_back(i);
  }
  if (folds < n) {
    for (int k = 0; k < n_classes; ++k)
      if (by_class[k].size() < folds)
        throw Error(ErrorKind::Eval, "class " + std::to_string(k) + " has " +
                                         std::to_string(by_class[k].size()) + " samples, fewer than " +
                                         std::to_string(folds) + " folds");
  }

  // Per-class shuffled dealing with a running position: class ratios stay
  // within one sample per fold and no fold is left empty (leave-one-out
  // included).
  std::vector<std::size_t> fold_of(n);
  std::size_t deal = 0;
  for (int k = 0; k < n_classes; ++k) {
    auto idx = by_class[k];
    Rng rng(seed, static_cast<std::uint64_t>(k), 0xF0);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.next_index(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = deal++ % folds;
  }

  double acc_sum = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test_rows : train_rows).push_back(i);
    if (test_rows.empty()) throw Error(ErrorKind::Eval, "empty fold " + std::to_string(f));

    Matrix xtr = gather_rows(x, train_rows);
    Matrix xte = gather_rows(x, test_rows);
    std::vector<int> ytr(train_rows.size()), yte(test_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) ytr[i] = y[train_rows[i]];
    for (std::size_t i = 0; i < test_rows.size(); ++i) yte[i] = y[test_rows[i]];

    NetworkConfig fold_cfg = cfg;
    fold_cfg.seed = Rng::derive(seed, f + 1, cfg.seed);
    Network net(layer_chain(x.cols, n_classes, fold_cfg), fold_cfg);
    train(net, xtr, ytr);
    acc_sum += evaluate(net, xte, yte).accuracy;
  }
  return acc_sum / static_cast<double>(folds);
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  const NetworkConfig& cfg = net.config();
  out << "genesift-network 1\n";
  out << "layers";
  for (std::size_t s : net.layer_sizes()) out << ' ' << s;
  out << '\n';
  out << "hidden_activation " << (cfg.hidden_activation == Activation::Relu ? "relu" : "tanh") << '\n';
  const char* updater_name = cfg.updater == Updater::Nesterov   ? "nesterov"
                             : cfg.updater == Updater::Adadelta ? "adadelta"
                             : cfg.updater == Updater::Rmsprop  ? "rmsprop"
                                                                : "adam";
  out << "updater " << updater_name << '\n';
  out << "hyper " << fmt_double(cfg.learning_rate) << ' ' << fmt_double(cfg.bias_learning_rate) << ' '
      << fmt_double(cfg.momentum) << ' ' << fmt_double(cfg.grad_norm_threshold) << ' '
      << fmt_double(cfg.adadelta_rho) << ' ' << fmt_double(cfg.adadelta_epsilon) << ' '
      << fmt_double(cfg.rmsprop_decay) << ' ' << fmt_double(cfg.adam_beta1) << ' '
      << fmt_double(cfg.adam_beta2) << ' ' << fmt_double(cfg.bias_init) << '\n';
  out << "train " << cfg.epochs << ' ' << cfg.batch_size << ' ' << cfg.seed << '\n';
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    const Matrix& w = net.weight(l);
    out << "W " << l << ' ' << w.rows << ' ' << w.cols << '\n';
    for (std::size_t i = 0; i < w.rows; ++i) {
      for (std::size_t j = 0; j < w.cols; ++j) out << (j ? " " : "") << fmt_double(w(i, j));
      out << '\n';
    }
    out << "b " << l << ' ' << net.bias(l).size() << '\n';
    for (std::size_t j = 0; j < net.bias(l).size(); ++j)
      out << (j ? " " : "") << fmt_double(net.bias(l)[j]);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorKind::Parse, path + ": " + what);
  };

  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "genesift-network" || version != 1)
    throw fail("not a genesift-network v1 file");

  if (!(in >> tag) || tag != "layers") throw fail("missing layers line");
  std::vector<std::size_t> sizes;
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream ss(rest);
    std::size_t s;
    while (ss >> s) sizes.push_back(s);
  }

  NetworkConfig cfg;
  std::string word;
  if (!(in >> tag >> word) || tag != "hidden_activation") throw fail("missing hidden_activation");
  cfg.hidden_activation = word == "tanh" ? Activation::Tanh : Activation::Relu;
  if (!(in >> tag >> word) || tag != "updater") throw fail("missing updater");
  cfg.updater = word == "adadelta" ? Updater::Adadelta
                : word == "rmsprop" ? Updater::Rmsprop
                : word == "adam"    ? Updater::Adam
                                    : Updater::Nesterov;
  if (!(in >> tag >> cfg.learning_rate >> cfg.bias_learning_rate >> cfg.momentum >>
        cfg.grad_norm_threshold >> cfg.adadelta_rho >> cfg.adadelta_epsilon >> cfg.rmsprop_decay >>
        cfg.adam_beta1 >> cfg.adam_beta2 >> cfg.bias_init) ||
      tag != "hyper")
    throw fail("missing hyper line");
  if (!(in >> tag >> cfg.epochs >> cfg.batch_size >> cfg.seed) || tag != "train")
    throw fail("missing train line");

  Network net(sizes, cfg);
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    std::size_t li, rows, cols;
    if (!(in >> tag >> li >> rows >> cols) || tag != "W" || li != l)
      throw fail("bad weight header for layer " + std::to_string(l));
    Matrix& w = net.weight(l);
    if (rows != w.rows || cols != w.cols) throw fail("weight shape mismatch");
    for (double& v : w.data)
      if (!(in >> v)) throw fail("truncated weights");
    std::size_t bn;
    if (!(in >> tag >> li >> bn) || tag != "b" || li != l || bn != net.bias(l).size())
      throw fail("bad bias header for layer " + std::to_string(l));
    for (double& v : net.bias(l))
      if (!(in >> v)) throw fail("truncated biases");
  }
  return net;
}

}  // namespace genesift
