// SPDX-License-Identifier: Apache-2.0
//
// Bidirectional LSTM line recognizer.
//
// Each input frame is one pixel column of a LineImage (H values). A forward
// and a backward LSTM (gates i, f, o and candidate g, no peepholes) run over
// the columns; their hidden states are concatenated and projected to K+1
// classes, class 0 being the CTC blank. The network is templated on the
// scalar so that training runs in float while gradient checks run in double.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rtlocr/script.hpp"

namespace rtlocr::net {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// T x (K+1) row-stochastic matrix, always double precision.
using Posteriors = Eigen::MatrixXd;

template <typename T>
struct LstmParams {
  Mat<T> w;  // 4S x H, row blocks ordered i, f, o, g
  Mat<T> r;  // 4S x S
  Mat<T> b;  // 4S x 1
};

template <typename T>
struct NetworkParams {
  LstmParams<T> fwd;
  LstmParams<T> bwd;
  Mat<T> w_out;  // (K+1) x 2S, row 0 = blank
  Mat<T> b_out;  // (K+1) x 1

  /// Visits every tensor with a stable name, in a fixed order.
  template <typename F>
  void for_each(F&& f) {
    f("fwd.w", fwd.w); f("fwd.r", fwd.r); f("fwd.b", fwd.b);
    f("bwd.w", bwd.w); f("bwd.r", bwd.r); f("bwd.b", bwd.b);
    f("out.w", w_out); f("out.b", b_out);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<NetworkParams*>(this)->for_each(
        [&f](const char* name, Mat<T>& m) { f(name, static_cast<const Mat<T>&>(m)); });
  }

  static NetworkParams zeros(int input_height, int hidden, int classes);
  std::size_t parameter_count() const;
  bool all_finite() const;
};

/// Activations kept from a forward pass for backpropagation.
template <typename T>
struct DirectionCache {
  Mat<T> input;   // H x T in processing order
  Mat<T> gates;   // 4S x T, post-nonlinearity
  Mat<T> cells;   // S x T
  Mat<T> tanh_c;  // S x T
  Mat<T> hidden;  // S x T
};

template <typename T>
struct ForwardPass {
  Posteriors posteriors;
  DirectionCache<T> fwd;
  DirectionCache<T> bwd;
  Mat<T> features;  // 2S x T, concatenated hidden states in column order
  std::uint64_t generation = 0;
};

struct Hyper {
  double learning_rate = 1e-4;
  double momentum = 0.9;
};

struct GradientNorm {
  std::string name;
  double norm = 0.0;
};

template <typename T>
class Network {
 public:
  Network() = default;
  Network(int input_height, int hidden, int classes);

  int input_height() const { return input_height_; }
  int hidden() const { return hidden_; }
  int classes() const { return classes_; }
  std::uint64_t generation() const { return generation_; }

  /// Uniform(-range, range) from a seeded generator; clears momentum.
  void initialize(std::uint64_t seed, double range = 0.1);

  /// `line` is H x T; throws ShapeMismatch when H differs.
  ForwardPass<T> forward(const Mat<T>& line) const;

  /// Parameter gradients for a given d(loss)/d(logits) (T x (K+1)).
  NetworkParams<T> backward(const ForwardPass<T>& pass, const Eigen::MatrixXd& logit_grad) const;

  /// Backpropagates and applies one SGD-with-momentum step:
  /// v <- momentum * v - lr * g; p <- p + v. Throws StaleCache when the pass
  /// was produced before the most recent update.
  std::vector<GradientNorm> backward_update(const ForwardPass<T>& pass, const Eigen::MatrixXd& logit_grad,
                                            const Hyper& hyper);

  /// Applies precomputed gradients (same rule as backward_update).
  std::vector<GradientNorm> apply(const NetworkParams<T>& grad, const Hyper& hyper);

  NetworkParams<T>& params() { return params_; }
  const NetworkParams<T>& params() const { return params_; }
  const NetworkParams<T>& velocity() const { return velocity_; }

  /// Marks parameters as externally modified; invalidates outstanding caches.
  void touch() { ++generation_; }

  template <typename U>
  Network<U> cast() const;

 private:
  int input_height_ = 0;
  int hidden_ = 0;
  int classes_ = 0;
  NetworkParams<T> params_;
  NetworkParams<T> velocity_;
  std::uint64_t generation_ = 0;
};

/// Numerically stable softmax over each row of T x (K+1) logits.
Posteriors softmax_rows(const Eigen::MatrixXd& logits);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t parameters_checked = 0;
};

/// Compares analytic gradients of CTC loss through the whole network with
/// central differences, for every parameter. Relative error is
/// |a - n| / max(|a|, |n|, floor). `flip_sign` negates the analytic gradient
/// (harness sensitivity check).
GradientCheckResult gradient_check(const Network<double>& net, const Eigen::MatrixXd& line,
                                   std::span<const script::Label> target, double epsilon = 1e-4,
                                   double floor = 1e-6, bool flip_sign = false);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace rtlocr::net
