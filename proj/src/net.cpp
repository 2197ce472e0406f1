// SPDX-License-Identifier: Apache-2.0
#include "rtlocr/net.hpp"

#include <algorithm>
#include <cmath>

#include "rtlocr/ctc.hpp"
#include "rtlocr/error.hpp"
#include "rtlocr/random.hpp"

namespace rtlocr::net {

namespace {

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void lstm_forward(const LstmParams<T>& p, Mat<T> input, DirectionCache<T>& cache) {
  const Eigen::Index s = p.r.cols();
  const Eigen::Index frames = input.cols();
  cache.input = std::move(input);
  cache.gates.noalias() = p.w * cache.input;
  cache.gates.colwise() += p.b.col(0);
  cache.cells.resize(s, frames);
  cache.tanh_c.resize(s, frames);
  cache.hidden.resize(s, frames);

  Eigen::Matrix<T, Eigen::Dynamic, 1> a(4 * s);
  for (Eigen::Index t = 0; t < frames; ++t) {
    a = cache.gates.col(t);
    if (t > 0) a.noalias() += p.r * cache.hidden.col(t - 1);
    auto g = cache.gates.col(t);
    for (Eigen::Index j = 0; j < 3 * s; ++j) g(j) = sigmoid(a(j));
    for (Eigen::Index j = 3 * s; j < 4 * s; ++j) g(j) = std::tanh(a(j));
    for (Eigen::Index j = 0; j < s; ++j) {
      const T prev = t > 0 ? cache.cells(j, t - 1) : T(0);
      const T c = g(s + j) * prev + g(j) * g(3 * s + j);
      cache.cells(j, t) = c;
      cache.tanh_c(j, t) = std::tanh(c);
      cache.hidden(j, t) = g(2 * s + j) * cache.tanh_c(j, t);
    }
  }
}

// d_hidden is S x T in processing order; accumulates into grad.
template <typename T>
void lstm_backward(const LstmParams<T>& p, const DirectionCache<T>& cache, const Mat<T>& d_hidden,
                   LstmParams<T>& grad) {
  const Eigen::Index s = p.r.cols();
  const Eigen::Index frames = cache.input.cols();
  Mat<T> d_act(4 * s, frames);
  Eigen::Matrix<T, Eigen::Dynamic, 1> dh_next = Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(s);
  Eigen::Matrix<T, Eigen::Dynamic, 1> dc_next = Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(s);

  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    const auto g = cache.gates.col(t);
    auto da = d_act.col(t);
    for (Eigen::Index j = 0; j < s; ++j) {
      const T i_g = g(j), f_g = g(s + j), o_g = g(2 * s + j), c_g = g(3 * s + j);
      const T tc = cache.tanh_c(j, t);
      const T dh = d_hidden(j, t) + dh_next(j);
      const T dc = dh * o_g * (T(1) - tc * tc) + dc_next(j);
      const T prev = t > 0 ? cache.cells(j, t - 1) : T(0);
      da(j) = dc * c_g * i_g * (T(1) - i_g);
      da(s + j) = dc * prev * f_g * (T(1) - f_g);
      da(2 * s + j) = dh * tc * o_g * (T(1) - o_g);
      da(3 * s + j) = dc * i_g * (T(1) - c_g * c_g);
      dc_next(j) = dc * f_g;
    }
    dh_next.noalias() = p.r.transpose() * da;
  }

  grad.w.noalias() += d_act * cache.input.transpose();
  if (frames > 1) {
    grad.r.noalias() += d_act.rightCols(frames - 1) * cache.hidden.leftCols(frames - 1).transpose();
  }
  grad.b.col(0) += d_act.rowwise().sum();
}

template <typename T>
Mat<T> reverse_columns(const Mat<T>& m) {
  return m.rowwise().reverse();
}

template <typename T>
double frobenius(const Mat<T>& m) {
  return std::sqrt(m.template cast<double>().squaredNorm());
}

}  // namespace

// ---- params -----------------------------------------------------------------

template <typename T>
NetworkParams<T> NetworkParams<T>::zeros(int input_height, int hidden, int classes) {
  NetworkParams<T> p;
  for (LstmParams<T>* d : {&p.fwd, &p.bwd}) {
    d->w = Mat<T>::Zero(4 * hidden, input_height);
    d->r = Mat<T>::Zero(4 * hidden, hidden);
    d->b = Mat<T>::Zero(4 * hidden, 1);
  }
  p.w_out = Mat<T>::Zero(classes, 2 * hidden);
  p.b_out = Mat<T>::Zero(classes, 1);
  return p;
}

template <typename T>
std::size_t NetworkParams<T>::parameter_count() const {
  std::size_t n = 0;
  for_each([&n](const char*, const Mat<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <typename T>
bool NetworkParams<T>::all_finite() const {
  bool ok = true;
  for_each([&ok](const char*, const Mat<T>& m) { ok = ok && m.allFinite(); });
  return ok;
}

// ---- network ----------------------------------------------------------------

template <typename T>
Network<T>::Network(int input_height, int hidden, int classes)
    : input_height_(input_height),
      hidden_(hidden),
      classes_(classes),
      params_(NetworkParams<T>::zeros(input_height, hidden, classes)),
      velocity_(NetworkParams<T>::zeros(input_height, hidden, classes)) {
  if (input_height <= 0 || hidden <= 0 || classes < 1) {
    throw Error(Errc::kInvalidArgument, "network dimensions must be positive");
  }
}

template <typename T>
void Network<T>::initialize(std::uint64_t seed, double range) {
  Rng rng(seed);
  params_.for_each([&](const char*, Mat<T>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.uniform(-range, range));
  });
  velocity_ = NetworkParams<T>::zeros(input_height_, hidden_, classes_);
  ++generation_;
}

Posteriors softmax_rows(const Eigen::MatrixXd& logits) {
  Posteriors y(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    y.row(t) = (logits.row(t).array() - m).exp().matrix();
    y.row(t) /= y.row(t).sum();
  }
  return y;
}

template <typename T>
ForwardPass<T> Network<T>::forward(const Mat<T>& line) const {
  if (line.rows() != input_height_) {
    throw Error(Errc::kShapeMismatch, "line height " + std::to_string(line.rows()) + " != model height " +
                                          std::to_string(input_height_));
  }
  if (line.cols() == 0) throw Error(Errc::kShapeMismatch, "line has no columns");
  ForwardPass<T> pass;
  pass.generation = generation_;
  lstm_forward(params_.fwd, line, pass.fwd);
  lstm_forward(params_.bwd, reverse_columns<T>(line), pass.bwd);

  const Eigen::Index frames = line.cols();
  pass.features.resize(2 * hidden_, frames);
  pass.features.topRows(hidden_) = pass.fwd.hidden;
  pass.features.bottomRows(hidden_) = reverse_columns<T>(pass.bwd.hidden);

  Mat<T> logits = params_.w_out * pass.features;
  logits.colwise() += params_.b_out.col(0);
  pass.posteriors = softmax_rows(logits.transpose().template cast<double>());
  return pass;
}

template <typename T>
NetworkParams<T> Network<T>::backward(const ForwardPass<T>& pass, const Eigen::MatrixXd& logit_grad) const {
  const Eigen::Index frames = pass.features.cols();
  if (logit_grad.rows() != frames || logit_grad.cols() != classes_) {
    throw Error(Errc::kShapeMismatch, "logit gradient shape does not match forward pass");
  }
  NetworkParams<T> grad = NetworkParams<T>::zeros(input_height_, hidden_, classes_);
  const Mat<T> dz = logit_grad.transpose().template cast<T>();  // (K+1) x T
  grad.w_out.noalias() = dz * pass.features.transpose();
  grad.b_out.col(0) = dz.rowwise().sum();
  const Mat<T> d_features = params_.w_out.transpose() * dz;
  lstm_backward(params_.fwd, pass.fwd, Mat<T>(d_features.topRows(hidden_)), grad.fwd);
  lstm_backward(params_.bwd, pass.bwd, reverse_columns<T>(d_features.bottomRows(hidden_)), grad.bwd);
  return grad;
}

template <typename T>
std::vector<GradientNorm> Network<T>::apply(const NetworkParams<T>& grad, const Hyper& hyper) {
  std::vector<GradientNorm> norms;
  const T lr = static_cast<T>(hyper.learning_rate);
  const T mu = static_cast<T>(hyper.momentum);
  std::vector<const Mat<T>*> grads;
  grad.for_each([&](const char* name, const Mat<T>& g) {
    grads.push_back(&g);
    norms.push_back({name, frobenius(g)});
  });
  std::vector<Mat<T>*> vels;
  velocity_.for_each([&](const char*, Mat<T>& v) { vels.push_back(&v); });
  size_t i = 0;
  params_.for_each([&](const char*, Mat<T>& p) {
    Mat<T>& v = *vels[i];
    const Mat<T>& g = *grads[i];
    v = mu * v - lr * g;
    p += v;
    ++i;
  });
  ++generation_;
  return norms;
}

template <typename T>
std::vector<GradientNorm> Network<T>::backward_update(const ForwardPass<T>& pass, const Eigen::MatrixXd& logit_grad,
                                                      const Hyper& hyper) {
  if (pass.generation != generation_) {
    throw Error(Errc::kStaleCache, "forward pass predates the latest parameter update");
  }
  return apply(backward(pass, logit_grad), hyper);
}

template <typename T>
template <typename U>
Network<U> Network<T>::cast() const {
  Network<U> out(input_height_, hidden_, classes_);
  std::vector<const Mat<T>*> src;
  params_.for_each([&](const char*, const Mat<T>& m) { src.push_back(&m); });
  size_t i = 0;
  out.params().for_each([&](const char*, Mat<U>& m) { m = src[i++]->template cast<U>(); });
  out.touch();
  return out;
}

template class Network<float>;
template class Network<double>;
template struct NetworkParams<float>;
template struct NetworkParams<double>;
template Network<double> Network<float>::cast<double>() const;
template Network<float> Network<double>::cast<float>() const;
template Network<float> Network<float>::cast<float>() const;
template Network<double> Network<double>::cast<double>() const;

// ---- gradient check -------------------------------------------------------------

GradientCheckResult gradient_check(const Network<double>& net, const Eigen::MatrixXd& line,
                                   std::span<const script::Label> target, double epsilon, double floor,
                                   bool flip_sign) {
  Network<double> probe = net;
  const auto pass = probe.forward(line);
  const auto loss = ctc::ctc_loss(pass.posteriors, target);
  NetworkParams<double> analytic = probe.backward(pass, loss.grad);

  auto loss_at = [&](const Network<double>& n) {
    return ctc::ctc_negative_log_likelihood(n.forward(line).posteriors, target);
  };

  GradientCheckResult result;
  std::vector<std::pair<std::string, Mat<double>*>> tensors;
  probe.params().for_each([&](const char* name, Mat<double>& m) { tensors.emplace_back(name, &m); });
  std::vector<const Mat<double>*> grads;
  analytic.for_each([&](const char*, const Mat<double>& m) { grads.push_back(&m); });

  for (size_t k = 0; k < tensors.size(); ++k) {
    Mat<double>& param = *tensors[k].second;
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double saved = param.data()[i];
      param.data()[i] = saved + epsilon;
      const double up = loss_at(probe);
      param.data()[i] = saved - epsilon;
      const double down = loss_at(probe);
      param.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = flip_sign ? -grads[k]->data()[i] : grads[k]->data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_tensor = tensors[k].first;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
      ++result.parameters_checked;
    }
  }
  return result;
}

}  // namespace rtlocr::net
