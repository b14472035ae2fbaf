#pragma once

#include "agpnav/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>

namespace agpnav {

/// Dense Q-network 16 -> 512 -> 256 -> 9 with rectified-linear hidden
/// layers. All parameters live in one flat vector (W1, b1, W2, b2, W3, b3;
/// weights column-major), so optimizer state and target copies are plain
/// vector operations. Batches are stored one sample per column.
template <typename Scalar>
class QNet {
 public:
  static constexpr int kInput = 16;
  static constexpr int kHidden1 = 512;
  static constexpr int kHidden2 = 256;
  static constexpr int kActions = 9;
  static constexpr std::array<int, 4> kSizes = {kInput, kHidden1, kHidden2, kActions};

  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  static constexpr Eigen::Index weight_offset(int layer) {
    Eigen::Index off = 0;
    for (int l = 0; l < layer; ++l) off += Eigen::Index(kSizes[l]) * kSizes[l + 1] + kSizes[l + 1];
    return off;
  }
  static constexpr Eigen::Index bias_offset(int layer) {
    return weight_offset(layer) + Eigen::Index(kSizes[layer]) * kSizes[layer + 1];
  }
  static constexpr Eigen::Index kParams = weight_offset(3);

  QNet() : theta_(Vector::Zero(kParams)) {}

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  explicit QNet(Rng& rng) : theta_(kParams) {
    for (int l = 0; l < 3; ++l) {
      const double bound = 1.0 / std::sqrt(double(kSizes[l]));
      for (Eigen::Index i = weight_offset(l); i < weight_offset(l + 1); ++i)
        theta_[i] = Scalar(rng.uniform(-bound, bound));
    }
  }

  MatrixMap weight(int l) { return {theta_.data() + weight_offset(l), kSizes[l + 1], kSizes[l]}; }
  ConstMatrixMap weight(int l) const {
    return {theta_.data() + weight_offset(l), kSizes[l + 1], kSizes[l]};
  }
  VectorMap bias(int l) { return {theta_.data() + bias_offset(l), kSizes[l + 1]}; }
  ConstVectorMap bias(int l) const { return {theta_.data() + bias_offset(l), kSizes[l + 1]}; }

  Vector& params() { return theta_; }
  const Vector& params() const { return theta_; }

  /// Hidden activations kept for backprop.
  struct Cache {
    Matrix input;
    Matrix h1;
    Matrix h2;
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
    Matrix h1 = ((weight(0) * x).colwise() + bias(0)).cwiseMax(Scalar(0));
    Matrix h2 = ((weight(1) * h1).colwise() + bias(1)).cwiseMax(Scalar(0));
    Matrix q = (weight(2) * h2).colwise() + bias(2);
    if (cache) {
      cache->input = x;
      cache->h1 = std::move(h1);
      cache->h2 = std::move(h2);
    }
    return q;
  }

  /// Gradient of sum_j <dq_j, Q(x_j)> with respect to theta.
  Vector backward(const Cache& c, const Matrix& dq) const {
    Vector grad(kParams);
    auto gw = [&](int l) { return MatrixMap(grad.data() + weight_offset(l), kSizes[l + 1], kSizes[l]); };
    auto gb = [&](int l) { return VectorMap(grad.data() + bias_offset(l), kSizes[l + 1]); };

    gw(2).noalias() = dq * c.h2.transpose();
    gb(2) = dq.rowwise().sum();
    Matrix d2 = weight(2).transpose() * dq;
    d2.array() *= (c.h2.array() > Scalar(0)).template cast<Scalar>();
    gw(1).noalias() = d2 * c.h1.transpose();
    gb(1) = d2.rowwise().sum();
    Matrix d1 = weight(1).transpose() * d2;
    d1.array() *= (c.h1.array() > Scalar(0)).template cast<Scalar>();
    gw(0).noalias() = d1 * c.input.transpose();
    gb(0) = d1.rowwise().sum();
    return grad;
  }

  template <typename Other>
  QNet<Other> cast() const {
    QNet<Other> out;
    out.params() = theta_.template cast<Other>();
    return out;
  }

 private:
  Vector theta_;
};

/// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = int(i);
  return best;
}

struct Huber {
  double loss;
  double grad;  // d loss / d prediction
};

/// rho_kappa(target - pred): quadratic within |e| <= kappa, linear beyond.
inline Huber huber_loss_and_grad(double pred, double target, double kappa = 1.0) {
  const double e = target - pred;
  if (std::abs(e) <= kappa) return {0.5 * e * e, -e};
  return {kappa * (std::abs(e) - 0.5 * kappa), e > 0.0 ? -kappa : kappa};
}

/// r + gamma (1 - done) max_a q_next.
template <typename Derived>
double td_target(double r, bool done, const Eigen::MatrixBase<Derived>& q_next, double gamma) {
  return done ? r : r + gamma * double(q_next.maxCoeff());
}

/// Adam with bias correction; the learning rate is supplied per step.
template <typename Scalar>
class Adam {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Adam(Eigen::Index n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(Vector::Zero(n)), v_(Vector::Zero(n)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Vector& theta, const Vector& grad, double lr) {
    ++t_;
    m_ = Scalar(beta1_) * m_ + Scalar(1.0 - beta1_) * grad;
    v_ = Scalar(beta2_) * v_ + Scalar(1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, double(t_));
    const double c2 = 1.0 - std::pow(beta2_, double(t_));
    const Scalar step = Scalar(lr / c1);
    const Scalar scale = Scalar(1.0 / std::sqrt(c2));
    theta.array() -= step * m_.array() / ((v_.array().sqrt() * scale) + Scalar(eps_));
  }

  long steps() const { return t_; }

 private:
  Vector m_;
  Vector v_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
};

}  // namespace agpnav
