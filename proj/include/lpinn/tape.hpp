#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "network.hpp"

namespace lpinn {

/// Which input derivatives a batch carries. The value channel is always on.
enum Channels : unsigned {
  kValueOnly = 0,
  kTime = 1,        // d/d(input 0)
  kSpace = 2,       // d/d(input 1)
  kSpaceSecond = 4  // d2/d(input 1)2, requires kSpace
};

using Matrix = Eigen::MatrixXd;
using RowMatrixMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMatrixMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Network outputs (rows) at a batch of points (columns) with the requested
/// input derivatives. Channels that were not requested stay empty.
struct JetBatch {
  Matrix value, d_t, d_x, d_xx;

  void set_zero_like(const JetBatch& o) {
    value = Matrix::Zero(o.value.rows(), o.value.cols());
    d_t = Matrix::Zero(o.d_t.rows(), o.d_t.cols());
    d_x = Matrix::Zero(o.d_x.rows(), o.d_x.cols());
    d_xx = Matrix::Zero(o.d_xx.rows(), o.d_xx.cols());
  }
};

/// Records batched forward passes of one network and back-propagates output
/// adjoints to a flat parameter gradient aligned with NetworkParams::values.
///
/// Usage: record() one or more batches, fill adjoint(id) with dLoss/d(output
/// channel), optionally seed param_adjoint() for terms depending directly on
/// parameters, then call gradient(). Batches are back-propagated in recording
/// order, so the accumulation order is fixed.
class GradTape {
 public:
  explicit GradTape(const NetworkParams& net) : net_(&net), param_adjoint_(net.values.size(), 0.0) {}

  std::size_t record(const Matrix& inputs, unsigned channels) {
    if (static_cast<std::size_t>(inputs.rows()) != net_->input_dim())
      throw std::invalid_argument("input rows do not match network input width");
    if ((channels & (kSpace | kSpaceSecond)) && net_->input_dim() < 2)
      throw std::invalid_argument("space derivatives requested on a time-only network");
    if ((channels & kSpaceSecond) && !(channels & kSpace))
      throw std::invalid_argument("second space derivative requires the first");
    Batch b;
    b.channels = channels;
    const Eigen::Index n = inputs.cols();
    const std::size_t L = net_->num_layers();
    b.a.resize(L);
    b.z.resize(L);

    // Layer-0 input jets: the inputs themselves with unit tangents.
    JetBatch a0;
    a0.value = inputs;
    if (channels & kTime) {
      a0.d_t = Matrix::Zero(inputs.rows(), n);
      a0.d_t.row(0).setOnes();
    }
    if (channels & kSpace) {
      a0.d_x = Matrix::Zero(inputs.rows(), n);
      a0.d_x.row(1).setOnes();
    }
    if (channels & kSpaceSecond) a0.d_xx = Matrix::Zero(inputs.rows(), n);
    b.a[0] = std::move(a0);

    for (std::size_t l = 0; l < L; ++l) {
      const auto W = weights(l);
      const auto bias = biases(l);
      const JetBatch& a = b.a[l];
      JetBatch z;
      z.value.noalias() = W * a.value;
      z.value.colwise() += bias;
      if (channels & kTime) z.d_t.noalias() = W * a.d_t;
      if (channels & kSpace) z.d_x.noalias() = W * a.d_x;
      if (channels & kSpaceSecond) z.d_xx.noalias() = W * a.d_xx;
      if (l + 1 == L) {
        b.output = z;
        b.z[l] = std::move(z);
        break;
      }
      JetBatch h;
      h.value = z.value.array().tanh().matrix();
      const Eigen::ArrayXXd s = 1.0 - h.value.array().square();
      if (channels & kTime) h.d_t = (s * z.d_t.array()).matrix();
      if (channels & kSpace) h.d_x = (s * z.d_x.array()).matrix();
      if (channels & kSpaceSecond)
        h.d_xx = (s * z.d_xx.array() - 2.0 * h.value.array() * s * z.d_x.array().square()).matrix();
      b.z[l] = std::move(z);
      b.a[l + 1] = std::move(h);
    }
    b.adjoint.set_zero_like(b.output);
    batches_.push_back(std::move(b));
    return batches_.size() - 1;
  }

  const JetBatch& output(std::size_t id) const { return batches_.at(id).output; }
  JetBatch& adjoint(std::size_t id) { return batches_.at(id).adjoint; }
  std::span<double> param_adjoint() { return param_adjoint_; }
  const NetworkParams& params() const { return *net_; }

  /// dLoss/dParams from all seeded adjoints.
  std::vector<double> gradient() const {
    std::vector<double> grad = param_adjoint_;
    for (const Batch& b : batches_) backprop(b, grad);
    return grad;
  }

 private:
  struct Batch {
    unsigned channels = 0;
    std::vector<JetBatch> a;  // layer inputs
    std::vector<JetBatch> z;  // pre-activations
    JetBatch output;
    JetBatch adjoint;
  };

  RowMatrixMap weights(std::size_t l) const {
    return RowMatrixMap(net_->values.data() + net_->weight_offset(l),
                        static_cast<Eigen::Index>(net_->layer_sizes[l + 1]),
                        static_cast<Eigen::Index>(net_->layer_sizes[l]));
  }
  Eigen::Map<const Eigen::VectorXd> biases(std::size_t l) const {
    return Eigen::Map<const Eigen::VectorXd>(net_->values.data() + net_->bias_offset(l),
                                             static_cast<Eigen::Index>(net_->layer_sizes[l + 1]));
  }

  void backprop(const Batch& b, std::vector<double>& grad) const {
    const unsigned ch = b.channels;
    const std::size_t L = net_->num_layers();
    JetBatch zbar = b.adjoint;  // adjoint of the output layer's pre-activation
    for (std::size_t l = L; l-- > 0;) {
      const JetBatch& a = b.a[l];
      RowMatrixMapMut gW(grad.data() + net_->weight_offset(l), static_cast<Eigen::Index>(net_->layer_sizes[l + 1]),
                         static_cast<Eigen::Index>(net_->layer_sizes[l]));
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + net_->bias_offset(l),
                                     static_cast<Eigen::Index>(net_->layer_sizes[l + 1]));
      gW.noalias() += zbar.value * a.value.transpose();
      if (ch & kTime) gW.noalias() += zbar.d_t * a.d_t.transpose();
      if (ch & kSpace) gW.noalias() += zbar.d_x * a.d_x.transpose();
      if (ch & kSpaceSecond) gW.noalias() += zbar.d_xx * a.d_xx.transpose();
      gb += zbar.value.rowwise().sum();
      if (l == 0) break;

      // Adjoint of this layer's input, which is tanh of the previous layer.
      const auto W = weights(l);
      JetBatch hbar;
      hbar.value.noalias() = W.transpose() * zbar.value;
      if (ch & kTime) hbar.d_t.noalias() = W.transpose() * zbar.d_t;
      if (ch & kSpace) hbar.d_x.noalias() = W.transpose() * zbar.d_x;
      if (ch & kSpaceSecond) hbar.d_xx.noalias() = W.transpose() * zbar.d_xx;

      const JetBatch& z = b.z[l - 1];
      const Eigen::ArrayXXd h = a.value.array();
      const Eigen::ArrayXXd s = 1.0 - h.square();
      const Eigen::ArrayXXd ds = -2.0 * h * s;  // d s / d z
      Eigen::ArrayXXd zv = hbar.value.array() * s;
      JetBatch next;
      if (ch & kTime) {
        zv += ds * hbar.d_t.array() * z.d_t.array();
        next.d_t = (s * hbar.d_t.array()).matrix();
      }
      if (ch & kSpace) {
        zv += ds * hbar.d_x.array() * z.d_x.array();
        Eigen::ArrayXXd zx = s * hbar.d_x.array();
        if (ch & kSpaceSecond) zx += 2.0 * ds * z.d_x.array() * hbar.d_xx.array();
        next.d_x = zx.matrix();
      }
      if (ch & kSpaceSecond) {
        // h_xx = s z_xx + ds z_x^2, and d(ds)/dz = -2 s (s - 2 h^2).
        const Eigen::ArrayXXd dds = -2.0 * s * (s - 2.0 * h.square());
        zv += hbar.d_xx.array() * (ds * z.d_xx.array() + dds * z.d_x.array().square());
        next.d_xx = (s * hbar.d_xx.array()).matrix();
      }
      next.value = zv.matrix();
      zbar = std::move(next);
    }
  }

  const NetworkParams* net_;
  std::vector<Batch> batches_;
  std::vector<double> param_adjoint_;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Evaluates `loss_eval(tape)` and returns the loss with its parameter
/// gradient. The closure records batches on the tape, seeds their adjoints
/// with dLoss/d(output) and returns the loss value; any weighting factors it
/// uses are constants as far as the gradient is concerned.
template <class LossEval>
LossGradient loss_gradient(const NetworkParams& params, LossEval&& loss_eval) {
  GradTape tape(params);
  const double loss = loss_eval(tape);
  if (!std::isfinite(loss)) throw NonFiniteError("non-finite loss", 0);
  return {loss, tape.gradient()};
}

}  // namespace lpinn
