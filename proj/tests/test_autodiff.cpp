#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace lpinn;
using lpinn::testing::random_net;
using lpinn::testing::rel_err;

TEST(Jet, ProductAndChainRules) {
  const Jet2 x = Jet2::space_variable(0.7);
  const Jet2 f = x * x * x;
  EXPECT_DOUBLE_EQ(f.value, 0.343);
  EXPECT_DOUBLE_EQ(f.d_x, 3 * 0.49);
  EXPECT_DOUBLE_EQ(f.d_xx, 6 * 0.7);
  EXPECT_EQ(f.d_t, 0.0);

  const Jet2 s = sin(2.0 * x);
  EXPECT_NEAR(s.d_x, 2 * std::cos(1.4), 1e-15);
  EXPECT_NEAR(s.d_xx, -4 * std::sin(1.4), 1e-15);

  const Jet2 h = tanh(x * 1.5 + 0.2);
  const double th = std::tanh(1.25);
  EXPECT_NEAR(h.d_x, 1.5 * (1 - th * th), 1e-15);
  EXPECT_NEAR(h.d_xx, -2 * 2.25 * th * (1 - th * th), 1e-15);
}

TEST(Jet, SingleNeuronClosedForm) {
  NetworkParams net{{1, 1, 1}, {0.8, -0.3, 1.0, 0.0}, 0};
  for (double t : {-1.0, 0.0, 0.25, 2.0}) {
    const auto out = jet_eval(net, t);
    const double h = std::tanh(0.8 * t - 0.3);
    EXPECT_NEAR(out[0].value, h, 1e-15);
    EXPECT_NEAR(out[0].d_t, 0.8 * (1 - h * h), 1e-15);
  }
}

TEST(Jet, ZeroNetwork) {
  NetworkParams net = init_network({2, 7, 7, 3}, 1);
  std::fill(net.values.begin(), net.values.end(), 0.0);
  for (const Jet2& j : jet_eval(net, 0.4, -0.2)) {
    EXPECT_EQ(j.value, 0.0);
    EXPECT_EQ(j.d_t, 0.0);
    EXPECT_EQ(j.d_x, 0.0);
    EXPECT_EQ(j.d_xx, 0.0);
  }
}

TEST(Jet, DerivativesMatchCentralDifferences) {
  const NetworkParams net = random_net({2, 10, 10, 2}, 5);
  Xoshiro256ss r(11);
  const double h = 1e-5;
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const double t = r.uniform(-1, 1), x = r.uniform(-1, 1);
    const auto j = jet_eval(net, t, x);
    const auto tp = jet_eval(net, t + h, x), tm = jet_eval(net, t - h, x);
    const auto xp = jet_eval(net, t, x + h), xm = jet_eval(net, t, x - h);
    for (std::size_t k = 0; k < 2; ++k) {
      const double dt = (tp[k].value - tm[k].value) / (2 * h);
      const double dx = (xp[k].value - xm[k].value) / (2 * h);
      // Second derivative from first-derivative jets keeps the oracle at O(h^2).
      const double dxx = (xp[k].d_x - xm[k].d_x) / (2 * h);
      worst = std::max({worst, rel_err(j[k].d_t, dt, 1e-3), rel_err(j[k].d_x, dx, 1e-3),
                        rel_err(j[k].d_xx, dxx, 1e-3)});
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Jet, ArityMismatchRejected) {
  const NetworkParams net = init_network({2, 3, 1}, 0);
  EXPECT_THROW(jet_eval(net, 0.1), std::invalid_argument);
  const NetworkParams tnet = init_network({1, 3, 1}, 0);
  EXPECT_THROW(jet_eval(tnet, 0.1, 0.2), std::invalid_argument);
}

TEST(Tape, ForwardMatchesScalarRoute) {
  const NetworkParams net = random_net({2, 6, 6, 2}, 3);
  Matrix in(2, 5);
  in << 0.0, 0.1, 0.5, -0.3, 0.9, -1.0, 0.2, 0.0, 0.7, -0.6;
  GradTape tape(net);
  const auto id = tape.record(in, kTime | kSpace | kSpaceSecond);
  const JetBatch& out = tape.output(id);
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    const auto j = jet_eval(net, in(0, c), in(1, c));
    for (Eigen::Index k = 0; k < 2; ++k) {
      EXPECT_NEAR(out.value(k, c), j[k].value, 1e-14);
      EXPECT_NEAR(out.d_t(k, c), j[k].d_t, 1e-14);
      EXPECT_NEAR(out.d_x(k, c), j[k].d_x, 1e-14);
      EXPECT_NEAR(out.d_xx(k, c), j[k].d_xx, 1e-13);
    }
  }
}

TEST(Tape, RejectsInconsistentRequests) {
  const NetworkParams tnet = init_network({1, 4, 3}, 0);
  GradTape tape(tnet);
  EXPECT_THROW(tape.record(Matrix::Zero(2, 3), kTime), std::invalid_argument);
  EXPECT_THROW(tape.record(Matrix::Zero(1, 3), kSpace), std::invalid_argument);
  const NetworkParams net = init_network({2, 4, 1}, 0);
  GradTape t2(net);
  EXPECT_THROW(t2.record(Matrix::Zero(2, 3), kSpaceSecond), std::invalid_argument);
}

TEST(LossGradient, Quadratic) {
  NetworkParams net{{1, 1}, {3.0, 0.0}, 0};
  const auto g = loss_gradient(net, [&](GradTape& tape) {
    tape.param_adjoint()[0] = 2 * net.values[0];
    return net.values[0] * net.values[0];
  });
  EXPECT_DOUBLE_EQ(g.loss, 9.0);
  EXPECT_DOUBLE_EQ(g.gradient[0], 6.0);
  EXPECT_DOUBLE_EQ(g.gradient[1], 0.0);
}

TEST(LossGradient, SumOfSquares) {
  const NetworkParams net = random_net({1, 4, 2}, 2);
  const auto g = loss_gradient(net, [&](GradTape& tape) {
    double s = 0.0;
    for (std::size_t i = 0; i < net.values.size(); ++i) {
      s += net.values[i] * net.values[i];
      tape.param_adjoint()[i] = 2 * net.values[i];
    }
    return s;
  });
  for (std::size_t i = 0; i < net.values.size(); ++i) EXPECT_DOUBLE_EQ(g.gradient[i], 2 * net.values[i]);
}

// A fixed linear functional of every output channel; its finite difference
// has no truncation error beyond that of the network itself.
TEST(LossGradient, LinearFunctionalOfAllChannels) {
  const NetworkParams net = random_net({2, 5, 5, 2}, 8);
  Matrix in(2, 4);
  in << 0.1, 0.4, 0.8, 0.3, -0.5, 0.0, 0.6, 0.9;
  Xoshiro256ss r(4);
  Matrix wv(2, 4), wt(2, 4), wx(2, 4), wxx(2, 4);
  for (auto* m : {&wv, &wt, &wx, &wxx})
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = r.uniform(-1, 1);
  auto functional = [&](const NetworkParams& p, GradTape& tape) {
    (void)p;
    const auto id = tape.record(in, kTime | kSpace | kSpaceSecond);
    const JetBatch& o = tape.output(id);
    JetBatch& a = tape.adjoint(id);
    a.value = wv;
    a.d_t = wt;
    a.d_x = wx;
    a.d_xx = wxx;
    return (wv.cwiseProduct(o.value) + wt.cwiseProduct(o.d_t) + wx.cwiseProduct(o.d_x) + wxx.cwiseProduct(o.d_xx))
        .sum();
  };
  const auto g = loss_gradient(net, [&](GradTape& tape) { return functional(net, tape); });
  const double h = 1e-6;
  for (std::size_t i = 0; i < net.values.size(); ++i) {
    NetworkParams a = net, b = net;
    a.values[i] += h;
    b.values[i] -= h;
    GradTape ta(a), tb(b);
    const double fd = (functional(a, ta) - functional(b, tb)) / (2 * h);
    EXPECT_LT(rel_err(g.gradient[i], fd, 1e-6), 1e-6) << "parameter " << i;
  }
}

template <class Problem>
double worst_gradient_error(const Problem& p, std::vector<std::size_t> layers, std::uint64_t seed) {
  const auto ctx = make_context(p, ShiftKind::additive);
  const NetworkParams net = random_net(std::move(layers), seed);
  Xoshiro256ss r(seed + 100);
  std::vector<double> rho(p.time_grid().size);
  for (double& v : rho) v = r.uniform(0.5, 2.0);
  const auto lg = assemble_loss_gradient(ctx, net, rho);
  double worst = 0.0;
  for (std::size_t i = 0; i < net.values.size(); ++i) {
    const double h = 1e-4;
    auto at = [&](double d) {
      NetworkParams q = net;
      q.values[i] += d;
      return assemble_loss(ctx, q, rho);
    };
    const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    // Fourth-order central stencil; relative tolerance 1e-5 with an absolute floor of 1e-8.
    worst = std::max(worst, std::abs(lg.gradient[i] - fd) / (1e-5 * std::abs(fd) + 1e-8));
  }
  return worst;
}

TEST(LossGradient, LorenzResidualLossMatchesFiniteDifferences) {
  LorenzProblem p;
  p.n_t = 16;
  EXPECT_LE(worst_gradient_error(p, {1, 8, 8, 3}, 1), 1.0);
}

TEST(LossGradient, BurgersResidualLossMatchesFiniteDifferences) {
  BurgersProblem p;
  p.n_t = 5;
  p.n_x = 4;
  EXPECT_LE(worst_gradient_error(p, {2, 6, 6, 1}, 1), 1.0);
}

TEST(LossGradient, NonFiniteLossRejected) {
  const NetworkParams net = init_network({1, 2, 1}, 0);
  EXPECT_THROW(loss_gradient(net, [](GradTape&) { return std::nan(""); }), NonFiniteError);
}

TEST(LossGradient, Deterministic) {
  LorenzProblem p;
  p.n_t = 32;
  const auto ctx = make_context(p, ShiftKind::additive);
  const NetworkParams net = random_net({1, 8, 3}, 4);
  const std::vector<double> rho(p.n_t, 1.0);
  const auto a = assemble_loss_gradient(ctx, net, rho);
  const auto b = assemble_loss_gradient(ctx, net, rho);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.gradient, b.gradient);
}
