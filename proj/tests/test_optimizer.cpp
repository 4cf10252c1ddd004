#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hpo/objective.hpp"
#include "hpo/optimizer.hpp"
#include "test_support.hpp"

using namespace hpo;

TEST_CASE("zero gradient isolates the decoupled decay") {
  AdamW st;
  st.lr = 0.01;
  st.weight_decay = 0.01;
  st.reset(4);
  VectorXd theta = VectorXd::Constant(4, 3.0);
  adamw_step(st, theta, VectorXd::Zero(4));
  CHECK((theta - VectorXd::Constant(4, 3.0 * (1.0 - 0.01 * 0.01))).norm() == 0.0);
  // The decay path never touches the moments.
  CHECK(st.m.norm() == 0.0);
  CHECK(st.v.norm() == 0.0);
  CHECK(st.step_count == 1);

  // Without decay a zero gradient is a fixed point.
  AdamW st2;
  st2.weight_decay = 0.0;
  st2.reset(4);
  VectorXd fixed = VectorXd::Constant(4, 2.5);
  for (int i = 0; i < 10; ++i) adamw_step(st2, fixed, VectorXd::Zero(4));
  CHECK(fixed == VectorXd::Constant(4, 2.5));
}

TEST_CASE("first step without decay moves by about -lr * sign(grad)") {
  AdamW st;
  st.lr = 0.01;
  st.weight_decay = 0.0;
  st.reset(1);
  VectorXd theta = VectorXd::Zero(1);
  VectorXd grad = VectorXd::Constant(1, 0.37);
  adamw_step(st, theta, grad);
  // m_hat = g, v_hat = g^2 at step one, so the update is -lr * g/(|g| + eps).
  CHECK(theta(0) == doctest::Approx(-0.01).epsilon(1e-6));

  grad(0) = -123.0;
  VectorXd theta2 = VectorXd::Zero(1);
  AdamW st3;
  st3.lr = 0.01;
  st3.weight_decay = 0.0;
  st3.reset(1);
  adamw_step(st3, theta2, grad);
  CHECK(theta2(0) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  auto run = [] {
    AdamW st;
    st.reset(3);
    VectorXd theta = VectorXd::Constant(3, 1.0);
    Rng rng(77);
    for (int i = 0; i < 50; ++i) {
      VectorXd g(3);
      for (int j = 0; j < 3; ++j) g(j) = rng.normal();
      adamw_step(st, theta, g);
    }
    return theta;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite gradient is rejected with a diagnostic") {
  AdamW st;
  st.reset(2);
  VectorXd theta = VectorXd::Zero(2);
  VectorXd bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(adamw_step(st, theta, bad), std::runtime_error);
  bad(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adamw_step(st, theta, bad), std::runtime_error);
}

TEST_CASE("per-coordinate update magnitude stays inside the coarse bound") {
  AdamW st;
  st.lr = 0.01;
  st.weight_decay = 0.01;
  st.reset(6);
  Rng rng(5);
  VectorXd theta(6);
  theta << 10.0, -4.0, 0.5, 0.0, -9.0, 2.0;
  for (int i = 0; i < 500; ++i) {
    VectorXd g(6);
    for (int j = 0; j < 6; ++j) g(j) = 100.0 * (rng.uniform01() - 0.5);
    VectorXd before = theta;
    adamw_step(st, theta, g);
    VectorXd limit = VectorXd::Constant(6, st.lr / (1.0 - st.beta1)).array() +
                     st.lr * st.weight_decay * before.array().abs();
    CHECK(((theta - before).cwiseAbs().array() <= limit.array() + 1e-12).all());
  }
}

TEST_CASE("run_k_steps on a quadratic decreases after warmup; k >= 1 enforced") {
  AdamW st;
  st.lr = 0.01;
  st.weight_decay = 0.0;
  st.reset(5);
  VectorXd theta0 = VectorXd::Constant(5, 1.0);
  std::vector<double> losses;
  LossGradFn f = [&](const VectorXd& th) {
    LossAndGrad lg;
    lg.loss = 0.5 * th.squaredNorm();
    lg.grad = th;
    losses.push_back(lg.loss);
    return lg;
  };
  RunKResult res = run_k_steps(theta0, f, 50, st);
  CHECK(res.theta.norm() < theta0.norm());
  for (std::size_t i = 3; i < losses.size(); ++i) {
    CHECK(losses[i] <= losses[i - 1] + 1e-12);
  }
  CHECK(res.final_loss == losses.back());

  AdamW st2;
  st2.reset(5);
  CHECK_THROWS_AS(run_k_steps(theta0, f, 0, st2), std::invalid_argument);
}

TEST_CASE("1000 steps on a 1-pair DPO loss reach the golden-section optimum") {
  BanditInstance inst = build_instance(44, 2, 8, 10);
  LogLinearPolicy ref = reference_policy_for(inst);
  Rng rng(3);
  // The margin scale beta controls how far 1000 adaptive steps can push the
  // pair loss; a large beta leaves enough headroom to reach the line-search
  // optimum within the stated tolerance.
  const double beta = 50.0;

  VectorXd x = sample_context(2, rng);
  PreferenceRecord rec = label_pair(inst, x, 1, 5, rng);
  OfflineDataset data = {rec};

  AdamW st;
  st.lr = 0.01;
  st.weight_decay = 0.0;
  st.reset(10);
  LossGradFn f = [&](const VectorXd& th) {
    LossAndGrad lg;
    lg.loss = dpo_loss(th, ref.theta, inst, data, beta).total;
    lg.grad = dpo_grad(th, ref.theta, inst, data, beta);
    return lg;
  };
  RunKResult res = run_k_steps(ref.theta, f, 1000, st);

  // Line-search oracle on the margin direction.
  const MatrixXd features = phi_all(inst.fmap, rec.x);
  const VectorXd dphi = features.col(rec.y_plus) - features.col(rec.y_minus);
  const double oracle = test::golden_section_min(
      [&](double s) {
        return dpo_loss(VectorXd(ref.theta + s * dphi), ref.theta, inst, data, beta)
            .total;
      },
      0.0, 60.0 / dphi.squaredNorm());
  CHECK(std::abs(res.final_loss - oracle) <= 1e-3);
}
