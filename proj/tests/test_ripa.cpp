#include "doctest.h"
#include "oracles.hpp"

#include "ripa/error.hpp"
#include "ripa/ripa.hpp"

#include <cmath>
#include <random>

using namespace ripa;

namespace {

Point pt(std::initializer_list<double> v) { return make_point(v); }

IterationState state_at(long long k, Point x, Point x_prev) {
  IterationState st;
  st.k = k;
  st.x = std::move(x);
  st.x_prev = std::move(x_prev);
  st.y = st.x;
  st.residual = Point::Zero(st.x.size());
  return st;
}

DiscreteConfig rotation_benchmark() {
  DiscreteConfig c;
  c.alpha = 10.0;
  c.s = 1.0;
  c.epsilon = 1.25;
  c.x0 = pt({10, 10});
  c.x_minus1 = pt({10, 10});
  return c;
}

}  // namespace

TEST_SUITE("ripa_solver") {

TEST_CASE("discrete schedules and compliance") {
  DiscreteConfig c = rotation_benchmark();
  CHECK(c.lambda_k(10) == doctest::Approx(2.25));
  CHECK(c.momentum_k(1) == -9.0);
  CHECK(c.momentum_k(20) == 0.5);
  CHECK(c.theorem_compliant());
  c.epsilon = 0.2;
  CHECK_FALSE(c.theorem_compliant());
  c.epsilon = 1.25;
  c.schedule = DiscreteScheduleKind::RipaPerturbed;
  CHECK(c.lambda_k(10) == doctest::Approx((1.0 + 0.5 + 1.25) * 0.02 * 100.0));
  c.perturbation = SourceTerm::power_decay(1.0, 3.0, pt({1, 0}));
  CHECK(c.theorem_compliant());
  c.perturbation = SourceTerm::power_decay(1.0, 2.0, pt({1, 0}));
  CHECK_FALSE(c.theorem_compliant());
  c.perturbation = SourceTerm::power_decay(1.0, 3.0, pt({1, 0}));
  c.epsilon = 0.3;  // (2 + s)/(alpha - 2) = 0.375
  CHECK_FALSE(c.theorem_compliant());
  c.schedule = DiscreteScheduleKind::ConstantLambda;
  CHECK_FALSE(c.theorem_compliant());
}

TEST_CASE("zero operator steps are pure extrapolation") {
  DiscreteConfig c = rotation_benchmark();
  const IterationState st = state_at(3, pt({1, 2}), pt({0, 1}));
  const IterationState next = ripa_step(Operator::zero(2), st, c);
  const Point y = pt({1, 2}) + (1.0 - 10.0 / 3.0) * pt({1, 1});
  CHECK((next.x - y).norm() <= 1e-15);
  CHECK(next.k == 4);
  CHECK((next.x_prev - st.x).norm() == 0.0);
  c.schedule = DiscreteScheduleKind::ClassicalUnregularized;
  CHECK((classical_step(Operator::zero(2), st, c).x - y).norm() <= 1e-15);
}

TEST_CASE("rotation step with vanishing momentum") {
  DiscreteConfig c;
  c.alpha = 4.0;
  c.s = 1.0;
  c.epsilon = 2.0;
  c.x0 = pt({1, 0});
  c.x_minus1 = pt({1, 0});
  CHECK(c.theorem_compliant());
  CHECK(c.lambda_k(4) == doctest::Approx(3.0));
  CHECK(c.momentum_k(4) == 0.0);
  const Operator rot = Operator::rotation2d();
  // J_{4A}(1, 0) = (1, -4) / 17 and A_4 = ((4, -1), (1, 4)) / 17.
  const Point j4 = rot.resolvent(4.0, pt({1, 0}));
  CHECK(j4[0] == doctest::Approx(1.0 / 17.0).epsilon(1e-15));
  CHECK(j4[1] == doctest::Approx(-4.0 / 17.0).epsilon(1e-15));
  const IterationState next = ripa_step(rot, state_at(4, pt({1, 0}), pt({0.3, -2})), c);
  CHECK(next.x[0] == doctest::Approx(13.0 / 17.0).epsilon(1e-15));
  CHECK(next.x[1] == doctest::Approx(-1.0 / 17.0).epsilon(1e-15));
  const Point y = pt({1, 0});
  const Point by_yosida = y - pt({4.0 / 17.0, 1.0 / 17.0});
  CHECK((next.x - by_yosida).norm() <= 1e-15);
}

TEST_CASE("the two update forms agree") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> c(-10, 10), li(std::log(1e-3), std::log(1e4));
  for (const Operator& op :
       {Operator::rotation2d(), Operator::affine(Matrix::Identity(2, 2)),
        Operator::prox(ProxRule::absolute_value(), 2), Operator::prox(ProxRule::box(-1, 1), 2)}) {
    for (int i = 0; i < 2000; ++i) {
      const Point w = pt({c(rng), c(rng)});
      const double lambda = std::exp(li(rng));
      const double s = std::exp(li(rng)) * 1e-2;
      const Point a = ripa_update_resolvent_form(op, w, lambda, s);
      const Point b = ripa_update_yosida_form(op, w, lambda, s);
      CHECK((a - b).norm() <= 1e-12 * (1.0 + w.norm()));
    }
  }
}

TEST_CASE("perturbed step on the zero operator adds s f_k") {
  DiscreteConfig c;
  c.alpha = 10.0;
  c.s = 1.0;
  c.schedule = DiscreteScheduleKind::RipaPerturbed;
  c.perturbation = SourceTerm::power_decay(1.0, 3.0, pt({1, 0}));
  const IterationState st = state_at(2, pt({1, 1}), pt({1, 1}));
  const IterationState next = ripa_step(Operator::zero(2), st, c);
  CHECK(next.x[0] == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(next.x[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((next.y - pt({1, 1})).norm() == 0.0);
}

TEST_CASE("classical steps") {
  DiscreteConfig c;
  c.alpha = 10.0;
  c.s = 1.0;
  c.schedule = DiscreteScheduleKind::ClassicalUnregularized;
  const IterationState st = state_at(10, pt({3, -1}), pt({3, -1}));
  const IterationState half = classical_step(Operator::affine(Matrix::Identity(2, 2)), st, c);
  CHECK((half.x - pt({1.5, -0.5})).norm() <= 1e-15);
  const IterationState rot = classical_step(Operator::rotation2d(), state_at(10, pt({1, 0}), pt({1, 0})), c);
  CHECK(rot.x[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rot.x[1] == doctest::Approx(-0.5).epsilon(1e-15));
  // ripa_step dispatches to the classical form for this schedule.
  CHECK((ripa_step(Operator::rotation2d(), state_at(10, pt({1, 0}), pt({1, 0})), c).x - rot.x).norm() == 0.0);
}

TEST_CASE("run from rest on the zero operator stays put") {
  DiscreteConfig c = rotation_benchmark();
  c.max_iters = 200;
  const RunResult r = run(Operator::zero(2), c);
  CHECK(r.trajectory.size() == 201);
  CHECK(r.summary.iterations == 200);
  CHECK(r.summary.sup_k_dx == 0.0);
  for (const Sample& s : r.trajectory.samples()) CHECK((s.x - c.x0).norm() == 0.0);
  for (double v : r.summary.partial_k_dx2) CHECK(v == 0.0);
  CHECK(r.summary.compliant);
}

TEST_CASE("run records k, x_k, x_k - x_{k-1} and lambda_k") {
  DiscreteConfig c = rotation_benchmark();
  c.max_iters = 50;
  const Operator rot = Operator::rotation2d();
  const RunResult r = run(rot, c);
  IterationState st = initial_state(c);
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    const Sample& s = r.trajectory[i];
    CHECK(s.t == static_cast<double>(i + 1));
    CHECK((s.x - st.x).norm() == 0.0);
    CHECK((s.v - (st.x - st.x_prev)).norm() == 0.0);
    CHECK(s.lambda == c.lambda_k(st.k));
    st = ripa_step(rot, st, c);
  }
  for (std::size_t i = 1; i < r.summary.partial_k_dx2.size(); ++i) {
    CHECK(r.summary.partial_k_dx2[i] >= r.summary.partial_k_dx2[i - 1]);
    CHECK(r.summary.partial_k_lambda_res2[i] >= r.summary.partial_k_lambda_res2[i - 1]);
  }
}

TEST_CASE("strongly monotone identity converges strongly") {
  DiscreteConfig c = rotation_benchmark();
  c.max_iters = 100000;
  const RunResult r = run(Operator::affine(Matrix::Identity(2, 2)), c);
  long long first_small = -1;
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    if (r.trajectory[i].x.norm() > 1e-6) first_small = -1;
    else if (first_small < 0) first_small = static_cast<long long>(i) + 1;
  }
  CHECK(first_small > 0);
  CHECK(first_small <= 100000);
}

TEST_CASE("early exit on the scaled speed") {
  DiscreteConfig c = rotation_benchmark();
  c.max_iters = 100000;
  StopRule stop;
  stop.max_iters = c.max_iters;
  stop.early_exit_tol = 1e-3;
  const RunResult r = run(Operator::affine(Matrix::Identity(2, 2)), c, stop);
  CHECK(r.summary.early_exit);
  CHECK(r.summary.iterations < 100000);
  const Sample& last = r.trajectory.back();
  CHECK(last.t * last.v.norm() < 1e-3);
}

TEST_CASE("divergence is flagged and truncated") {
  DiscreteConfig c = rotation_benchmark();
  c.alpha = 0.5;
  c.schedule = DiscreteScheduleKind::ConstantLambda;
  c.lambda_bar = 1.0;
  c.max_iters = 100000;
  c.divergence_threshold = 1e6;
  // Velocities decay like k^{-alpha}, too slowly to be summable for alpha < 1.
  c.x0 = pt({1e5, 0});
  c.x_minus1 = pt({0, 0});
  const RunResult r = run(Operator::zero(2), c);
  CHECK(r.summary.diverged);
  CHECK(r.trajectory.metadata().diverged);
  CHECK(r.trajectory.back().x.norm() > 1e6);
  CHECK(r.summary.iterations < 100000);
}

TEST_CASE("invalid discrete configs") {
  DiscreteConfig c = rotation_benchmark();
  c.s = 0.0;
  CHECK_THROWS_AS(run(Operator::rotation2d(), c), Error);
  c = rotation_benchmark();
  c.x0 = pt({1});
  try {
    run(Operator::rotation2d(), c);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  CHECK_THROWS_AS(ripa_step(Operator::rotation2d(), state_at(0, pt({1, 0}), pt({1, 0})), rotation_benchmark()),
                  Error);
}

}
