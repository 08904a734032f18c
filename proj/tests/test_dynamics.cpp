#include "doctest.h"
#include "oracles.hpp"

#include "ripa/dynamics.hpp"
#include "ripa/error.hpp"

#include <cmath>
#include <sstream>

using namespace ripa;

namespace {

Point pt(std::initializer_list<double> v) { return make_point(v); }

ContinuousConfig base_continuous(Point x0, Point v0) {
  ContinuousConfig c;
  c.alpha = 10.0;
  c.t0 = 1.0;
  c.t_end = 100.0;
  c.x0 = std::move(x0);
  c.v0 = std::move(v0);
  return c;
}

}  // namespace

TEST_SUITE("continuous_dynamics") {

TEST_CASE("schedules") {
  const Schedule q = Schedule::quadratic_time(10.0, 1.25);
  CHECK(q(10.0) == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(q(1.0) == doctest::Approx(0.0225).epsilon(1e-15));
  CHECK(q.theorem_compliant());
  CHECK_FALSE(Schedule::quadratic_time(10.0, 0.1).theorem_compliant());
  CHECK_FALSE(Schedule::quadratic_time(2.0, 100.0).theorem_compliant());
  CHECK_FALSE(Schedule::constant(10.0).theorem_compliant());
  CHECK_FALSE(Schedule::power_law(1.0, 2.0).theorem_compliant());
  CHECK(Schedule::power_law(2.0, 3.0)(2.0) == doctest::Approx(16.0));
  CHECK(Schedule::constant(3.0)(1e6) == 3.0);
  CHECK(quadratic_schedule_compliant(10.0, 0.26));
  CHECK_FALSE(quadratic_schedule_compliant(10.0, 0.25));
  CHECK_THROWS_AS(Schedule::constant(0.0), Error);
  CHECK_THROWS_AS(Schedule::quadratic_time(10.0, -1.0), Error);
  CHECK_THROWS_AS(Schedule::power_law(1.0, -1.0), Error);
}

TEST_CASE("schedules are nondecreasing from t0") {
  for (const Schedule& s : {Schedule::constant(2.0), Schedule::quadratic_time(4.0, 2.0),
                            Schedule::power_law(0.5, 1.5)}) {
    double prev = s(1.0);
    CHECK(prev > 0.0);
    for (double t = 1.0; t < 1000.0; t *= 1.3) {
      CHECK(s(t) >= prev);
      prev = s(t);
    }
  }
}

TEST_CASE("sources") {
  const SourceTerm f = SourceTerm::power_decay(1.0, 3.0, pt({1, 0, 0}));
  const Point v = f.at(2.0, 3);
  CHECK(v[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(v[1] == 0.0);
  CHECK(f.norm_at(2.0) == doctest::Approx(0.125));
  CHECK(f.satisfies_integrability() == std::optional<bool>(true));
  CHECK(SourceTerm::power_decay(1.0, 2.0, pt({1})).satisfies_integrability() ==
        std::optional<bool>(false));
  CHECK(SourceTerm::power_decay(2.0, 1.0, pt({3, 4})).at(1.0, 2)[1] == doctest::Approx(1.6));
  CHECK(SourceTerm::none().at(5.0, 2).norm() == 0.0);
  const SourceTerm tab = SourceTerm::custom({1.0, 3.0}, {pt({0, 2}), pt({4, 0})});
  CHECK(tab.at(2.0, 2)[0] == doctest::Approx(2.0));
  CHECK(tab.at(2.0, 2)[1] == doctest::Approx(1.0));
  CHECK(tab.at(10.0, 2).norm() == 0.0);
  CHECK_FALSE(tab.satisfies_integrability().has_value());
  CHECK_THROWS_AS(SourceTerm::custom({2.0, 1.0}, {pt({0}), pt({1})}), Error);
  CHECK_THROWS_AS(SourceTerm::power_decay(1.0, 3.0, pt({0, 0})), Error);
}

TEST_CASE("phase field on the zero operator") {
  ContinuousConfig c = base_continuous(pt({1, 2}), pt({3, -1}));
  const PhaseField f = reduce_to_first_order(Operator::zero(2), c);
  Point state(4);
  state << 1, 2, 3, -1;
  const Point out = f(1.0, state);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == -1.0);
  CHECK(out[2] == doctest::Approx(-30.0));
  CHECK(out[3] == doctest::Approx(10.0));
}

TEST_CASE("phase field on the rotation with constant index") {
  ContinuousConfig c = base_continuous(pt({10, 10}), pt({0, 0}));
  c.schedule = Schedule::constant(10.0);
  const PhaseField f = reduce_to_first_order(Operator::rotation2d(), c);
  Point state(4);
  state << 10, 10, 0, 0;
  const Point out = f(1.0, state);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(-90.0 / 101.0).epsilon(1e-14));
  CHECK(out[3] == doctest::Approx(-110.0 / 101.0).epsilon(1e-14));
  CHECK(f.lambda_at(7.0) == 10.0);
}

TEST_CASE("phase field adds the source") {
  ContinuousConfig c = base_continuous(pt({0, 0, 0}), pt({0, 0, 0}));
  c.source = SourceTerm::power_decay(1.0, 3.0, pt({1, 0, 0}));
  const PhaseField f = reduce_to_first_order(Operator::zero(3), c);
  const Point out = f(2.0, Point::Zero(6));
  CHECK(out.head(3).norm() == 0.0);
  CHECK(out[3] == doctest::Approx(0.125));
  CHECK(out[4] == 0.0);
}

TEST_CASE("free damped motion matches its closed form") {
  ContinuousConfig c = base_continuous(pt({0}), pt({1}));
  const Trajectory tr = simulate_second_order(Operator::zero(1), c);
  CHECK(tr.back().t == 100.0);
  const double expected = (1.0 / 9.0) * (1.0 - std::pow(100.0, -9.0));
  CHECK(tr.back().x[0] == doctest::Approx(expected).epsilon(1e-7));
  for (const Sample& s : tr.samples()) {
    CHECK(std::abs(s.x[0] - oracle::free_damped(10.0, 1.0, 0.0, 1.0, s.t)) <= 1e-7);
  }
}

TEST_CASE("raw rotation flow conserves the norm") {
  FirstOrderConfig c;
  c.field = FieldMode::Raw;
  c.x0 = pt({10, 10});
  const Trajectory tr = simulate_first_order(Operator::rotation2d(), c);
  const double n0 = c.x0.norm();
  double worst = 0.0;
  for (const Sample& s : tr.samples()) worst = std::max(worst, std::abs(s.x.norm() - n0));
  CHECK(worst <= 1e-4 * n0);
  CHECK(tr.back().x.norm() == doctest::Approx(std::sqrt(200.0)).epsilon(1e-3));
}

TEST_CASE("constant-index first-order flow matches exponential decay") {
  FirstOrderConfig c;
  c.schedule = Schedule::constant(10.0);
  c.x0 = pt({10, 10});
  const Trajectory tr = simulate_first_order(Operator::rotation2d(), c);
  CHECK(tr.back().x.norm() == doctest::Approx(oracle::e4_closed_form()).epsilon(1e-6));
}

TEST_CASE("RK4 is fourth order on the constant-index flow") {
  auto endpoint_error = [](double dt) {
    FirstOrderConfig c;
    c.schedule = Schedule::constant(10.0);
    c.x0 = pt({10, 10});
    c.integrator.method = IntegratorMethod::RK4Fixed;
    c.integrator.dt = dt;
    const Trajectory tr = simulate_first_order(Operator::rotation2d(), c);
    return std::abs(tr.back().x.norm() - oracle::e4_closed_form());
  };
  const double coarse = endpoint_error(1.0);
  const double fine = endpoint_error(0.5);
  CHECK(fine > 0.0);
  CHECK(coarse / fine >= 12.0);
}

TEST_CASE("raw mode rejects set-valued operators") {
  FirstOrderConfig c;
  c.field = FieldMode::Raw;
  c.x0 = pt({1});
  try {
    simulate_first_order(Operator::prox(ProxRule::absolute_value(), 1), c);
    FAIL("expected SetValued");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SetValued);
  }
}

TEST_CASE("invalid configurations") {
  ContinuousConfig c = base_continuous(pt({1, 1}), pt({0, 0}));
  c.t0 = 0.0;
  CHECK_THROWS_AS(simulate_second_order(Operator::rotation2d(), c), Error);
  c.t0 = 1.0;
  c.t_end = 0.5;
  CHECK_THROWS_AS(simulate_second_order(Operator::rotation2d(), c), Error);
  c.t_end = 10.0;
  c.v0 = pt({0});
  try {
    simulate_second_order(Operator::rotation2d(), c);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("raw second-order rotation diverges without overflow") {
  ContinuousConfig c = base_continuous(pt({10, 10}), pt({0, 0}));
  c.field = FieldMode::Raw;
  const Trajectory tr = simulate_second_order(Operator::rotation2d(), c);
  CHECK(tr.metadata().diverged);
  CHECK(tr.back().x.allFinite());
  CHECK(tr.back().x.norm() >= 1e20);
}

TEST_CASE("samples are strictly increasing and strided") {
  ContinuousConfig c = base_continuous(pt({10, 10}), pt({0, 0}));
  c.schedule = Schedule::quadratic_time(10.0, 1.25);
  c.t_end = 20.0;
  c.sample_stride = 5;
  const Trajectory tr = simulate_second_order(Operator::rotation2d(), c);
  CHECK(tr.front().t == 1.0);
  CHECK(tr.back().t == 20.0);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i].t > tr[i - 1].t);
  c.sample_stride = 1;
  const Trajectory dense = simulate_second_order(Operator::rotation2d(), c);
  CHECK(dense.size() > 3 * tr.size());
  for (const Sample& s : dense.samples()) {
    CHECK(s.lambda == doctest::Approx(0.0225 * s.t * s.t));
    CHECK(s.yosida_norm == doctest::Approx(Operator::rotation2d().yosida(s.lambda, s.x).norm()));
  }
}

TEST_CASE("trajectory csv") {
  ContinuousConfig c = base_continuous(pt({10, 10}), pt({0, 0}));
  c.schedule = Schedule::constant(1.0);
  c.t_end = 2.0;
  const Trajectory tr = simulate_second_order(Operator::rotation2d(), c);
  std::ostringstream os;
  tr.write_csv(os);
  const std::string text = os.str();
  CHECK(text.rfind("t,x1,x2,v1,v2,lambda,yosida_norm\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == tr.size() + 1);
  CHECK(format_double(0.1) == "0.10000000000000001");
  Trajectory bad;
  Sample s;
  s.t = 1.0;
  s.x = pt({1});
  s.v = pt({1});
  bad.push(s);
  CHECK_THROWS_AS(bad.push(s), Error);
}

}
