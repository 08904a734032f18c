#include "doctest.h"
#include "oracles.hpp"

#include "ripa/error.hpp"
#include "ripa/operator.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <thread>

using namespace ripa;

namespace {

Point pt(std::initializer_list<double> v) { return make_point(v); }

bool close(const Point& a, const Point& b, double tol) { return (a - b).norm() <= tol; }

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_SUITE("operator_core") {

TEST_CASE("points reject empty and non-finite coordinates") {
  CHECK(kind_of([] { make_point({}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { make_point({1.0, std::nan("")}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { make_point({std::numeric_limits<double>::infinity()}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(make_point({1.0, 2.0}).size() == 2);
}

TEST_CASE("resolvent examples") {
  CHECK(close(Operator::zero(2).resolvent(1.0, pt({3, 4})), pt({3, 4}), 0.0));
  CHECK(close(Operator::rotation2d().resolvent(1.0, pt({1, 0})), pt({0.5, -0.5}), 1e-15));
  const Operator abs1 = Operator::prox(ProxRule::absolute_value(), 1);
  CHECK(abs1.resolvent(1.0, pt({2}))[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("yosida examples") {
  CHECK(Operator::zero(2).yosida(0.7, pt({3, 4})).norm() == 0.0);
  CHECK(close(Operator::rotation2d().yosida(1.0, pt({1, 0})), pt({0.5, 0.5}), 1e-15));
  const Operator abs1 = Operator::prox(ProxRule::absolute_value(), 1);
  CHECK(abs1.yosida(1.0, pt({2}))[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(close(yosida(Operator::rotation2d(), 1.0, pt({1, 0})), pt({0.5, 0.5}), 1e-15));
  CHECK(close(resolvent(Operator::rotation2d(), 1.0, pt({1, 0})), pt({0.5, -0.5}), 1e-15));
}

TEST_CASE("yosida view resolvent examples") {
  CHECK(close(yosida_view_resolvent(YosidaView(Operator::zero(2), 2.0), 3.0, pt({1, 1})),
              pt({1, 1}), 1e-15));
  CHECK(close(yosida_view_resolvent(YosidaView(Operator::rotation2d(), 1.0), 1.0, pt({1, 0})),
              pt({0.6, -0.2}), 1e-15));
  const Operator id = Operator::affine(Matrix::Identity(2, 2));
  CHECK(close(yosida_view_resolvent(YosidaView(id, 1.0), 1.0, pt({4, 0})), pt({8.0 / 3.0, 0}),
              1e-15));
}

TEST_CASE("view composes indices") {
  const Operator rot = Operator::rotation2d();
  const YosidaView v(rot, 0.5);
  const Point x = pt({1.5, -2.0});
  CHECK(close(v.yosida(0.25, x), rot.yosida(0.75, x), 1e-15));
  CHECK(close(v.apply(x), rot.yosida(0.5, x), 0.0));
  CHECK(kind_of([&] { YosidaView(rot, 0.0); }) == ErrorKind::NonPositiveIndex);
}

TEST_CASE("rotation matches its closed form") {
  const Operator rot = Operator::rotation2d();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-10, 10), li(std::log(1e-3), std::log(1e3));
  for (int i = 0; i < 2000; ++i) {
    const double l = std::exp(li(rng));
    const Point x = pt({c(rng), c(rng)});
    const auto [j1, j2] = oracle::rotation_resolvent(l, x[0], x[1]);
    const auto [a1, a2] = oracle::rotation_yosida(l, x[0], x[1]);
    const Point j = rot.resolvent(l, x);
    const Point a = rot.yosida(l, x);
    CHECK(std::abs(j[0] - static_cast<double>(j1)) <= 1e-13 * (1 + x.norm()));
    CHECK(std::abs(j[1] - static_cast<double>(j2)) <= 1e-13 * (1 + x.norm()));
    CHECK(std::abs(a[0] - static_cast<double>(a1)) <= 1e-12 * (1 + x.norm() / l));
    CHECK(std::abs(a[1] - static_cast<double>(a2)) <= 1e-12 * (1 + x.norm() / l));
  }
}

TEST_CASE("affine resolvent matches elimination oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> li(std::log(1e-3), std::log(1e3));
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    Matrix g(n, n), k(n, n);
    Point q(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        g(i, j) = nd(rng);
        k(i, j) = nd(rng);
      }
      q[i] = nd(rng);
    }
    const Matrix m = g.transpose() * g + (k - k.transpose());
    const Operator op = Operator::affine(m, q);
    oracle::Mat om(n, oracle::Vec(n));
    oracle::Vec oq(n);
    for (int i = 0; i < n; ++i) {
      oq[i] = q[i];
      for (int j = 0; j < n; ++j) om[i][j] = m(i, j);
    }
    for (int s = 0; s < 20; ++s) {
      const double l = std::exp(li(rng));
      Point x(n);
      oracle::Vec ox(n);
      for (int i = 0; i < n; ++i) ox[i] = x[i] = 10 * nd(rng);
      const auto ref = oracle::affine_resolvent(om, oq, l, ox);
      const Point j = op.resolvent(l, x);
      double err = 0;
      for (int i = 0; i < n; ++i) err = std::max(err, std::abs(j[i] - static_cast<double>(ref[i])));
      CHECK(err <= 1e-10 * (1 + x.norm() + l * q.norm()));
    }
  }
}

TEST_CASE("prox rules match scalar oracles") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-10, 10), li(std::log(1e-3), std::log(1e3));
  const Operator ab = Operator::prox(ProxRule::absolute_value(1.5), 1);
  const Operator bx = Operator::prox(ProxRule::box(-1.0, 2.0), 1);
  const Operator qd = Operator::prox(ProxRule::quadratic(2.0, 1.5), 1);
  for (int i = 0; i < 2000; ++i) {
    const double l = std::exp(li(rng));
    const double v = c(rng);
    const Point x = pt({v});
    CHECK(ab.resolvent(l, x)[0] ==
          doctest::Approx(static_cast<double>(oracle::prox_abs(l, 1.5, v))).epsilon(1e-12).scale(1));
    CHECK(bx.resolvent(l, x)[0] ==
          doctest::Approx(static_cast<double>(oracle::prox_box(-1.0, 2.0, v))).epsilon(1e-12).scale(1));
    CHECK(qd.resolvent(l, x)[0] ==
          doctest::Approx(static_cast<double>(oracle::prox_quadratic(l, 2.0, 1.5, v)))
              .epsilon(1e-12)
              .scale(1));
  }
}

TEST_CASE("prox rules act coordinate-wise") {
  const Operator ab = Operator::prox(ProxRule::absolute_value(1.0), 3);
  CHECK(close(ab.resolvent(1.0, pt({2, -0.5, -3})), pt({1, 0, -2}), 1e-15));
  const Operator bx = Operator::prox(ProxRule::box(-1.0, 1.0), 2);
  CHECK(close(bx.resolvent(5.0, pt({3, -0.25})), pt({1, -0.25}), 0.0));
}

TEST_CASE("errors") {
  const Operator rot = Operator::rotation2d();
  CHECK(kind_of([&] { rot.resolvent(1.0, pt({1, 2, 3})); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { rot.resolvent(0.0, pt({1, 2})); }) == ErrorKind::NonPositiveIndex);
  CHECK(kind_of([&] { rot.resolvent(-1.0, pt({1, 2})); }) == ErrorKind::NonPositiveIndex);
  CHECK(kind_of([&] { rot.yosida(std::nan(""), pt({1, 2})); }) == ErrorKind::NonPositiveIndex);
  Matrix bad(2, 2);
  bad << -1, 0, 0, 1;
  CHECK(kind_of([&] { Operator::affine(bad); }) == ErrorKind::NotMonotone);
  CHECK(kind_of([&] { Operator::affine(Matrix::Identity(2, 3)); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { Operator::prox(ProxRule::absolute_value(), 2).apply(pt({1, 0})); }) ==
        ErrorKind::SetValued);
  CHECK(kind_of([&] { Operator::prox(ProxRule::box(-1, 1), 1).apply(pt({0})); }) ==
        ErrorKind::SetValued);
  CHECK(kind_of([&] { rot.with_known_zero(pt({1, 0})); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { ProxRule::box(2.0, 1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("monotonicity check tolerates antisymmetric matrices") {
  Matrix skew(2, 2);
  skew << 0, -1, 1, 0;
  CHECK_NOTHROW(Operator::affine(skew));
  Matrix nearly(2, 2);
  nearly << -1e-11, 0, 0, 1;
  CHECK_NOTHROW(Operator::affine(nearly));
}

TEST_CASE("known zeros are fixed by the resolvent") {
  const Operator quad = Operator::prox(ProxRule::quadratic(3.0, -2.0), 2);
  REQUIRE(quad.known_zero());
  for (double l : {1e-3, 0.1, 1.0, 17.0, 1e3}) {
    CHECK(close(quad.resolvent(l, *quad.known_zero()), *quad.known_zero(), 1e-12));
  }
  Matrix m(2, 2);
  m << 2, 1, -1, 2;
  const Point q = pt({1, -3});
  const Point z = m.partialPivLu().solve(-q);
  const Operator aff = Operator::affine(m, q).with_known_zero(z);
  CHECK(aff.yosida(5.0, z).norm() <= 1e-12);
  CHECK_FALSE(Operator::affine(m, q).known_zero().has_value());
}

TEST_CASE("single-valued apply") {
  CHECK(close(Operator::rotation2d().apply(pt({1, 2})), pt({-2, 1}), 0.0));
  const Operator quad = Operator::prox(ProxRule::quadratic(2.0, 1.0), 1);
  CHECK(quad.single_valued());
  CHECK(quad.apply(pt({3}))[0] == doctest::Approx(4.0));
  CHECK_FALSE(Operator::prox(ProxRule::absolute_value(), 1).single_valued());
}

TEST_CASE("concurrent evaluation agrees with sequential evaluation") {
  Matrix m(3, 3);
  m << 2, 1, 0, -1, 3, 1, 0, -1, 1;
  const Operator op = Operator::affine(m, pt({1, 2, 3}));
  const Point x = pt({0.3, -1.2, 4.0});
  std::vector<Point> expected;
  for (int i = 0; i < 32; ++i) expected.push_back(op.resolvent(0.1 * (i + 1), x));
  std::vector<std::thread> pool;
  std::vector<int> bad(8, 0);
  for (int t = 0; t < 8; ++t) {
    pool.emplace_back([&, t] {
      for (int rep = 0; rep < 200; ++rep) {
        const int i = (rep * 7 + t) % 32;
        if ((op.resolvent(0.1 * (i + 1), x) - expected[i]).norm() > 0.0) ++bad[t];
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int b : bad) CHECK(b == 0);
}

}
