#include "ripa/audit.hpp"

#include "ripa/error.hpp"
#include "ripa/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ripa {

const char* to_string(Property p) {
  switch (p) {
    case Property::ResolventEquation: return "resolvent_equation";
    case Property::FirmNonexpansive: return "firm_nonexpansive";
    case Property::Cocoercive: return "cocoercive";
    case Property::Lipschitz: return "lipschitz";
    case Property::GraphConsistency: return "graph_consistency";
    case Property::ZeroSetInvariance: return "zero_set_invariance";
    case Property::VariationBound: return "variation_bound";
  }
  return "unknown";
}

const std::vector<Property>& all_properties() {
  static const std::vector<Property> props = {
      Property::ResolventEquation, Property::FirmNonexpansive,  Property::Cocoercive,
      Property::Lipschitz,         Property::GraphConsistency, Property::ZeroSetInvariance,
      Property::VariationBound};
  return props;
}

namespace {

class Sampler {
 public:
  Sampler(std::uint64_t seed, Eigen::Index dim)
      : rng_(seed), coord_(-10.0, 10.0), log_index_(std::log(1e-3), std::log(1e3)), dim_(dim) {}

  double index() { return std::exp(log_index_(rng_)); }
  Point point() {
    Point x(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) x[i] = coord_(rng_);
    return x;
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> coord_;
  std::uniform_real_distribution<double> log_index_;
  Eigen::Index dim_;
};

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// J_{mu A_lambda}(x) computed from A_lambda itself, without the shortcut
// through J_{(lambda+mu)A}. Affine: A_lambda(p) = M R p + R q with
// R = (I + lambda M)^{-1}, solved in extended precision.
Point direct_view_resolvent(const Operator& op, double lambda, double mu, const Point& x) {
  const Eigen::Index n = op.dimension();
  if (op.kind() == OperatorKind::ProxOracle) {
    const ProxRule& r = op.rule();
    Point p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double xi = x[i];
      double v = 0.0;
      switch (r.kind) {
        case ProxRuleKind::AbsoluteValue: {
          // p + mu clamp(p / lambda, -w, w) = x
          const double inner = xi * lambda / (lambda + mu);
          v = std::abs(inner) <= r.weight * lambda ? inner
                                                   : xi - mu * r.weight * (xi > 0 ? 1.0 : -1.0);
          break;
        }
        case ProxRuleKind::BoxIndicator:
          // p + (mu / lambda)(p - clamp(p)) = x
          if (xi > r.upper) {
            v = (lambda * xi + mu * r.upper) / (lambda + mu);
          } else if (xi < r.lower) {
            v = (lambda * xi + mu * r.lower) / (lambda + mu);
          } else {
            v = xi;
          }
          break;
        case ProxRuleKind::Quadratic: {
          // A_lambda(p) = a (p - c) / (1 + lambda a)
          const double a = r.curvature;
          v = (xi * (1.0 + lambda * a) + mu * a * r.center) / (1.0 + lambda * a + mu * a);
          break;
        }
      }
      p[i] = v;
    }
    return p;
  }
  const MatrixL m = op.matrix().cast<long double>();
  const VectorL q = op.offset().cast<long double>();
  const MatrixL eye = MatrixL::Identity(n, n);
  const MatrixL r = (eye + static_cast<long double>(lambda) * m).partialPivLu().inverse();
  const MatrixL l = m * r;
  const VectorL b = r * q;
  const long double mul = mu;
  const VectorL rhs = x.cast<long double>() - mul * b;
  const VectorL p = (eye + mul * l).partialPivLu().solve(rhs);
  return p.cast<double>();
}

double tolerance_for(Property p) {
  switch (p) {
    case Property::ResolventEquation:
    case Property::VariationBound:
      return 1e-10;
    default:
      return 1e-12;
  }
}

double excess(const Operator& op, Property p, Sampler& rng) {
  switch (p) {
    case Property::ResolventEquation: {
      const double lambda = rng.index();
      const double mu = rng.index();
      const Point x = rng.point();
      const YosidaView view(op, lambda);
      const Point r = yosida_view_resolvent(view, mu, x);
      return (r - direct_view_resolvent(op, lambda, mu, x)).norm() / (1.0 + x.norm());
    }
    case Property::FirmNonexpansive: {
      const double lambda = rng.index();
      const Point x = rng.point();
      const Point y = rng.point();
      const Point dj = op.resolvent(lambda, x) - op.resolvent(lambda, y);
      const Point dx = x - y;
      return dj.squaredNorm() - dj.dot(dx);
    }
    case Property::Cocoercive: {
      const double lambda = rng.index();
      const Point x = rng.point();
      const Point y = rng.point();
      const Point da = op.yosida(lambda, x) - op.yosida(lambda, y);
      const Point dx = x - y;
      return (lambda * da.squaredNorm() - da.dot(dx)) / std::max(1.0, dx.squaredNorm() / lambda);
    }
    case Property::Lipschitz: {
      const double lambda = rng.index();
      const Point x = rng.point();
      const Point y = rng.point();
      const Point da = op.yosida(lambda, x) - op.yosida(lambda, y);
      const double dx = (x - y).norm();
      return lambda * da.norm() / dx - 1.0;
    }
    case Property::GraphConsistency: {
      const double lambda = rng.index();
      const Point x = rng.point();
      const Point direct = op.matrix() * op.resolvent(lambda, x) + op.offset();
      return (op.yosida(lambda, x) - direct).norm() / std::max(1.0, x.norm() / lambda);
    }
    case Property::ZeroSetInvariance: {
      const double lambda = rng.index();
      const Point& z = *op.known_zero();
      return op.yosida(lambda, z).norm();
    }
    case Property::VariationBound: {
      const double g = rng.index();
      const double d = rng.index();
      const Point x = rng.point();
      const Point y = rng.point();
      const Point& z = *op.known_zero();
      const double lhs = (g * op.yosida(g, x) - d * op.yosida(d, y)).norm();
      return lhs - 2.0 * (x - y).norm() - 2.0 * (x - z).norm() * std::abs(g - d) / g;
    }
  }
  return 0.0;
}

bool applies(const Operator& op, Property p) {
  switch (p) {
    case Property::GraphConsistency:
      return op.kind() == OperatorKind::AffineLinear || op.kind() == OperatorKind::Rotation2D ||
             op.kind() == OperatorKind::Zero;
    case Property::ZeroSetInvariance:
    case Property::VariationBound:
      return op.known_zero().has_value();
    default:
      return true;
  }
}

}  // namespace

PropertyResult audit_property(const Operator& op, Property property, std::size_t samples,
                              std::uint64_t seed) {
  PropertyResult r;
  r.property = property;
  r.tolerance = tolerance_for(property);
  r.applicable = applies(op, property);
  if (!r.applicable) return r;
  Sampler rng(seed, op.dimension());
  r.worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const double e = excess(op, property, rng);
    r.worst = std::isnan(e) ? std::numeric_limits<double>::infinity() : std::max(r.worst, e);
    ++r.samples;
  }
  if (r.samples == 0) r.worst = 0.0;
  return r;
}

std::vector<PropertyResult> audit_operator(const Operator& op, std::size_t samples,
                                           std::uint64_t seed) {
  std::vector<PropertyResult> out;
  std::uint64_t salt = 0;
  for (Property p : all_properties()) out.push_back(audit_property(op, p, samples, seed + salt++));
  return out;
}

std::vector<CatalogEntry> operator_catalog(std::uint64_t seed) {
  std::vector<CatalogEntry> out;
  out.push_back({"zero", Operator::zero(3)});
  out.push_back({"identity", Operator::affine(Matrix::Identity(3, 3))});
  {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    out.push_back({"diag_1_0", Operator::affine(d)});
  }
  {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Eigen::Index n = 4;
    Matrix g(n, n), k(n, n);
    Point q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        g(i, j) = nd(rng);
        k(i, j) = nd(rng);
      }
      q[i] = nd(rng);
    }
    const Matrix m = g.transpose() * g + 0.1 * Matrix::Identity(n, n) + (k - k.transpose());
    const Point z = m.partialPivLu().solve(-q);
    out.push_back({"random_affine", Operator::affine(m, q).with_known_zero(z)});
  }
  out.push_back({"rotation2d", Operator::rotation2d()});
  out.push_back({"prox_abs", Operator::prox(ProxRule::absolute_value(1.5), 3)});
  out.push_back({"prox_box", Operator::prox(ProxRule::box(-1.0, 2.0), 3)});
  out.push_back({"prox_quadratic", Operator::prox(ProxRule::quadratic(2.0, 1.5), 3)});
  {
    const Point c1 = Point::Constant(1, 4.0);
    const Point c2 = Point::Constant(1, 2.0);
    const Matrix one = Matrix::Identity(1, 1);
    out.push_back({"saddle", build_saddle_operator(QuadraticTerm::centered(1.0, c1),
                                                   QuadraticTerm::centered(1.0, c2), one, one)});
  }
  return out;
}

}  // namespace ripa
