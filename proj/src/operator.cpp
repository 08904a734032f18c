#include "ripa/operator.hpp"

#include "ripa/error.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <vector>

namespace ripa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::NonPositiveIndex: return "nonpositive index";
    case ErrorKind::SingularSystem: return "singular linear system";
    case ErrorKind::NoClosedForm: return "no closed-form resolvent";
    case ErrorKind::NotMonotone: return "operator is not monotone";
    case ErrorKind::SetValued: return "operator is set-valued";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::StepUnderflow: return "step-size underflow";
  }
  return "unknown error";
}

Point make_point(std::span<const double> coords) {
  if (coords.empty()) {
    throw Error(ErrorKind::InvalidArgument, "point must have at least one coordinate");
  }
  Point x(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw Error(ErrorKind::InvalidArgument, "point coordinates must be finite");
    }
    x[static_cast<Eigen::Index>(i)] = coords[i];
  }
  return x;
}

Point make_point(std::initializer_list<double> coords) {
  return make_point(std::span<const double>(coords.begin(), coords.size()));
}

bool all_finite(const Point& x) { return x.allFinite(); }

void require_dimension(const Point& x, Eigen::Index dim, const char* what) {
  if (x.size() != dim) {
    std::ostringstream os;
    os << what << ": expected dimension " << dim << ", got " << x.size();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

namespace {

void require_positive_index(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::NonPositiveIndex, "resolvent index must be positive and finite");
  }
}

constexpr double kMonotonicityTol = 1e-10;
constexpr double kKnownZeroTol = 1e-12;
constexpr std::size_t kMemoSize = 8;

}  // namespace

// ---------------------------------------------------------------------------
// ProxRule

ProxRule ProxRule::absolute_value(double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorKind::InvalidArgument, "absolute value weight must be nonnegative");
  }
  ProxRule r;
  r.kind = ProxRuleKind::AbsoluteValue;
  r.weight = weight;
  return r;
}

ProxRule ProxRule::box(double lower, double upper) {
  if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw Error(ErrorKind::InvalidArgument, "box bounds must satisfy lower <= upper");
  }
  ProxRule r;
  r.kind = ProxRuleKind::BoxIndicator;
  r.lower = lower;
  r.upper = upper;
  return r;
}

ProxRule ProxRule::quadratic(double curvature, double center) {
  if (!(curvature >= 0.0) || !std::isfinite(curvature) || !std::isfinite(center)) {
    throw Error(ErrorKind::InvalidArgument, "quadratic curvature must be nonnegative");
  }
  ProxRule r;
  r.kind = ProxRuleKind::Quadratic;
  r.curvature = curvature;
  r.center = center;
  return r;
}

double ProxRule::resolvent(double lambda, double v) const {
  switch (kind) {
    case ProxRuleKind::AbsoluteValue: {
      const double thr = lambda * weight;
      if (v > thr) return v - thr;
      if (v < -thr) return v + thr;
      return 0.0;
    }
    case ProxRuleKind::BoxIndicator:
      return std::clamp(v, lower, upper);
    case ProxRuleKind::Quadratic:
      return (v + lambda * curvature * center) / (1.0 + lambda * curvature);
  }
  throw Error(ErrorKind::NoClosedForm, "unknown prox rule");
}

std::string ProxRule::name() const {
  switch (kind) {
    case ProxRuleKind::AbsoluteValue: return "abs";
    case ProxRuleKind::BoxIndicator: return "box";
    case ProxRuleKind::Quadratic: return "quadratic";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Operator

struct Operator::Impl {
  OperatorKind kind;
  Eigen::Index dim;
  Matrix m;   // AffineLinear / Rotation2D
  Point q;    // AffineLinear
  ProxRule rule;
  std::optional<Point> known_zero;

  // Factorizations of I + lambda M keyed by lambda, most recent first.
  using Lu = Eigen::PartialPivLU<Matrix>;
  mutable std::mutex memo_mutex;
  mutable std::vector<std::pair<double, std::shared_ptr<const Lu>>> memo;

  Impl(OperatorKind k, Eigen::Index n) : kind(k), dim(n) {}
  Impl(const Impl& other)
      : kind(other.kind),
        dim(other.dim),
        m(other.m),
        q(other.q),
        rule(other.rule),
        known_zero(other.known_zero) {}

  std::shared_ptr<const Lu> factor(double lambda) const {
    {
      std::lock_guard lock(memo_mutex);
      for (const auto& [key, lu] : memo) {
        if (key == lambda) return lu;
      }
    }
    Matrix shifted = Matrix::Identity(dim, dim) + lambda * m;
    auto lu = std::make_shared<const Lu>(shifted);
    if (!(lu->rcond() > 1e-14)) {
      throw Error(ErrorKind::SingularSystem,
                  "I + lambda M is singular; the affine operator is not monotone");
    }
    std::lock_guard lock(memo_mutex);
    memo.insert(memo.begin(), {lambda, lu});
    if (memo.size() > kMemoSize) memo.pop_back();
    return lu;
  }
};

Operator::Operator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Operator Operator::zero(Eigen::Index dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  auto impl = std::make_shared<Impl>(OperatorKind::Zero, dim);
  impl->m = Matrix::Zero(dim, dim);
  impl->q = Point::Zero(dim);
  impl->known_zero = Point::Zero(dim);
  return Operator(std::move(impl));
}

Operator Operator::affine(Matrix m, Point offset) {
  const Eigen::Index n = m.rows();
  if (n < 1 || m.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "affine operator needs a square matrix");
  }
  require_dimension(offset, n, "affine offset");
  if (!m.allFinite() || !offset.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "affine operator data must be finite");
  }
  const Matrix sym = m + m.transpose();
  const double smallest = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .minCoeff();
  if (smallest < -kMonotonicityTol) {
    std::ostringstream os;
    os << "symmetric part M + M^T has eigenvalue " << smallest << " < 0";
    throw Error(ErrorKind::NotMonotone, os.str());
  }
  auto impl = std::make_shared<Impl>(OperatorKind::AffineLinear, n);
  impl->m = std::move(m);
  impl->q = std::move(offset);
  if (impl->q.isZero(0.0)) impl->known_zero = Point::Zero(n);
  return Operator(std::move(impl));
}

Operator Operator::affine(Matrix m) {
  const Eigen::Index n = m.rows();
  return affine(std::move(m), Point::Zero(n));
}

Operator Operator::rotation2d() {
  auto impl = std::make_shared<Impl>(OperatorKind::Rotation2D, 2);
  impl->m.resize(2, 2);
  impl->m << 0.0, -1.0, 1.0, 0.0;
  impl->q = Point::Zero(2);
  impl->known_zero = Point::Zero(2);
  return Operator(std::move(impl));
}

Operator Operator::prox(ProxRule rule, Eigen::Index dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  auto impl = std::make_shared<Impl>(OperatorKind::ProxOracle, dim);
  impl->rule = rule;
  switch (rule.kind) {
    case ProxRuleKind::AbsoluteValue:
      impl->known_zero = Point::Zero(dim);
      break;
    case ProxRuleKind::BoxIndicator:
      impl->known_zero = Point::Constant(dim, 0.5 * (rule.lower + rule.upper));
      break;
    case ProxRuleKind::Quadratic:
      // Every point is a zero when the curvature vanishes; the center is one.
      impl->known_zero = Point::Constant(dim, rule.center);
      break;
  }
  return Operator(std::move(impl));
}

Operator Operator::with_known_zero(Point z) const {
  require_dimension(z, dimension(), "known zero");
  if (!z.allFinite()) throw Error(ErrorKind::InvalidArgument, "known zero must be finite");
  for (double lambda : {1e-3, 1.0, 1e3}) {
    const Point jz = resolvent(lambda, z);
    if ((jz - z).norm() > kKnownZeroTol * std::max(1.0, z.norm())) {
      throw Error(ErrorKind::InvalidArgument, "known zero is not fixed by the resolvent");
    }
  }
  auto impl = std::make_shared<Impl>(*impl_);
  impl->known_zero = std::move(z);
  return Operator(std::move(impl));
}

OperatorKind Operator::kind() const { return impl_->kind; }
Eigen::Index Operator::dimension() const { return impl_->dim; }
const std::optional<Point>& Operator::known_zero() const { return impl_->known_zero; }

Matrix Operator::matrix() const {
  if (impl_->kind == OperatorKind::ProxOracle) {
    throw Error(ErrorKind::InvalidArgument, "prox operators have no matrix");
  }
  return impl_->m;
}

Point Operator::offset() const {
  if (impl_->kind == OperatorKind::ProxOracle) {
    throw Error(ErrorKind::InvalidArgument, "prox operators have no offset");
  }
  return impl_->q;
}

const ProxRule& Operator::rule() const { return impl_->rule; }

Point Operator::resolvent(double lambda, const Point& x) const {
  require_positive_index(lambda);
  require_dimension(x, impl_->dim, "resolvent argument");
  const Impl& op = *impl_;
  Point out;
  switch (op.kind) {
    case OperatorKind::Zero:
      out = x;
      break;
    case OperatorKind::Rotation2D: {
      // (I + lambda R)^{-1} = (1 / (1 + lambda^2)) [[1, lambda], [-lambda, 1]]
      const double d = 1.0 + lambda * lambda;
      out.resize(2);
      out[0] = (x[0] + lambda * x[1]) / d;
      out[1] = (x[1] - lambda * x[0]) / d;
      break;
    }
    case OperatorKind::AffineLinear:
      out = op.factor(lambda)->solve(x - lambda * op.q);
      break;
    case OperatorKind::ProxOracle:
      out.resize(op.dim);
      for (Eigen::Index i = 0; i < op.dim; ++i) out[i] = op.rule.resolvent(lambda, x[i]);
      break;
  }
  if (!out.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "resolvent produced a non-finite value");
  }
  return out;
}

Point Operator::yosida(double lambda, const Point& x) const {
  return (x - resolvent(lambda, x)) / lambda;
}

bool Operator::single_valued() const {
  if (impl_->kind != OperatorKind::ProxOracle) return true;
  return impl_->rule.kind == ProxRuleKind::Quadratic;
}

Point Operator::apply(const Point& x) const {
  require_dimension(x, impl_->dim, "operator argument");
  const Impl& op = *impl_;
  switch (op.kind) {
    case OperatorKind::Zero:
      return Point::Zero(op.dim);
    case OperatorKind::Rotation2D:
    case OperatorKind::AffineLinear:
      return op.m * x + op.q;
    case OperatorKind::ProxOracle:
      if (op.rule.kind != ProxRuleKind::Quadratic) {
        throw Error(ErrorKind::SetValued,
                    "raw evaluation requested on set-valued prox rule '" + op.rule.name() + "'");
      }
      return (op.rule.curvature * (x.array() - op.rule.center)).matrix();
  }
  throw Error(ErrorKind::InvalidArgument, "unknown operator kind");
}

std::string Operator::describe() const {
  switch (impl_->kind) {
    case OperatorKind::Zero: return "zero(" + std::to_string(impl_->dim) + ")";
    case OperatorKind::Rotation2D: return "rotation2d";
    case OperatorKind::AffineLinear: return "affine(" + std::to_string(impl_->dim) + ")";
    case OperatorKind::ProxOracle:
      return "prox:" + impl_->rule.name() + "(" + std::to_string(impl_->dim) + ")";
  }
  return "unknown";
}

Point resolvent(const Operator& op, double lambda, const Point& x) {
  return op.resolvent(lambda, x);
}

Point yosida(const Operator& op, double lambda, const Point& x) { return op.yosida(lambda, x); }

// ---------------------------------------------------------------------------
// YosidaView

YosidaView::YosidaView(Operator base, double lambda) : base_(std::move(base)), lambda_(lambda) {
  require_positive_index(lambda);
}

Point YosidaView::resolvent(double mu, const Point& x) const {
  require_positive_index(mu);
  const double total = lambda_ + mu;
  return (lambda_ / total) * x + (mu / total) * base_.resolvent(total, x);
}

Point YosidaView::yosida(double mu, const Point& x) const {
  require_positive_index(mu);
  return base_.yosida(lambda_ + mu, x);
}

Point YosidaView::apply(const Point& x) const { return base_.yosida(lambda_, x); }

Point yosida_view_resolvent(const YosidaView& view, double mu, const Point& x) {
  return view.resolvent(mu, x);
}

}  // namespace ripa
