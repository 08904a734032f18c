#include "ripa/saddle.hpp"

#include "ripa/error.hpp"

#include <sstream>

namespace ripa {

QuadraticTerm QuadraticTerm::centered(double a, const Point& center) {
  const Eigen::Index n = center.size();
  return {a * Matrix::Identity(n, n), -a * center};
}

namespace {

const QuadraticTerm& require_quadratic(const SaddleTerm& term, const char* which) {
  if (const auto* q = std::get_if<QuadraticTerm>(&term)) {
    if (q->hessian.rows() != q->hessian.cols() || q->hessian.rows() != q->linear.size() ||
        q->linear.size() < 1) {
      throw Error(ErrorKind::DimensionMismatch,
                  std::string(which) + ": hessian and linear term disagree in size");
    }
    const Matrix sym = 0.5 * (q->hessian + q->hessian.transpose());
    if ((sym - q->hessian).norm() > 1e-12 * std::max(1.0, q->hessian.norm())) {
      throw Error(ErrorKind::InvalidArgument, std::string(which) + ": hessian must be symmetric");
    }
    const double smallest =
        Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (smallest < -1e-10) {
      throw Error(ErrorKind::NotMonotone, std::string(which) + ": quadratic term is not convex");
    }
    return *q;
  }
  throw Error(ErrorKind::NoClosedForm,
              std::string(which) +
                  ": prox data gives a coupled resolvent without closed form; use quadratic data");
}

}  // namespace

Operator build_saddle_operator(const SaddleTerm& f, const SaddleTerm& g, const Matrix& a,
                               const Matrix& b) {
  const QuadraticTerm& fq = require_quadratic(f, "f");
  const QuadraticTerm& gq = require_quadratic(g, "g");
  const Eigen::Index nx = fq.linear.size();
  const Eigen::Index ny = gq.linear.size();
  const Eigen::Index nz = a.rows();
  if (a.cols() != nx || b.cols() != ny || b.rows() != nz || nz < 1) {
    std::ostringstream os;
    os << "coupling maps must be A: " << nx << " -> Z and B: " << ny
       << " -> Z with a common Z; got A " << a.rows() << "x" << a.cols() << ", B " << b.rows()
       << "x" << b.cols();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }

  const Eigen::Index n = nx + ny + nz;
  Matrix m = Matrix::Zero(n, n);
  m.block(0, 0, nx, nx) = fq.hessian;
  m.block(0, nx + ny, nx, nz) = a.transpose();
  m.block(nx, nx, ny, ny) = gq.hessian;
  m.block(nx, nx + ny, ny, nz) = -b.transpose();
  m.block(nx + ny, 0, nz, nx) = -a;
  m.block(nx + ny, nx, nz, ny) = b;

  Point q = Point::Zero(n);
  q.head(nx) = fq.linear;
  q.segment(nx, ny) = gq.linear;

  Operator op = Operator::affine(m, q);

  // Any solution of M u = -q is a primal-dual pair.
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  const Point u = cod.solve(-q);
  if (u.allFinite() && (m * u + q).norm() <= 1e-10 * std::max(1.0, q.norm())) {
    try {
      return op.with_known_zero(u);
    } catch (const Error&) {
      // Ill-conditioned KKT system: leave the zero uncertified.
    }
  }
  return op;
}

double kkt_residual(const Operator& op, const Point& u) { return op.apply(u).norm(); }

}  // namespace ripa
