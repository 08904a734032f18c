#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <span>

namespace ripa {

/// A point of the finite-dimensional Hilbert space R^n.
using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Builds a point and rejects empty or non-finite input.
Point make_point(std::span<const double> coords);
Point make_point(std::initializer_list<double> coords);

bool all_finite(const Point& x);

/// Throws DimensionMismatch unless `x` has `dim` coordinates.
void require_dimension(const Point& x, Eigen::Index dim, const char* what);

}  // namespace ripa
