#include "ripa/trajectory.hpp"

#include "ripa/error.hpp"

#include <cstdio>
#include <ostream>

namespace ripa {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Trajectory::push(Sample s) {
  if (!samples_.empty()) {
    if (!(s.t > samples_.back().t)) {
      throw Error(ErrorKind::InvalidArgument, "trajectory samples must be strictly increasing");
    }
    if (s.x.size() != samples_.back().x.size()) {
      throw Error(ErrorKind::DimensionMismatch, "trajectory samples differ in dimension");
    }
  }
  samples_.push_back(std::move(s));
}

void Trajectory::write_csv(std::ostream& os) const {
  const Eigen::Index n = samples_.empty() ? 0 : samples_.front().x.size();
  const bool discrete = axis_ == TimeAxis::Discrete;
  os << (discrete ? "k" : "t");
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  if (discrete) {
    os << ",dx_norm,k_dx_norm,lambda_k,yosida_norm\n";
  } else {
    for (Eigen::Index i = 1; i <= n; ++i) os << ",v" << i;
    os << ",lambda,yosida_norm\n";
  }
  for (const Sample& s : samples_) {
    os << format_double(s.t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(s.x[i]);
    if (discrete) {
      const double dx = s.v.norm();
      os << ',' << format_double(dx) << ',' << format_double(s.t * dx);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(s.v[i]);
    }
    os << ',' << format_double(s.lambda) << ',' << format_double(s.yosida_norm) << '\n';
  }
}

}  // namespace ripa
