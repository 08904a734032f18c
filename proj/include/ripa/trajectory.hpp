#pragma once

#include "ripa/point.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ripa {

enum class TimeAxis { Continuous, Discrete };

/// One record of a run. For continuous runs `t` is time and `v` the velocity;
/// for discrete runs `t` is the iteration index k and `v` is x_k - x_{k-1}.
struct Sample {
  double t = 0.0;
  Point x;
  Point v;
  double lambda = 0.0;
  double yosida_norm = 0.0;
};

struct RunMetadata {
  std::string config_hash;
  double wall_seconds = 0.0;
  bool diverged = false;
  /// Set when the run stopped early because the state left the finite range.
  bool truncated = false;
};

class Trajectory {
 public:
  explicit Trajectory(TimeAxis axis = TimeAxis::Continuous) : axis_(axis) {}

  TimeAxis axis() const { return axis_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& front() const { return samples_.front(); }
  const Sample& back() const { return samples_.back(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  /// Appends a record; `t` must exceed the previous one.
  void push(Sample s);
  void reserve(std::size_t n) { samples_.reserve(n); }

  RunMetadata& metadata() { return meta_; }
  const RunMetadata& metadata() const { return meta_; }

  /// Continuous header: t,x1..xn,v1..vn,lambda,yosida_norm.
  /// Discrete header:   k,x1..xn,dx_norm,k_dx_norm,lambda_k,yosida_norm.
  void write_csv(std::ostream& os) const;

 private:
  TimeAxis axis_;
  std::vector<Sample> samples_;
  RunMetadata meta_;
};

/// 17 significant digits, locale independent.
std::string format_double(double v);

}  // namespace ripa
