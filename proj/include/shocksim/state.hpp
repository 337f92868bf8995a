#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shocksim {

// Which norm is canonical on a state space.
struct NormTag {
  enum class Kind { Abs, DiscreteLq };
  Kind kind = Kind::Abs;
  double q = 2.0;  // exponent, DiscreteLq only
  double h = 1.0;  // cell volume, DiscreteLq only

  static NormTag abs() { return {}; }
  static NormTag lq(double q, double h) { return {Kind::DiscreteLq, q, h}; }

  bool operator==(const NormTag&) const = default;
};

// A point of the state space: finite coordinates plus the canonical norm.
class StateVector {
 public:
  StateVector() = default;
  StateVector(std::vector<double> coords, NormTag tag);
  static StateVector scalar(double v) { return StateVector({v}, NormTag::abs()); }
  static StateVector zeros(std::size_t n, NormTag tag);

  std::size_t size() const { return coords_.size(); }
  const NormTag& tag() const { return tag_; }
  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  double value() const { return coords_.front(); }

  StateVector& operator+=(const StateVector& o);
  StateVector& operator-=(const StateVector& o);
  StateVector& operator*=(double a);

  double mean() const;
  bool operator==(const StateVector& o) const { return coords_ == o.coords_; }

 private:
  std::vector<double> coords_;
  NormTag tag_;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator-(StateVector a, const StateVector& b);
StateVector operator*(double a, StateVector v);

// Norm of v measured in `tag` (not necessarily v's own tag).
double norm(const StateVector& v, const NormTag& tag);
inline double norm(const StateVector& v) { return norm(v, v.tag()); }
double distance(const StateVector& a, const StateVector& b, const NormTag& tag);
inline double distance(const StateVector& a, const StateVector& b) {
  return distance(a, b, a.tag());
}
double max_abs(const StateVector& v);

}  // namespace shocksim
