#include "shocksim/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shocksim/errors.hpp"

namespace shocksim {

StateVector::StateVector(std::vector<double> coords, NormTag tag)
    : coords_(std::move(coords)), tag_(tag) {
  if (coords_.empty()) throw InputError("state vector must be non-empty");
  for (double c : coords_)
    if (!std::isfinite(c)) throw InputError("state vector has a non-finite coordinate");
}

StateVector StateVector::zeros(std::size_t n, NormTag tag) {
  return StateVector(std::vector<double>(n, 0.0), tag);
}

static void check_same_size(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw InputError("state dimension mismatch");
}

StateVector& StateVector::operator+=(const StateVector& o) {
  check_same_size(*this, o);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += o.coords_[i];
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& o) {
  check_same_size(*this, o);
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= o.coords_[i];
  return *this;
}

StateVector& StateVector::operator*=(double a) {
  for (double& c : coords_) c *= a;
  return *this;
}

double StateVector::mean() const {
  return std::accumulate(coords_.begin(), coords_.end(), 0.0) /
         static_cast<double>(coords_.size());
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
StateVector operator*(double a, StateVector v) { return v *= a; }

namespace {

double lq_norm(std::span<const double> x, double q, double h) {
  double scale = 0.0;
  for (double c : x) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  if (q == 2.0) {
    for (double c : x) acc += (c / scale) * (c / scale);
    return scale * std::sqrt(h * acc);
  }
  for (double c : x) acc += std::pow(std::abs(c) / scale, q);
  return scale * std::pow(h * acc, 1.0 / q);
}

}  // namespace

double norm(const StateVector& v, const NormTag& tag) {
  auto x = v.coords();
  switch (tag.kind) {
    case NormTag::Kind::Abs: {
      if (x.size() == 1) return std::abs(x[0]);
      return lq_norm(x, 2.0, 1.0);
    }
    case NormTag::Kind::DiscreteLq:
      return lq_norm(x, tag.q, tag.h);
  }
  return 0.0;
}

double distance(const StateVector& a, const StateVector& b, const NormTag& tag) {
  return norm(a - b, tag);
}

double max_abs(const StateVector& v) {
  double m = 0.0;
  for (double c : v.coords()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace shocksim
