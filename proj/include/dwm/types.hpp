#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace dwm {

using real = double;
using cplx = std::complex<double>;

inline constexpr int max_target_dim = 3;  // charts here are 2d; the flat chart also allows m = 3
inline constexpr int spinor_rank = 2;     // irreducible complex rank for spacetime dim 2 and 3

using Spinor = std::array<cplx, spinor_rank>;       // one spinor value
using TVec = std::array<real, max_target_dim>;      // tangent vector on the target (first m used)
using VSpinor = std::array<Spinor, max_target_dim>; // target-vector-valued spinor at a point

// 2x2 complex matrix; enough linear algebra for the Clifford/spin-connection bookkeeping.
struct Mat2 {
  std::array<cplx, 4> e{};  // row major

  static Mat2 zero() { return {}; }
  static Mat2 identity() {
    Mat2 m;
    m.e = {1.0, 0.0, 0.0, 1.0};
    return m;
  }
  cplx& operator()(int r, int c) { return e[2 * r + c]; }
  const cplx& operator()(int r, int c) const { return e[2 * r + c]; }

  Mat2 operator+(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.e[i] = e[i] + o.e[i];
    return r;
  }
  Mat2 operator-(const Mat2& o) const {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.e[i] = e[i] - o.e[i];
    return r;
  }
  Mat2 operator*(const Mat2& o) const {
    Mat2 r;
    r.e[0] = e[0] * o.e[0] + e[1] * o.e[2];
    r.e[1] = e[0] * o.e[1] + e[1] * o.e[3];
    r.e[2] = e[2] * o.e[0] + e[3] * o.e[2];
    r.e[3] = e[2] * o.e[1] + e[3] * o.e[3];
    return r;
  }
  Mat2 operator*(cplx c) const {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.e[i] = e[i] * c;
    return r;
  }
  Mat2 operator*(real c) const { return (*this) * cplx(c, 0.0); }
  Spinor operator*(const Spinor& v) const {
    return {e[0] * v[0] + e[1] * v[1], e[2] * v[0] + e[3] * v[1]};
  }
  Mat2 adjoint() const {
    Mat2 r;
    r.e[0] = std::conj(e[0]);
    r.e[1] = std::conj(e[2]);
    r.e[2] = std::conj(e[1]);
    r.e[3] = std::conj(e[3]);
    return r;
  }
  real max_abs() const {
    real m = 0.0;
    for (const auto& c : e) m = std::max(m, std::abs(c));
    return m;
  }
};

inline Mat2 operator*(cplx c, const Mat2& m) { return m * c; }
inline Mat2 operator*(real c, const Mat2& m) { return m * c; }
inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

inline Spinor operator+(const Spinor& a, const Spinor& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Spinor operator-(const Spinor& a, const Spinor& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Spinor operator*(cplx c, const Spinor& a) { return {c * a[0], c * a[1]}; }
inline Spinor operator*(real c, const Spinor& a) { return {c * a[0], c * a[1]}; }
inline Spinor& operator+=(Spinor& a, const Spinor& b) {
  a[0] += b[0];
  a[1] += b[1];
  return a;
}

// Evolution aborted because the map left the admissible chart region.
struct ChartExit : std::runtime_error {
  real t;
  explicit ChartExit(real when, const std::string& what)
      : std::runtime_error(what), t(when) {}
};

// Evolution aborted because a field stopped being finite.
struct NumericalAbort : std::runtime_error {
  real t;
  explicit NumericalAbort(real when, const std::string& what)
      : std::runtime_error(what), t(when) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dwm
