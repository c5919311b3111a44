#pragma once

#include <cstddef>
#include <vector>

#include "dwm/types.hpp"

namespace dwm {

// Uniform periodic grid on [0, 2pi)^{n-1}, one or two spatial dimensions.
struct Grid {
  int nsp = 2;      // spatial dimensions (n - 1)
  int npts = 64;    // points per dimension, even and >= 8
  int fd_order = 4; // centered stencil order, 2 or 4

  void validate() const;
  real dx() const { return 2.0 * pi() / npts; }
  std::size_t size() const {
    std::size_t p = 1;
    for (int d = 0; d < nsp; ++d) p *= static_cast<std::size_t>(npts);
    return p;
  }
  std::size_t index(int i, int j = 0) const {
    return nsp == 1 ? static_cast<std::size_t>(i)
                    : static_cast<std::size_t>(i) * npts + j;
  }
  void coords(std::size_t p, real* x) const {
    if (nsp == 1) {
      x[0] = dx() * static_cast<real>(p);
    } else {
      x[0] = dx() * static_cast<real>(p / npts);
      x[1] = dx() * static_cast<real>(p % npts);
    }
  }
  static constexpr real pi() { return 3.14159265358979323846; }
};

// d_dir applied to a field with `comps` values per point; centered antisymmetric
// stencils (order 2 or 4), so discrete summation by parts is exact on the torus.
template <typename T>
void fd_partial(const Grid& g, const T* in, T* out, int dir, int comps);

template <typename T>
std::vector<T> fd_partial(const Grid& g, const std::vector<T>& in, int dir, int comps) {
  std::vector<T> out(in.size());
  fd_partial(g, in.data(), out.data(), dir, comps);
  return out;
}

}  // namespace dwm
