#include "dwm/grid.hpp"

namespace dwm {

void Grid::validate() const {
  if (nsp != 1 && nsp != 2) throw ConfigError("grid: nsp must be 1 or 2");
  if (npts < 8 || npts % 2 != 0) throw ConfigError("grid: npts must be even and >= 8");
  if (fd_order != 2 && fd_order != 4) throw ConfigError("grid: fd_order must be 2 or 4");
}

namespace {

// periodic shift of a single lattice index
inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace

template <typename T>
void fd_partial(const Grid& g, const T* in, T* out, int dir, int comps) {
  const int np = g.npts;
  const real h = g.dx();
  const real c1 = (g.fd_order == 2) ? 1.0 / (2.0 * h) : 8.0 / (12.0 * h);
  const real c2 = (g.fd_order == 2) ? 0.0 : -1.0 / (12.0 * h);
  const std::size_t pc = static_cast<std::size_t>(comps);

  auto stencil = [&](std::size_t pp1, std::size_t pm1, std::size_t pp2, std::size_t pm2,
                     std::size_t pout) {
    const T* up1 = in + pp1 * pc;
    const T* um1 = in + pm1 * pc;
    T* o = out + pout * pc;
    if (c2 == 0.0) {
      for (std::size_t c = 0; c < pc; ++c) o[c] = c1 * (up1[c] - um1[c]);
    } else {
      const T* up2 = in + pp2 * pc;
      const T* um2 = in + pm2 * pc;
      for (std::size_t c = 0; c < pc; ++c)
        o[c] = c1 * (up1[c] - um1[c]) + c2 * (up2[c] - um2[c]);
    }
  };

  if (g.nsp == 1) {
    for (int i = 0; i < np; ++i)
      stencil(wrap(i + 1, np), wrap(i - 1, np), wrap(i + 2, np), wrap(i - 2, np), i);
    return;
  }
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < np; ++j) {
      const std::size_t p = g.index(i, j);
      if (dir == 0)
        stencil(g.index(wrap(i + 1, np), j), g.index(wrap(i - 1, np), j),
                g.index(wrap(i + 2, np), j), g.index(wrap(i - 2, np), j), p);
      else
        stencil(g.index(i, wrap(j + 1, np)), g.index(i, wrap(j - 1, np)),
                g.index(i, wrap(j + 2, np)), g.index(i, wrap(j - 2, np)), p);
    }
  }
}

template void fd_partial<real>(const Grid&, const real*, real*, int, int);
template void fd_partial<cplx>(const Grid&, const cplx*, cplx*, int, int);

}  // namespace dwm
