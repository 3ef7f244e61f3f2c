#pragma once

// One-particle spaces: step functions on a uniform time grid with values in
// an n-dimensional internal space, together with the shift isometries that
// generate all the flows in this library.

#include <complex>
#include <stdexcept>
#include <Eigen/Dense>

namespace fockflow {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

/// Uniform grid on [0, m*dt) with n internal directions per cell.
/// The one-particle dimension is m*n; coordinate (cell c, direction j)
/// has flat index c*n + j.
struct Grid {
  int cells = 1;          // m
  double dt = 1.0;        // cell width in seconds
  int internal_dim = 1;   // n

  Grid() = default;
  Grid(int m, double width, int n) : cells(m), dt(width), internal_dim(n) {
    if (m < 0 || width <= 0.0 || n < 1)
      throw std::invalid_argument("Grid: need cells >= 0, dt > 0, internal_dim >= 1");
  }

  int dim() const { return cells * internal_dim; }
  int flat(int cell, int dir) const { return cell * internal_dim + dir; }
  double horizon() const { return cells * dt; }

  bool operator==(const Grid& o) const {
    return cells == o.cells && dt == o.dt && internal_dim == o.internal_dim;
  }
};

/// Step function on a grid. Inner products carry the cell width, so that
/// indicator functions reproduce interval lengths. The real flag marks
/// vectors known to lie in the real subspace; field-operator relations are
/// only valid for those.
struct GridFn {
  Grid grid;
  VectorXc coeffs;     // length grid.dim(), value on (cell, direction)
  bool real = false;

  GridFn() = default;
  explicit GridFn(const Grid& g) : grid(g), coeffs(VectorXc::Zero(g.dim())), real(true) {}
  GridFn(const Grid& g, VectorXc c, bool is_real = false)
      : grid(g), coeffs(std::move(c)), real(is_real) {
    if (coeffs.size() != g.dim())
      throw std::invalid_argument("GridFn: coefficient length does not match grid");
  }

  Complex operator()(int cell, int dir) const { return coeffs[grid.flat(cell, dir)]; }
};

/// <f,g> = dt * sum conj(f) g  (the L^2 inner product of step functions).
inline Complex inner(const GridFn& f, const GridFn& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("inner: grid mismatch");
  return f.grid.dt * f.coeffs.dot(g.coeffs);
}

inline double norm_sq(const GridFn& f) { return std::real(inner(f, f)); }

inline GridFn operator+(const GridFn& f, const GridFn& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("GridFn+: grid mismatch");
  return GridFn(f.grid, f.coeffs + g.coeffs, f.real && g.real);
}

inline GridFn operator*(Complex a, const GridFn& f) {
  return GridFn(f.grid, a * f.coeffs, f.real && a.imag() == 0.0);
}

/// 1_{[0, k*dt)} tensor e_j: the indicator test vector. Squared norm k*dt.
inline GridFn indicator(const Grid& g, int k, int dir) {
  if (k < 0 || k > g.cells) throw std::domain_error("indicator: cell count out of range");
  if (dir < 0 || dir >= g.internal_dim) throw std::domain_error("indicator: direction out of range");
  GridFn f(g);
  for (int c = 0; c < k; ++c) f.coeffs[g.flat(c, dir)] = 1.0;
  return f;
}

/// Basis step function supported on a single cell, unit value.
inline GridFn cell_fn(const Grid& g, int cell, int dir) {
  if (cell < 0 || cell >= g.cells) throw std::domain_error("cell_fn: cell out of range");
  if (dir < 0 || dir >= g.internal_dim) throw std::domain_error("cell_fn: direction out of range");
  GridFn f(g);
  f.coeffs[g.flat(cell, dir)] = 1.0;
  return f;
}

/// Isometric embedding of a grid with fewer cells into a larger one,
/// moving supports k cells to the right. Composition adds offsets.
struct ShiftMap {
  Grid source;
  Grid target;
  int offset = 0;

  ShiftMap(const Grid& src, const Grid& tgt, int k) : source(src), target(tgt), offset(k) {
    if (k < 0) throw std::invalid_argument("ShiftMap: negative offset");
    if (src.internal_dim != tgt.internal_dim || src.dt != tgt.dt)
      throw std::invalid_argument("ShiftMap: incompatible grids");
    if (src.cells + k > tgt.cells)
      throw std::invalid_argument("ShiftMap: source does not fit in target after shift");
  }

  GridFn apply(const GridFn& f) const {
    if (!(f.grid == source)) throw std::invalid_argument("ShiftMap: function not on source grid");
    GridFn out(target);
    const int n = source.internal_dim;
    for (int c = 0; c < source.cells; ++c)
      for (int j = 0; j < n; ++j)
        out.coeffs[target.flat(c + offset, j)] = f.coeffs[source.flat(c, j)];
    out.real = f.real;
    return out;
  }
};

/// Shift offset k such that the target grid equals the source grid with k
/// extra cells in front of the support.
inline ShiftMap shift_embedding(const Grid& small, int k) {
  Grid big(small.cells + k, small.dt, small.internal_dim);
  return ShiftMap(small, big, k);
}

/// In-place shift on a fixed grid. Throws if any support would be pushed
/// beyond the last cell.
inline GridFn shift(const GridFn& f, int k) {
  if (k < 0) throw std::invalid_argument("shift: negative offset");
  const Grid& g = f.grid;
  const int n = g.internal_dim;
  for (int c = g.cells - k; c < g.cells; ++c)
    if (c >= 0)
      for (int j = 0; j < n; ++j)
        if (f.coeffs[g.flat(c, j)] != 0.0)
          throw std::domain_error("shift: support pushed beyond the grid");
  GridFn out(g);
  for (int c = g.cells - 1 - k; c >= 0; --c)
    for (int j = 0; j < n; ++j)
      out.coeffs[g.flat(c + k, j)] = f.coeffs[g.flat(c, j)];
  out.real = f.real;
  return out;
}

/// One-particle dyadic refinement: each cell of width dt splits into two of
/// width dt/2. As an L^2 function nothing changes; in orthonormal cell
/// coordinates the map sends a cell vector to (fine0 + fine1)/sqrt(2).
/// Returned as the matrix of the isometry in orthonormal coordinates.
inline Eigen::MatrixXd refine_matrix(const Grid& coarse) {
  Grid fine(2 * coarse.cells, coarse.dt / 2.0, coarse.internal_dim);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(fine.dim(), coarse.dim());
  const double r = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < coarse.cells; ++c)
    for (int j = 0; j < coarse.internal_dim; ++j) {
      m(fine.flat(2 * c, j), coarse.flat(c, j)) = r;
      m(fine.flat(2 * c + 1, j), coarse.flat(c, j)) = r;
    }
  return m;
}

inline Grid refine(const Grid& g) { return Grid(2 * g.cells, g.dt / 2.0, g.internal_dim); }

}  // namespace fockflow
