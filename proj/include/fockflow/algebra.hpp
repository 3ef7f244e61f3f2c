#pragma once

// Finite-dimensional *-algebra tooling: span closure of generated algebras,
// numerical commutants and intertwiner spaces, GNS trace machinery and the
// generic modular conjugation.
//
// Subspaces of operator space use the normalized Hilbert-Schmidt inner
// product <X,Y> = tr(X*Y)/cols, so the canonical second-quantized shift has
// norm one whether the operators are square or rectangular. Every rank
// decision is made against singular values with a relative threshold and the
// observed spectral gap travels with the result.

#include <vector>
#include <stdexcept>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include "fockflow/fock.hpp"

namespace fockflow {

constexpr double kRankRelTol = 1e-8;

/// Evidence attached to a rank decision: the smallest singular value kept
/// and the largest one discarded (absolute, after relative thresholding).
struct RankInfo {
  int rank = 0;
  double kept_min = 0.0;
  double cut_max = 0.0;
  double threshold = 0.0;
};

/// Orthonormal frame spanning a subspace of C^ambient.
struct Subspace {
  MatrixXc frame;  // ambient x r, orthonormal columns
  RankInfo info;

  int dim() const { return (int)frame.cols(); }
  long ambient() const { return frame.rows(); }

  /// Squared distance of v from the subspace, relative to |v|^2.
  double rejection(const VectorXc& v) const {
    if (v.norm() == 0.0) return 0.0;
    VectorXc p = frame * (frame.adjoint() * v);
    return (v - p).squaredNorm() / v.squaredNorm();
  }
};

namespace detail {
// JacobiSVD is exact but cubic in the smaller dimension; past this size the
// Gram-matrix eigendecomposition takes over. (BDCSVD is avoided: for
// rank-deficient complex input it leaves uninitialized columns in thin U.)
constexpr long kJacobiCap = 384;
}  // namespace detail

/// Orthonormal basis of the column span, rank cut at rel_tol * sigma_max.
inline Subspace column_span(const MatrixXc& cols, double rel_tol = kRankRelTol) {
  if (cols.cols() == 0) return {MatrixXc::Zero(cols.rows(), 0), {}};
  if (cols.cols() <= detail::kJacobiCap) {
    Eigen::JacobiSVD<MatrixXc> svd(cols, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    double cut = rel_tol * (s.size() ? s[0] : 0.0);
    int r = 0;
    while (r < s.size() && s[r] > cut) ++r;
    RankInfo info{r, r > 0 ? s[r - 1] : 0.0, r < s.size() ? s[r] : 0.0, cut};
    return {svd.matrixU().leftCols(r), info};
  }
  MatrixXc gram = cols.adjoint() * cols;
  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(gram);  // eigenvalues ascending
  const auto& lam = eig.eigenvalues();
  const long n = lam.size();
  double smax = std::sqrt(std::max(0.0, lam[n - 1]));
  double cut = rel_tol * smax;
  long r = 0;
  while (r < n && std::sqrt(std::max(0.0, lam[n - 1 - r])) > cut) ++r;
  MatrixXc basis(cols.rows(), r);
  for (long i = 0; i < r; ++i)
    basis.col(i) = cols * eig.eigenvectors().col(n - 1 - i) / std::sqrt(lam[n - 1 - i]);
  Eigen::HouseholderQR<MatrixXc> qr(basis);
  MatrixXc q = qr.householderQ() * MatrixXc::Identity(cols.rows(), r);
  RankInfo info{(int)r, r > 0 ? std::sqrt(std::max(0.0, lam[n - r])) : 0.0,
                r < n ? std::sqrt(std::max(0.0, lam[n - 1 - r])) : 0.0, cut};
  return {q, info};
}

/// Orthonormal basis of the (numerical) nullspace: right singular vectors
/// with sigma <= rel_tol * scale. The scale defaults to sigma_max of the
/// matrix itself; pass the natural scale of the constraint (e.g. generator
/// norms) so that an all-noise residual matrix is recognized as zero.
inline Subspace nullspace(const MatrixXc& m, double rel_tol = kRankRelTol,
                          double scale = 0.0) {
  const long n = m.cols();
  if (m.rows() == 0 || n == 0)
    return {MatrixXc::Identity(n, n), {(int)n, 0, 0, 0}};
  if (n <= detail::kJacobiCap) {
    Eigen::JacobiSVD<MatrixXc> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    double smax = std::max(s.size() ? s[0] : 0.0, scale);
    double cut = rel_tol * (smax > 0 ? smax : 1.0);
    int keep = 0;
    while (keep < s.size() && s[keep] > cut) ++keep;
    int null_dim = (int)n - keep;
    MatrixXc basis = svd.matrixV().rightCols(null_dim);
    double smallest_kept = keep > 0 ? s[keep - 1] : 0.0;
    double largest_null = (keep < s.size()) ? s[keep] : 0.0;
    RankInfo info{null_dim, smallest_kept, largest_null, cut};
    return {basis, info};
  }
  MatrixXc gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<MatrixXc> eig(gram);  // ascending
  const auto& lam = eig.eigenvalues();
  double smax = std::max(std::sqrt(std::max(0.0, lam[n - 1])), scale);
  double cut = rel_tol * (smax > 0 ? smax : 1.0);
  long null_dim = 0;
  while (null_dim < n && std::sqrt(std::max(0.0, lam[null_dim])) <= cut) ++null_dim;
  MatrixXc basis = eig.eigenvectors().leftCols(null_dim);
  double largest_null = null_dim > 0 ? std::sqrt(std::max(0.0, lam[null_dim - 1])) : 0.0;
  double smallest_kept = null_dim < n ? std::sqrt(std::max(0.0, lam[null_dim])) : 0.0;
  RankInfo info{(int)null_dim, smallest_kept, largest_null, cut};
  return {basis, info};
}

/// Cosines of the principal angles between two subspaces (descending).
inline Eigen::VectorXd principal_cosines(const Subspace& a, const Subspace& b) {
  if (a.dim() == 0 || b.dim() == 0) return Eigen::VectorXd::Zero(0);
  Eigen::JacobiSVD<MatrixXc> svd(MatrixXc(a.frame.adjoint() * b.frame));
  return svd.singularValues();
}

/// Largest principal angle (radians), computed through the sine so that
/// near-zero angles are resolved to full precision; pi/2 for dimension
/// mismatch.
inline double max_principal_angle(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) return M_PI / 2.0;
  if (a.dim() == 0) return 0.0;
  MatrixXc rej_b = b.frame - a.frame * (a.frame.adjoint() * b.frame);
  MatrixXc rej_a = a.frame - b.frame * (b.frame.adjoint() * a.frame);
  Eigen::JacobiSVD<MatrixXc> sa(rej_b), sb(rej_a);
  double s = std::max(sa.singularValues()(0), sb.singularValues()(0));
  return std::asin(std::min(1.0, s));
}

inline bool subspace_equal(const Subspace& a, const Subspace& b, double tol = 1e-8) {
  return a.dim() == b.dim() && max_principal_angle(a, b) < tol;
}

/// Intersection of two subspaces from the principal vectors with cosine
/// within angle_tol of one.
inline Subspace intersect(const Subspace& a, const Subspace& b, double angle_tol = 1e-8) {
  if (a.dim() == 0 || b.dim() == 0) return {MatrixXc::Zero(a.ambient(), 0), {}};
  MatrixXc m = a.frame.adjoint() * b.frame;
  Eigen::JacobiSVD<MatrixXc> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s[r] > 1.0 - angle_tol) ++r;
  MatrixXc cols(a.ambient(), r);
  for (int i = 0; i < r; ++i) {
    VectorXc v = a.frame * svd.matrixU().col(i) + b.frame * svd.matrixV().col(i);
    cols.col(i) = v / v.norm();
  }
  Subspace out = column_span(cols);
  out.info.kept_min = r > 0 ? s[r - 1] : 0.0;
  out.info.cut_max = r < s.size() ? s[r] : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Operator-space coordinates
// ---------------------------------------------------------------------------

/// Shape of a space of rows x cols operators, with the normalized
/// Hilbert-Schmidt geometry baked into the vectorization.
struct OpShape {
  long rows = 0, cols = 0;
  long ambient() const { return rows * cols; }
  double scale() const { return 1.0 / std::sqrt((double)cols); }

  VectorXc vec(const MatrixXc& x) const {
    if (x.rows() != rows || x.cols() != cols)
      throw std::invalid_argument("OpShape::vec: shape mismatch");
    return Eigen::Map<const VectorXc>(x.data(), ambient()) * scale();
  }
  MatrixXc unvec(const VectorXc& v) const {
    MatrixXc x = Eigen::Map<const MatrixXc>(v.data(), rows, cols);
    return x / scale();
  }
};

/// tr(X*Y)/cols.
inline Complex hs_inner(const MatrixXc& x, const MatrixXc& y) {
  return (x.adjoint() * y).trace() / (double)x.cols();
}

/// Generators of a *-algebra on a fixed space; closed under adjoints.
struct GeneratorSet {
  std::vector<MatrixXc> ops;
  long dim = 0;

  GeneratorSet() = default;
  explicit GeneratorSet(std::vector<MatrixXc> gens) {
    if (gens.empty()) throw std::invalid_argument("GeneratorSet: empty");
    dim = gens[0].rows();
    for (auto& g : gens) {
      if (g.rows() != dim || g.cols() != dim)
        throw std::invalid_argument("GeneratorSet: operators on different spaces");
      ops.push_back(g);
    }
    size_t n = ops.size();
    for (size_t i = 0; i < n; ++i) {
      MatrixXc adj = ops[i].adjoint();
      if ((adj - ops[i]).norm() > 1e-14 * (1.0 + ops[i].norm())) ops.push_back(adj);
    }
  }
};

/// Linear span of all words in the generators, iterated until the span
/// stabilizes. Returns a frame in operator space together with the operators
/// themselves (unvectorized once at the end).
struct AlgebraFrame {
  OpShape shape;
  Subspace span;  // frame in operator-space coordinates

  int dim() const { return span.dim(); }
  MatrixXc op(int i) const { return shape.unvec(span.frame.col(i)); }
  std::vector<MatrixXc> all_ops() const {
    std::vector<MatrixXc> v;
    v.reserve(dim());
    for (int i = 0; i < dim(); ++i) v.push_back(op(i));
    return v;
  }
};

inline AlgebraFrame algebra_closure(const GeneratorSet& gens, long op_budget = 1 << 14) {
  const long d = gens.dim;
  OpShape shape{d, d};
  if (shape.ambient() > op_budget)
    throw std::length_error("algebra_closure: operator-space budget exceeded");
  std::vector<VectorXc> seed;
  seed.push_back(shape.vec(MatrixXc::Identity(d, d)));
  for (const auto& g : gens.ops) seed.push_back(shape.vec(g));
  MatrixXc cols(shape.ambient(), (long)seed.size());
  for (size_t i = 0; i < seed.size(); ++i) cols.col(i) = seed[i];
  Subspace span = column_span(cols);
  while (true) {
    int before = span.dim();
    MatrixXc grown(shape.ambient(), (long)span.dim() * (1 + (long)gens.ops.size()));
    long c = 0;
    for (int i = 0; i < span.dim(); ++i) grown.col(c++) = span.frame.col(i);
    for (int i = 0; i < span.dim(); ++i) {
      MatrixXc x = shape.unvec(span.frame.col(i));
      for (const auto& g : gens.ops) grown.col(c++) = shape.vec(g * x);
    }
    span = column_span(grown);
    if (span.dim() == before) break;
    if (span.dim() > op_budget)
      throw std::length_error("algebra_closure: span exceeded budget");
  }
  return {shape, span};
}

/// Span of words in the generators of length <= max_len (with the identity),
/// without closure iteration. This is the natural finite filtration piece of
/// an algebra whose full closure would swallow the whole matrix algebra
/// under truncation.
inline AlgebraFrame word_span(const GeneratorSet& gens, int max_len) {
  const long d = gens.dim;
  OpShape shape{d, d};
  std::vector<MatrixXc> words{MatrixXc::Identity(d, d)};
  std::vector<MatrixXc> last = words;
  for (int len = 1; len <= max_len; ++len) {
    std::vector<MatrixXc> next;
    next.reserve(last.size() * gens.ops.size());
    for (const auto& w : last)
      for (const auto& g : gens.ops) next.push_back(g * w);
    words.insert(words.end(), next.begin(), next.end());
    last = std::move(next);
  }
  MatrixXc cols(shape.ambient(), (long)words.size());
  for (size_t i = 0; i < words.size(); ++i) cols.col(i) = shape.vec(words[i]);
  return {shape, column_span(cols)};
}

/// Solutions T of sigma(g) T - T g = 0 for all generators, as an orthonormal
/// frame in (rows x cols)-operator space. sigma_images[i] acts on the target
/// space and pairs with gens.ops[i] on the source space. The nullspace is
/// intersected one generator at a time.
inline AlgebraFrame intertwiners(const std::vector<MatrixXc>& sigma_images,
                                 const std::vector<MatrixXc>& gens,
                                 double rel_tol = kRankRelTol) {
  if (sigma_images.size() != gens.size() || gens.empty())
    throw std::invalid_argument("intertwiners: generator/image mismatch");
  const long cols = gens[0].rows();
  const long rows = sigma_images[0].rows();
  OpShape shape{rows, cols};
  Subspace basis{MatrixXc::Identity(shape.ambient(), shape.ambient()),
                 {(int)shape.ambient(), 0, 0, 0}};
  RankInfo last_info;
  for (size_t k = 0; k < gens.size(); ++k) {
    MatrixXc constrained(shape.ambient(), basis.dim());
    for (int j = 0; j < basis.dim(); ++j) {
      MatrixXc t = shape.unvec(basis.frame.col(j));
      constrained.col(j) = shape.vec(sigma_images[k] * t - t * gens[k]);
    }
    // threshold against the generator scale, not the residual's own maximum
    double scale = (sigma_images[k].norm() + gens[k].norm()) * shape.scale();
    Subspace null = nullspace(constrained, rel_tol, scale);
    MatrixXc next = basis.frame * null.frame;
    last_info = null.info;
    basis = Subspace{next, null.info};
  }
  basis.info = last_info;
  return {shape, basis};
}

/// Commutant of the generators in the full matrix algebra: the identity
/// specialization of the intertwiner solver.
inline AlgebraFrame commutant(const GeneratorSet& gens, long dim_cap = 256,
                              double rel_tol = kRankRelTol) {
  if (gens.dim > dim_cap) throw std::length_error("commutant: ambient dimension cap exceeded");
  return intertwiners(gens.ops, gens.ops, rel_tol);
}

// ---------------------------------------------------------------------------
// GNS machinery
// ---------------------------------------------------------------------------

inline Complex gns_trace(const MatrixXc& x, const VectorXc& omega) {
  return omega.dot(x * omega);
}

/// Matrix whose columns are F_i Omega for the frame operators.
inline MatrixXc gns_columns(const AlgebraFrame& alg, const VectorXc& omega) {
  MatrixXc a(alg.shape.rows, alg.dim());
  for (int i = 0; i < alg.dim(); ++i) a.col(i) = alg.op(i) * omega;
  return a;
}

inline bool omega_cyclic(const AlgebraFrame& alg, const VectorXc& omega) {
  return column_span(gns_columns(alg, omega)).dim() == (int)alg.shape.rows;
}

/// Modular conjugation from first principles: solve x_i Omega = e_i inside
/// the algebra frame, then J e_i = x_i* Omega. Requires Omega cyclic for the
/// frame; throws naming the deficiency otherwise.
inline AntilinearOp modular_conjugation_generic(const AlgebraFrame& alg,
                                                const VectorXc& omega,
                                                double tol = 1e-9) {
  const long d = alg.shape.rows;
  MatrixXc a = gns_columns(alg, omega);
  if (column_span(a).dim() < d)
    throw std::runtime_error(
        "modular_conjugation_generic: vacuum is not cyclic for the algebra frame "
        "(GNS span has dimension " + std::to_string(column_span(a).dim()) +
        " of " + std::to_string(d) + ")");
  Eigen::CompleteOrthogonalDecomposition<MatrixXc> cod(a);
  MatrixXc jm(d, d);
  for (long i = 0; i < d; ++i) {
    VectorXc e = VectorXc::Zero(d);
    e[i] = 1.0;
    VectorXc c = cod.solve(e);
    if ((a * c - e).norm() > tol)
      throw std::runtime_error("modular_conjugation_generic: basis vector not in algebra orbit");
    MatrixXc x = MatrixXc::Zero(d, d);
    for (int j = 0; j < alg.dim(); ++j) x += c[j] * alg.op(j);
    jm.col(i) = x.adjoint() * omega;
  }
  return {jm};
}

/// J X J as a linear map between GNS spaces (antilinear twice).
inline MatrixXc conjugate_by(const AntilinearOp& j_tgt, const MatrixXc& x,
                             const AntilinearOp& j_src) {
  return j_tgt.m * x.conjugate() * j_src.m.conjugate();
}

inline MatrixXc conjugate_by(const AntilinearOp& j, const MatrixXc& x) {
  return conjugate_by(j, x, j);
}

}  // namespace fockflow
