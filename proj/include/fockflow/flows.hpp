#pragma once

// Concrete flow models: Clifford, even Clifford and free flows realized as
// one-cell-shift embeddings of a smaller-grid model into a larger one. On top
// of the models: intertwiner spaces E and E', their intersection H with the
// induced fibers H Omega, relative commutants with their GNS-window split,
// the parity sign formula, and the trace-semiflow table.
//
// Truncation note: at a finite grid the relative commutant picks up a second
// summand absent in the infinite picture (terms built on the volume element
// of the finite future algebra). Its GNS vectors carry future particles, so
// the two summands are separated exactly by the support of X Omega; the
// window split below reports both parts.

#include <array>
#include <memory>
#include <map>

#include "fockflow/algebra.hpp"
#include "fockflow/freebasis.hpp"

namespace fockflow {

enum class FlowKind { clifford, even_clifford, free_flow };

inline const char* kind_name(FlowKind k) {
  switch (k) {
    case FlowKind::clifford: return "clifford";
    case FlowKind::even_clifford: return "even_clifford";
    case FlowKind::free_flow: return "free";
  }
  return "?";
}

class FlowModel {
 public:
  FlowKind kind;
  Grid grid;
  int free_cap = 0;  // word length cap (free flow only)

  static FlowModel make(FlowKind kind, const Grid& grid, int free_cap = 0) {
    FlowModel m;
    m.kind = kind;
    m.grid = grid;
    m.free_cap = free_cap;
    const int d = grid.dim();
    switch (kind) {
      case FlowKind::clifford: {
        if (d > 12) throw std::length_error("FlowModel: clifford mode count cap exceeded");
        AFockBasis b(d);
        m.hdim_ = b.dim();
        for (int p = 0; p < d; ++p) {
          m.gens_.push_back(dense(clifford_field(b, mode_fn(grid, p))));
          m.labels_.push_back({p, -1});
        }
        m.j_ = modular_conjugation_clifford(b);
        break;
      }
      case FlowKind::even_clifford: {
        if (d > 12) throw std::length_error("FlowModel: clifford mode count cap exceeded");
        AFockBasis b(d);
        m.even_embed_ = even_embedding(d);
        m.hdim_ = m.even_embed_.cols();
        std::vector<MatrixXc> field(d);
        for (int p = 0; p < d; ++p) field[p] = dense(clifford_field(b, mode_fn(grid, p)));
        for (int p = 0; p < d; ++p)
          for (int q = p + 1; q < d; ++q) {
            m.gens_.push_back(m.even_embed_.adjoint() * field[p] * field[q] * m.even_embed_);
            m.labels_.push_back({p, q});
          }
        MatrixXc jfull = modular_conjugation_clifford(b).m;
        m.j_ = {MatrixXc(m.even_embed_.adjoint() * jfull * m.even_embed_.conjugate())};
        break;
      }
      case FlowKind::free_flow: {
        if (free_cap < 1) throw std::invalid_argument("FlowModel: free flow needs a length cap");
        if (d == 0) {
          m.hdim_ = 1;
          m.j_ = {MatrixXc::Identity(1, 1)};
          break;
        }
        FFockBasis b(d, free_cap);
        if (b.dim() > 2048) throw std::length_error("FlowModel: free basis cap exceeded");
        m.hdim_ = b.dim();
        for (int p = 0; p < d; ++p) {
          TruncatedOp s = semicircular(b, mode_fn(grid, p));
          m.gens_.push_back(dense(s.mat));
          m.gen_loss_ = std::max(m.gen_loss_, s.truncation_loss);
          m.labels_.push_back({p, -1});
        }
        m.j_ = modular_conjugation_free(b);
        break;
      }
    }
    // the identity rides along so that sub-models whose algebra is trivial
    // (an empty grid, or the even model over a single mode) still carry a
    // generator to intertwine against
    m.gens_.insert(m.gens_.begin(), MatrixXc::Identity(m.hdim_, m.hdim_));
    m.labels_.insert(m.labels_.begin(), {-1, -1});
    m.omega_ = vacuum(m.hdim_);
    return m;
  }

  long dim() const { return hdim_; }
  const std::vector<MatrixXc>& gens() const { return gens_; }
  const VectorXc& omega() const { return omega_; }
  const AntilinearOp& j() const { return j_; }
  double gen_truncation_loss() const { return gen_loss_; }

  /// The same kind of model on a grid with k fewer cells (the source of the
  /// k-cell shift embedding).
  FlowModel sub(int k) const {
    if (k < 0 || k > grid.cells) throw std::domain_error("FlowModel::sub: bad cell count");
    return make(kind, Grid(grid.cells - k, grid.dt, grid.internal_dim), free_cap);
  }

  /// Target generators matching the source model's generator list under the
  /// k-cell shift: mode p maps to p + k*n.
  std::vector<MatrixXc> sigma_images(int k) const {
    FlowModel src = sub(k);
    const int off = k * grid.internal_dim;
    std::vector<MatrixXc> out;
    out.reserve(src.labels_.size());
    for (auto [p, q] : src.labels_) {
      if (p < 0)
        out.push_back(MatrixXc::Identity(hdim_, hdim_));
      else
        out.push_back(gens_[gen_index(p + off, q < 0 ? -1 : q + off)]);
    }
    return out;
  }

  /// Canonical unit: the second-quantized k-cell shift from the sub-model's
  /// space into this one.
  MatrixXc gamma(int k) const {
    FlowModel src = sub(k);
    ShiftMap sh(src.grid, grid, k);
    switch (kind) {
      case FlowKind::clifford:
        return second_quantize(AFockBasis(src.grid.dim()), AFockBasis(grid.dim()), sh);
      case FlowKind::even_clifford: {
        MatrixXc full = second_quantize(AFockBasis(src.grid.dim()), AFockBasis(grid.dim()), sh);
        return even_embed_.adjoint() * full * even_embedding(src.grid.dim());
      }
      case FlowKind::free_flow: {
        if (src.grid.dim() == 0) return omega_;
        return second_quantize(FFockBasis(src.grid.dim(), free_cap),
                               FFockBasis(grid.dim(), free_cap), sh);
      }
    }
    throw std::logic_error("unreachable");
  }

  /// Closure of the generated algebra (finite Clifford cases) or the
  /// length-capped word filtration (free case, where iterating products past
  /// the cap would swallow the whole matrix algebra).
  const AlgebraFrame& algebra() const {
    if (!algebra_) {
      GeneratorSet gs(gens_);
      algebra_ = std::make_shared<AlgebraFrame>(
          kind == FlowKind::free_flow ? word_span(gs, free_cap) : algebra_closure(gs));
    }
    return *algebra_;
  }

  /// GNS vectors supported on the first k cells: all basis states over the
  /// past modes.
  Subspace past_window(int k) const { return window(k, false); }

  /// The even-particle part of the past window (Clifford kinds only).
  Subspace even_past_window(int k) const { return window(k, true); }

 private:
  static GridFn mode_fn(const Grid& g, int mode) {
    return cell_fn(g, mode / g.internal_dim, mode % g.internal_dim);
  }

  static MatrixXc even_embedding(int d) {
    AFockBasis b(d);
    long cols = 0;
    for (std::uint32_t s = 0; s < (std::uint32_t)b.dim(); ++s)
      cols += (AFockBasis::particle_count(s) % 2 == 0);
    MatrixXc e = MatrixXc::Zero(b.dim(), cols);
    long c = 0;
    for (std::uint32_t s = 0; s < (std::uint32_t)b.dim(); ++s)
      if (AFockBasis::particle_count(s) % 2 == 0) e((long)s, c++) = 1.0;
    return e;
  }

  int gen_index(int p, int q) const {
    for (size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i].first == p && labels_[i].second == q) return (int)i;
    throw std::logic_error("FlowModel: generator label not found");
  }

  Subspace window(int k, bool even_only) const {
    const int past = k * grid.internal_dim;
    std::vector<long> idx;
    if (kind == FlowKind::free_flow) {
      if (even_only) throw std::domain_error("even window undefined for the free flow");
      FFockBasis b(grid.dim(), free_cap);
      for (long i = 0; i < b.dim(); ++i) {
        // words at the length cap sit where generator action is truncated,
        // so the reliable window stops one letter short of it
        bool ok = (int)b.words[i].size() < free_cap;
        for (auto ch : b.words[i]) ok &= (ch < past);
        if (ok) idx.push_back(i);
      }
    } else {
      const std::uint32_t lim = 1u << past;
      for (std::uint32_t s = 0; s < (std::uint32_t)(1L << grid.dim()); ++s) {
        if (s >= lim) break;
        if (even_only && AFockBasis::particle_count(s) % 2 != 0) continue;
        if (kind == FlowKind::even_clifford && AFockBasis::particle_count(s) % 2 != 0) continue;
        idx.push_back((long)s);
      }
      if (kind == FlowKind::even_clifford) {
        // reindex through the even embedding
        std::vector<long> even_pos(1L << grid.dim(), -1);
        long c = 0;
        for (std::uint32_t s = 0; s < (std::uint32_t)(1L << grid.dim()); ++s)
          if (AFockBasis::particle_count(s) % 2 == 0) even_pos[s] = c++;
        for (auto& i : idx) i = even_pos[i];
      }
    }
    MatrixXc f = MatrixXc::Zero(hdim_, (long)idx.size());
    for (size_t i = 0; i < idx.size(); ++i) f(idx[i], (long)i) = 1.0;
    return {f, {(int)idx.size(), 1.0, 0.0, 0.0}};
  }

  long hdim_ = 0;
  std::vector<MatrixXc> gens_;
  std::vector<std::pair<int, int>> labels_;
  VectorXc omega_;
  AntilinearOp j_;
  MatrixXc even_embed_;
  double gen_loss_ = 0.0;
  mutable std::shared_ptr<AlgebraFrame> algebra_;
};

// ---------------------------------------------------------------------------
// Fibers
// ---------------------------------------------------------------------------

struct FiberReport {
  int k = 0;
  AlgebraFrame E, Eprime;  // frames of rectangular intertwiners
  AlgebraFrame H_full;     // raw intersection E cap E'
  AlgebraFrame H;          // window part: T Omega supported on the past cells
  int leak_dim = 0;        // boundary terms carried by future-supported vectors
  Subspace h_omega;        // {T Omega : T in H} in the target space
  double leakage = 0.0;
  double scalar_pairing_residual = 0.0;  // max |T*S - <S,T> 1| over the H frame
  double unit_residual = 0.0;            // intertwining residual of Gamma(shift)

  int e_dim() const { return E.dim(); }
  int eprime_dim() const { return Eprime.dim(); }
  int h_dim() const { return H.dim(); }
};

/// E = intertwiners for the k-shift, E' = intertwiners of the complementary
/// flow (J-conjugated generators on both sides), H their intersection. The
/// intersection is split by the support of T Omega: the past-window part is
/// the fiber proper, the remainder is the finite-future boundary artifact
/// (exactly orthogonal, since its GNS vectors carry future particles).
inline FiberReport fibers(const FlowModel& model, int k, double rel_tol = kRankRelTol) {
  FlowModel src = model.sub(k);
  std::vector<MatrixXc> imgs = model.sigma_images(k);
  FiberReport rep;
  rep.k = k;
  rep.leakage = model.gen_truncation_loss();
  rep.E = intertwiners(imgs, src.gens(), rel_tol);

  std::vector<MatrixXc> imgs_c, gens_c;
  for (size_t i = 0; i < imgs.size(); ++i) {
    imgs_c.push_back(conjugate_by(model.j(), imgs[i]));
    gens_c.push_back(conjugate_by(src.j(), src.gens()[i]));
  }
  rep.Eprime = intertwiners(imgs_c, gens_c, rel_tol);

  Subspace h_full = intersect(rep.E.span, rep.Eprime.span);
  rep.H_full = AlgebraFrame{rep.E.shape, h_full};

  Subspace win = model.past_window(k);
  MatrixXc gns(model.dim(), h_full.dim());
  for (int i = 0; i < h_full.dim(); ++i)
    gns.col(i) = rep.H_full.shape.unvec(h_full.frame.col(i)) * src.omega();
  MatrixXc out_of_window = gns - win.frame * (win.frame.adjoint() * gns);
  Subspace inside = nullspace(out_of_window, 1e-8, 1.0);
  Subspace h{h_full.frame * inside.frame, inside.info};
  rep.H = AlgebraFrame{rep.E.shape, h};
  rep.leak_dim = h_full.dim() - h.dim();

  MatrixXc cols(model.dim(), h.dim());
  for (int i = 0; i < h.dim(); ++i)
    cols.col(i) = rep.H.shape.unvec(h.frame.col(i)) * src.omega();
  rep.h_omega = column_span(cols, rel_tol);

  // scalar pairing: T*S must be a multiple of the identity on the source
  double worst = 0.0;
  for (int a = 0; a < h.dim(); ++a)
    for (int b = 0; b < h.dim(); ++b) {
      MatrixXc ta = rep.H.shape.unvec(h.frame.col(a));
      MatrixXc tb = rep.H.shape.unvec(h.frame.col(b));
      MatrixXc prod = ta.adjoint() * tb;
      Complex scal = prod.trace() / (double)prod.rows();
      worst = std::max(worst,
                       (prod - scal * MatrixXc::Identity(prod.rows(), prod.cols())).norm());
    }
  rep.scalar_pairing_residual = worst;

  // canonical unit membership residuals
  MatrixXc g = model.gamma(k);
  double resid = 0.0;
  for (size_t i = 0; i < imgs.size(); ++i) {
    resid = std::max(resid, (imgs[i] * g - g * src.gens()[i]).norm());
    resid = std::max(resid, (imgs_c[i] * g - g * gens_c[i]).norm());
  }
  rep.unit_residual = resid;
  return rep;
}

/// Singular values of the fully stacked intertwining constraints (E and E'
/// together; with_window adds the rows confining T Omega to the past
/// window). The count below tolerance is dim H and the next value up is the
/// spectral gap quoted in reports.
inline Eigen::VectorXd stacked_fiber_svals(const FlowModel& model, int k,
                                           bool with_window = true) {
  FlowModel src = model.sub(k);
  std::vector<MatrixXc> imgs = model.sigma_images(k);
  OpShape shape{model.dim(), src.dim()};
  const long amb = shape.ambient();
  const long blocks = 2 * (long)imgs.size();
  Subspace win = model.past_window(k);
  MatrixXc pout = MatrixXc::Identity(model.dim(), model.dim()) -
                  win.frame * win.frame.adjoint();
  MatrixXc stacked(blocks * amb + (with_window ? model.dim() : 0), amb);
  long row = 0;
  auto add = [&](const MatrixXc& a, const MatrixXc& b) {
    for (long col = 0; col < amb; ++col) {
      VectorXc e = VectorXc::Zero(amb);
      e[col] = 1.0;
      MatrixXc t = shape.unvec(e);
      stacked.block(row, col, amb, 1) = shape.vec(a * t - t * b);
    }
    row += amb;
  };
  for (size_t i = 0; i < imgs.size(); ++i) add(imgs[i], src.gens()[i]);
  for (size_t i = 0; i < imgs.size(); ++i)
    add(conjugate_by(model.j(), imgs[i]), conjugate_by(src.j(), src.gens()[i]));
  if (with_window) {
    for (long col = 0; col < amb; ++col) {
      VectorXc e = VectorXc::Zero(amb);
      e[col] = 1.0;
      MatrixXc t = shape.unvec(e);
      stacked.block(row, col, model.dim(), 1) = pout * (t * src.omega());
    }
  }
  Eigen::JacobiSVD<MatrixXc> svd(stacked);
  return svd.singularValues();
}

// ---------------------------------------------------------------------------
// Relative commutants and the trace semiflow
// ---------------------------------------------------------------------------

struct RelativeCommutant {
  int k = 0;
  AlgebraFrame full;      // sigma_k(M_src)' intersected with the model algebra
  AlgebraFrame windowed;  // the part with GNS vectors in the past window
  int leak_dim = 0;       // remainder carried by future-supported vectors
};

inline RelativeCommutant relative_commutant(const FlowModel& model, int k,
                                            double rel_tol = kRankRelTol,
                                            long dim_cap = 256) {
  if (model.dim() > dim_cap)
    throw std::length_error("relative_commutant: ambient dimension cap exceeded");
  RelativeCommutant rc;
  rc.k = k;
  std::vector<MatrixXc> imgs = model.sigma_images(k);
  AlgebraFrame com = commutant(GeneratorSet(imgs), dim_cap, rel_tol);
  rc.full = AlgebraFrame{com.shape, intersect(com.span, model.algebra().span)};
  // split by the support of X Omega
  Subspace win = model.past_window(k);
  MatrixXc gns(model.dim(), rc.full.dim());
  for (int i = 0; i < rc.full.dim(); ++i) gns.col(i) = rc.full.op(i) * model.omega();
  MatrixXc out_of_window = gns - win.frame * (win.frame.adjoint() * gns);
  Subspace inside = nullspace(out_of_window, 1e-8, 1.0);
  rc.windowed = AlgebraFrame{rc.full.shape, Subspace{rc.full.span.frame * inside.frame, inside.info}};
  rc.leak_dim = rc.full.dim() - rc.windowed.dim();
  return rc;
}

struct SemiflowRow {
  int k = 0;
  int dim_full = 0;
  int dim_windowed = 0;
  int leak_dim = 0;
  std::array<double, 3> casimir_moments{0, 0, 0};
};

/// Trace moments of the canonical Casimir element sum_i F_i* F_i of the
/// windowed relative commutant, with the frame orthonormalized in the GNS
/// inner product tau(x*y). Invariant under tracial isomorphism, so the rows
/// are comparable across models with different ambient spaces.
inline SemiflowRow semiflow_row(const FlowModel& model, int k, double rel_tol = kRankRelTol,
                                long dim_cap = 256) {
  RelativeCommutant rc = relative_commutant(model, k, rel_tol, dim_cap);
  SemiflowRow row;
  row.k = k;
  row.dim_full = rc.full.dim();
  row.dim_windowed = rc.windowed.dim();
  row.leak_dim = rc.leak_dim;
  const int r = rc.windowed.dim();
  if (r > 0) {
    MatrixXc gns(model.dim(), r);
    for (int i = 0; i < r; ++i) gns.col(i) = rc.windowed.op(i) * model.omega();
    MatrixXc gram = gns.adjoint() * gns;
    Eigen::SelfAdjointEigenSolver<MatrixXc> eig(gram);
    MatrixXc isqrt = MatrixXc::Zero(r, r);
    for (int i = 0; i < r; ++i) {
      double lam = std::max(eig.eigenvalues()[i], 1e-14);
      isqrt += eig.eigenvectors().col(i) * eig.eigenvectors().col(i).adjoint() / std::sqrt(lam);
    }
    MatrixXc cas = MatrixXc::Zero(model.dim(), model.dim());
    for (int i = 0; i < r; ++i) {
      MatrixXc f = MatrixXc::Zero(model.dim(), model.dim());
      for (int j = 0; j < r; ++j) f += isqrt(j, i) * rc.windowed.op(j);
      cas += f.adjoint() * f;
    }
    MatrixXc p = cas;
    for (int mpow = 0; mpow < 3; ++mpow) {
      row.casimir_moments[mpow] = std::real(gns_trace(p, model.omega()));
      p = p * cas;
    }
  }
  return row;
}

inline std::vector<SemiflowRow> semiflow_table(const FlowModel& model, int k_max,
                                               double rel_tol = kRankRelTol,
                                               long dim_cap = 256) {
  std::vector<SemiflowRow> rows;
  for (int k = 0; k <= k_max; ++k) rows.push_back(semiflow_row(model, k, rel_tol, dim_cap));
  return rows;
}

// ---------------------------------------------------------------------------
// Parity signs
// ---------------------------------------------------------------------------

/// (-1)^{|I||F'| + |F||F'| - |F cap F'|} for strictly increasing index
/// tuples: the sign picked up by u(F') u(I) u(F) u(F')* relative to
/// u(I) u(F) with unnormalized generators.
inline int parity_sign(const std::vector<int>& past, const std::vector<int>& fut,
                       const std::vector<int>& fut_conj) {
  auto check = [](const std::vector<int>& t) {
    for (size_t i = 0; i + 1 < t.size(); ++i)
      if (t[i] >= t[i + 1]) throw std::domain_error("parity_sign: tuple not strictly increasing");
  };
  check(past);
  check(fut);
  check(fut_conj);
  long inter = 0;
  for (int x : fut)
    for (int y : fut_conj) inter += (x == y);
  long exp = (long)past.size() * fut_conj.size() + (long)fut.size() * fut_conj.size() - inter;
  return (exp % 2 == 0) ? 1 : -1;
}

}  // namespace fockflow
