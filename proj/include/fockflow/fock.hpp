#pragma once

// Antisymmetric and full Fock spaces over a discretized one-particle space:
// creation/annihilation, Clifford field operators, free creation and
// semicircular operators, second quantization, and the tracial modular
// conjugation in closed form.
//
// Conventions fixed here, on which all downstream constants depend:
//   u(f) = (a(f) + a*(f)) / sqrt(2),  so  u(f)^2 = (|f|^2/2) 1
//   s(f) = (l(f) + l(f)*) / 2,        so  s(f) Omega = f/2
// Fock modes are the orthonormalized cell functions: mode (c,j) carries the
// step function 1_cell(c) o e_j / sqrt(dt).

#include <cstdint>
#include <vector>
#include <unordered_map>
#include <stdexcept>
#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fockflow/grid.hpp"

namespace fockflow {

using SpMat = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;

// ---------------------------------------------------------------------------
// Antisymmetric Fock space
// ---------------------------------------------------------------------------

/// Basis of the antisymmetric Fock space over d modes: all subsets of
/// {0..d-1} as bitmasks in natural integer order. Index 0 is the vacuum.
struct AFockBasis {
  int modes = 0;

  AFockBasis() = default;
  explicit AFockBasis(int d) : modes(d) {
    if (d < 0 || d > 20) throw std::invalid_argument("AFockBasis: mode count out of range");
  }
  long dim() const { return 1L << modes; }

  static int particle_count(std::uint32_t mask) { return __builtin_popcount(mask); }
};

/// Sign picked up when e_i is wedged in front of the ordered product e_S:
/// (-1)^{#{j in S : j < i}}.
inline int wedge_sign(std::uint32_t mask, int mode) {
  std::uint32_t below = mask & ((1u << mode) - 1u);
  return (__builtin_popcount(below) & 1) ? -1 : 1;
}

/// a*(mode i): |S> -> sign |S u {i}>, zero if occupied.
inline SpMat car_create_mode(const AFockBasis& b, int mode) {
  std::vector<Triplet> t;
  t.reserve(b.dim() / 2);
  for (std::uint32_t s = 0; s < (std::uint32_t)b.dim(); ++s) {
    if (s & (1u << mode)) continue;
    t.emplace_back((int)(s | (1u << mode)), (int)s, Complex(wedge_sign(s, mode), 0));
  }
  SpMat m(b.dim(), b.dim());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Orthonormal-mode coefficients of a step function: <chi_i, f> = sqrt(dt) f_i.
inline VectorXc mode_coefficients(const GridFn& f) {
  return std::sqrt(f.grid.dt) * f.coeffs;
}

/// a*(f) = sum_i <chi_i,f> a*_i, so that |a*(f) Omega| = |f|_{L^2}.
inline SpMat car_create(const AFockBasis& b, const GridFn& f) {
  if (f.grid.dim() != b.modes) throw std::invalid_argument("car_create: basis/grid mismatch");
  VectorXc c = mode_coefficients(f);
  std::vector<Triplet> t;
  for (int i = 0; i < b.modes; ++i) {
    if (c[i] == 0.0) continue;
    for (std::uint32_t s = 0; s < (std::uint32_t)b.dim(); ++s) {
      if (s & (1u << i)) continue;
      t.emplace_back((int)(s | (1u << i)), (int)s, c[i] * Complex(wedge_sign(s, i), 0));
    }
  }
  SpMat m(b.dim(), b.dim());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SpMat car_annihilate(const AFockBasis& b, const GridFn& f) {
  return SpMat(car_create(b, f).adjoint());
}

/// Clifford field u(f) = (a(f) + a*(f))/sqrt(2). Requires a real-flagged f;
/// the anticommutation relation {u(f),u(g)} = <f,g> 1 fails otherwise.
inline SpMat clifford_field(const AFockBasis& b, const GridFn& f) {
  if (!f.real) throw std::domain_error("clifford_field: input not in the real subspace");
  SpMat cr = car_create(b, f);
  return (SpMat(cr.adjoint()) + cr) / std::sqrt(2.0);
}

/// Second quantization of a one-particle isometry given in orthonormal mode
/// coordinates (target_modes x source_modes): Gamma(V)|S> is the wedge of the
/// V-images, built by applying creation operators right to left.
inline MatrixXc second_quantize_afock(const AFockBasis& src, const AFockBasis& tgt,
                                      const MatrixXc& v) {
  if (v.rows() != tgt.modes || v.cols() != src.modes)
    throw std::invalid_argument("second_quantize_afock: isometry shape mismatch");
  std::vector<SpMat> creators(src.modes);
  for (int j = 0; j < src.modes; ++j) {
    std::vector<Triplet> t;
    for (int i = 0; i < tgt.modes; ++i) {
      if (v(i, j) == 0.0) continue;
      for (std::uint32_t s = 0; s < (std::uint32_t)tgt.dim(); ++s) {
        if (s & (1u << i)) continue;
        t.emplace_back((int)(s | (1u << i)), (int)s, v(i, j) * Complex(wedge_sign(s, i), 0));
      }
    }
    creators[j].resize(tgt.dim(), tgt.dim());
    creators[j].setFromTriplets(t.begin(), t.end());
  }
  MatrixXc g = MatrixXc::Zero(tgt.dim(), src.dim());
  for (std::uint32_t s = 0; s < (std::uint32_t)src.dim(); ++s) {
    VectorXc vec = VectorXc::Zero(tgt.dim());
    vec[0] = 1.0;
    for (int j = src.modes - 1; j >= 0; --j)
      if (s & (1u << j)) vec = creators[j] * vec;
    g.col(s) = vec;
  }
  return g;
}

/// Gamma of the shift embedding: modes move up by offset*n, basis to basis.
inline MatrixXc second_quantize(const AFockBasis& src, const AFockBasis& tgt,
                                const ShiftMap& sh) {
  MatrixXc v = MatrixXc::Zero(tgt.modes, src.modes);
  const int n = sh.source.internal_dim;
  for (int c = 0; c < sh.source.cells; ++c)
    for (int j = 0; j < n; ++j)
      v(sh.target.flat(c + sh.offset, j), sh.source.flat(c, j)) = 1.0;
  return second_quantize_afock(src, tgt, v);
}

/// Antilinear map xi -> M conj(xi).
struct AntilinearOp {
  MatrixXc m;
  VectorXc apply(const VectorXc& xi) const { return m * xi.conjugate(); }
};

/// Tracial modular conjugation of the Clifford model in closed form:
/// J(u(I) Omega) = (-1)^{|I|(|I|-1)/2} u(I) Omega with coefficient
/// conjugation. On the wedge basis this is a diagonal sign.
inline AntilinearOp modular_conjugation_clifford(const AFockBasis& b) {
  MatrixXc m = MatrixXc::Zero(b.dim(), b.dim());
  for (std::uint32_t s = 0; s < (std::uint32_t)b.dim(); ++s) {
    int k = AFockBasis::particle_count(s);
    m((int)s, (int)s) = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
  }
  return {m};
}

// ---------------------------------------------------------------------------
// Full Fock space
// ---------------------------------------------------------------------------

/// Basis of the length-truncated full Fock space over d letters: all words of
/// length <= max_len, ordered by length then lexicographically. Index 0 is
/// the vacuum (empty word).
struct FFockBasis {
  int letters = 0;
  int max_len = 0;
  std::vector<std::vector<std::uint8_t>> words;
  std::vector<long> length_offset;  // first index of each length

  FFockBasis() = default;
  FFockBasis(int d, int cap) : letters(d), max_len(cap) {
    if (d < 1 || cap < 0) throw std::invalid_argument("FFockBasis: bad parameters");
    std::vector<std::uint8_t> w;
    length_offset.assign(cap + 2, 0);
    for (int len = 0; len <= cap; ++len) {
      length_offset[len] = (long)words.size();
      w.assign(len, 0);
      while (true) {
        words.push_back(w);
        int pos = len - 1;
        while (pos >= 0 && w[pos] == d - 1) { w[pos] = 0; --pos; }
        if (pos < 0) break;
        ++w[pos];
      }
    }
    length_offset[cap + 1] = (long)words.size();
  }

  long dim() const { return (long)words.size(); }

  long index(const std::vector<std::uint8_t>& w) const {
    const int len = (int)w.size();
    if (len > max_len) throw std::domain_error("FFockBasis: word too long");
    long idx = length_offset[len], stride = 1;
    for (int i = len - 1; i >= 0; --i) { idx += w[i] * stride; stride *= letters; }
    return idx;
  }
};

/// Operator on a truncated space, remembering how much Frobenius mass was
/// dropped past the length cap during assembly.
struct TruncatedOp {
  SpMat mat;
  double truncation_loss = 0.0;
};

/// l(mode i): |w> -> |i w>; length-cap overflow is projected out and recorded.
inline TruncatedOp free_create_mode(const FFockBasis& b, int mode) {
  std::vector<Triplet> t;
  double loss = 0.0;
  for (long k = 0; k < b.dim(); ++k) {
    const auto& w = b.words[k];
    if ((int)w.size() == b.max_len) { loss += 1.0; continue; }
    std::vector<std::uint8_t> iw;
    iw.reserve(w.size() + 1);
    iw.push_back((std::uint8_t)mode);
    iw.insert(iw.end(), w.begin(), w.end());
    t.emplace_back(b.index(iw), k, Complex(1, 0));
  }
  SpMat m(b.dim(), b.dim());
  m.setFromTriplets(t.begin(), t.end());
  return {m, std::sqrt(loss)};
}

/// l(f) = sum_i <chi_i,f> l_i.
inline TruncatedOp free_create(const FFockBasis& b, const GridFn& f) {
  if (f.grid.dim() != b.letters) throw std::invalid_argument("free_create: basis/grid mismatch");
  VectorXc c = mode_coefficients(f);
  SpMat acc(b.dim(), b.dim());
  double loss = 0.0;
  for (int i = 0; i < b.letters; ++i) {
    if (c[i] == 0.0) continue;
    TruncatedOp li = free_create_mode(b, i);
    acc = acc + SpMat(c[i] * li.mat);
    loss += std::norm(c[i]) * li.truncation_loss * li.truncation_loss;
  }
  return {acc, std::sqrt(loss)};
}

/// Semicircular field s(f) = (l(f) + l(f)*)/2. Requires real-flagged f.
inline TruncatedOp semicircular(const FFockBasis& b, const GridFn& f) {
  if (!f.real) throw std::domain_error("semicircular: input not in the real subspace");
  TruncatedOp l = free_create(b, f);
  return {SpMat((l.mat + SpMat(l.mat.adjoint())) / 2.0), l.truncation_loss / 2.0};
}

/// Gamma(V) on the truncated full Fock space, V an isometry in mode
/// coordinates. Letters map through V one at a time; word length is
/// preserved, so a shift embedding has no truncation loss.
inline MatrixXc second_quantize_ffock(const FFockBasis& src, const FFockBasis& tgt,
                                      const MatrixXc& v) {
  if (v.rows() != tgt.letters || v.cols() != src.letters)
    throw std::invalid_argument("second_quantize_ffock: isometry shape mismatch");
  if (src.max_len > tgt.max_len)
    throw std::invalid_argument("second_quantize_ffock: target length cap too small");
  std::vector<TruncatedOp> creators(src.letters);
  for (int j = 0; j < src.letters; ++j) {
    SpMat acc(tgt.dim(), tgt.dim());
    for (int i = 0; i < tgt.letters; ++i) {
      if (v(i, j) == 0.0) continue;
      acc = acc + SpMat(v(i, j) * free_create_mode(tgt, i).mat);
    }
    creators[j] = {acc, 0.0};
  }
  MatrixXc g = MatrixXc::Zero(tgt.dim(), src.dim());
  for (long k = 0; k < src.dim(); ++k) {
    const auto& w = src.words[k];
    VectorXc vec = VectorXc::Zero(tgt.dim());
    vec[0] = 1.0;
    for (int p = (int)w.size() - 1; p >= 0; --p) vec = creators[w[p]].mat * vec;
    g.col(k) = vec;
  }
  return g;
}

inline MatrixXc second_quantize(const FFockBasis& src, const FFockBasis& tgt,
                                const ShiftMap& sh) {
  MatrixXc v = MatrixXc::Zero(tgt.letters, src.letters);
  const int n = sh.source.internal_dim;
  for (int c = 0; c < sh.source.cells; ++c)
    for (int j = 0; j < n; ++j)
      v(sh.target.flat(c + sh.offset, j), sh.source.flat(c, j)) = 1.0;
  return second_quantize_ffock(src, tgt, v);
}

// ---------------------------------------------------------------------------
// Small helpers shared by the operator-space modules
// ---------------------------------------------------------------------------

inline VectorXc vacuum(long dim) {
  VectorXc v = VectorXc::Zero(dim);
  v[0] = 1.0;
  return v;
}

inline MatrixXc dense(const SpMat& m) { return MatrixXc(m); }

/// Frobenius distance |A - B|_F.
inline double frob_dist(const MatrixXc& a, const MatrixXc& b) { return (a - b).norm(); }

}  // namespace fockflow
