#pragma once

// Exact-integer change of basis between {s(I) Omega} and {l(I) Omega} on the
// full Fock space, where s here denotes the unnormalized semicircular element
// l(e_i) + l(e_i)*. With this normalization all coefficients are integers;
// the (l+l*)/2 field used elsewhere rescales them by 2^{-|I|}.
//
// Everything in this header is exact: integers for the two coefficient
// tables, Gaussian rationals for vector expansions. Floating point is not
// used.

#include <cstdint>
#include <map>
#include <vector>
#include <stdexcept>
#include <boost/rational.hpp>

#include "fockflow/algebra.hpp"

namespace fockflow {

using Word = std::vector<std::uint8_t>;
using WordCoeffs = std::map<Word, long long>;

using Rat = boost::rational<long long>;

/// Gaussian rational: exact complex number with rational parts.
struct RatC {
  Rat re{0}, im{0};

  RatC() = default;
  RatC(Rat r, Rat i) : re(r), im(i) {}
  explicit RatC(long long n) : re(n), im(0) {}

  RatC& operator+=(const RatC& o) { re += o.re; im += o.im; return *this; }
  RatC operator*(long long k) const { return {re * k, im * k}; }
  bool operator==(const RatC& o) const { return re == o.re && im == o.im; }
  // compare through numerators: the mixed rational/int operator== in this
  // boost version recurses on itself
  bool is_zero() const { return re.numerator() == 0 && im.numerator() == 0; }
  Complex to_complex() const {
    return {boost::rational_cast<double>(re), boost::rational_cast<double>(im)};
  }
};

using RatWordCoeffs = std::map<Word, RatC>;

/// Exact dyadic rational from a double. Throws if the exponent is out of the
/// exactly representable range.
inline Rat rational_from_double(double x) {
  if (x == 0.0) return Rat(0);
  int e;
  double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [1/2, 1)
  long long mant = (long long)std::ldexp(m, 53);
  int shift = e - 53;
  if (shift >= 0) {
    if (shift > 10) throw std::domain_error("rational_from_double: exponent too large");
    return Rat(mant << shift);
  }
  if (shift < -62) throw std::domain_error("rational_from_double: exponent too small");
  long long den = 1LL << (-shift);
  return Rat(mant, den);
}

/// Memoized s <-> l coefficient tables over a fixed alphabet.
class FreeBasisTable {
 public:
  explicit FreeBasisTable(int alphabet) : alphabet_(alphabet) {
    if (alphabet < 1 || alphabet > 255)
      throw std::invalid_argument("FreeBasisTable: bad alphabet size");
  }

  int alphabet() const { return alphabet_; }

  /// Coefficients of s(I) Omega in the l-basis: one letter of I applied at a
  /// time via  s(i) l(w) Omega = l(iw) Omega + [w starts with i] l(tail w) Omega.
  const WordCoeffs& s_to_l(const Word& w) {
    check(w);
    auto it = s_to_l_.find(w);
    if (it != s_to_l_.end()) return it->second;
    WordCoeffs out;
    if (w.empty()) {
      out[{}] = 1;
    } else {
      Word tail(w.begin() + 1, w.end());
      const WordCoeffs& rest = s_to_l(tail);
      out = apply_s(w[0], rest);
    }
    return s_to_l_.emplace(w, std::move(out)).first->second;
  }

  /// Coefficients of l(I') Omega in the s-basis, by unitriangular inversion:
  /// the s expansion of a word is the word itself plus strictly shorter
  /// terms.
  const WordCoeffs& l_to_s(const Word& w) {
    check(w);
    auto it = l_to_s_.find(w);
    if (it != l_to_s_.end()) return it->second;
    WordCoeffs out;
    out[w] = 1;
    for (const auto& [shorter, k] : s_to_l(w)) {
      if (shorter == w) continue;
      for (const auto& [v, kv] : l_to_s(shorter)) out[v] -= k * kv;
    }
    prune(out);
    return l_to_s_.emplace(w, std::move(out)).first->second;
  }

  /// s(i) acting on an l-basis expansion.
  WordCoeffs apply_s(int letter, const WordCoeffs& c) const {
    WordCoeffs out;
    for (const auto& [w, k] : c) {
      Word iw;
      iw.reserve(w.size() + 1);
      iw.push_back((std::uint8_t)letter);
      iw.insert(iw.end(), w.begin(), w.end());
      out[iw] += k;
      if (!w.empty() && w[0] == letter) out[Word(w.begin() + 1, w.end())] += k;
    }
    prune(out);
    return out;
  }

  /// Single-letter block coefficients K(n,r): s(i^n) Omega = sum_r K(n,r) l(i^r) Omega.
  long long block_coefficient(int n, int r) {
    if (r < 0 || r > n) return 0;
    Word w(n, 0);
    const WordCoeffs& c = s_to_l(w);
    auto it = c.find(Word(r, 0));
    return it == c.end() ? 0 : it->second;
  }

 private:
  void check(const Word& w) const {
    for (auto ch : w)
      if (ch >= alphabet_) throw std::domain_error("FreeBasisTable: letter out of alphabet");
  }
  static void prune(WordCoeffs& c) {
    for (auto it = c.begin(); it != c.end();)
      it = (it->second == 0) ? c.erase(it) : std::next(it);
  }

  int alphabet_;
  std::map<Word, WordCoeffs> s_to_l_, l_to_s_;
};

/// Unique s-expansion of a finite-particle vector given by exact l-basis
/// coefficients.
inline RatWordCoeffs expand_in_s(FreeBasisTable& table, const RatWordCoeffs& l_coeffs) {
  RatWordCoeffs out;
  for (const auto& [w, c] : l_coeffs) {
    if (c.is_zero()) continue;
    for (const auto& [v, k] : table.l_to_s(w)) out[v] += c * k;
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

/// Inverse of expand_in_s: synthesize the l-basis coefficients of a vector
/// from its s-expansion.
inline RatWordCoeffs synthesize_from_s(FreeBasisTable& table, const RatWordCoeffs& s_coeffs) {
  RatWordCoeffs out;
  for (const auto& [w, c] : s_coeffs) {
    if (c.is_zero()) continue;
    for (const auto& [v, k] : table.s_to_l(w)) out[v] += c * k;
  }
  for (auto it = out.begin(); it != out.end();)
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

/// Exact l-basis coefficients of a truncated-Fock vector with dyadic entries.
inline RatWordCoeffs l_coeffs_of(const FFockBasis& basis, const VectorXc& xi) {
  RatWordCoeffs out;
  for (long i = 0; i < basis.dim(); ++i) {
    Complex z = xi[i];
    if (z == Complex(0, 0)) continue;
    out[basis.words[i]] = RatC(rational_from_double(z.real()), rational_from_double(z.imag()));
  }
  return out;
}

/// Tracial modular conjugation of the free model in closed form: in the
/// s-basis the adjoint of an s-word is the reversed word, so J is
/// (change to s-basis) o (reverse words) o (change back), with coefficient
/// conjugation. Exact integer arithmetic end to end.
inline AntilinearOp modular_conjugation_free(const FFockBasis& basis) {
  FreeBasisTable table(basis.letters);
  MatrixXc jm = MatrixXc::Zero(basis.dim(), basis.dim());
  for (long col = 0; col < basis.dim(); ++col) {
    const Word& w = basis.words[col];
    for (const auto& [v, k] : table.l_to_s(w)) {
      Word rev(v.rbegin(), v.rend());
      for (const auto& [u, k2] : table.s_to_l(rev)) {
        if ((int)u.size() > basis.max_len) continue;  // cannot occur: |u| <= |rev|
        jm(basis.index(u), col) += Complex((double)(k * k2), 0);
      }
    }
  }
  return {jm};
}

/// Least-squares solve of m_n Omega = P_n(x Omega) inside an algebra frame,
/// where P_n projects onto words of length <= n. Returns the operator;
/// throws with the residual if no frame element reproduces the projection.
inline MatrixXc cutoff_projection(const AlgebraFrame& alg, const FFockBasis& basis,
                                  const MatrixXc& x, int n, double tol = 1e-8) {
  if (n < 0 || n > basis.max_len) throw std::domain_error("cutoff_projection: bad cutoff");
  VectorXc target = x * vacuum(basis.dim());
  long keep = basis.length_offset[n + 1];
  target.tail(basis.dim() - keep).setZero();
  MatrixXc a = gns_columns(alg, vacuum(basis.dim()));
  Eigen::CompleteOrthogonalDecomposition<MatrixXc> cod(a);
  VectorXc c = cod.solve(target);
  double resid = (a * c - target).norm();
  if (resid > tol * (1.0 + target.norm()))
    throw std::runtime_error("cutoff_projection: no algebra element matches the projection, residual " +
                             std::to_string(resid));
  MatrixXc m = MatrixXc::Zero(basis.dim(), basis.dim());
  for (int j = 0; j < alg.dim(); ++j) m += c[j] * alg.op(j);
  return m;
}

}  // namespace fockflow
