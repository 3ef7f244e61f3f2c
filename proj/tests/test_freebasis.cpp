#include <catch2/catch_amalgamated.hpp>

#include "fockflow/freebasis.hpp"

#include <random>

using namespace fockflow;

namespace {

// Matrix oracle: apply the unnormalized semicircular matrices l + l* built by
// the Fock module (an independent code path) to the vacuum, and read off the
// integer coefficients.
WordCoeffs oracle_s_to_l(const FFockBasis& basis, const Word& w) {
  Grid g(basis.letters, 1.0, 1);
  VectorXc v = vacuum(basis.dim());
  for (int p = (int)w.size() - 1; p >= 0; --p) {
    TruncatedOp l = free_create(basis, cell_fn(g, w[p], 0));
    v = (l.mat + SpMat(l.mat.adjoint())) * v;
  }
  WordCoeffs out;
  for (long i = 0; i < basis.dim(); ++i) {
    double re = v[i].real();
    long long k = std::llround(re);
    REQUIRE(std::abs(re - (double)k) < 1e-9);
    REQUIRE(std::abs(v[i].imag()) < 1e-12);
    if (k != 0) out[basis.words[i]] = k;
  }
  return out;
}

std::vector<Word> all_words(int alphabet, int max_len) {
  std::vector<Word> out{{}};
  std::vector<Word> last{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const auto& w : last)
      for (int a = 0; a < alphabet; ++a) {
        Word v = w;
        v.push_back((std::uint8_t)a);
        next.push_back(v);
      }
    out.insert(out.end(), next.begin(), next.end());
    last = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("s-to-l expansions on distinguished words", "[freebasis]") {
  FreeBasisTable t(3);

  SECTION("reduced words are fixed") {
    for (Word w : {Word{}, Word{0}, Word{0, 1}, Word{1, 0, 2}, Word{0, 1, 0, 2}}) {
      WordCoeffs c = t.s_to_l(w);
      REQUIRE(c.size() == 1);
      REQUIRE(c.at(w) == 1);
    }
  }
  SECTION("a doubled letter picks up the shortened word") {
    WordCoeffs c = t.s_to_l({1, 1});
    REQUIRE(c.size() == 2);
    REQUIRE(c.at(Word{1, 1}) == 1);
    REQUIRE(c.at(Word{}) == 1);

    WordCoeffs c2 = t.s_to_l({0, 0, 1, 2});
    REQUIRE(c2.size() == 2);
    REQUIRE(c2.at(Word{0, 0, 1, 2}) == 1);
    REQUIRE(c2.at(Word{1, 2}) == 1);
  }
  SECTION("l-to-s inverts with a sign") {
    WordCoeffs c = t.l_to_s({2, 2});
    REQUIRE(c.size() == 2);
    REQUIRE(c.at(Word{2, 2}) == 1);
    REQUIRE(c.at(Word{}) == -1);
  }
}

TEST_CASE("single-letter block table", "[freebasis]") {
  FreeBasisTable t(1);

  SECTION("even/odd vanishing pattern") {
    for (int n = 0; n <= 10; ++n)
      for (int r = 0; r <= n; ++r)
        if ((n - r) % 2 != 0) REQUIRE(t.block_coefficient(n, r) == 0);
  }
  SECTION("top coefficient is one and K(2,0)=1") {
    for (int n = 0; n <= 10; ++n) REQUIRE(t.block_coefficient(n, n) == 1);
    REQUIRE(t.block_coefficient(2, 0) == 1);
  }
  SECTION("odd-row recursion K(2m+1,2r+1) = K(2m,2r) + K(2m,2r+2)") {
    for (int m = 0; m <= 4; ++m)
      for (int r = 0; r <= m; ++r)
        REQUIRE(t.block_coefficient(2 * m + 1, 2 * r + 1) ==
                t.block_coefficient(2 * m, 2 * r) + t.block_coefficient(2 * m, 2 * r + 2));
  }
  SECTION("even-row recursion K(2m,2r) = K(2m-1,2r-1) + K(2m-1,2r+1)") {
    for (int m = 1; m <= 5; ++m)
      for (int r = 0; r <= m; ++r)
        REQUIRE(t.block_coefficient(2 * m, 2 * r) ==
                t.block_coefficient(2 * m - 1, 2 * r - 1) +
                t.block_coefficient(2 * m - 1, 2 * r + 1));
  }
  SECTION("vacuum coefficients are the Catalan numbers") {
    long long catalan[] = {1, 1, 2, 5, 14, 42};
    for (int m = 0; m <= 5; ++m) REQUIRE(t.block_coefficient(2 * m, 0) == catalan[m]);
  }
}

TEST_CASE("recursion agrees with the matrix oracle", "[freebasis]") {
  const int alphabet = 2, max_len = 5;
  FFockBasis basis(alphabet, max_len);
  FreeBasisTable t(alphabet);
  for (const Word& w : all_words(alphabet, max_len)) {
    WordCoeffs expect = oracle_s_to_l(basis, w);
    REQUIRE(t.s_to_l(w) == expect);
  }
}

TEST_CASE("biorthogonality and parity of the coefficient tables", "[freebasis]") {
  const int alphabet = 2, max_len = 5;
  FreeBasisTable t(alphabet);
  auto words = all_words(alphabet, max_len);

  SECTION("round trip l_to_s then s_to_l is the identity") {
    for (const Word& w : words) {
      WordCoeffs acc;
      for (const auto& [v, k] : t.l_to_s(w))
        for (const auto& [u, k2] : t.s_to_l(v)) acc[u] += k * k2;
      for (auto it = acc.begin(); it != acc.end();)
        it = (it->second == 0) ? acc.erase(it) : std::next(it);
      REQUIRE(acc.size() == 1);
      REQUIRE(acc.at(w) == 1);
    }
  }
  SECTION("round trip s_to_l then l_to_s is the identity") {
    for (const Word& w : words) {
      WordCoeffs acc;
      for (const auto& [v, k] : t.s_to_l(w))
        for (const auto& [u, k2] : t.l_to_s(v)) acc[u] += k * k2;
      for (auto it = acc.begin(); it != acc.end();)
        it = (it->second == 0) ? acc.erase(it) : std::next(it);
      REQUIRE(acc.size() == 1);
      REQUIRE(acc.at(w) == 1);
    }
  }
  SECTION("coefficients vanish between lengths of different parity") {
    for (const Word& w : words)
      for (const auto& [v, k] : t.s_to_l(w)) {
        REQUIRE(((int)w.size() - (int)v.size()) % 2 == 0);
        REQUIRE((int)v.size() <= (int)w.size());
        REQUIRE(k > 0);
      }
  }
}

TEST_CASE("exact s-expansions of vectors", "[freebasis]") {
  FreeBasisTable t(2);

  SECTION("the vacuum is its own expansion") {
    RatWordCoeffs v{{Word{}, RatC(1)}};
    RatWordCoeffs e = expand_in_s(t, v);
    REQUIRE(e.size() == 1);
    REQUIRE(e.at(Word{}) == RatC(1));
  }
  SECTION("reduced l-words expand to themselves") {
    RatWordCoeffs v{{Word{0, 1}, RatC(1)}};
    RatWordCoeffs e = expand_in_s(t, v);
    REQUIRE(e.size() == 1);
    REQUIRE(e.at(Word{0, 1}) == RatC(1));
  }
  SECTION("expansion and synthesis are mutually inverse on rational vectors") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<long long> num(-8, 8);
    auto words = all_words(2, 4);
    for (int rep = 0; rep < 10; ++rep) {
      RatWordCoeffs v;
      for (const auto& w : words) {
        long long a = num(rng), b = num(rng);
        if (a || b) v[w] = RatC(Rat(a, 3), Rat(b, 2));
      }
      RatWordCoeffs round = synthesize_from_s(t, expand_in_s(t, v));
      REQUIRE(round == v);
    }
  }
}

TEST_CASE("free modular conjugation in closed form", "[freebasis]") {
  FFockBasis basis(2, 4);
  AntilinearOp j = modular_conjugation_free(basis);
  Grid g(2, 1.0, 1);

  SECTION("J fixes the vacuum and is an involution") {
    VectorXc om = vacuum(basis.dim());
    REQUIRE((j.apply(om) - om).norm() < 1e-14);
    std::mt19937_64 rng(67);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 5; ++rep) {
      VectorXc xi(basis.dim());
      for (long i = 0; i < basis.dim(); ++i) xi[i] = Complex(nd(rng), nd(rng));
      REQUIRE((j.apply(j.apply(xi)) - xi).norm() < 1e-10);
    }
  }
  SECTION("J is antiunitary") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 5; ++rep) {
      VectorXc xi(basis.dim()), eta(basis.dim());
      for (long i = 0; i < basis.dim(); ++i) {
        xi[i] = Complex(nd(rng), nd(rng));
        eta[i] = Complex(nd(rng), nd(rng));
      }
      REQUIRE(std::abs(j.apply(xi).dot(j.apply(eta)) - eta.dot(xi)) < 1e-10);
    }
  }
  SECTION("J(x Omega) = x* Omega for semicircular words") {
    std::mt19937_64 rng(73);
    std::uniform_int_distribution<int> pick(0, 1), len(0, 4);
    std::vector<MatrixXc> gens;
    for (int i = 0; i < 2; ++i)
      gens.push_back(dense(semicircular(basis, cell_fn(g, i, 0)).mat));
    VectorXc om = vacuum(basis.dim());
    for (int rep = 0; rep < 20; ++rep) {
      MatrixXc x = MatrixXc::Identity(basis.dim(), basis.dim());
      for (int i = 0, l = len(rng); i < l; ++i) x = x * gens[pick(rng)];
      REQUIRE((j.apply(x * om) - x.adjoint() * om).norm() < 1e-10);
    }
  }
}

TEST_CASE("particle cutoff stays inside the algebra", "[freebasis]") {
  const int letters = 2, cap = 3;
  FFockBasis basis(letters, cap);
  Grid g(letters, 1.0, 1);
  std::vector<MatrixXc> gens;
  for (int i = 0; i < letters; ++i)
    gens.push_back(dense(semicircular(basis, cell_fn(g, i, 0)).mat));
  AlgebraFrame phi = word_span(GeneratorSet(gens), cap);
  VectorXc om = vacuum(basis.dim());

  SECTION("cutoff above the particle content returns the same vector") {
    MatrixXc x = gens[0] * gens[1];
    MatrixXc m = cutoff_projection(phi, basis, x, cap);
    REQUIRE((m * om - x * om).norm() < 1e-10);
  }
  SECTION("vacuum cutoff of s(f) vanishes") {
    MatrixXc m = cutoff_projection(phi, basis, gens[0], 0);
    REQUIRE((m * om).norm() < 1e-10);
  }
  SECTION("vacuum cutoff of s(f)^2 is |f|^2/4") {
    GridFn f = cell_fn(g, 0, 0);
    MatrixXc s2 = gens[0] * gens[0];
    MatrixXc m = cutoff_projection(phi, basis, s2, 0);
    VectorXc expect = (norm_sq(f) / 4.0) * om;
    REQUIRE((m * om - expect).norm() < 1e-10);
  }
}
