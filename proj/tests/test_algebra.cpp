#include <catch2/catch_amalgamated.hpp>

#include "fockflow/algebra.hpp"

#include <random>

using namespace fockflow;

namespace {

std::vector<MatrixXc> clifford_gens(int d, const Grid& g, const AFockBasis& b) {
  std::vector<MatrixXc> gens;
  for (int i = 0; i < d; ++i) gens.push_back(dense(clifford_field(b, cell_fn(g, i, 0))));
  return gens;
}

MatrixXc random_hermitian(long d, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXc m(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return (m + MatrixXc(m.adjoint())) / 2.0;
}

// Oracle: commutant dimension via the explicitly assembled Kronecker matrix
// I (x) g - g^T (x) I, stacked over generators, rank by full-pivot LU.
int commutant_dim_oracle(const std::vector<MatrixXc>& gens) {
  const long d = gens[0].rows();
  std::vector<MatrixXc> all = gens;
  for (const auto& g : gens) all.push_back(g.adjoint());
  MatrixXc big(d * d * (long)all.size(), d * d);
  long row0 = 0;
  for (const auto& g : all) {
    // C[(i,j),(k,l)] entries of X -> gX - Xg in column-major vec coordinates
    MatrixXc c = MatrixXc::Zero(d * d, d * d);
    for (long j = 0; j < d; ++j)
      for (long i = 0; i < d; ++i)
        for (long k = 0; k < d; ++k) {
          c(j * d + i, j * d + k) += g(i, k);           // (gX)_{ij}
          c(j * d + i, k * d + i) -= g(k, j);           // (Xg)_{ij}
        }
    big.block(row0, 0, d * d, d * d) = c;
    row0 += d * d;
  }
  Eigen::FullPivLU<MatrixXc> lu(big);
  lu.setThreshold(1e-10);
  return (int)(d * d - lu.rank());
}

}  // namespace

TEST_CASE("algebra closure dimensions", "[algebra]") {
  SECTION("identity alone spans one dimension") {
    GeneratorSet gens({MatrixXc::Identity(4, 4)});
    REQUIRE(algebra_closure(gens).dim() == 1);
  }
  SECTION("full Clifford generators close onto the expected algebra") {
    for (int d : {2, 4}) {
      Grid g(d, 1.0, 1);
      AFockBasis b(d);
      GeneratorSet gens(clifford_gens(d, g, b));
      // dim 2^{2 floor(d/2)} for even d
      REQUIRE(algebra_closure(gens).dim() == (1 << d));
    }
  }
  SECTION("a single even word spans a two-dimensional algebra") {
    Grid g(2, 1.0, 1);
    AFockBasis b(2);
    auto gens = clifford_gens(2, g, b);
    MatrixXc w = gens[0] * gens[1];
    AlgebraFrame alg = algebra_closure(GeneratorSet({w}));
    REQUIRE(alg.dim() == 2);
  }
  SECTION("word span is a filtration, not a closure") {
    Grid g(2, 1.0, 1);
    AFockBasis b(2);
    GeneratorSet gens(clifford_gens(2, g, b));
    REQUIRE(word_span(gens, 0).dim() == 1);
    REQUIRE(word_span(gens, 1).dim() == 3);
    REQUIRE(word_span(gens, 2).dim() == 4);
  }
}

TEST_CASE("commutants via stacked Sylvester nullspaces", "[algebra]") {
  Grid g(2, 1.0, 1);
  AFockBasis b(2);
  auto gens = clifford_gens(2, g, b);

  SECTION("commutant of a generating pair is the scalars") {
    std::mt19937_64 rng(5);
    MatrixXc h1 = random_hermitian(5, rng), h2 = random_hermitian(5, rng);
    AlgebraFrame c = commutant(GeneratorSet({h1, h2}));
    REQUIRE(c.dim() == 1);
    REQUIRE(c.span.rejection(c.shape.vec(MatrixXc::Identity(5, 5))) < 1e-18);
  }
  SECTION("commutant of the identity is everything") {
    AlgebraFrame c = commutant(GeneratorSet({MatrixXc::Identity(3, 3)}));
    REQUIRE(c.dim() == 9);
  }
  SECTION("commutant of one even word matches the brute-force oracle") {
    MatrixXc w = gens[0] * gens[1];
    AlgebraFrame c = commutant(GeneratorSet({w}));
    REQUIRE(c.dim() == commutant_dim_oracle({w}));
    // the relative commutant inside the generated Clifford algebra is only
    // {1, w}: the two-dimensional subalgebra
    AlgebraFrame cl = algebra_closure(GeneratorSet(gens));
    Subspace rel = intersect(c.span, cl.span);
    REQUIRE(rel.dim() == 2);
  }
  SECTION("double commutant reproduces the closure dimension") {
    MatrixXc w = gens[0] * gens[1];
    GeneratorSet gw({w});
    AlgebraFrame c1 = commutant(gw);
    AlgebraFrame c2 = commutant(GeneratorSet(c1.all_ops()));
    REQUIRE(c2.dim() == algebra_closure(gw).dim());
  }
  SECTION("dimension cap is enforced") {
    REQUIRE_THROWS_AS(commutant(GeneratorSet({MatrixXc::Identity(3, 3)}), 2),
                      std::length_error);
  }
}

TEST_CASE("intertwiner spaces", "[algebra]") {
  Grid g(2, 1.0, 1);
  AFockBasis b(2);
  auto gens = clifford_gens(2, g, b);

  SECTION("identity twist reduces to the commutant") {
    GeneratorSet gs(gens);
    AlgebraFrame c = commutant(gs);
    AlgebraFrame e = intertwiners(gs.ops, gs.ops);
    REQUIRE(e.dim() == c.dim());
    REQUIRE(subspace_equal(e.span, c.span));
  }
  SECTION("intertwiners form a right module over the source commutant") {
    // sigma: embed Cl(1) into Cl(2) by the one-cell shift
    Grid gs_grid(1, 1.0, 1);
    AFockBasis bs(1);
    std::vector<MatrixXc> src = {dense(clifford_field(bs, cell_fn(gs_grid, 0, 0)))};
    std::vector<MatrixXc> img = {gens[1]};
    AlgebraFrame e = intertwiners(img, src);
    REQUIRE(e.dim() > 0);
    AlgebraFrame c_src = commutant(GeneratorSet(src));
    for (int i = 0; i < e.dim(); ++i)
      for (int j = 0; j < c_src.dim(); ++j) {
        MatrixXc tc = e.shape.unvec(e.span.frame.col(i)) * c_src.op(j);
        REQUIRE(e.span.rejection(e.shape.vec(tc)) < 1e-16);
      }
  }
}

TEST_CASE("GNS trace and generic modular conjugation", "[algebra]") {
  const int d = 4;
  Grid g(d, 0.5, 1);
  AFockBasis b(d);
  GeneratorSet gens(clifford_gens(d, g, b));
  AlgebraFrame alg = algebra_closure(gens);
  VectorXc om = vacuum(b.dim());

  SECTION("the trace of the identity is one") {
    REQUIRE(std::abs(gns_trace(MatrixXc::Identity(b.dim(), b.dim()), om) - Complex(1, 0)) < 1e-15);
  }
  SECTION("two-point function tau(u(f)u(g)) = <f,g>/2") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 5; ++rep) {
      VectorXc cf(d), cg(d);
      for (int i = 0; i < d; ++i) { cf[i] = nd(rng); cg[i] = nd(rng); }
      GridFn f(g, cf, true), h(g, cg, true);
      MatrixXc x = dense(clifford_field(b, f)) * dense(clifford_field(b, h));
      REQUIRE(std::abs(gns_trace(x, om) - inner(f, h) / 2.0) < 1e-12);
    }
  }
  SECTION("vacuum is cyclic and the generic J matches the closed form") {
    REQUIRE(omega_cyclic(alg, om));
    AntilinearOp jg = modular_conjugation_generic(alg, om);
    AntilinearOp jc = modular_conjugation_clifford(b);
    REQUIRE((jg.m - jc.m).norm() < 1e-9);
  }
  SECTION("J M J lands in the commutant of M") {
    AntilinearOp j = modular_conjugation_clifford(b);
    AlgebraFrame com = commutant(gens, 256);
    for (int i = 0; i < std::min(6, alg.dim()); ++i) {
      MatrixXc jxj = conjugate_by(j, alg.op(i));
      REQUIRE(com.span.rejection(com.shape.vec(jxj)) < 1e-16);
    }
  }
  SECTION("non-cyclic vacuum is reported with the deficiency") {
    AlgebraFrame small = algebra_closure(GeneratorSet({MatrixXc::Identity(b.dim(), b.dim())}));
    REQUIRE_THROWS_WITH(modular_conjugation_generic(small, om),
                        Catch::Matchers::ContainsSubstring("not cyclic"));
  }
}
