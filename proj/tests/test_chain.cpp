#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "qism/bethe.hpp"
#include "qism/chain.hpp"
#include "qism/sampling.hpp"
#include "chain_oracle.hpp"

using namespace qism;
using namespace qism::reference;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

/// Dense RTT residual on V1 (x) V2 (x) H, everything as full matrices.
template <Field F>
Magnitude<F> oracle_rtt(const ChainSpec<F>& spec, const F& lambda, const F& mu) {
  const std::size_t n = spec.size();
  const std::size_t q = std::size_t{1} << n;
  const Matrix<F> tl = oracle_monodromy(spec, lambda);
  const Matrix<F> tm = oracle_monodromy(spec, mu);
  const RMatrix4<F> r = build_r_matrix(spec.kernel(), lambda, mu);
  const std::size_t dim = 4 * q;
  Matrix<F> t1(dim, dim), t2(dim, dim), rr(dim, dim);
  for (std::size_t row = 0; row < dim; ++row)
    for (std::size_t col = 0; col < dim; ++col) {
      const std::size_t a1 = row / (2 * q), a2 = (row / q) & 1, s = row % q;
      const std::size_t b1 = col / (2 * q), b2 = (col / q) & 1, t = col % q;
      if (a2 == b2) t1(row, col) = tl(a1 * q + s, b1 * q + t);
      if (a1 == b1) t2(row, col) = tm(a2 * q + s, b2 * q + t);
      if (s == t) rr(row, col) = r(2 * a1 + a2, 2 * b1 + b2);
    }
  return max_norm(Matrix<F>(rr * t1 * t2 - t2 * t1 * rr));
}

ChainSpec<Rational> random_xxx(Sampler& smp, std::size_t n) {
  return ChainSpec<Rational>(Kernel<Rational>::rational(), smp.distinct<Rational>(n));
}

ChainSpec<Complex> random_xxz(Sampler& smp, std::size_t n, Complex eta) {
  return ChainSpec<Complex>(Kernel<Complex>::trigonometric(eta), smp.distinct<Complex>(n));
}

}  // namespace

TEST(ChainSpec, Validation) {
  const auto k = Kernel<Rational>::rational();
  EXPECT_EQ(code_of([&] { ChainSpec<Rational>(k, {}); }), ErrorCode::InvalidChain);
  const auto spec = ChainSpec<Rational>(k, {Rational(0), Rational(1)});
  EXPECT_EQ(code_of([&] { (void)spec.xi(0); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { (void)spec.xi(3); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { (void)l_operator(spec, 3, Rational(1)); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(code_of([&] { (void)partial_monodromy(spec, SiteRange{2, 1}, Rational(1)); }), ErrorCode::InvalidRange);
  EXPECT_EQ(code_of([&] { (void)partial_monodromy(spec, SiteRange{1, 3}, Rational(1)); }), ErrorCode::InvalidRange);
  EXPECT_FALSE(spec.is_homogeneous());
  EXPECT_TRUE(ChainSpec<Rational>::homogeneous(k, 3, Rational(2)).is_homogeneous());
}

TEST(LOperator, LocalVacuumValuesAtOrigin) {
  const auto spec = ChainSpec<Rational>::homogeneous(Kernel<Rational>::rational(), 1, Rational(0));
  EXPECT_EQ(local_alpha(spec, Rational(0), Rational(0)), 1);
  EXPECT_EQ(local_delta(spec, Rational(0), Rational(0)), 0);
  EXPECT_EQ(rtt_residual(spec, Rational(0), Rational(3, 7)), 0);
  const auto l = l_operator(spec, 1, Rational(0));
  EXPECT_EQ(l.a()(0, 0), 1);
  EXPECT_EQ(l.d()(0, 0), 0);
}

TEST(LOperator, LowerLeftAnnihilatesLocalVacuum) {
  Sampler smp(3);
  const auto spec = random_xxx(smp, 3);
  const StateVector<Rational> up{Rational(1), Rational(0)};
  for (int s = 0; s < 20; ++s)
    for (std::size_t j = 1; j <= 3; ++j) {
      const auto l = l_operator(spec, j, smp.rational());
      EXPECT_EQ(max_norm(l.c() * up), 0);
    }
}

TEST(LOperator, LocalCreationIsNilpotent) {
  Sampler smp(4);
  const auto spec = random_xxx(smp, 1);
  const auto specz = random_xxz(smp, 1, Complex(0.4, 0.2));
  const StateVector<Rational> vac = pseudovacuum<Rational>(1);
  for (int s = 0; s < 20; ++s) {
    const auto p = smp.distinct<Rational>(2);
    const auto b1 = l_operator(spec, 1, p[0]).b();
    const auto b2 = l_operator(spec, 1, p[1]).b();
    EXPECT_EQ(max_norm(b1 * (b2 * vac)), 0);
    EXPECT_EQ(max_norm(b1 * b2), 0);  // matrix identity, not only on |0>
    const auto pc = smp.distinct<Complex>(2);
    EXPECT_EQ(max_norm(l_operator(specz, 1, pc[0]).b() * l_operator(specz, 1, pc[1]).b()), 0.0);
  }
}

TEST(Monodromy, SingleSiteIsLOperator) {
  Sampler smp(5);
  const auto spec = random_xxx(smp, 1);
  const Rational l = smp.rational();
  const auto t = monodromy(spec, l);
  const auto lo = l_operator(spec, 1, l);
  for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(t.entries[p], lo.entries[p]);
}

TEST(Monodromy, TwoSiteVacuumEigenvalue) {
  Sampler smp(6);
  const auto spec = random_xxx(smp, 2);
  for (int s = 0; s < 10; ++s) {
    const Rational l = smp.rational();
    const auto vac = pseudovacuum<Rational>(2);
    const Rational expect = (l - spec.xi(1) + 1) * (l - spec.xi(2) + 1);
    StateVector<Rational> av = monodromy(spec, l).a() * vac;
    EXPECT_EQ(av[0], expect);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(av[i], 0);
  }
}

TEST(Monodromy, MatchesDenseOracle) {
  Sampler smp(7);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto spec = random_xxx(smp, n);
    const Rational l = smp.rational();
    const auto t = monodromy(spec, l);
    const auto o = oracle_monodromy(spec, l);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) EXPECT_EQ(t.entry(a, b), oracle_block(o, a, b, n)) << "n=" << n;

    const auto specz = random_xxz(smp, n, Complex(0.3, -0.5));
    const Complex lz = smp.complex();
    const auto tz = monodromy(specz, lz);
    const auto oz = oracle_monodromy(specz, lz);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) EXPECT_LT(max_abs_diff(tz.entry(a, b), oracle_block(oz, a, b, n)), 1e-12);
  }
}

TEST(Monodromy, FoldOverAnyContiguousPartition) {
  Sampler smp(8);
  const std::size_t n = 4;
  const auto spec = random_xxx(smp, n);
  const Rational l = smp.rational();
  const auto full = monodromy(spec, l);
  // every composition of 4 into contiguous parts: cut masks over positions 1..3
  for (unsigned mask = 0; mask < 8; ++mask) {
    std::size_t first = 1;
    std::optional<OperatorBlock<Rational>> acc;
    for (std::size_t x = 1; x <= n; ++x) {
      if (x == n || (mask >> (x - 1) & 1u)) {
        const auto part = partial_monodromy(spec, SiteRange{first, x}, l);
        acc = acc ? multiply_blocks(*acc, part) : part;
        first = x + 1;
      }
    }
    for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(acc->entries[p], full.entries[p]) << "mask=" << mask;
  }
  for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(partial_monodromy(spec, spec.full_range(), l).entries[p], full.entries[p]);
}

TEST(Monodromy, DisjointPartialEntriesCommute) {
  Sampler smp(9);
  const auto spec = random_xxx(smp, 4);
  const auto p = smp.distinct<Rational>(2);
  const auto left = partial_monodromy(spec, SiteRange{1, 2}, p[0]);
  const auto right = partial_monodromy(spec, SiteRange{3, 4}, p[1]);
  const auto id = Matrix<Rational>::identity(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const auto x = kron(left.entries[i], id);
      const auto y = kron(id, right.entries[j]);
      EXPECT_EQ(x * y, y * x);
    }
}

TEST(Monodromy, PartialBlocksAnnihilateTheirVacuumWithC) {
  Sampler smp(10);
  const auto spec = random_xxx(smp, 5);
  for (std::size_t first = 1; first <= 5; ++first)
    for (std::size_t last = first; last <= 5; ++last) {
      const auto t = partial_monodromy(spec, SiteRange{first, last}, smp.rational());
      EXPECT_EQ(max_norm(t.c() * pseudovacuum<Rational>(last - first + 1)), 0);
    }
}

TEST(MultiplyBlocks, IdentityAndAdjacency) {
  const auto i1 = OperatorBlock<Rational>::identity(SiteRange{1, 1});
  const auto i2 = OperatorBlock<Rational>::identity(SiteRange{2, 3});
  const auto prod = multiply_blocks(i1, i2);
  const auto expect = OperatorBlock<Rational>::identity(SiteRange{1, 3});
  for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(prod.entries[p], expect.entries[p]);
  EXPECT_EQ(prod.range, (SiteRange{1, 3}));
  EXPECT_EQ(code_of([&] { (void)multiply_blocks(i2, i1); }), ErrorCode::NonAdjacentRanges);
  EXPECT_EQ(code_of([&] { (void)multiply_blocks(i1, OperatorBlock<Rational>::identity(SiteRange{3, 3})); }),
            ErrorCode::NonAdjacentRanges);
}

TEST(MultiplyBlocks, Associative) {
  Sampler smp(11);
  for (int s = 0; s < 10; ++s) {
    const auto spec = random_xxx(smp, 3);
    const Rational l = smp.rational();
    const auto t1 = l_operator(spec, 1, l), t2 = l_operator(spec, 2, l), t3 = l_operator(spec, 3, l);
    const auto left = multiply_blocks(multiply_blocks(t1, t2), t3);
    const auto right = multiply_blocks(t1, multiply_blocks(t2, t3));
    for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(left.entries[p], right.entries[p]);
  }
}

TEST(MultiplyBlocks, VacuumEigenvalueFactorizes) {
  Sampler smp(12);
  const auto spec = random_xxx(smp, 5);
  for (int s = 0; s < 10; ++s) {
    const Rational l = smp.rational();
    const auto full = vacuum_eigenvalues(spec, l);
    for (std::size_t x = 1; x < 5; ++x) {
      const auto a1 = vacuum_eigenvalues(spec, SiteRange{1, x}, l);
      const auto a2 = vacuum_eigenvalues(spec, SiteRange{x + 1, 5}, l);
      EXPECT_EQ(full.a, a1.a * a2.a);
      EXPECT_EQ(full.d, a1.d * a2.d);
    }
  }
}

TEST(Pseudovacuum, SmallCases) {
  EXPECT_EQ(pseudovacuum<Rational>(1), (StateVector<Rational>{Rational(1), Rational(0)}));
  EXPECT_EQ(pseudovacuum<Rational>(2), (StateVector<Rational>{Rational(1), Rational(0), Rational(0), Rational(0)}));
  EXPECT_EQ(code_of([] { (void)pseudovacuum<Rational>(0); }), ErrorCode::InvalidArgument);
}

TEST(Pseudovacuum, AnnihilatedByC) {
  Sampler smp(13);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto spec = random_xxx(smp, n);
    for (int s = 0; s < 5; ++s) EXPECT_EQ(max_norm(monodromy(spec, smp.rational()).c() * pseudovacuum<Rational>(n)), 0);
  }
}

TEST(VacuumEigenvalues, HomogeneousTwoSitesAtOne) {
  const auto spec = ChainSpec<Rational>::homogeneous(Kernel<Rational>::rational(), 2, Rational(0));
  const auto ev = vacuum_eigenvalues(spec, Rational(1));
  EXPECT_EQ(ev.a, 4);
  EXPECT_EQ(ev.d, 1);
  const auto t = monodromy(spec, Rational(1));
  const auto vac = pseudovacuum<Rational>(2);
  EXPECT_EQ(t.a() * vac, (StateVector<Rational>{Rational(4), Rational(0), Rational(0), Rational(0)}));
  EXPECT_EQ(t.d() * vac, (StateVector<Rational>{Rational(1), Rational(0), Rational(0), Rational(0)}));
}

TEST(VacuumEigenvalues, ActionOnPseudovacuum) {
  Sampler smp(14);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto spec = random_xxx(smp, n);
    const auto specz = random_xxz(smp, n, Complex(0.55, 0.1));
    for (int s = 0; s < 5; ++s) {
      const Rational l = smp.rational();
      const auto ev = vacuum_eigenvalues(spec, l);
      const auto vac = pseudovacuum<Rational>(n);
      const auto t = monodromy(spec, l);
      StateVector<Rational> av = t.a() * vac, dv = t.d() * vac;
      axpy(Rational(-ev.a), vac, av);
      axpy(Rational(-ev.d), vac, dv);
      EXPECT_EQ(max_norm(av), 0);
      EXPECT_EQ(max_norm(dv), 0);

      const Complex lz = smp.complex();
      const auto evz = vacuum_eigenvalues(specz, lz);
      const auto parts = apply_monodromy(specz, lz, pseudovacuum<Complex>(n));
      StateVector<Complex> az = parts[0];
      axpy(Complex(-evz.a), pseudovacuum<Complex>(n), az);
      EXPECT_LT(max_norm(az), 1e-12);
      EXPECT_LT(max_norm(parts[2]), 1e-300);
    }
  }
}

TEST(ApplyMonodromy, MatchesDenseBlocks) {
  Sampler smp(15);
  const auto spec = random_xxx(smp, 4);
  const Rational l = smp.rational();
  StateVector<Rational> v(16);
  for (auto& x : v) x = smp.rational();
  const auto t = monodromy(spec, l);
  const auto parts = apply_monodromy(spec, l, v);
  for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(parts[p], t.entries[p] * v);
}

TEST(Rtt, TwoSiteExactMatchesOracle) {
  Sampler smp(16);
  const auto spec = random_xxx(smp, 2);
  for (int s = 0; s < 10; ++s) {
    const auto p = smp.distinct<Rational>(2);
    EXPECT_EQ(rtt_residual(spec, p[0], p[1]), 0);
    EXPECT_EQ(oracle_rtt(spec, p[0], p[1]), 0);
  }
}

TEST(Rtt, TwoSiteTrigonometric) {
  Sampler smp(17);
  const auto spec = random_xxz(smp, 2, Complex(0.5, 0));
  for (int s = 0; s < 10; ++s) {
    const auto p = smp.distinct<Complex>(2);
    EXPECT_LE(rtt_residual(spec, p[0], p[1]), 1e-12);
    EXPECT_LE(oracle_rtt(spec, p[0], p[1]), 1e-12);
  }
}

TEST(Rtt, SingleLOperator) {
  Sampler smp(18);
  const auto spec = random_xxx(smp, 1);
  const auto p = smp.distinct<Rational>(2);
  EXPECT_EQ(rtt_residual(spec, p[0], p[1]), 0);
}

// Negative control: with R evaluated at swapped arguments the oracle residual
// is nonzero, so its zeros above carry information.
TEST(Rtt, OracleRejectsSwappedRMatrixArguments) {
  Sampler smp(19);
  const auto spec = random_xxx(smp, 2);
  const auto p = smp.distinct<Rational>(2);
  const std::size_t q = 4;
  const Matrix<Rational> tl = oracle_monodromy(spec, p[0]);
  const Matrix<Rational> tm = oracle_monodromy(spec, p[1]);
  const RMatrix4<Rational> r = build_r_matrix(spec.kernel(), p[1], p[0]);  // wrong order
  Matrix<Rational> t1(16, 16), t2(16, 16), rr(16, 16);
  for (std::size_t row = 0; row < 16; ++row)
    for (std::size_t col = 0; col < 16; ++col) {
      const std::size_t a1 = row / 8, a2 = (row / 4) & 1, s = row % 4;
      const std::size_t b1 = col / 8, b2 = (col / 4) & 1, t = col % 4;
      if (a2 == b2) t1(row, col) = tl(a1 * q + s, b1 * q + t);
      if (a1 == b1) t2(row, col) = tm(a2 * q + s, b2 * q + t);
      if (s == t) rr(row, col) = r(2 * a1 + a2, 2 * b1 + b2);
    }
  EXPECT_NE(max_norm(Matrix<Rational>(rr * t1 * t2 - t2 * t1 * rr)), 0);
}

// Literal zero for N <= 5 and 50 draws each; the blockwise library residual
// is cross-checked against the full-matrix oracle up to N = 3.
TEST(RttProperty, ExactChainsUpToFiveSites) {
  Sampler smp(20);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto spec = random_xxx(smp, n);
    for (int s = 0; s < 50; ++s) {
      const auto p = smp.distinct<Rational>(2);
      ASSERT_EQ(rtt_residual(spec, p[0], p[1]), 0) << "n=" << n;
      if (n <= 3 && s < 5) ASSERT_EQ(oracle_rtt(spec, p[0], p[1]), 0);
    }
  }
}

TEST(RttProperty, PartialRangesSatisfyRtt) {
  Sampler smp(21);
  const auto spec = random_xxx(smp, 4);
  const auto p = smp.distinct<Rational>(2);
  for (std::size_t first = 1; first <= 4; ++first)
    for (std::size_t last = first; last <= 4; ++last) EXPECT_EQ(rtt_residual(spec, SiteRange{first, last}, p[0], p[1]), 0);
}

TEST(Commutation, BBExactThreeSites) {
  Sampler smp(22);
  const auto spec = random_xxx(smp, 3);
  const auto p = smp.distinct<Rational>(2);
  const auto res = commutation_residuals(spec, p[0], p[1]);
  EXPECT_EQ(res.at("comm_BB"), 0);
  for (const auto& [name, value] : res) EXPECT_EQ(value, 0) << name;
}

TEST(Commutation, ABExactTwoSitesAgainstOracle) {
  Sampler smp(23);
  const auto spec = random_xxx(smp, 2);
  const auto p = smp.distinct<Rational>(2);
  const Rational l = p[0], m = p[1];
  EXPECT_EQ(commutation_residuals(spec, l, m).at("exchange_AB"), 0);
  const auto k = spec.kernel();
  const auto tl = oracle_monodromy(spec, l), tm = oracle_monodromy(spec, m);
  const auto al = oracle_block(tl, 0, 0, 2), bl = oracle_block(tl, 0, 1, 2);
  const auto am = oracle_block(tm, 0, 0, 2), bm = oracle_block(tm, 0, 1, 2);
  const Matrix<Rational> lhs = am * bl;
  const Matrix<Rational> rhs = k.f(l, m) * (bl * am) + k.g(m, l) * (bm * al);
  EXPECT_EQ(lhs, rhs);
}

TEST(Commutation, DBTrigonometricTwoSites) {
  Sampler smp(24);
  const auto spec = random_xxz(smp, 2, Complex(0.5, 0.2));
  for (int s = 0; s < 10; ++s) {
    const auto p = smp.distinct<Complex>(2);
    const auto res = commutation_residuals(spec, p[0], p[1]);
    EXPECT_LE(res.at("exchange_DB"), 1e-12);
    for (const auto& [name, value] : res) EXPECT_LE(value, 1e-11) << name;
  }
}

TEST(Commutation, AllRelationsExactRandomChains) {
  Sampler smp(25);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto spec = random_xxx(smp, n);
    for (int s = 0; s < 5; ++s) {
      const auto p = smp.distinct<Rational>(2);
      for (const auto& [name, value] : commutation_residuals(spec, p[0], p[1])) EXPECT_EQ(value, 0) << name;
    }
  }
}

TEST(Commutation, CoincidentArgumentsArePoles) {
  Sampler smp(26);
  const auto spec = random_xxx(smp, 2);
  EXPECT_EQ(code_of([&] { (void)commutation_residuals(spec, Rational(1), Rational(1)); }),
            ErrorCode::PoleAtCoincidentArguments);
}

TEST(TransferMatrix, CommutesAtTwoPoints) {
  Sampler smp(27);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto spec = random_xxx(smp, n);
    const auto p = smp.distinct<Rational>(2);
    EXPECT_EQ(transfer_commutator_residual(spec, p[0], p[1]), 0);
    const auto tl = transfer_matrix(spec, p[0]), tm = transfer_matrix(spec, p[1]);
    EXPECT_EQ(tl * tm, tm * tl);
    const auto specz = random_xxz(smp, n, Complex(0.8, -0.3));
    const auto pz = smp.distinct<Complex>(2);
    EXPECT_LE(transfer_commutator_residual(specz, pz[0], pz[1]), 1e-11);
  }
}

TEST(TransferMatrix, VacuumEigenvalueAndSectorStructure) {
  Sampler smp(28);
  const auto spec = random_xxx(smp, 4);
  const Rational mu = smp.rational();
  const auto t = transfer_matrix(spec, mu);
  const auto ev = vacuum_eigenvalues(spec, mu);
  StateVector<Rational> tv = t * pseudovacuum<Rational>(4);
  axpy(Rational(-(ev.a + ev.d)), pseudovacuum<Rational>(4), tv);
  EXPECT_EQ(max_norm(tv), 0);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j)
      if (excitation_count(i) != excitation_count(j)) EXPECT_EQ(t(i, j), 0);
  StateVector<Rational> v(16);
  for (auto& x : v) x = smp.rational();
  EXPECT_EQ(apply_transfer(spec, mu, v), t * v);
}
