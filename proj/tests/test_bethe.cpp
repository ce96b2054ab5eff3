#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "chain_oracle.hpp"
#include "qism/bethe.hpp"
#include "qism/combinatorics.hpp"
#include "qism/sampling.hpp"

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

ChainSpec<Rational> homogeneous_xxx(std::size_t n) {
  return ChainSpec<Rational>::homogeneous(Kernel<Rational>::rational(), n, Rational(0));
}

ChainSpec<Rational> random_xxx(Sampler& smp, std::size_t n) {
  return ChainSpec<Rational>(Kernel<Rational>::rational(), smp.distinct<Rational>(n));
}

SpectralSet<Rational> set_of(std::initializer_list<Rational> xs) { return SpectralSet<Rational>(std::vector<Rational>(xs)); }

Rational det2(const Matrix<Rational>& m, std::size_t i, std::size_t j, const Rational& shift) {
  return (m(i, i) - shift) * (m(j, j) - shift) - m(i, j) * m(j, i);
}

}  // namespace

TEST(SpectralSet, RejectsCoincidences) {
  EXPECT_EQ(code_of([] { set_of({Rational(1, 2), Rational(3), Rational(1, 2)}); }), ErrorCode::CoincidentParameters);
  EXPECT_NO_THROW(set_of({Rational(1, 2), Rational(3)}));
  EXPECT_EQ(code_of([] { SpectralSet<Complex>({Complex(0.1, 0.2), Complex(0.1, 0.2)}); }),
            ErrorCode::CoincidentParameters);
}

TEST(FormalBetheVector, EmptySetIsPseudovacuum) {
  Sampler smp(1);
  const auto spec = random_xxx(smp, 3);
  EXPECT_EQ(formal_bethe_vector(spec, SpectralSet<Rational>{}), pseudovacuum<Rational>(3));
}

TEST(FormalBetheVector, TwoSitesOneExcitation) {
  const auto spec = homogeneous_xxx(2);
  const auto v = formal_bethe_vector(spec, set_of({Rational(5)}));
  // down at site 2 (index 1) weighs alpha(5, xi_1) = 6; down at site 1 (index 2) weighs delta(5, xi_2) = 5
  EXPECT_EQ(v, (StateVector<Rational>{Rational(0), Rational(6), Rational(5), Rational(0)}));
}

TEST(FormalBetheVector, TooManyExcitations) {
  const auto spec = homogeneous_xxx(2);
  EXPECT_EQ(code_of([&] { (void)formal_bethe_vector(spec, set_of({Rational(1), Rational(2), Rational(3)})); }),
            ErrorCode::InvalidExcitationCount);
}

TEST(FormalBetheVectorProperty, MatchesOracleProduct) {
  Sampler smp(16);
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t m = 0; m <= std::min<std::size_t>(n, 3); ++m) {
      const auto spec = random_xxx(smp, n);
      const auto roots = smp.distinct<Rational>(m);
      ASSERT_EQ(formal_bethe_vector(spec, SpectralSet<Rational>(roots)), oracle_bethe_vector(spec, roots));
    }
  const auto specz = ChainSpec<Complex>(Kernel<Complex>::trigonometric(Complex(0.5, 0.2)), smp.distinct<Complex>(4));
  const auto rz = smp.distinct<Complex>(3);
  EXPECT_LE(relative_difference(formal_bethe_vector(specz, SpectralSet<Complex>(rz)), oracle_bethe_vector(specz, rz)),
            1e-12);
}

// Support only on basis states with exactly M down spins.
TEST(FormalBetheVectorProperty, SectorSupport) {
  Sampler smp(2);
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t m = 0; m <= std::min<std::size_t>(n, 3); ++m) {
      const auto spec = random_xxx(smp, n);
      const auto v = formal_bethe_vector(spec, SpectralSet<Rational>(smp.distinct<Rational>(m)));
      for (std::size_t i = 0; i < v.size(); ++i)
        if (excitation_count(i) != static_cast<int>(m)) ASSERT_EQ(v[i], 0);
    }
}

// Literal equality under every permutation of the parameters.
TEST(FormalBetheVectorProperty, PermutationInvariant) {
  Sampler smp(3);
  for (std::size_t n = 2; n <= 5; ++n)
    for (std::size_t m = 2; m <= std::min<std::size_t>(n, 3); ++m) {
      const auto spec = random_xxx(smp, n);
      const SpectralSet<Rational> roots(smp.distinct<Rational>(m));
      const auto ref = formal_bethe_vector(spec, roots);
      for_each_permutation(m, [&](const std::vector<std::size_t>& p) {
        ASSERT_EQ(formal_bethe_vector(spec, roots.permuted(p)), ref);
      });
    }
  const auto specz = ChainSpec<Complex>(Kernel<Complex>::trigonometric(Complex(0.4, 0.3)), smp.distinct<Complex>(4));
  const SpectralSet<Complex> rz(smp.distinct<Complex>(3));
  const auto refz = formal_bethe_vector(specz, rz);
  for_each_permutation(3, [&](const std::vector<std::size_t>& p) {
    EXPECT_LE(relative_difference(formal_bethe_vector(specz, rz.permuted(p)), refz), 1e-12);
  });
}

TEST(Tau, EmptySet) {
  Sampler smp(4);
  const auto spec = random_xxx(smp, 3);
  const Rational mu = smp.rational();
  const auto ev = vacuum_eigenvalues(spec, mu);
  EXPECT_EQ(tau_eigenvalue(spec, mu, SpectralSet<Rational>{}), ev.a + ev.d);
}

// tau(1 | {-1/2}) on the homogeneous two-site chain: a(1) f(-1/2, 1) + d(1) f(1, -1/2)
// = 4 * (1/3) + 1 * (5/3) = 3, confirmed as an eigenvalue of the dense 4x4 transfer matrix.
TEST(Tau, TwoSiteRootIsDenseEigenvalue) {
  const auto spec = homogeneous_xxx(2);
  const auto roots = set_of({Rational(-1, 2)});
  EXPECT_EQ(tau_eigenvalue(spec, Rational(1), roots), 3);
  const auto t = transfer_matrix(spec, Rational(1));
  const auto v = formal_bethe_vector(spec, roots);
  EXPECT_EQ(t * v, (StateVector<Rational>{Rational(0), Rational(3) * v[1], Rational(3) * v[2], Rational(0)}));
  EXPECT_NE(max_norm(v), 0);
  // full spectrum {5, 3, 5, 5}: vacuum, the one-magnon block {3, 5}, all-down
  EXPECT_EQ(t(0, 0), 5);
  EXPECT_EQ(t(3, 3), 5);
  EXPECT_EQ(det2(t, 1, 2, Rational(3)), 0);
  EXPECT_EQ(det2(t, 1, 2, Rational(5)), 0);
}

TEST(Tau, ProbeOnRoot) {
  const auto spec = homogeneous_xxx(2);
  EXPECT_EQ(code_of([&] { (void)tau_eigenvalue(spec, Rational(1, 3), set_of({Rational(1, 3)})); }),
            ErrorCode::ProbeCoincidesWithRoot);
}

TEST(BetheY, TwoSiteLinearEquation) {
  const auto spec = homogeneous_xxx(2);
  Sampler smp(5);
  for (int s = 0; s < 20; ++s) {
    const Rational l = smp.rational();
    EXPECT_EQ(bethe_y(spec, 0, set_of({l})), (l + 1) * (l + 1) - l * l);
  }
  EXPECT_EQ(bethe_y(spec, 0, set_of({Rational(-1, 2)})), 0);
  const auto cert = certify_eigenvector(spec, set_of({Rational(-1, 2)}), Rational(1));
  EXPECT_EQ(cert.residual, 0);
  EXPECT_EQ(cert.tau, 3);
}

TEST(BetheY, NonzeroAwayFromRoots) {
  Sampler smp(6);
  const auto spec = random_xxx(smp, 4);
  for (int s = 0; s < 20; ++s) {
    const SpectralSet<Rational> roots(smp.distinct<Rational>(2));
    EXPECT_NE(bethe_y(spec, 0, roots), 0);
  }
  EXPECT_EQ(code_of([&] { (void)bethe_y(spec, 2, set_of({Rational(1), Rational(2)})); }), ErrorCode::IndexOutOfRange);
}

TEST(BetheY, SymmetricInRemainingRoots) {
  Sampler smp(7);
  const auto spec = random_xxx(smp, 5);
  for (int s = 0; s < 10; ++s) {
    const auto p = smp.distinct<Rational>(4);
    const Rational ref = bethe_y(spec, 0, SpectralSet<Rational>(p));
    for_each_permutation(3, [&](const std::vector<std::size_t>& perm) {
      std::vector<Rational> q{p[0], p[1 + perm[0]], p[1 + perm[1]], p[1 + perm[2]]};
      EXPECT_EQ(bethe_y(spec, 0, SpectralSet<Rational>(q)), ref);
    });
  }
}

// The cancelled form equals tau(mu) * prod 1/g(lambda_a, mu) wherever the
// latter is defined.
TEST(BetheY, CancelledFormMatchesDefinitionOffRoots) {
  Sampler smp(8);
  const auto spec = random_xxx(smp, 4);
  const auto k = spec.kernel();
  for (int s = 0; s < 20; ++s) {
    const auto p = smp.distinct<Rational>(4);
    const SpectralSet<Rational> roots(std::vector<Rational>(p.begin(), p.begin() + 3));
    const Rational mu = p[3];
    Rational expect = tau_eigenvalue(spec, mu, roots);
    for (const Rational& l : roots) expect /= k.g(l, mu);
    EXPECT_EQ(bethe_y_at(spec, mu, roots), expect);
  }
  const auto kt = Kernel<Complex>::trigonometric(Complex(0.35, 0.2));
  const auto specz = ChainSpec<Complex>(kt, smp.distinct<Complex>(3));
  for (int s = 0; s < 20; ++s) {
    const auto p = smp.distinct<Complex>(3);
    const SpectralSet<Complex> roots(std::vector<Complex>(p.begin(), p.begin() + 2));
    Complex expect = tau_eigenvalue(specz, p[2], roots);
    for (const Complex& l : roots) expect /= kt.g(l, p[2]);
    EXPECT_LT(std::abs(bethe_y_at(specz, p[2], roots) - expect), 1e-10 * std::max(1.0, std::abs(expect)));
  }
}

TEST(Certify, EmptySet) {
  Sampler smp(9);
  const auto spec = random_xxx(smp, 3);
  const Rational mu = smp.rational();
  const auto c = certify_eigenvector(spec, SpectralSet<Rational>{}, mu);
  const auto ev = vacuum_eigenvalues(spec, mu);
  EXPECT_EQ(c.residual, 0);
  EXPECT_EQ(c.tau, ev.a + ev.d);
}

TEST(Certify, GenericParametersAreNotEigenvectors) {
  Sampler smp(10);
  const auto spec = random_xxx(smp, 4);
  for (int s = 0; s < 10; ++s) {
    const auto p = smp.distinct<Rational>(3);
    const auto c = certify_eigenvector(spec, SpectralSet<Rational>({p[0], p[1]}), p[2]);
    EXPECT_GT(c.residual, Rational(1, 1000000));
  }
}

TEST(Certify, ExactRootOnFourSites) {
  // lambda = -1/2 solves ((l + 1) / l)^4 = 1
  const auto spec = homogeneous_xxx(4);
  Sampler smp(11);
  for (int s = 0; s < 5; ++s) {
    const Rational mu = smp.rational();
    if (mu == Rational(-1, 2)) continue;
    EXPECT_EQ(certify_eigenvector(spec, set_of({Rational(-1, 2)}), mu).residual, 0);
  }
}

TEST(Certify, VanishingVector) {
  // 2 l m + l + m + 1 = 0 kills the two-magnon vector of the homogeneous two-site chain
  const auto spec = homogeneous_xxx(2);
  EXPECT_EQ(max_norm(formal_bethe_vector(spec, set_of({Rational(0), Rational(-1)}))), 0);
  EXPECT_EQ(code_of([&] { (void)certify_eigenvector(spec, set_of({Rational(0), Rational(-1)}), Rational(3)); }),
            ErrorCode::ZeroVector);
}

TEST(Solve, TwoSitesSingleRoot) {
  const auto spec = to_float_chain(homogeneous_xxx(2));
  const std::vector<std::vector<Complex>> guesses{{Complex(0.3, 0.7)}, {Complex(-2.0, -1.0)}, {Complex(4.0, 0.1)}};
  const auto res = solve_bethe(spec, 1, guesses);
  ASSERT_EQ(res.certificates.size(), 1u);
  EXPECT_LT(std::abs(res.certificates[0].roots[0] - Complex(-0.5, 0.0)), 1e-14);
  EXPECT_LT(res.certificates[0].eigen_residual, 1e-12);
  EXPECT_TRUE(res.certificates[0].valid(1e-12));
}

TEST(Solve, FourSitesOneMagnon) {
  const auto spec = to_float_chain(homogeneous_xxx(4));
  Sampler smp(12);
  std::vector<std::vector<Complex>> guesses;
  for (int i = 0; i < 24; ++i) guesses.push_back({smp.complex(2.0)});
  const auto res = solve_bethe(spec, 1, guesses);
  const std::vector<Complex> expect{Complex(-0.5, -0.5), Complex(-0.5, 0.0), Complex(-0.5, 0.5)};
  ASSERT_EQ(res.certificates.size(), expect.size());
  // real parts tie, so the certificate order is not asserted
  for (const Complex& e : expect) {
    const auto hit = std::find_if(res.certificates.begin(), res.certificates.end(),
                                  [&](const BetheCertificate& c) { return std::abs(c.roots[0] - e) < 1e-10; });
    ASSERT_NE(hit, res.certificates.end()) << e;
    EXPECT_LT(hit->eigen_residual, 1e-10);
    EXPECT_LT(hit->bethe_residuals[0], 1e-10);
  }
}

TEST(Solve, EmptyExcitationSet) {
  Sampler smp(13);
  const auto spec = to_float_chain(random_xxx(smp, 3));
  const auto res = solve_bethe(spec, 0, std::vector<std::vector<Complex>>{});
  ASSERT_EQ(res.certificates.size(), 1u);
  const auto& c = res.certificates[0];
  EXPECT_TRUE(c.roots.empty());
  const auto ev = vacuum_eigenvalues(spec, res.probe);
  EXPECT_LT(std::abs(c.tau_value - (ev.a + ev.d)), 1e-12);
  EXPECT_LT(c.eigen_residual, 1e-12);
}

TEST(Solve, Preconditions) {
  const auto spec = to_float_chain(homogeneous_xxx(2));
  EXPECT_EQ(code_of([&] { (void)solve_bethe(spec, 3, std::vector<std::vector<Complex>>{{1.0, 2.0, 3.0}}); }),
            ErrorCode::InvalidExcitationCount);
  EXPECT_EQ(code_of([&] { (void)solve_bethe(spec, 1, std::vector<std::vector<Complex>>{}); }), ErrorCode::InvalidArgument);
}

TEST(Solve, CollapsingAndSingularStartsAreReportedNotFatal) {
  const auto spec = to_float_chain(homogeneous_xxx(4));
  // symmetric starts collapse onto each other; starts near {0, -1} approach the singular solution
  const std::vector<std::vector<Complex>> guesses{
      {Complex(0.01, 0.0), Complex(-1.01, 0.0)}, {Complex(0.2, 0.3), Complex(0.2, 0.3000000001)}};
  SolveResult res;
  ASSERT_NO_THROW(res = solve_bethe(spec, 2, guesses));
  for (const auto& f : res.failures)
    EXPECT_TRUE(f.code == ErrorCode::NoConvergence || f.code == ErrorCode::CollapsedRoots ||
                f.code == ErrorCode::SingularRoots || f.code == ErrorCode::CoincidentParameters)
        << to_string(f.code);
}

// Every converged certificate is self-consistent; the probe is deterministic.
TEST(SolveProperty, CertificatesAreConsistent) {
  Sampler smp(14);
  for (std::size_t n : {3u, 4u, 5u}) {
    const auto spec = ChainSpec<Complex>(Kernel<Complex>::rational(), smp.distinct<Complex>(n));
    for (std::size_t m = 1; m <= 2; ++m) {
      std::vector<std::vector<Complex>> guesses(16);
      for (auto& g : guesses)
        for (std::size_t i = 0; i < m; ++i) g.push_back(smp.complex(2.0));
      const auto res = solve_bethe(spec, m, guesses);
      const auto again = solve_bethe(spec, m, guesses);
      EXPECT_EQ(res.probe, again.probe);
      ASSERT_EQ(res.certificates.size(), again.certificates.size());
      for (const auto& c : res.certificates) {
        EXPECT_LT(c.eigen_residual, 1e-10);
        for (double y : c.bethe_residuals) EXPECT_LT(y, 1e-10);
        for (std::size_t i = 0; i < c.roots.size(); ++i)
          EXPECT_LT(std::abs(bethe_y(spec, i, c.roots)), 1e-10);
        EXPECT_LT(std::abs(c.tau_value - tau_eigenvalue(spec, c.probe, c.roots)), 1e-9);
      }
    }
  }
}

TEST(Solve, TrigonometricChain) {
  Sampler smp(15);
  const auto spec = ChainSpec<Complex>(Kernel<Complex>::trigonometric(Complex(0.6, 0.0)), smp.distinct<Complex>(4, {}));
  std::vector<std::vector<Complex>> guesses(32);
  for (auto& g : guesses) g.push_back(smp.complex(1.0));
  const auto res = solve_bethe(spec, 1, guesses);
  EXPECT_FALSE(res.certificates.empty());
  for (const auto& c : res.certificates) EXPECT_TRUE(c.valid(1e-10));
}
