#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "qism/dense.hpp"
#include "qism/errors.hpp"
#include "qism/rmatrix.hpp"
#include "qism/scalar.hpp"

namespace qism {

/// Inclusive, 1-based range of chain sites.
struct SiteRange {
  std::size_t first = 1;
  std::size_t last = 1;

  std::size_t sites() const { return last - first + 1; }
  friend bool operator==(const SiteRange&, const SiteRange&) = default;
};

/// An inhomogeneous spin-1/2 chain: kernel plus one inhomogeneity per site.
template <Field F>
class ChainSpec {
 public:
  ChainSpec(Kernel<F> kernel, std::vector<F> xi) : kernel_(std::move(kernel)), xi_(std::move(xi)) {
    if (xi_.empty()) throw Error(ErrorCode::InvalidChain, "chain length must be positive");
  }

  static ChainSpec homogeneous(Kernel<F> kernel, std::size_t n, const F& xi) {
    return ChainSpec(std::move(kernel), std::vector<F>(n, xi));
  }

  const Kernel<F>& kernel() const { return kernel_; }
  std::size_t size() const { return xi_.size(); }
  const std::vector<F>& xi() const { return xi_; }
  /// 1-based site access.
  const F& xi(std::size_t site) const {
    if (site < 1 || site > xi_.size()) throw Error(ErrorCode::IndexOutOfRange, "site index out of range");
    return xi_[site - 1];
  }
  SiteRange full_range() const { return {1, xi_.size()}; }

  bool is_homogeneous() const {
    for (const F& x : xi_)
      if (!(x == xi_.front())) return false;
    return true;
  }

  void check_range(const SiteRange& r) const {
    if (r.first < 1 || r.first > r.last || r.last > xi_.size())
      throw Error(ErrorCode::InvalidRange, "site range [" + std::to_string(r.first) + "," +
                                               std::to_string(r.last) + "] is not inside the chain");
  }

 private:
  Kernel<F> kernel_;
  std::vector<F> xi_;
};

/// The 2x2 auxiliary-space matrix {{A, B}, {C, D}} of a (partial) monodromy
/// matrix; each entry is an operator on the 2^n-dimensional space of `range`.
template <Field F>
struct OperatorBlock {
  std::array<Matrix<F>, 4> entries;
  SiteRange range;

  const Matrix<F>& a() const { return entries[0]; }
  const Matrix<F>& b() const { return entries[1]; }
  const Matrix<F>& c() const { return entries[2]; }
  const Matrix<F>& d() const { return entries[3]; }
  /// 0-based auxiliary indices.
  const Matrix<F>& entry(std::size_t i, std::size_t j) const { return entries[2 * i + j]; }
  std::size_t sites() const { return range.sites(); }
  std::size_t dimension() const { return entries[0].rows(); }

  static OperatorBlock identity(SiteRange range) {
    const std::size_t dim = std::size_t{1} << range.sites();
    return {{Matrix<F>::identity(dim), Matrix<F>(dim, dim), Matrix<F>(dim, dim), Matrix<F>::identity(dim)}, range};
  }
};

template <Field F>
F local_alpha(const ChainSpec<F>& spec, const F& lambda, const F& xi) {
  return spec.kernel().alpha(lambda - xi);
}

template <Field F>
F local_delta(const ChainSpec<F>& spec, const F& lambda, const F& xi) {
  return spec.kernel().delta(lambda - xi);
}

/// L-operator at site j. XXX: (lambda - xi) Id + P, so A = diag(u+1, u),
/// D = diag(u, u+1), B = sigma^-, C = sigma^+. XXZ replaces u+1, u by
/// sinh(u+eta), sinh(u) and weights sigma^-/sigma^+ by sinh(eta).
template <Field F>
OperatorBlock<F> l_operator(const ChainSpec<F>& spec, std::size_t j, const F& lambda) {
  const F& xi = spec.xi(j);
  const F u = lambda - xi;
  const F alpha = spec.kernel().alpha(u);
  const F delta = spec.kernel().delta(u);
  const F w = spec.kernel().creation_weight();
  OperatorBlock<F> l{{Matrix<F>(2, 2), Matrix<F>(2, 2), Matrix<F>(2, 2), Matrix<F>(2, 2)}, {j, j}};
  l.entries[0](0, 0) = alpha;
  l.entries[0](1, 1) = delta;
  l.entries[1](1, 0) = w;  // up -> down
  l.entries[2](0, 1) = w;  // down -> up
  l.entries[3](0, 0) = delta;
  l.entries[3](1, 1) = alpha;
  return l;
}

/// Auxiliary-space product T1 T2 with quantum spaces tensored left to right,
/// e.g. B = A1 (x) B2 + B1 (x) D2.
template <Field F>
OperatorBlock<F> multiply_blocks(const OperatorBlock<F>& t1, const OperatorBlock<F>& t2) {
  if (t1.range.last + 1 != t2.range.first)
    throw Error(ErrorCode::NonAdjacentRanges, "left block must end right before the right block starts");
  OperatorBlock<F> out;
  out.range = {t1.range.first, t2.range.last};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      out.entries[2 * i + j] = kron(t1.entry(i, 0), t2.entry(0, j)) + kron(t1.entry(i, 1), t2.entry(1, j));
  return out;
}

template <Field F>
OperatorBlock<F> partial_monodromy(const ChainSpec<F>& spec, const SiteRange& range, const F& lambda) {
  spec.check_range(range);
  OperatorBlock<F> t = l_operator(spec, range.first, lambda);
  for (std::size_t j = range.first + 1; j <= range.last; ++j) t = multiply_blocks(t, l_operator(spec, j, lambda));
  return t;
}

template <Field F>
OperatorBlock<F> monodromy(const ChainSpec<F>& spec, const F& lambda) {
  return partial_monodromy(spec, spec.full_range(), lambda);
}

template <Field F>
StateVector<F> pseudovacuum(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "pseudovacuum needs at least one site");
  StateVector<F> v(std::size_t{1} << n, FieldTraits<F>::zero());
  v[0] = FieldTraits<F>::one();
  return v;
}

template <Field F>
struct VacuumEigenvalues {
  F a;
  F d;
};

template <Field F>
VacuumEigenvalues<F> vacuum_eigenvalues(const ChainSpec<F>& spec, const SiteRange& range, const F& lambda) {
  spec.check_range(range);
  F a = FieldTraits<F>::one();
  F d = FieldTraits<F>::one();
  for (std::size_t j = range.first; j <= range.last; ++j) {
    a *= local_alpha(spec, lambda, spec.xi(j));
    d *= local_delta(spec, lambda, spec.xi(j));
  }
  return {a, d};
}

template <Field F>
VacuumEigenvalues<F> vacuum_eigenvalues(const ChainSpec<F>& spec, const F& lambda) {
  return vacuum_eigenvalues(spec, spec.full_range(), lambda);
}

/// Matrix-free action of the monodromy matrix on a full-chain state:
/// returns {A v, B v, C v, D v}. Costs O(N 2^N) instead of forming 2^N x 2^N
/// operators.
template <Field F>
std::array<StateVector<F>, 4> apply_monodromy(const ChainSpec<F>& spec, const F& lambda, const StateVector<F>& v) {
  const std::size_t n = spec.size();
  if (v.size() != (std::size_t{1} << n)) throw Error(ErrorCode::InvalidArgument, "state length does not match 2^N");
  // x[c][b] holds (L_k ... L_N)_{cb} v, built from the right end of the chain.
  std::array<std::array<StateVector<F>, 2>, 2> x;
  x[0][0] = v;
  x[1][1] = v;
  x[0][1] = StateVector<F>(v.size(), FieldTraits<F>::zero());
  x[1][0] = x[0][1];
  for (std::size_t k = n; k >= 1; --k) {
    const OperatorBlock<F> l = l_operator(spec, k, lambda);
    std::array<std::array<StateVector<F>, 2>, 2> next;
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t b = 0; b < 2; ++b) {
        StateVector<F> acc = apply_on_sites(l.entry(c, 0), k, n, x[0][b]);
        const StateVector<F> second = apply_on_sites(l.entry(c, 1), k, n, x[1][b]);
        axpy(FieldTraits<F>::one(), second, acc);
        next[c][b] = std::move(acc);
      }
    x = std::move(next);
  }
  return {x[0][0], x[0][1], x[1][0], x[1][1]};
}

/// Max-norm of R12(l,m) T1(l) T2(m) - T2(m) T1(l) R12(l,m) on V1 (x) V2 (x) H,
/// evaluated blockwise: the (ab),(cd) block of the left side is
/// sum_ef R_{ab,ef} T_ec(l) T_fd(m), of the right side sum_ef T_bf(m) T_ae(l) R_{ef,cd}.
template <Field F>
Magnitude<F> rtt_residual(const ChainSpec<F>& spec, const SiteRange& range, const F& lambda, const F& mu) {
  const RMatrix4<F> r = build_r_matrix(spec.kernel(), lambda, mu);
  const OperatorBlock<F> tl = partial_monodromy(spec, range, lambda);
  const OperatorBlock<F> tm = partial_monodromy(spec, range, mu);
  const std::size_t dim = tl.dimension();

  // lm[p][q] = T_p(l) T_q(m) and ml[p][q] = T_q(m) T_p(l), p, q flattened (ij) indices
  std::array<std::array<Matrix<F>, 4>, 4> lm;
  std::array<std::array<Matrix<F>, 4>, 4> ml;
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t q = 0; q < 4; ++q) {
      lm[p][q] = tl.entries[p] * tm.entries[q];
      ml[p][q] = tm.entries[q] * tl.entries[p];
    }
  auto idx = [](std::size_t i, std::size_t j) { return 2 * i + j; };

  Magnitude<F> worst = FieldTraits<F>::zero_magnitude();
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t d = 0; d < 2; ++d) {
          Matrix<F> diff(dim, dim);
          for (std::size_t e = 0; e < 2; ++e)
            for (std::size_t f = 0; f < 2; ++f) {
              const F& left_coeff = r(idx(a, b), idx(e, f));
              if (!is_zero(left_coeff)) diff += left_coeff * lm[idx(e, c)][idx(f, d)];
              const F& right_coeff = r(idx(e, f), idx(c, d));
              if (!is_zero(right_coeff)) diff -= right_coeff * ml[idx(a, e)][idx(b, f)];
            }
          const Magnitude<F> m = max_norm(diff);
          if (m > worst) worst = m;
        }
  return worst;
}

template <Field F>
Magnitude<F> rtt_residual(const ChainSpec<F>& spec, const F& lambda, const F& mu) {
  return rtt_residual(spec, spec.full_range(), lambda, mu);
}

/// Named residuals of the explicit bilinear relations: equal-entry
/// commutators [T_jk(l), T_jk(m)] and the AB, BA, DB exchange relations.
template <Field F>
std::map<std::string, Magnitude<F>> commutation_residuals(const ChainSpec<F>& spec, const F& lambda, const F& mu) {
  const Kernel<F>& k = spec.kernel();
  const OperatorBlock<F> tl = monodromy(spec, lambda);
  const OperatorBlock<F> tm = monodromy(spec, mu);
  const F f_lm = k.f(lambda, mu);
  const F f_ml = k.f(mu, lambda);
  const F g_lm = k.g(lambda, mu);
  const F g_ml = k.g(mu, lambda);

  std::map<std::string, Magnitude<F>> out;
  const char* names[4] = {"AA", "BB", "CC", "DD"};
  for (std::size_t p = 0; p < 4; ++p)
    out[std::string("comm_") + names[p]] =
        max_abs_diff(tl.entries[p] * tm.entries[p], tm.entries[p] * tl.entries[p]);

  // A(m) B(l) = f(l,m) B(l) A(m) + g(m,l) B(m) A(l)
  out["exchange_AB"] =
      max_norm(tm.a() * tl.b() - f_lm * (tl.b() * tm.a()) - g_ml * (tm.b() * tl.a()));
  // B(m) A(l) = f(l,m) A(l) B(m) + g(m,l) A(m) B(l)
  out["exchange_BA"] =
      max_norm(tm.b() * tl.a() - f_lm * (tl.a() * tm.b()) - g_ml * (tm.a() * tl.b()));
  // D(m) B(l) = f(m,l) B(l) D(m) + g(l,m) B(m) D(l)
  out["exchange_DB"] =
      max_norm(tm.d() * tl.b() - f_ml * (tl.b() * tm.d()) - g_lm * (tm.b() * tl.d()));
  return out;
}

}  // namespace qism
