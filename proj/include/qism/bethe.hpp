#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qism/chain.hpp"
#include "qism/dense.hpp"
#include "qism/errors.hpp"
#include "qism/rmatrix.hpp"
#include "qism/sampling.hpp"
#include "qism/scalar.hpp"

namespace qism {

/// Ordered, pairwise-distinct spectral parameters lambda_1..lambda_M.
template <Field F>
class SpectralSet {
 public:
  SpectralSet() = default;
  explicit SpectralSet(std::vector<F> lambdas) : lambdas_(std::move(lambdas)) {
    for (std::size_t j = 0; j < lambdas_.size(); ++j)
      for (std::size_t k = j + 1; k < lambdas_.size(); ++k) {
        const bool same = is_exact_v<F> ? lambdas_[j] == lambdas_[k]
                                        : !(FieldTraits<F>::to_double(magnitude<F>(lambdas_[j] - lambdas_[k])) >=
                                            kPoleThreshold);
        if (same)
          throw Error(ErrorCode::CoincidentParameters,
                      "spectral parameters " + std::to_string(j) + " and " + std::to_string(k) + " coincide");
      }
  }

  std::size_t size() const { return lambdas_.size(); }
  bool empty() const { return lambdas_.empty(); }
  const F& operator[](std::size_t i) const { return lambdas_[i]; }
  const std::vector<F>& values() const { return lambdas_; }
  auto begin() const { return lambdas_.begin(); }
  auto end() const { return lambdas_.end(); }

  /// Same parameters in the order given by `order` (a permutation of 0..M-1).
  SpectralSet permuted(std::span<const std::size_t> order) const {
    std::vector<F> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(lambdas_.at(i));
    return SpectralSet(std::move(out));
  }

 private:
  std::vector<F> lambdas_;
};

inline ChainSpec<Complex> to_float_chain(const ChainSpec<Rational>& spec) {
  std::vector<Complex> xi;
  for (const Rational& x : spec.xi()) xi.push_back(to_complex(x));
  return ChainSpec<Complex>(Kernel<Complex>::rational(), std::move(xi));
}

inline ChainSpec<Complex> to_float_chain(const ChainSpec<Complex>& spec) { return spec; }

template <Field F>
void check_excitations(const ChainSpec<F>& spec, std::size_t m) {
  if (m > spec.size())
    throw Error(ErrorCode::InvalidExcitationCount,
                "M=" + std::to_string(m) + " exceeds chain length N=" + std::to_string(spec.size()));
}

/// prod_j B(lambda_j) |0>, applying B(lambda_M) first.
template <Field F>
StateVector<F> formal_bethe_vector(const ChainSpec<F>& spec, const SpectralSet<F>& roots) {
  check_excitations(spec, roots.size());
  StateVector<F> v = pseudovacuum<F>(spec.size());
  for (std::size_t k = roots.size(); k-- > 0;) v = monodromy(spec, roots[k]).b() * v;
  return v;
}

/// Dense A(mu) + D(mu).
template <Field F>
Matrix<F> transfer_matrix(const ChainSpec<F>& spec, const F& mu) {
  const OperatorBlock<F> t = monodromy(spec, mu);
  return t.a() + t.d();
}

/// Matrix-free (A(mu) + D(mu)) v.
template <Field F>
StateVector<F> apply_transfer(const ChainSpec<F>& spec, const F& mu, const StateVector<F>& v) {
  auto parts = apply_monodromy(spec, mu, v);
  axpy(FieldTraits<F>::one(), parts[3], parts[0]);
  return parts[0];
}

/// Entrywise max-norm of T(lambda) T(mu) - T(mu) T(lambda), one basis column
/// at a time.
template <Field F>
Magnitude<F> transfer_commutator_residual(const ChainSpec<F>& spec, const F& lambda, const F& mu) {
  const std::size_t dim = std::size_t{1} << spec.size();
  Magnitude<F> worst = FieldTraits<F>::zero_magnitude();
  StateVector<F> e(dim, FieldTraits<F>::zero());
  for (std::size_t col = 0; col < dim; ++col) {
    e[col] = FieldTraits<F>::one();
    const StateVector<F> lm = apply_transfer(spec, lambda, apply_transfer(spec, mu, e));
    const StateVector<F> ml = apply_transfer(spec, mu, apply_transfer(spec, lambda, e));
    worst = std::max(worst, max_norm(lm - ml));
    e[col] = FieldTraits<F>::zero();
  }
  return worst;
}

/// tau(mu|{lambda}) = a(mu) prod f(lambda_a, mu) + d(mu) prod f(mu, lambda_a).
template <Field F>
F tau_eigenvalue(const ChainSpec<F>& spec, const F& mu, const SpectralSet<F>& roots) {
  const VacuumEigenvalues<F> vac = vacuum_eigenvalues(spec, mu);
  F left = vac.a;
  F right = vac.d;
  try {
    for (const F& l : roots) {
      left *= spec.kernel().f(l, mu);
      right *= spec.kernel().f(mu, l);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::PoleAtCoincidentArguments)
      throw Error(ErrorCode::ProbeCoincidesWithRoot, "probe mu hits a pole of f at one of the roots");
    throw;
  }
  return left + right;
}

/// Y(mu|{lambda}) = tau(mu|{lambda}) prod g^{-1}(lambda_a, mu), with the
/// poles of f cancelled analytically against g^{-1}:
///   f(l_a, mu)/g(l_a, mu) = f_over_g(l_a, mu)
///   f(mu, l_a)/g(l_a, mu) = -f_over_g(mu, l_a)
/// so the expression stays regular at mu = lambda_k. Takes a raw root list:
/// the cancelled form is defined even for coincident entries.
template <Field F>
F bethe_y_at(const ChainSpec<F>& spec, const F& mu, std::span<const F> roots) {
  const Kernel<F>& k = spec.kernel();
  const VacuumEigenvalues<F> vac = vacuum_eigenvalues(spec, mu);
  F left = vac.a;
  F right = vac.d;
  for (const F& l : roots) {
    left *= k.f_over_g(l, mu);
    right *= k.f_over_g(mu, l);
  }
  if (roots.size() % 2 == 1) right = -right;
  return left + right;
}

template <Field F>
F bethe_y_at(const ChainSpec<F>& spec, const F& mu, const SpectralSet<F>& roots) {
  return bethe_y_at(spec, mu, std::span<const F>(roots.values()));
}

/// Y(lambda_k|{lambda}), 0-based k.
template <Field F>
F bethe_y(const ChainSpec<F>& spec, std::size_t k, const SpectralSet<F>& roots) {
  if (k >= roots.size()) throw Error(ErrorCode::IndexOutOfRange, "root index out of range");
  return bethe_y_at(spec, roots[k], roots);
}

template <Field F>
struct EigenCertification {
  Magnitude<F> residual;
  F tau;
};

/// ||T(mu) v - tau v||_inf / ||v||_inf for the formal Bethe vector v.
template <Field F>
EigenCertification<F> certify_eigenvector(const ChainSpec<F>& spec, const SpectralSet<F>& roots, const F& mu) {
  const F tau = tau_eigenvalue(spec, mu, roots);
  const StateVector<F> v = formal_bethe_vector(spec, roots);
  const Magnitude<F> norm = max_norm(v);
  bool vanished;
  if constexpr (is_exact_v<F>) vanished = sgn(norm) == 0;
  else vanished = norm < kPoleThreshold;
  if (vanished)
    throw Error(ErrorCode::ZeroVector, "formal Bethe vector vanishes");
  StateVector<F> tv = apply_transfer(spec, mu, v);
  axpy(F(-tau), v, tv);
  if constexpr (is_exact_v<F>) {
    Rational r = max_norm(tv) / norm;
    r.canonicalize();
    return {r, tau};
  } else {
    return {max_norm(tv) / norm, tau};
  }
}

// ---------------------------------------------------------------------------
// Newton solver for the Bethe equations (Float mode only).

struct SolverOptions {
  double damping = 0.5;
  int max_iterations = 200;
  double tolerance = 1e-12;        // on ||Y||_inf
  double separation = 1e-8;        // roots closer than this have collapsed
  double dedup = 1e-6;             // root sets equal up to permutation within this
  double probe_clearance = 0.1;    // probe distance from roots and inhomogeneities
  std::uint64_t probe_seed = 0x5eed5eedULL;
  int polish_iterations = 60;      // extra steps while the residual keeps dropping
  double singular_threshold = 1e-8;
  int max_halvings = 40;
};

struct BetheCertificate {
  SpectralSet<Complex> roots;
  std::vector<double> bethe_residuals;
  double eigen_residual = 0.0;
  Complex tau_value{};
  Complex probe{};
  std::size_t guess_index = 0;
  int iterations = 0;

  bool valid(double tolerance) const {
    return eigen_residual < tolerance &&
           std::all_of(bethe_residuals.begin(), bethe_residuals.end(), [&](double r) { return r < tolerance; });
  }
};

struct GuessFailure {
  std::size_t guess_index = 0;
  ErrorCode code = ErrorCode::NoConvergence;
  std::string message;
};

struct SolveResult {
  std::vector<BetheCertificate> certificates;
  std::vector<GuessFailure> failures;
  Complex probe{};
};

namespace detail {

inline Eigen::VectorXcd bethe_system(const ChainSpec<Complex>& spec, const Eigen::VectorXcd& x) {
  const std::span<const Complex> roots(x.data(), static_cast<std::size_t>(x.size()));
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = bethe_y_at(spec, x[i], roots);
  return out;
}

inline double inf_norm(const Eigen::VectorXcd& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
    m = std::max(m, a);
  }
  return m;
}

inline double min_separation(const Eigen::VectorXcd& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = i + 1; j < x.size(); ++j) best = std::min(best, std::abs(x[i] - x[j]));
  return best;
}

inline Eigen::MatrixXcd numeric_jacobian(const ChainSpec<Complex>& spec, const Eigen::VectorXcd& x) {
  const Eigen::Index m = x.size();
  Eigen::MatrixXcd jac(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXcd xp = x;
    Eigen::VectorXcd xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (bethe_system(spec, xp) - bethe_system(spec, xm)) / (2.0 * h);
  }
  return jac;
}

inline bool canonical_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

inline bool same_root_set(const std::vector<Complex>& a, const std::vector<Complex>& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const Complex& x : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j] && std::abs(x - b[j]) < tol) {
        used[j] = true;
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace detail

/// Newton iteration (numeric Jacobian, step halving on residual increase) on
/// Y(lambda_k|{lambda}) = 0, one run per caller-supplied guess. Converged,
/// admissible, deduplicated root sets are certified against the transfer
/// matrix at one common seeded probe. Per-guess failures are reported, not
/// thrown.
inline SolveResult solve_bethe(const ChainSpec<Complex>& spec, std::size_t m,
                               std::span<const std::vector<Complex>> guesses, const SolverOptions& opt = {}) {
  check_excitations(spec, m);
  if (guesses.empty() && m > 0) throw Error(ErrorCode::InvalidArgument, "solve_bethe needs at least one guess");

  struct Converged {
    std::vector<Complex> roots;
    std::size_t guess_index;
    int iterations;
  };
  std::vector<Converged> found;
  SolveResult result;

  if (m == 0) {
    found.push_back({{}, 0, 0});
  } else {
    for (std::size_t gi = 0; gi < guesses.size(); ++gi) {
      const auto& guess = guesses[gi];
      if (guess.size() != m) {
        result.failures.push_back({gi, ErrorCode::InvalidArgument, "guess has wrong length"});
        continue;
      }
      Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(guess.data(), static_cast<Eigen::Index>(m));
      Eigen::VectorXcd r = detail::bethe_system(spec, x);
      double norm = detail::inf_norm(r);
      int it = 0;
      bool ok = std::isfinite(norm);
      std::string why = ok ? "" : "residual not finite at the initial guess";

      auto newton_step = [&](double& step_norm, Eigen::VectorXcd& x_out, Eigen::VectorXcd& r_out) {
        const Eigen::MatrixXcd jac = detail::numeric_jacobian(spec, x);
        const Eigen::VectorXcd dx = jac.fullPivLu().solve(r);
        if (!std::isfinite(detail::inf_norm(dx))) return false;
        double step = 1.0;
        for (int h = 0; h <= opt.max_halvings; ++h, step *= opt.damping) {
          Eigen::VectorXcd xt = x - step * dx;
          Eigen::VectorXcd rt = detail::bethe_system(spec, xt);
          const double nt = detail::inf_norm(rt);
          if (std::isfinite(nt) && nt < norm) {
            x_out = std::move(xt);
            r_out = std::move(rt);
            step_norm = nt;
            return true;
          }
        }
        return false;
      };

      while (ok && norm >= opt.tolerance) {
        if (++it > opt.max_iterations) {
          ok = false;
          why = "no convergence after " + std::to_string(opt.max_iterations) + " iterations";
          break;
        }
        Eigen::VectorXcd xn;
        Eigen::VectorXcd rn;
        double nn = 0;
        if (!newton_step(nn, xn, rn)) {
          ok = false;
          why = "Newton step failed to reduce the residual";
          break;
        }
        x = std::move(xn);
        r = std::move(rn);
        norm = nn;
        if (detail::min_separation(x) < opt.separation) break;
      }
      if (!ok) {
        result.failures.push_back({gi, ErrorCode::NoConvergence, why});
        continue;
      }
      if (detail::min_separation(x) < opt.separation) {
        result.failures.push_back({gi, ErrorCode::CollapsedRoots, "two roots merged"});
        continue;
      }
      for (int p = 0; p < opt.polish_iterations && norm > 0.0; ++p) {
        Eigen::VectorXcd xn;
        Eigen::VectorXcd rn;
        double nn = 0;
        if (!newton_step(nn, xn, rn)) break;
        x = std::move(xn);
        r = std::move(rn);
        norm = nn;
      }

      std::vector<Complex> roots(x.data(), x.data() + x.size());
      bool singular = false;
      for (const Complex& l : roots) {
        const VacuumEigenvalues<Complex> vac = vacuum_eigenvalues(spec, l);
        const double aa = std::abs(vac.a);
        const double dd = std::abs(vac.d);
        if (std::min(aa, dd) < opt.singular_threshold * std::max({1.0, aa, dd})) singular = true;
      }
      if (singular) {
        result.failures.push_back({gi, ErrorCode::SingularRoots, "a root sits on a zero of a(lambda) or d(lambda)"});
        continue;
      }
      std::sort(roots.begin(), roots.end(), detail::canonical_less);
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Converged& c) {
        return detail::same_root_set(c.roots, roots, opt.dedup);
      });
      if (!duplicate) found.push_back({std::move(roots), gi, it});
    }
  }

  std::sort(found.begin(), found.end(), [](const Converged& a, const Converged& b) {
    return std::lexicographical_compare(a.roots.begin(), a.roots.end(), b.roots.begin(), b.roots.end(),
                                        detail::canonical_less);
  });

  // One probe for every certificate so they can be matched against a single
  // spectrum.
  Sampler sampler(opt.probe_seed);
  Complex probe{};
  for (int attempt = 0;; ++attempt) {
    if (attempt > 10000) throw Error(ErrorCode::InvalidArgument, "could not place a probe away from the roots");
    probe = sampler.complex(1.0 + attempt / 100);
    bool clear = true;
    for (const Converged& c : found)
      for (const Complex& l : c.roots)
        if (spec.kernel().pole_distance(probe, l) < opt.probe_clearance) clear = false;
    for (const Complex& xi : spec.xi())
      if (spec.kernel().pole_distance(probe, xi) < opt.probe_clearance) clear = false;
    if (clear) break;
  }
  result.probe = probe;

  for (const Converged& c : found) {
    try {
      BetheCertificate cert{SpectralSet<Complex>(c.roots), {}, 0.0, {}, probe, c.guess_index, c.iterations};
      for (std::size_t k = 0; k < c.roots.size(); ++k) cert.bethe_residuals.push_back(std::abs(bethe_y(spec, k, cert.roots)));
      const EigenCertification<Complex> ec = certify_eigenvector(spec, cert.roots, probe);
      cert.eigen_residual = ec.residual;
      cert.tau_value = ec.tau;
      result.certificates.push_back(std::move(cert));
    } catch (const Error& e) {
      result.failures.push_back({c.guess_index, e.code(), e.what()});
    }
  }
  return result;
}

}  // namespace qism
