#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qism/bethe.hpp"
#include "qism/chain.hpp"
#include "qism/errors.hpp"

namespace qism {

inline constexpr std::size_t kMaxOracleSites = 12;

/// Eigen-decomposition of the transfer matrix restricted to one
/// fixed-down-spin sector.
struct SectorEigensystem {
  int excitations = 0;
  std::vector<std::size_t> basis;  // full-space indices spanning the sector
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;        // columns, in sector coordinates
};

struct SpectrumReport {
  Complex probe_mu{};
  std::size_t sites = 0;
  std::vector<Complex> eigenvalues;  // with multiplicity, sector by sector
  std::vector<int> sector_labels;    // down-spin count of each eigenvalue
};

namespace detail {

inline void check_oracle_size(std::size_t n) {
  if (n > kMaxOracleSites)
    throw Error(ErrorCode::DimensionCap, "dense oracle is capped at N=" + std::to_string(kMaxOracleSites));
}

/// Transfer-matrix block on one sector, assembled column by column from the
/// matrix-free action so that no 2^N x 2^N matrix is formed.
inline Eigen::MatrixXcd sector_block(const ChainSpec<Complex>& spec, const Complex& mu,
                                     const std::vector<std::size_t>& basis) {
  const std::size_t dim = std::size_t{1} << spec.size();
  std::vector<std::ptrdiff_t> position(dim, -1);
  for (std::size_t i = 0; i < basis.size(); ++i) position[basis[i]] = static_cast<std::ptrdiff_t>(i);
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index col = 0; col < m; ++col) {
    StateVector<Complex> e(dim, Complex{});
    e[basis[static_cast<std::size_t>(col)]] = 1.0;
    const StateVector<Complex> te = apply_transfer(spec, mu, e);
    for (std::size_t row = 0; row < dim; ++row) {
      if (te[row] == Complex{}) continue;
      if (position[row] < 0)
        throw Error(ErrorCode::InvalidArgument, "transfer matrix leaks out of its excitation sector");
      block(position[row], col) = te[row];
    }
  }
  return block;
}

}  // namespace detail

inline std::vector<std::size_t> sector_basis(std::size_t n, int excitations) {
  std::vector<std::size_t> basis;
  for (std::size_t i = 0; i < (std::size_t{1} << n); ++i)
    if (excitation_count(i) == excitations) basis.push_back(i);
  return basis;
}

inline std::vector<SectorEigensystem> sector_eigensystems(const ChainSpec<Complex>& spec, const Complex& mu) {
  detail::check_oracle_size(spec.size());
  std::vector<SectorEigensystem> out;
  for (int m = 0; m <= static_cast<int>(spec.size()); ++m) {
    SectorEigensystem s;
    s.excitations = m;
    s.basis = sector_basis(spec.size(), m);
    const Eigen::MatrixXcd block = detail::sector_block(spec, mu, s.basis);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(block, true);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "sector eigensolver failed");
    s.values = solver.eigenvalues();
    s.vectors = solver.eigenvectors();
    out.push_back(std::move(s));
  }
  return out;
}

/// Spectrum of T(mu), each fixed-down-spin block diagonalized on its own.
inline SpectrumReport dense_spectrum(const ChainSpec<Complex>& spec, const Complex& mu) {
  SpectrumReport r{mu, spec.size(), {}, {}};
  for (const SectorEigensystem& s : sector_eigensystems(spec, mu))
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
      r.eigenvalues.push_back(s.values[i]);
      r.sector_labels.push_back(s.excitations);
    }
  return r;
}

/// Eigenvalues of the full dense T(mu), no sector decomposition.
inline std::vector<Complex> full_spectrum(const ChainSpec<Complex>& spec, const Complex& mu) {
  detail::check_oracle_size(spec.size());
  const Matrix<Complex> t = transfer_matrix(spec, mu);
  Eigen::MatrixXcd dense(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t(i, j);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(dense, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eigensolver failed");
  return {solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size()};
}

/// Single-linkage clusters of values closer than `tol`, each sorted, ordered
/// by first member.
inline std::vector<std::vector<std::size_t>> group_eigenvalues(std::span<const Complex> values, double tol = 1e-8) {
  std::vector<std::size_t> parent(values.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      if (std::abs(values[i] - values[j]) < tol) parent[find(j)] = find(i);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::ptrdiff_t> slot(values.size(), -1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return groups;
}

/// Max distance of the multisets of two eigenvalue lists under greedy
/// nearest pairing; infinity if the sizes differ.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(b.size(), false);
  for (const Complex& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < b.size(); ++j)
      if (!used[j] && std::abs(x - b[j]) < best) {
        best = std::abs(x - b[j]);
        arg = j;
      }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

/// For every eigenspace of T(mu1) (eigenvalues grouped within `degeneracy`),
/// how far T(mu2) is from leaving it invariant: ||W - V C|| / max(1, ||W||)
/// with W = T(mu2) V and C the least-squares coefficients. A commuting,
/// diagonalizable family gives ~0; degenerate groups are compared as
/// subspaces rather than vector by vector.
inline double commuting_family_defect(const ChainSpec<Complex>& spec, const Complex& mu1, const Complex& mu2,
                                      double degeneracy = 1e-8) {
  double worst = 0.0;
  for (const SectorEigensystem& s : sector_eigensystems(spec, mu1)) {
    const Eigen::MatrixXcd t2 = detail::sector_block(spec, mu2, s.basis);
    const std::vector<Complex> values(s.values.data(), s.values.data() + s.values.size());
    for (const auto& group : group_eigenvalues(values, degeneracy)) {
      Eigen::MatrixXcd v(s.vectors.rows(), static_cast<Eigen::Index>(group.size()));
      for (std::size_t c = 0; c < group.size(); ++c)
        v.col(static_cast<Eigen::Index>(c)) = s.vectors.col(static_cast<Eigen::Index>(group[c])).normalized();
      const Eigen::MatrixXcd w = t2 * v;
      const Eigen::MatrixXcd coeff = v.colPivHouseholderQr().solve(w);
      const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
      worst = std::max(worst, (w - v * coeff).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

struct BetheMatch {
  std::size_t certificate = 0;
  std::optional<std::size_t> eigenvalue_index;  // into SpectrumReport::eigenvalues
  double distance = std::numeric_limits<double>::infinity();
};

struct SpectrumMatching {
  std::vector<BetheMatch> matches;
  std::vector<std::size_t> unmatched_eigenvalues;

  bool all_matched() const {
    return std::all_of(matches.begin(), matches.end(), [](const BetheMatch& m) { return m.eigenvalue_index.has_value(); });
  }
};

/// Greedy nearest-eigenvalue matching inside each certificate's excitation
/// sector. Eigenvalues closer than `degeneracy` form one group, and a group
/// can absorb as many certificates as it has members. Certificates without a
/// neighbour within `tolerance` are left unmatched (no throw).
inline SpectrumMatching try_match_bethe_to_spectrum(const SpectrumReport& report,
                                                    std::span<const BetheCertificate> certs, double tolerance = 1e-9,
                                                    double degeneracy = 1e-8) {
  for (const BetheCertificate& c : certs)
    if (c.probe != report.probe_mu)
      throw Error(ErrorCode::ProbeMismatch, "certificate and spectrum were computed at different probes");

  const auto groups = group_eigenvalues(report.eigenvalues, degeneracy);
  std::vector<std::size_t> remaining;
  for (const auto& g : groups) remaining.push_back(g.size());
  std::vector<bool> consumed(report.eigenvalues.size(), false);

  SpectrumMatching out;
  for (std::size_t ci = 0; ci < certs.size(); ++ci) {
    const Complex tau = certs[ci].tau_value;
    const int sector = static_cast<int>(certs[ci].roots.size());
    BetheMatch best{ci, std::nullopt, std::numeric_limits<double>::infinity()};
    std::size_t best_group = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (remaining[g] == 0) continue;
      for (std::size_t idx : groups[g]) {
        if (consumed[idx] || report.sector_labels[idx] != sector) continue;
        const double dist = std::abs(report.eigenvalues[idx] - tau);
        if (dist < best.distance) {
          best.distance = dist;
          best.eigenvalue_index = idx;
          best_group = g;
        }
      }
    }
    if (best.eigenvalue_index && best.distance <= tolerance) {
      consumed[*best.eigenvalue_index] = true;
      --remaining[best_group];
    } else {
      best.eigenvalue_index.reset();
    }
    out.matches.push_back(best);
  }
  for (std::size_t i = 0; i < consumed.size(); ++i)
    if (!consumed[i]) out.unmatched_eigenvalues.push_back(i);
  return out;
}

/// As try_match_bethe_to_spectrum, but an unmatched certificate is an error:
/// a certified tau outside the spectrum signals a bug.
inline SpectrumMatching match_bethe_to_spectrum(const SpectrumReport& report, std::span<const BetheCertificate> certs,
                                                double tolerance = 1e-9, double degeneracy = 1e-8) {
  SpectrumMatching m = try_match_bethe_to_spectrum(report, certs, tolerance, degeneracy);
  for (const BetheMatch& b : m.matches)
    if (!b.eigenvalue_index)
      throw Error(ErrorCode::UnmatchedCertificate,
                  "certificate " + std::to_string(b.certificate) + " has no eigenvalue within tolerance");
  return m;
}

}  // namespace qism
