#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qism/bethe.hpp"
#include "qism/chain.hpp"
#include "qism/combinatorics.hpp"
#include "qism/dense.hpp"
#include "qism/errors.hpp"
#include "qism/scalar.hpp"

namespace qism {

/// Partition of [1, N] into K contiguous, nonempty subchains, stored as the
/// K-1 cut positions: cut x ends a subchain at site x.
struct Split {
  std::vector<std::size_t> cuts;

  static Split whole() { return {}; }
  static Split at(std::size_t x) { return {{x}}; }

  std::size_t blocks() const { return cuts.size() + 1; }

  void validate(std::size_t n) const {
    std::size_t prev = 0;
    for (std::size_t c : cuts) {
      if (c <= prev || c >= n)
        throw Error(ErrorCode::InvalidSplit, "cuts must be strictly increasing inside [1, N-1]");
      prev = c;
    }
  }

  std::vector<SiteRange> ranges(std::size_t n) const {
    validate(n);
    std::vector<SiteRange> out;
    std::size_t first = 1;
    for (std::size_t c : cuts) {
      out.push_back({first, c});
      first = c + 1;
    }
    out.push_back({first, n});
    return out;
  }

  std::string label() const {
    std::string s = "K=" + std::to_string(blocks()) + " cuts=[";
    for (std::size_t i = 0; i < cuts.size(); ++i) s += (i ? "," : "") + std::to_string(cuts[i]);
    return s + "]";
  }

  friend bool operator==(const Split&, const Split&) = default;
};

/// Every contiguous split of an N-site chain into K subchains, lexicographic in the cuts.
inline std::vector<Split> all_splits(std::size_t n, std::size_t k) {
  std::vector<Split> out;
  if (k < 1 || k > n) return out;
  for_each_combination(n - 1, k - 1, [&](const std::vector<std::size_t>& c) {
    Split s;
    for (std::size_t x : c) s.cuts.push_back(x + 1);
    out.push_back(std::move(s));
  });
  return out;
}

/// A reconstructed vector together with the number of summands that built it.
template <Field F>
struct Expansion {
  StateVector<F> vector;
  std::size_t terms = 0;
};

enum class PartitionEnumeration {
  Full,         // all K^M ordered partitions
  AtMostOne,    // only |J_k| <= 1; valid when every block is a single site
};

namespace detail {

/// Per-subchain data evaluated once for each spectral parameter.
template <Field F>
struct SubchainData {
  SiteRange range;
  std::vector<Matrix<F>> creation;  // B_i(lambda_k)
  std::vector<F> a;                 // a_i(lambda_k)
  std::vector<F> d;                 // d_i(lambda_k)
};

template <Field F>
std::vector<SubchainData<F>> subchain_data(const ChainSpec<F>& spec, const Split& split, const SpectralSet<F>& roots) {
  std::vector<SubchainData<F>> out;
  for (const SiteRange& r : split.ranges(spec.size())) {
    SubchainData<F> s{r, {}, {}, {}};
    for (const F& l : roots) {
      s.creation.push_back(partial_monodromy(spec, r, l).b());
      const VacuumEigenvalues<F> vac = vacuum_eigenvalues(spec, r, l);
      s.a.push_back(vac.a);
      s.d.push_back(vac.d);
    }
    out.push_back(std::move(s));
  }
  return out;
}

template <Field F>
std::vector<std::vector<F>> f_table(const ChainSpec<F>& spec, const SpectralSet<F>& roots) {
  const std::size_t m = roots.size();
  std::vector<std::vector<F>> f(m, std::vector<F>(m, FieldTraits<F>::one()));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) f[i][j] = spec.kernel().f(roots[i], roots[j]);
  return f;
}

/// prod over blocks (right to left) of the block's creation operators, each
/// embedded as identity (x) B_i (x) identity, applied to the full pseudovacuum.
template <Field F>
StateVector<F> apply_block_creations(std::size_t n, const std::vector<SubchainData<F>>& subs,
                                     const std::vector<std::vector<std::size_t>>& blocks) {
  StateVector<F> v = pseudovacuum<F>(n);
  for (std::size_t i = subs.size(); i-- > 0;)
    for (std::size_t idx = blocks[i].size(); idx-- > 0;)
      v = apply_on_sites(subs[i].creation[blocks[i][idx]], subs[i].range.first, n, v);
  return v;
}

/// sigma^- at one site, weighted as the L-operator's upper-right entry.
template <Field F>
Matrix<F> local_creation(const ChainSpec<F>& spec, std::size_t site, const F& lambda) {
  return l_operator(spec, site, lambda).b();
}

}  // namespace detail

/// Two-component reconstruction: sum over J of
///   prod_{k in J} d_2(l_k) prod_{k in ~J} a_1(l_k) prod_{k1 in J, k2 in ~J} f(l_k1, l_k2)
///   x prod_{J} B_1(l_k) prod_{~J} B_2(l_k) |0>.
template <Field F>
Expansion<F> two_component_vector(const ChainSpec<F>& spec, const Split& split, const SpectralSet<F>& roots) {
  if (split.blocks() != 2) throw Error(ErrorCode::InvalidSplit, "two-component formula needs exactly one cut");
  check_excitations(spec, roots.size());
  const std::size_t n = spec.size();
  const auto subs = detail::subchain_data(spec, split, roots);
  const auto f = detail::f_table(spec, roots);
  const auto& first = subs[0];
  const auto& second = subs[1];

  Expansion<F> out{StateVector<F>(std::size_t{1} << n, FieldTraits<F>::zero()), 0};
  for_each_bipartition(roots.size(), [&](const Bipartition& p) {
    F coeff = FieldTraits<F>::one();
    for (std::size_t k : p.subset) coeff *= second.d[k];
    for (std::size_t k : p.complement) coeff *= first.a[k];
    for (std::size_t k1 : p.subset)
      for (std::size_t k2 : p.complement) coeff *= f[k1][k2];
    const StateVector<F> v = detail::apply_block_creations<F>(n, subs, {p.subset, p.complement});
    axpy(coeff, v, out.vector);
    ++out.terms;
  });
  return out;
}

/// K-component reconstruction: sum over ordered partitions (J_1..J_K) of
///   prod_{i<j} [ prod_{k in J_j} a_i(l_k) prod_{k in J_i} d_j(l_k) prod_{k in J_i, k' in J_j} f(l_k, l_k') ]
///   x B_1(J_1) ... B_K(J_K) |0>.
template <Field F>
Expansion<F> multi_component_vector(const ChainSpec<F>& spec, const Split& split, const SpectralSet<F>& roots,
                                    PartitionEnumeration enumeration = PartitionEnumeration::Full) {
  check_excitations(spec, roots.size());
  const std::size_t n = spec.size();
  const std::size_t k_blocks = split.blocks();
  const auto subs = detail::subchain_data(spec, split, roots);
  if (enumeration == PartitionEnumeration::AtMostOne) {
    for (const auto& s : subs)
      if (s.range.sites() != 1)
        throw Error(ErrorCode::InvalidSplit, "restricted enumeration needs single-site subchains");
  }
  const auto f = detail::f_table(spec, roots);

  Expansion<F> out{StateVector<F>(std::size_t{1} << n, FieldTraits<F>::zero()), 0};
  auto add_term = [&](const OrderedPartition& p) {
    F coeff = FieldTraits<F>::one();
    for (std::size_t i = 0; i < k_blocks; ++i)
      for (std::size_t j = i + 1; j < k_blocks; ++j) {
        for (std::size_t k : p.blocks[j]) coeff *= subs[i].a[k];
        for (std::size_t k : p.blocks[i]) coeff *= subs[j].d[k];
        for (std::size_t ki : p.blocks[i])
          for (std::size_t kj : p.blocks[j]) coeff *= f[ki][kj];
      }
    const StateVector<F> v = detail::apply_block_creations<F>(n, subs, p.blocks);
    axpy(coeff, v, out.vector);
    ++out.terms;
  };
  if (enumeration == PartitionEnumeration::Full) for_each_ordered_partition(roots.size(), k_blocks, add_term);
  else for_each_injective_partition(roots.size(), k_blocks, add_term);
  return out;
}

/// Site-local expansion over placements n_1 < ... < n_M and permutations s:
///   B_{n_1}(l_s1) ... B_{n_M}(l_sM) |0>
///   x prod_l prod_{i<n_l} alpha(l_sl, xi_i) prod_{j>n_l} delta(l_sl, xi_j) prod_{r>l} f(l_sl, l_sr).
template <Field F>
Expansion<F> local_structure_vector(const ChainSpec<F>& spec, const SpectralSet<F>& roots) {
  check_excitations(spec, roots.size());
  const std::size_t n = spec.size();
  const std::size_t m = roots.size();
  const auto f = detail::f_table(spec, roots);

  // alpha_table[k][site-1], delta_table[k][site-1]
  std::vector<std::vector<F>> alpha(m), delta(m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t s = 1; s <= n; ++s) {
      alpha[k].push_back(local_alpha(spec, roots[k], spec.xi(s)));
      delta[k].push_back(local_delta(spec, roots[k], spec.xi(s)));
    }

  Expansion<F> out{StateVector<F>(std::size_t{1} << n, FieldTraits<F>::zero()), 0};
  for_each_combination(n, m, [&](const std::vector<std::size_t>& pos) {
    for_each_permutation(m, [&](const std::vector<std::size_t>& sigma) {
      F coeff = FieldTraits<F>::one();
      for (std::size_t l = 0; l < m; ++l) {
        const std::size_t k = sigma[l];
        for (std::size_t i = 0; i < pos[l]; ++i) coeff *= alpha[k][i];
        for (std::size_t j = pos[l] + 1; j < n; ++j) coeff *= delta[k][j];
        for (std::size_t r = l + 1; r < m; ++r) coeff *= f[k][sigma[r]];
      }
      StateVector<F> v = pseudovacuum<F>(n);
      for (std::size_t l = m; l-- > 0;)
        v = apply_on_sites(detail::local_creation(spec, pos[l] + 1, roots[sigma[l]]), pos[l] + 1, n, v);
      axpy(coeff, v, out.vector);
      ++out.terms;
    });
  });
  return out;
}

/// Homogeneous closed form with parameter-independent local operators B_n:
///   prod_l delta^N(l_l)/alpha(l_l) sum_{n_1<..<n_M} B_{n_1}..B_{n_M}|0>
///   x sum_s prod_{i<j} f(l_si, l_sj) prod_k (alpha(l_sk)/delta(l_sk))^{n_k}.
template <Field F>
Expansion<F> homogeneous_coordinate_vector(const ChainSpec<F>& spec, const SpectralSet<F>& roots) {
  if (!spec.is_homogeneous())
    throw Error(ErrorCode::HomogeneousOnly, "homogeneous only: the closed form needs equal inhomogeneities");
  check_excitations(spec, roots.size());
  const std::size_t n = spec.size();
  const std::size_t m = roots.size();
  const F& xi = spec.xi(1);
  const auto f = detail::f_table(spec, roots);

  F prefactor = FieldTraits<F>::one();
  std::vector<F> ratio;
  for (const F& l : roots) {
    const F alpha = local_alpha(spec, l, xi);
    const F delta = local_delta(spec, l, xi);
    if (is_negligible(alpha) || is_negligible(delta))
      throw Error(ErrorCode::VanishingLocalEigenvalue, "alpha or delta vanishes at a spectral parameter");
    F delta_pow = FieldTraits<F>::one();
    for (std::size_t i = 0; i < n; ++i) delta_pow *= delta;
    prefactor *= field_div(delta_pow, alpha);
    ratio.push_back(field_div(alpha, delta));
  }

  // B_n does not depend on the spectral parameter for these models; any
  // argument gives the same sigma^- weight.
  const F any = xi;
  Expansion<F> out{StateVector<F>(std::size_t{1} << n, FieldTraits<F>::zero()), 0};
  for_each_combination(n, m, [&](const std::vector<std::size_t>& pos) {
    StateVector<F> v = pseudovacuum<F>(n);
    for (std::size_t l = m; l-- > 0;) v = apply_on_sites(detail::local_creation(spec, pos[l] + 1, any), pos[l] + 1, n, v);
    F amplitude = FieldTraits<F>::zero();
    for_each_permutation(m, [&](const std::vector<std::size_t>& sigma) {
      F w = FieldTraits<F>::one();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) w *= f[sigma[i]][sigma[j]];
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t p = 0; p < pos[k] + 1; ++p) w *= ratio[sigma[k]];
      amplitude += w;
      ++out.terms;
    });
    axpy(F(prefactor * amplitude), v, out.vector);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Batch comparison against the directly built formal Bethe vector.

enum class Formula { TwoComponent, MultiComponent, LocalStructure, HomogeneousCoordinate };

inline std::string to_string(Formula f) {
  switch (f) {
    case Formula::TwoComponent: return "two_component";
    case Formula::MultiComponent: return "multi_component";
    case Formula::LocalStructure: return "local_structure";
    case Formula::HomogeneousCoordinate: return "homogeneous_coordinate";
  }
  return "unknown";
}

template <Field F>
struct DecompositionRow {
  Formula formula;
  std::optional<Split> split;
  Magnitude<F> max_abs_diff{};
  Magnitude<F> relative_diff{};
  std::size_t terms = 0;
  double elapsed_ms = 0.0;
  std::optional<ErrorCode> error;
  std::string message;

  std::string label() const { return to_string(formula) + (split ? " " + split->label() : ""); }
};

enum class HomogeneousRow { Auto, Require };

template <Field F>
struct DecompositionReport {
  std::vector<DecompositionRow<F>> rows;
};

/// Every requested formula compared with formal_bethe_vector, in a fixed
/// order: for each split (in the given order) the two-component row (K=2
/// only) then the multi-component row; then the local-structure row; then the
/// homogeneous closed form (when the chain is homogeneous, or always if
/// `homogeneous` is Require). Per-row failures are recorded, never thrown.
template <Field F>
DecompositionReport<F> decomposition_report(const ChainSpec<F>& spec, const SpectralSet<F>& roots,
                                            const std::vector<Split>& splits,
                                            HomogeneousRow homogeneous = HomogeneousRow::Auto) {
  DecompositionReport<F> report;
  std::optional<StateVector<F>> reference;
  std::string reference_error;
  std::optional<ErrorCode> reference_code;
  try {
    reference = formal_bethe_vector(spec, roots);
  } catch (const Error& e) {
    reference_code = e.code();
    reference_error = e.what();
  }

  auto run = [&](Formula formula, std::optional<Split> split, auto&& build) {
    DecompositionRow<F> row{formula, std::move(split)};
    const auto start = std::chrono::steady_clock::now();
    try {
      if (!reference) throw Error(*reference_code, reference_error);
      const Expansion<F> e = build();
      row.terms = e.terms;
      row.max_abs_diff = max_abs_diff(e.vector, *reference);
      row.relative_diff = relative_difference(e.vector, *reference);
    } catch (const Error& e) {
      row.error = e.code();
      row.message = e.what();
    }
    row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.rows.push_back(std::move(row));
  };

  for (const Split& s : splits) {
    if (s.blocks() == 2) run(Formula::TwoComponent, s, [&] { return two_component_vector(spec, s, roots); });
    run(Formula::MultiComponent, s, [&] { return multi_component_vector(spec, s, roots); });
  }
  run(Formula::LocalStructure, std::nullopt, [&] { return local_structure_vector(spec, roots); });
  if (homogeneous == HomogeneousRow::Require || spec.is_homogeneous())
    run(Formula::HomogeneousCoordinate, std::nullopt, [&] { return homogeneous_coordinate_vector(spec, roots); });
  return report;
}

}  // namespace qism
