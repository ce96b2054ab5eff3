#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qism/bethe.hpp"
#include "qism/chain.hpp"
#include "qism/cli/config.hpp"
#include "qism/cli/report.hpp"
#include "qism/decomposition.hpp"
#include "qism/oracle.hpp"
#include "qism/rmatrix.hpp"
#include "qism/sampling.hpp"

namespace qism::cli {

namespace detail {

/// Seed for one named stream of draws: FNV-1a of the stream name mixed into
/// the run seed, so adding or removing suites never shifts another suite's
/// parameters.
inline std::uint64_t stream_seed(std::uint64_t seed, const std::string& stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h ^ (seed * 0x9e3779b97f4a7c15ULL);
}

inline std::string index_label(const std::string& key, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return key + "=" + buf;
}

template <Field F>
json params_json(std::span<const F> xs) {
  json out = json::array();
  for (const F& x : xs) out.push_back(to_json(x));
  return out;
}

/// Runs `body` into a record, timing it and converting a thrown Error into an
/// error record instead of aborting the command.
inline CheckRecord run_check(const std::string& name, json inputs, const std::function<void(CheckRecord&)>& body) {
  CheckRecord rec;
  rec.name = name;
  rec.inputs = std::move(inputs);
  const auto start = std::chrono::steady_clock::now();
  try {
    body(rec);
  } catch (const Error& e) {
    rec.status = Status::Error;
    rec.message = e.what();
    rec.residual = nullptr;
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

template <Field F>
void set_residual(CheckRecord& rec, const Magnitude<F>& residual, double tol) {
  rec.residual = to_json(residual);
  rec.threshold = threshold_json(residual, tol);
  rec.status = judge(residual, tol);
}

/// Draws kept away from every zero of the local vacuum eigenvalues, so the
/// homogeneous closed form and the f-poles stay regular.
template <Field F>
std::vector<F> draw_parameters(Sampler& smp, const ChainSpec<F>& spec, std::size_t count) {
  const Kernel<F>& k = spec.kernel();
  return smp.distinct<F>(count, [&](const F& x) {
    for (const F& xi : spec.xi())
      if (FieldTraits<F>::to_double(magnitude<F>(k.alpha(x - xi))) < 1e-6 ||
          FieldTraits<F>::to_double(magnitude<F>(k.delta(x - xi))) < 1e-6)
        return false;
    return true;
  });
}

template <Field F>
void verify_suite(const RunConfig& cfg, const ChainSpec<F>& spec, const std::string& suite, Report& report) {
  Sampler smp(stream_seed(cfg.seed, "verify/" + suite));
  const double tol = cfg.tolerance.absolute;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const std::string sample = index_label("sample", s);
    if (suite == "rmatrix") {
      const std::vector<F> p = smp.distinct<F>(3);
      report.records.push_back(run_check("rmatrix/yang_baxter/" + sample, {{"lambda", params_json<F>(p)}},
                                         [&](CheckRecord& r) {
                                           set_residual<F>(r, yang_baxter_residual(spec.kernel(), p[0], p[1], p[2]), tol);
                                         }));
    } else if (suite == "rtt") {
      const std::vector<F> p = smp.distinct<F>(2);
      const json in = {{"lambda", to_json(p[0])}, {"mu", to_json(p[1])}};
      report.records.push_back(run_check("rtt/full/" + sample, in, [&](CheckRecord& r) {
        set_residual<F>(r, rtt_residual(spec, p[0], p[1]), tol);
      }));
    } else if (suite == "commutation") {
      const std::vector<F> p = smp.distinct<F>(2);
      const json in = {{"lambda", to_json(p[0])}, {"mu", to_json(p[1])}};
      std::map<std::string, Magnitude<F>> res;
      CheckRecord failed = run_check("commutation/all/" + sample, in, [&](CheckRecord&) {
        res = commutation_residuals(spec, p[0], p[1]);
      });
      if (failed.status == Status::Error) {
        report.records.push_back(std::move(failed));
        continue;
      }
      for (const auto& [rel, value] : res)
        report.records.push_back(run_check("commutation/" + rel + "/" + sample, in, [&](CheckRecord& r) {
          set_residual<F>(r, value, tol);
        }));
    } else if (suite == "vacuum") {
      const F lambda = smp.draw<F>();
      const json in = {{"lambda", to_json(lambda)}};
      const StateVector<F> vac = pseudovacuum<F>(spec.size());
      std::array<StateVector<F>, 4> abcd;
      VacuumEigenvalues<F> ev{};
      CheckRecord failed = run_check("vacuum/all/" + sample, in, [&](CheckRecord&) {
        abcd = apply_monodromy(spec, lambda, vac);
        ev = vacuum_eigenvalues(spec, lambda);
      });
      if (failed.status == Status::Error) {
        report.records.push_back(std::move(failed));
        continue;
      }
      auto eigen_check = [&](const std::string& name, const StateVector<F>& image, const F& value) {
        StateVector<F> diff = image;
        axpy(F(-value), vac, diff);
        report.records.push_back(run_check("vacuum/" + name + "/" + sample, in, [&](CheckRecord& r) {
          set_residual<F>(r, max_norm(diff), tol);
          r.details["eigenvalue"] = to_json(value);
        }));
      };
      eigen_check("A_eigenvalue", abcd[0], ev.a);
      eigen_check("C_annihilates", abcd[2], FieldTraits<F>::zero());
      eigen_check("D_eigenvalue", abcd[3], ev.d);
      report.records.push_back(run_check("vacuum/factorization/" + sample, in, [&](CheckRecord& r) {
        Magnitude<F> worst = FieldTraits<F>::zero_magnitude();
        for (std::size_t x = 1; x < spec.size(); ++x) {
          const auto left = vacuum_eigenvalues(spec, SiteRange{1, x}, lambda);
          const auto right = vacuum_eigenvalues(spec, SiteRange{x + 1, spec.size()}, lambda);
          worst = std::max(worst, magnitude<F>(ev.a - left.a * right.a));
          worst = std::max(worst, magnitude<F>(ev.d - left.d * right.d));
        }
        set_residual<F>(r, worst, tol);
      }));
    } else if (suite == "transfer-commute") {
      const std::vector<F> p = smp.distinct<F>(2);
      const json in = {{"lambda", to_json(p[0])}, {"mu", to_json(p[1])}};
      report.records.push_back(run_check("transfer_commute/" + sample, in, [&](CheckRecord& r) {
        set_residual<F>(r, transfer_commutator_residual(spec, p[0], p[1]), tol);
      }));
    }
  }
}

template <Field F>
void verify_impl(const RunConfig& cfg, Report& report) {
  const ChainSpec<F> spec = cfg.chain<F>();
  for (const std::string& suite : cfg.suites) verify_suite(cfg, spec, suite, report);
}

template <Field F>
void decompose_impl(const RunConfig& cfg, Report& report) {
  const ChainSpec<F> spec = cfg.chain<F>();
  const std::vector<Split> splits = cfg.resolved_splits();
  const HomogeneousRow homogeneous = cfg.require_homogeneous ? HomogeneousRow::Require : HomogeneousRow::Auto;
  for (std::size_t m : cfg.excitations) {
    Sampler smp(stream_seed(cfg.seed, "decompose/M=" + std::to_string(m)));
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const std::vector<F> p = draw_parameters(smp, spec, m);
      const json in = {{"lambda", params_json<F>(p)}};
      const std::string prefix = "decompose/M=" + std::to_string(m) + "/" + index_label("sample", s) + "/";
      const SpectralSet<F> roots(p);
      const DecompositionReport<F> rep = decomposition_report(spec, roots, splits, homogeneous);
      for (const DecompositionRow<F>& row : rep.rows) {
        CheckRecord rec;
        rec.name = prefix + row.label();
        rec.inputs = in;
        rec.wall_ms = row.elapsed_ms;
        rec.details["terms"] = row.terms;
        if (row.split) rec.details["cuts"] = row.split->cuts;
        if (row.error) {
          rec.status = Status::Error;
          rec.message = row.message;
          rec.details["error_code"] = std::string(to_string(*row.error));
        } else {
          set_residual<F>(rec, row.relative_diff, cfg.tolerance.relative);
          rec.details["max_abs_diff"] = to_json(row.max_abs_diff);
        }
        report.records.push_back(std::move(rec));
      }
    }
  }
}

inline Complex resolve_probe(const RunConfig& cfg, const std::string& stream) {
  if (cfg.mu) return cfg.mu->to_complex();
  Sampler smp(stream_seed(cfg.seed, stream));
  return smp.complex();
}

}  // namespace detail

inline Report cmd_verify(const RunConfig& cfg) {
  Report report{"verify", cfg.echo(), {}, cfg.timing};
  if (cfg.exact()) detail::verify_impl<Rational>(cfg, report);
  else detail::verify_impl<Complex>(cfg, report);
  report.sort();
  return report;
}

inline Report cmd_decompose(const RunConfig& cfg) {
  Report report{"decompose", cfg.echo(), {}, cfg.timing};
  if (cfg.exact()) detail::decompose_impl<Rational>(cfg, report);
  else detail::decompose_impl<Complex>(cfg, report);
  report.sort();
  return report;
}

/// Newton from seeded random complex starts, then every distinct certificate
/// is matched against the dense transfer-matrix spectrum at the probe.
/// Non-converging starts are informational; an unmatched or uncertified root
/// set is a failure.
inline Report cmd_solve(const RunConfig& cfg) {
  Report report{"solve", cfg.echo(), {}, cfg.timing};
  const ChainSpec<Complex> spec = cfg.exact() ? to_float_chain(cfg.chain<Rational>()) : cfg.chain<Complex>();
  for (std::size_t m : cfg.excitations) {
    const std::string prefix = "solve/M=" + std::to_string(m) + "/";
    Sampler smp(detail::stream_seed(cfg.seed, prefix));
    std::vector<std::vector<Complex>> guesses(cfg.guesses);
    for (auto& g : guesses)
      for (std::size_t i = 0; i < m; ++i) g.push_back(smp.complex());

    SolverOptions opt;
    opt.probe_seed = detail::stream_seed(cfg.seed, prefix + "probe");
    SolveResult result;
    CheckRecord solve_rec = detail::run_check(prefix + "solver", {{"guesses", cfg.guesses}}, [&](CheckRecord& r) {
      result = solve_bethe(spec, m, guesses, opt);
      r.status = Status::Info;
      r.details["certificates"] = result.certificates.size();
      r.details["failed_guesses"] = result.failures.size();
      r.details["probe"] = to_json(result.probe);
    });
    const bool solved = solve_rec.status != Status::Error;
    report.records.push_back(std::move(solve_rec));
    if (!solved) continue;

    for (const GuessFailure& f : result.failures) {
      CheckRecord rec;
      rec.name = prefix + detail::index_label("guess", f.guess_index);
      rec.inputs = {{"start", detail::params_json<Complex>(guesses[f.guess_index])}};
      rec.status = Status::Info;
      rec.message = f.message;
      rec.details["code"] = std::string(to_string(f.code));
      report.records.push_back(std::move(rec));
    }

    std::optional<SpectrumMatching> matching;
    std::optional<SpectrumReport> spectrum;
    if (!result.certificates.empty()) {
      CheckRecord oracle = detail::run_check(prefix + "oracle", {{"probe", to_json(result.probe)}}, [&](CheckRecord& r) {
        spectrum = dense_spectrum(spec, result.probe);
        matching = try_match_bethe_to_spectrum(*spectrum, result.certificates, cfg.match_tolerance);
        r.status = Status::Info;
        r.details["eigenvalues"] = spectrum->eigenvalues.size();
      });
      report.records.push_back(std::move(oracle));
    }

    for (std::size_t i = 0; i < result.certificates.size(); ++i) {
      const BetheCertificate& c = result.certificates[i];
      CheckRecord rec;
      rec.name = prefix + detail::index_label("root_set", i);
      rec.inputs = {{"start", detail::params_json<Complex>(guesses[c.guess_index])}, {"probe", to_json(c.probe)}};
      double worst = c.eigen_residual;
      for (double y : c.bethe_residuals) worst = std::max(worst, y);
      rec.residual = worst;
      rec.threshold = cfg.certificate_tolerance;
      rec.details["roots"] = detail::params_json<Complex>(c.roots.values());
      rec.details["bethe_residuals"] = c.bethe_residuals;
      rec.details["eigen_residual"] = c.eigen_residual;
      rec.details["tau"] = to_json(c.tau_value);
      rec.details["iterations"] = c.iterations;
      rec.status = c.valid(cfg.certificate_tolerance) ? Status::Pass : Status::Fail;
      if (rec.status == Status::Fail) rec.message = "certificate residual above tolerance";
      if (matching) {
        const BetheMatch& b = matching->matches[i];
        if (b.eigenvalue_index) {
          rec.details["matched_eigenvalue"] = to_json(spectrum->eigenvalues[*b.eigenvalue_index]);
          rec.details["match_distance"] = b.distance;
        } else {
          rec.status = Status::Fail;
          rec.message = "tau has no eigenvalue of the dense spectrum within tolerance";
          rec.details["nearest_distance"] = b.distance;
        }
      }
      report.records.push_back(std::move(rec));
    }
  }
  report.sort();
  return report;
}

/// Dense spectrum of the transfer matrix at one probe, with two self-checks:
/// sector-by-sector diagonalization agrees with the full matrix, and a second
/// transfer matrix leaves every eigenspace invariant.
inline Report cmd_spectrum(const RunConfig& cfg) {
  Report report{"spectrum", cfg.echo(), {}, cfg.timing};
  const ChainSpec<Complex> spec = cfg.exact() ? to_float_chain(cfg.chain<Rational>()) : cfg.chain<Complex>();
  const Complex mu = detail::resolve_probe(cfg, "spectrum/probe");
  const Complex mu2 = Sampler(detail::stream_seed(cfg.seed, "spectrum/second")).complex();
  const json in = {{"mu", to_json(mu)}};

  SpectrumReport spectrum;
  CheckRecord sectors = detail::run_check("spectrum/sectors", in, [&](CheckRecord& r) {
    spectrum = dense_spectrum(spec, mu);
    r.status = Status::Info;
    json by_sector = json::object();
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
      by_sector[detail::index_label("M", static_cast<std::size_t>(spectrum.sector_labels[i]))].push_back(
          to_json(spectrum.eigenvalues[i]));
    r.details["eigenvalues"] = by_sector;
  });
  const bool have = sectors.status != Status::Error;
  report.records.push_back(std::move(sectors));
  if (have) {
    report.records.push_back(detail::run_check("spectrum/full_vs_sectors", in, [&](CheckRecord& r) {
      const double d = multiset_distance(full_spectrum(spec, mu), spectrum.eigenvalues);
      r.residual = d;
      r.threshold = cfg.match_tolerance;
      r.status = judge(d, cfg.match_tolerance);
    }));
  }
  report.records.push_back(
      detail::run_check("spectrum/commuting_family", {{"mu", to_json(mu)}, {"mu2", to_json(mu2)}}, [&](CheckRecord& r) {
        const double d = commuting_family_defect(spec, mu, mu2);
        r.residual = d;
        r.threshold = cfg.match_tolerance;
        r.status = judge(d, cfg.match_tolerance);
      }));
  report.sort();
  return report;
}

inline Report run_command(const std::string& name, const RunConfig& cfg) {
  if (name == "verify") return cmd_verify(cfg);
  if (name == "decompose") return cmd_decompose(cfg);
  if (name == "solve") return cmd_solve(cfg);
  if (name == "spectrum") return cmd_spectrum(cfg);
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
}

}  // namespace qism::cli
