#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "qism/errors.hpp"
#include "qism/scalar.hpp"

namespace qism {

/// Seeded parameter source. Only the raw mt19937_64 stream is used (no
/// standard distributions), so draws are identical across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Inclusive range.
  long integer(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long>(rng_() % span);
  }

  Rational rational(long max_abs_num = 24, long max_den = 7) {
    Rational q(integer(-max_abs_num, max_abs_num), integer(1, max_den));
    q.canonicalize();
    return q;
  }

  Complex complex(double half_width = 1.5) {
    const double re = uniform(-half_width, half_width);
    const double im = uniform(-half_width, half_width);
    return {re, im};
  }

  template <Field F>
  F draw() {
    if constexpr (is_exact_v<F>) return rational();
    else return complex();
  }

  /// `count` pairwise-distinct draws, each accepted by `admissible`.
  template <Field F>
  std::vector<F> distinct(std::size_t count, const std::function<bool(const F&)>& admissible = {}) {
    std::vector<F> out;
    int attempts = 0;
    while (out.size() < count) {
      if (++attempts > 100000) throw Error(ErrorCode::InvalidArgument, "could not draw admissible parameters");
      F x = draw<F>();
      if (admissible && !admissible(x)) continue;
      bool clash = false;
      for (const F& y : out)
        if (FieldTraits<F>::to_double(magnitude<F>(x - y)) < 1e-9) clash = true;
      if (!clash) out.push_back(x);
    }
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace qism
