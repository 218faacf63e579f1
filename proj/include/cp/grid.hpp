#pragma once

#include "cp/rational.hpp"
#include "cp/softfloat.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cp {

// splitmix64 keyed by (seed, counter); stream i of a seed is independent of stream j.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return mix(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  Rng stream(std::uint64_t id) const { return Rng(mix(seed_ ^ mix(id + 0x632BE59BD9B4E019ULL))); }

  // uniform in [0, n), rejection from the next power of two
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("empty range");
    if ((n & (n - 1)) == 0) return next() & (n - 1);
    std::uint64_t mask = n - 1;
    for (int s = 1; s < 64; s <<= 1) mask |= mask >> s;
    for (;;) {
      std::uint64_t v = next() & mask;
      if (v < n) return v;
    }
  }

  Integer below(const Integer& n) {
    if (sgn(n) <= 0) throw std::invalid_argument("empty range");
    if (n.fits_ulong_p() && n.get_ui() <= UINT64_MAX) return Integer(static_cast<unsigned long>(below(static_cast<std::uint64_t>(n.get_ui()))));
    const long bits = bit_length(Integer(n - 1));
    for (;;) {
      Integer v = 0;
      long have = 0;
      while (have < bits) {
        Integer chunk(static_cast<unsigned long>(next()));
        mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 64);
        v += chunk;
        have += 64;
      }
      mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
      if (v < n) return v;
    }
  }

  // uniform in [0, 1) with 53 bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// least e with |y_i| + delta_i <= 2^e for all i
inline long compute_emax(const std::vector<Rational>& ybar, const std::vector<Rational>& delta) {
  if (ybar.size() != delta.size()) throw std::invalid_argument("center and radius differ in size");
  Rational m = 0;
  for (std::size_t i = 0; i < ybar.size(); ++i) {
    if (sgn(delta[i]) < 0) throw std::invalid_argument("negative perturbation radius");
    Rational v = rabs(ybar[i]) + delta[i];
    if (v > m) m = v;
  }
  if (sgn(m) == 0) return 0;
  return ceil_log2(m);
}

inline Rational grid_unit(long emax, long L) { return pow2(emax - L - 1); }

struct GridSpec {
  int L = 23;
  int K = 8;
  long emax = 0;

  Rational tau() const { return grid_unit(emax, L); }
  Format format() const { return Format{L, K}; }
  // emax + 1 < 2^(K-1) keeps every grid value and its doubling in range
  bool exponent_ok() const { return emax + 1 < Format{L, K}.emax(); }
};

struct EmptyGrid : std::runtime_error {
  EmptyGrid() : std::runtime_error("perturbation interval contains no grid point") {}
};

// lambda range [lo, hi] of grid multiples inside [a, b] clipped to [-2^emax, 2^emax]
inline std::pair<Integer, Integer> grid_index_range(const Rational& a, const Rational& b, const GridSpec& g) {
  Rational lim = pow2(g.emax);
  Rational lo = a < -lim ? Rational(-lim) : a;
  Rational hi = b > lim ? lim : b;
  Rational tau = g.tau();
  return {ceil_div(lo / tau), floor_div(hi / tau)};
}

inline Integer count_grid(const Rational& a, const Rational& b, const GridSpec& g) {
  auto [lo, hi] = grid_index_range(a, b, g);
  return hi >= lo ? Integer(hi - lo + 1) : Integer(0);
}

inline std::vector<Rational> enumerate_grid(const Rational& a, const Rational& b, const GridSpec& g) {
  auto [lo, hi] = grid_index_range(a, b, g);
  std::vector<Rational> out;
  Rational tau = g.tau();
  for (Integer l = lo; l <= hi; ++l) out.push_back(Rational(l) * tau);
  return out;
}

struct PerturbationBox {
  std::vector<Rational> center;
  std::vector<Rational> delta;

  std::size_t dim() const { return center.size(); }
  long emax() const { return compute_emax(center, delta); }
};

inline Rational sample_grid_interval(const Rational& a, const Rational& b, const GridSpec& g, Rng& rng) {
  auto [lo, hi] = grid_index_range(a, b, g);
  if (hi < lo) throw EmptyGrid();
  Integer n = hi - lo + 1;
  return Rational(lo + rng.below(n)) * g.tau();
}

inline std::vector<Rational> sample_grid_point(const PerturbationBox& box, const GridSpec& g, Rng& rng) {
  std::vector<Rational> y(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i)
    y[i] = sample_grid_interval(box.center[i] - box.delta[i], box.center[i] + box.delta[i], g, rng);
  return y;
}

inline std::vector<Rational> sample_grid_point(const PerturbationBox& box, const GridSpec& g,
                                               std::uint64_t seed) {
  Rng rng(seed);
  return sample_grid_point(box, g, rng);
}

inline std::vector<SoftFloat> to_softfloat(const std::vector<Rational>& y, Format f) {
  std::vector<SoftFloat> out;
  out.reserve(y.size());
  for (const auto& v : y) out.push_back(SoftFloat::round(v, f));
  return out;
}

// Anchor point plus fixed offsets; dependent points are anchor + offset.
struct GeomObject {
  std::vector<Rational> anchor;
  std::vector<std::vector<Rational>> measurements;
};

struct MeasurementNotRepresentable : std::runtime_error {
  MeasurementNotRepresentable() : std::runtime_error("anchor + measurement leaves the floating-point set") {}
};

// Output per object: the anchor followed by each dependent point, flattened.
inline std::vector<Rational> perturb_object_preserving(const std::vector<GeomObject>& objects,
                                                       const std::vector<Rational>& anchor_delta,
                                                       const GridSpec& g, Rng& rng) {
  std::vector<Rational> out;
  const Format f = g.format();
  for (const auto& obj : objects) {
    if (anchor_delta.size() != obj.anchor.size())
      throw std::invalid_argument("anchor radius dimension mismatch");
    std::vector<Rational> a(obj.anchor.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (sgn(anchor_delta[i]) == 0)
        a[i] = obj.anchor[i];
      else
        a[i] = sample_grid_interval(obj.anchor[i] - anchor_delta[i], obj.anchor[i] + anchor_delta[i], g, rng);
    }
    out.insert(out.end(), a.begin(), a.end());
    for (const auto& m : obj.measurements) {
      if (m.size() != a.size()) throw std::invalid_argument("measurement dimension mismatch");
      for (std::size_t i = 0; i < a.size(); ++i) {
        Rational v = a[i] + m[i];
        if (!representable(v, f)) throw MeasurementNotRepresentable();
        out.push_back(v);
      }
    }
  }
  return out;
}

}  // namespace cp
