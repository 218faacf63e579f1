#pragma once

#include "cp/bounds.hpp"
#include "cp/grid.hpp"
#include "cp/qr.hpp"
#include "cp/rational.hpp"
#include "cp/real.hpp"
#include "cp/softfloat.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cp {

// ---------------------------------------------------------------- perturbation shapes

// Per-object perturbation area of a point in `dim` dimensions with radius delta.
// Sampling uses an axis-parallel box inside the shape.
struct PerturbationShape {
  enum class Kind { Box, Disc, Ball };
  Kind kind = Kind::Box;
  Rational delta = 1;

  int dim() const { return kind == Kind::Ball ? 3 : 2; }

  // volume of the shape itself
  Real volume() const {
    Real d(delta);
    switch (kind) {
      case Kind::Box: return pow(Real(2) * d, static_cast<unsigned long>(dim()));
      case Kind::Disc: return Real::pi() * d * d;
      case Kind::Ball: return Real(make_rational(4, 3)) * Real::pi() * d * d * d;
    }
    return Real(0);
  }

  // volume of the largest inscribed axis-parallel box
  Real inscribed_volume() const {
    Real d(delta);
    switch (kind) {
      case Kind::Box: return volume();
      case Kind::Disc: return Real(2) * d * d;  // edge delta sqrt 2
      case Kind::Ball: {
        Real edge = Real(2) * d / root(Real(3), 2);
        return edge * edge * edge;
      }
    }
    return Real(0);
  }

  // Dyadic half-width of a box inside the shape; within 2^-8 of the inscribed one.
  Rational sampling_half_width() const {
    switch (kind) {
      case Kind::Box: return delta;
      case Kind::Disc: return delta * make_rational(181, 256);  // 181/256 < 1/sqrt 2
      case Kind::Ball: return delta * make_rational(147, 256);  // 147/256 < 1/sqrt 3
    }
    return delta;
  }
};

inline const char* to_string(PerturbationShape::Kind k) {
  switch (k) {
    case PerturbationShape::Kind::Box: return "box";
    case PerturbationShape::Kind::Disc: return "disc";
    case PerturbationShape::Kind::Ball: return "ball";
  }
  return "?";
}

// ceil(mu(shape) / V(inscribed box))
inline int eta(const PerturbationShape& s) {
  return static_cast<int>(with_refinement([&] { return ceil_int(s.volume() / s.inscribed_volume()); }));
}

// ---------------------------------------------------------------- distributed probability

struct AnalyzedPredicate {
  std::string name;
  PredicateDescription desc;
  BoundSet bounds;
};

struct AlgorithmDescription {
  std::vector<AnalyzedPredicate> predicates;
  std::function<Integer(long)> N_E;  // predicate evaluations for input size n
  PerturbationShape shape;
};

struct DistributedRequirement {
  long L = 0;
  int K = 2;
  int eta = 1;
  Rational rho;
  Rational p_each;
  std::vector<ArithmeticRequirement> parts;
};

inline DistributedRequirement distributed_probability(const AlgorithmDescription& a, const Rational& p, long n) {
  if (sgn(p) <= 0 || p >= 1) throw std::invalid_argument("p must lie in (0,1)");
  Integer ne = a.N_E(n);
  if (ne < 1) throw std::invalid_argument("N_E(n) must be at least 1");
  DistributedRequirement r;
  r.rho = (1 - p) / Rational(ne);
  r.p_each = 1 - r.rho;
  r.eta = eta(a.shape);
  for (const auto& pr : a.predicates) {
    auto q = quantified_relations(pr.desc, pr.bounds, r.p_each);
    r.L = std::max(r.L, q.L_f);
    r.K = std::max(r.K, q.K_f);
    r.parts.push_back(std::move(q));
  }
  return r;
}

// ---------------------------------------------------------------- controlled perturbation

enum class Outcome { Success, GuardFailure, RangeError };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::GuardFailure: return "guard_failure";
    case Outcome::RangeError: return "range_error";
  }
  return "?";
}

template <class R>
struct GuardedOutcome {
  Outcome kind = Outcome::GuardFailure;
  std::optional<R> value;
  long evaluations = 0;

  static GuardedOutcome success(R v, long evals) { return {Outcome::Success, std::move(v), evals}; }
  static GuardedOutcome failure(Outcome k, long evals) { return {k, std::nullopt, evals}; }
};

// A guarded algorithm: runs on a perturbed input with arithmetic F_{L,K}.
template <class R>
using GuardedAlgorithm = std::function<GuardedOutcome<R>(const std::vector<Rational>& y, const Format& f)>;

struct IterationCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Attempt {
  long round = 0;
  int L = 0;
  int K = 0;
  Rational delta;
  Outcome outcome = Outcome::GuardFailure;
  long evaluations = 0;
};

struct CpRunStats {
  std::uint64_t seed = 0;
  long rounds = 0;
  int final_L = 0;
  int final_K = 0;
  Rational final_delta;
  std::vector<Attempt> attempts;

  long evaluations() const {
    long s = 0;
    for (const auto& a : attempts) s += a.evaluations;
    return s;
  }
};

template <class R>
struct CpRun {
  std::vector<Rational> y;
  R result;
  CpRunStats stats;
};

struct AcpParams {
  int L0 = 24;
  int K0 = 8;
  Rational psi_L = 2;
  int psi_K = 8;
  int eta = 1;
  long max_rounds = 64;
  int max_L = 1 << 16;
  bool basic = false;  // basic loop: L doubles on any failure, K stays fixed
  // delta augmentation: radius factor per inner iteration, 1 disables it
  Rational psi_delta = 1;
};

namespace detail {
inline long emax_for(const std::vector<Rational>& ybar, const Rational& half_width) {
  return compute_emax(ybar, std::vector<Rational>(ybar.size(), half_width));
}

inline int grow_L(int L, const Rational& psi) {
  Integer v = ceil_div(Rational(psi * L));
  return v.fits_sint_p() ? static_cast<int>(v.get_si()) : std::numeric_limits<int>::max();
}
}  // namespace detail

// Controlled perturbation loop. ybar holds all coordinates; every coordinate is perturbed
// within the shape's sampling box. Returns the perturbed input and the result.
template <class R>
CpRun<R> run_acp(const GuardedAlgorithm<R>& alg, const std::vector<Rational>& ybar, const PerturbationShape& shape,
                 const AcpParams& prm, std::uint64_t seed) {
  if (prm.psi_L <= 1) throw std::invalid_argument("psi_L must exceed 1");
  if (prm.psi_K < 1) throw std::invalid_argument("psi_K must be at least 1");
  if (prm.eta < 1) throw std::invalid_argument("eta must be at least 1");
  if (prm.psi_delta < 1) throw std::invalid_argument("psi_delta must be at least 1");
  const int eta_used = prm.basic ? 1 : prm.eta;
  const Rational hw_min = shape.sampling_half_width();
  Rational hw_max = hw_min;
  for (int i = 1; i < eta_used; ++i) hw_max *= prm.psi_delta;
  const long emax = detail::emax_for(ybar, hw_max);

  Rng rng(seed);
  CpRunStats st;
  st.seed = seed;
  int L = prm.L0, K = std::min(prm.K0, Format::max_K);
  for (long round = 1; round <= prm.max_rounds; ++round) {
    st.rounds = round;
    bool range = false;
    Rational hw = hw_min;
    for (int i = 0; i < eta_used; ++i, hw *= prm.psi_delta) {
      GridSpec g{L, K, emax};
      Attempt at{round, L, K, hw, Outcome::GuardFailure, 0};
      std::vector<Rational> y;
      try {
        y = sample_grid_point(PerturbationBox{ybar, std::vector<Rational>(ybar.size(), hw)}, g, rng);
      } catch (const EmptyGrid&) {
        st.attempts.push_back(at);
        continue;
      }
      GuardedOutcome<R> out = alg(y, g.format());
      at.outcome = out.kind;
      at.evaluations = out.evaluations;
      st.attempts.push_back(at);
      if (out.kind == Outcome::Success) {
        st.final_L = L;
        st.final_K = K;
        st.final_delta = hw;
        return {std::move(y), std::move(*out.value), std::move(st)};
      }
      range = range || out.kind == Outcome::RangeError;
    }
    if (prm.basic) {
      L *= 2;
    } else if (range) {
      K = std::min(K + prm.psi_K, Format::max_K);
    } else {
      L = detail::grow_L(L, prm.psi_L);
    }
    st.final_L = L;
    st.final_K = K;
    if (L > prm.max_L) throw IterationCapExceeded("precision limit " + std::to_string(prm.max_L) + " exceeded");
  }
  throw IterationCapExceeded("no success within " + std::to_string(prm.max_rounds) + " rounds");
}

// Basic loop: one attempt per round, L doubles on any failure.
template <class R>
CpRun<R> run_basic_acp(const GuardedAlgorithm<R>& alg, const std::vector<Rational>& ybar,
                       const PerturbationShape& shape, AcpParams prm, std::uint64_t seed) {
  prm.basic = true;
  return run_acp(alg, ybar, shape, prm, seed);
}

// Radius grows by psi_delta on every inner iteration and resets after the loop.
template <class R>
CpRun<R> run_acp_delta_variant(const GuardedAlgorithm<R>& alg, const std::vector<Rational>& ybar,
                               const PerturbationShape& shape_min, const Rational& psi_delta, AcpParams prm,
                               std::uint64_t seed) {
  if (psi_delta <= 1) throw std::invalid_argument("psi_delta must exceed 1");
  prm.psi_delta = psi_delta;
  return run_acp(alg, ybar, shape_min, prm, seed);
}

// delta_min psi^(eta-1)
inline Rational delta_max(const Rational& delta_min, const Rational& psi_delta, int eta) {
  Rational d = delta_min;
  for (int i = 1; i < eta; ++i) d *= psi_delta;
  return d;
}

}  // namespace cp
