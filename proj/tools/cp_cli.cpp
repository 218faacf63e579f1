#include "cp/algo.hpp"
#include "cp/bounds.hpp"
#include "cp/errorbounds.hpp"
#include "cp/expr.hpp"
#include "cp/geom.hpp"
#include "cp/grid.hpp"
#include "cp/qr.hpp"
#include "cp/softfloat.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

using namespace cp;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNotAnalyzable = 2;
constexpr int kExitCap = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rational number(const std::string& s) { return parse_rational(s); }
Rational dyadic(const std::string& s) { return parse_rational(s, true); }

std::vector<Rational> dyadics(const std::vector<std::string>& v) {
  std::vector<Rational> out;
  for (const auto& s : v) out.push_back(dyadic(s));
  return out;
}

// one value per input; a single value is broadcast
std::vector<Rational> per_input(const std::vector<std::string>& v, std::size_t n, const std::string& what,
                                const std::vector<Rational>& fallback) {
  if (v.empty()) return fallback;
  auto r = dyadics(v);
  if (r.size() == 1) return std::vector<Rational>(n, r[0]);
  if (r.size() != n) throw UsageError(what + ": expected 1 or " + std::to_string(n) + " values");
  return r;
}

std::uint64_t default_seed() {
  if (const char* s = std::getenv("CP_SEED")) return std::strtoull(s, nullptr, 10);
  return 0;
}

json reals(const std::vector<Real>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

json rationals(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

// ---------------------------------------------------------------- predicate construction

struct PredicateFlags {
  std::string predicate;
  std::vector<std::string> xbar;
  std::vector<std::string> delta;
  std::optional<long> emax;
  std::string t = "1/2";
  int degree = 1;
  std::vector<std::string> coeffs;
  std::string expr;
  std::string predicate_file;
  bool cubical = false;
  std::vector<std::string> box;
  bool topdown = false;
  std::vector<std::string> circle;

  void add(CLI::App* app) {
    app->add_option("--predicate", predicate, "univariate|multivariate|in_box|in_circle|orientation2d|rational");
    app->add_option("--xbar", xbar, "center of the perturbation area (perturbed inputs)");
    app->add_option("--delta", delta, "perturbation radius, one value or one per perturbed input");
    app->add_option("--emax", emax, "input value parameter");
    app->add_option("--t", t, "grid interval split parameter in (0,1)");
    app->add_option("--degree", degree, "univariate: degree d of x^d");
    app->add_option("--coeffs", coeffs, "univariate: coefficients c0 .. cd");
    app->add_option("--expr", expr, "multivariate: prefix expression, e.g. \"(mul x0 x1)\"");
    app->add_option("--predicate-file", predicate_file, "multivariate: file holding a prefix expression");
    app->add_flag("--cubical", cubical, "multivariate: cubical instead of spherical critical region");
    app->add_option("--box", box, "in_box: ux uy vx vy")->expected(4);
    app->add_flag("--topdown", topdown, "in_box: top-down bounds for the fixed box");
    app->add_option("--circle", circle, "in_circle: cx cy r")->expected(3);
  }
};

struct Built {
  std::string name;
  // a single predicate, or numerator and denominator of a rational one
  std::vector<PredicateInstance> parts;
  Expr full;
  long emax = 0;
  std::vector<Rational> input_sup() const { return std::vector<Rational>(parts[0].desc.center.size(), pow2(emax)); }
  PerturbationBox box() const { return parts[0].desc.box(); }
};

Built build(const PredicateFlags& f) {
  Rational t = number(f.t);
  const auto& n = f.predicate;
  Built b;
  b.name = n;
  auto one = [&](PredicateInstance in) {
    b.full = in.expr;
    b.emax = in.desc.emax;
    b.parts.push_back(std::move(in));
  };
  if (n == "univariate") {
    std::vector<Rational> c;
    if (!f.coeffs.empty()) {
      c = dyadics(f.coeffs);
    } else {
      if (f.degree < 1) throw UsageError("--degree must be at least 1");
      c.assign(static_cast<std::size_t>(f.degree) + 1, Rational(0));
      c.back() = 1;
    }
    auto x = per_input(f.xbar, 1, "--xbar", {Rational(0)});
    auto d = per_input(f.delta, 1, "--delta", {Rational(1)});
    one(univariate_instance(c, x[0], d[0], f.emax, t));
  } else if (n == "multivariate") {
    std::string text = f.expr;
    if (!f.predicate_file.empty()) {
      std::ifstream in(f.predicate_file);
      if (!in) throw UsageError("cannot read " + f.predicate_file);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    if (text.empty()) throw UsageError("multivariate needs --expr or --predicate-file");
    Expr e = parse_expr(text);
    auto k = static_cast<std::size_t>(e.num_inputs());
    auto x = per_input(f.xbar, k, "--xbar", std::vector<Rational>(k, Rational(0)));
    auto d = per_input(f.delta, k, "--delta", std::vector<Rational>(k, Rational(1)));
    one(multivariate_instance(e, x, d, f.emax, t, f.cubical));
  } else if (n == "orientation2d") {
    auto x = per_input(f.xbar, 6, "--xbar", std::vector<Rational>(6, Rational(0)));
    auto d = per_input(f.delta, 1, "--delta", {Rational(1)});
    one(orientation2d_instance(x, d[0], f.emax, t));
  } else if (n == "in_box") {
    auto bx = f.box.empty() ? std::vector<Rational>{-1, -1, 1, 1} : dyadics(f.box);
    auto q = per_input(f.xbar, 2, "--xbar", {Rational(0), Rational(0)});
    auto d = per_input(f.delta, 2, "--delta", {make_rational(1, 2), make_rational(1, 2)});
    if (f.topdown) {
      std::vector<Rational> c{(bx[0] + bx[2]) / 2, (bx[1] + bx[3]) / 2};
      std::vector<Rational> ell{(bx[2] - bx[0]) / 2, (bx[3] - bx[1]) / 2};
      one(inbox_topdown_instance(c, ell, q, d, f.emax, t));
    } else {
      one(inbox_instance({bx[0], bx[1]}, {bx[2], bx[3]}, q, d, f.emax, t));
    }
  } else if (n == "in_circle") {
    auto c = f.circle.empty() ? std::vector<Rational>{0, 0, 1} : dyadics(f.circle);
    auto q = per_input(f.xbar, 2, "--xbar", {Rational(0), Rational(0)});
    auto d = per_input(f.delta, 2, "--delta", {make_rational(1, 2), make_rational(1, 2)});
    one(incircle_instance({c[0], c[1]}, c[2], q, d, f.emax, t));
  } else if (n == "rational") {
    auto x = per_input(f.xbar, 2, "--xbar", {Rational(0), Rational(0)});
    auto d = per_input(f.delta, 2, "--delta", {make_rational(1, 4), make_rational(1, 4)});
    auto [g, h] = rational_sample_parts(x, d, f.emax, t);
    b.full = rational_sample_expr();
    b.emax = g.desc.emax;
    b.parts = {g, h};
  } else {
    throw UsageError("unknown predicate '" + n + "'");
  }
  return b;
}

// ---------------------------------------------------------------- analyze

json trace_json(const ArithmeticRequirement& r) {
  json j;
  j["predicate"] = r.predicate;
  j["p"] = to_string(r.p);
  j["region"] = to_string(r.region);
  if (r.eps) {
    Real mu_nu = r.region == RegionKind::Chi ? *r.eps / Real(r.p) * Real(1 - r.p) : *r.eps;
    j["eps_nu"] = mu_nu.str();
    if (r.region == RegionKind::Chi) j["eps_chi"] = r.eps->str();
  } else {
    j["eps_nu"] = nullptr;
  }
  j["lambda"] = r.lambda ? json(r.lambda->str()) : json(nullptr);
  j["gamma"] = reals(r.gamma);
  j["t_gamma"] = reals(r.t_gamma);
  j["phi"] = r.phi.str();
  j["phi_sup"] = r.phi_sup.str();
  j["safety_C"] = to_string(r.safety_C);
  j["L_safe"] = r.L_safe;
  j["L_grid"] = r.L_grid;
  j["L_f"] = r.L_f;
  j["K_sup"] = r.K_sup;
  j["K_expr"] = r.K_expr;
  j["K_f"] = r.K_f;
  return j;
}

void print_trace(std::ostream& os, const json& j, const std::string& indent = "") {
  os << indent << "predicate " << j["predicate"].get<std::string>() << " at p = " << j["p"].get<std::string>()
     << " (region " << j["region"].get<std::string>() << ")\n";
  auto s = [](const json& v) { return v.is_null() ? std::string("-") : v.is_string() ? v.get<std::string>() : v.dump(); };
  os << indent << "  step 1  eps_nu  = " << s(j["eps_nu"]);
  if (j.contains("eps_chi")) os << ", eps_chi = " << s(j["eps_chi"]);
  os << "\n";
  os << indent << "  step 2  lambda  = " << s(j["lambda"]) << ", gamma = " << j["gamma"].dump() << "\n";
  os << indent << "  step 3  t_gamma = " << j["t_gamma"].dump() << "\n";
  os << indent << "  step 4  phi     = " << s(j["phi"]) << " (sup " << s(j["phi_sup"]) << ")\n";
  os << indent << "  step 5  C = " << s(j["safety_C"]) << ", L_safe = " << j["L_safe"].dump() << "\n";
  os << indent << "  step 6  L_grid = " << j["L_grid"].dump() << ", L_f = " << j["L_f"].dump() << "\n";
  os << indent << "  K_sup = " << j["K_sup"].dump() << ", K_expr = " << j["K_expr"].dump()
     << ", K_f = " << j["K_f"].dump() << "\n";
}

struct AnalyzeFlags {
  PredicateFlags pred;
  std::string p = "1/2";
  std::string algorithm;
  long n = 0;
  std::string shape = "box";
  bool as_json = false;
};

int cmd_analyze(const AnalyzeFlags& a) {
  Rational p = number(a.p);
  json out;
  if (!a.algorithm.empty()) {
    if (a.algorithm != "hull") throw UsageError("unknown algorithm '" + a.algorithm + "'");
    if (a.n < 1) throw UsageError("--n must be at least 1");
    PerturbationShape::Kind kind;
    if (a.shape == "box") kind = PerturbationShape::Kind::Box;
    else if (a.shape == "disc") kind = PerturbationShape::Kind::Disc;
    else throw UsageError("unknown shape '" + a.shape + "'");
    Rational delta = a.pred.delta.empty() ? make_rational(1, 16) : dyadic(a.pred.delta[0]);
    PerturbationShape shape{kind, delta};
    long emax = a.pred.emax.value_or(1);
    auto desc = hull_description(shape, emax, number(a.pred.t));
    auto r = distributed_probability(desc, p, a.n);
    out["algorithm"] = "hull";
    out["n"] = a.n;
    out["shape"] = to_string(kind);
    out["delta"] = to_string(delta);
    out["N_E"] = to_string(desc.N_E(a.n));
    out["rho"] = to_string(r.rho);
    out["p_each"] = to_string(r.p_each);
    out["eta"] = r.eta;
    out["L_ACP"] = r.L;
    out["K_ACP"] = r.K;
    json parts = json::array();
    for (const auto& q : r.parts) parts.push_back(trace_json(q));
    out["parts"] = parts;
    if (a.as_json) {
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << "algorithm hull, n = " << a.n << ", shape " << to_string(kind) << ", delta " << to_string(delta)
                << "\n";
      std::cout << "N_E = " << out["N_E"].get<std::string>() << ", rho = " << to_string(r.rho)
                << ", p_each = " << to_string(r.p_each) << "\n";
      for (const auto& j : parts) print_trace(std::cout, j, "  ");
      std::cout << "eta = " << r.eta << "\nL_ACP = " << r.L << "\nK_ACP = " << r.K << "\n";
    }
    return 0;
  }
  if (a.pred.predicate.empty()) throw UsageError("--predicate or --algorithm is required");
  Built b = build(a.pred);
  if (b.parts.size() == 2) {
    auto r = quantified_relations_rational(b.parts[0].desc, b.parts[0].bounds, b.parts[1].desc, b.parts[1].bounds, p);
    out["predicate"] = b.name;
    out["p"] = to_string(p);
    out["numerator"] = trace_json(r.numerator);
    out["denominator"] = trace_json(r.denominator);
    out["K_quot"] = r.K_quot;
    out["L_f"] = r.L_f;
    out["K_f"] = r.K_f;
    if (a.as_json) {
      std::cout << out.dump(2) << "\n";
    } else {
      std::cout << "rational predicate at p = " << to_string(p) << ", parts at " << to_string(Rational((1 + p) / 2))
                << "\n";
      print_trace(std::cout, out["numerator"], "  ");
      print_trace(std::cout, out["denominator"], "  ");
      std::cout << "K_quot = " << r.K_quot << "\nL_f = " << r.L_f << "\nK_f = " << r.K_f << "\n";
    }
    return 0;
  }
  const auto& in = b.parts[0];
  auto r = quantified_relations(in.desc, in.bounds, p);
  out = trace_json(r);
  out["emax"] = in.desc.emax;
  out["t"] = to_string(in.desc.t);
  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    print_trace(std::cout, out);
    std::cout << "L_f = " << r.L_f << "\nK_f = " << r.K_f << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- enumerate

struct EnumerateFlags {
  int L = 0;
  int K = 0;
  std::optional<long> emax;
  std::vector<std::string> universe;
  std::vector<std::string> target;
  bool grid = false;
  bool as_json = false;
};

constexpr long kEnumerationLimit = 10'000'000;

int cmd_enumerate(const EnumerateFlags& e) {
  Rational a = number(e.universe.at(0)), b = number(e.universe.at(1));
  Rational c = number(e.target.at(0)), d = number(e.target.at(1));
  if (a > b || c > d) throw UsageError("intervals must satisfy lo <= hi");
  Format f{e.L, e.K};
  std::string set_name;
  Integer size;
  std::vector<Rational> members;
  if (e.grid) {
    if (!e.emax) throw UsageError("--grid needs --emax");
    GridSpec g{e.L, e.K, *e.emax};
    set_name = "G_{" + std::to_string(e.L) + "," + std::to_string(e.K) + "," + std::to_string(*e.emax) + "}";
    size = count_grid(a, b, g);
    if (size > kEnumerationLimit) throw UsageError("RefuseEnumeration: " + size.get_str() + " members exceed 10^7");
    members = enumerate_grid(a, b, g);
  } else {
    set_name = "F_{" + std::to_string(e.L) + "," + std::to_string(e.K) + "}";
    size = count_members(a, b, f);
    if (size > kEnumerationLimit) throw UsageError("RefuseEnumeration: " + size.get_str() + " members exceed 10^7");
    members = enumerate_members(a, b, f);
  }
  long hits = 0;
  for (const auto& m : members) hits += (c <= m && m <= d);
  auto total = static_cast<long>(members.size());
  std::string ratio = total == 0 ? std::string("undefined") : to_string(make_rational(hits, total));
  if (e.as_json) {
    json j;
    j["set"] = set_name;
    j["universe"] = {to_string(a), to_string(b)};
    j["target"] = {to_string(c), to_string(d)};
    j["members"] = total;
    j["in_target"] = hits;
    j["ratio"] = ratio;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << set_name << " on [" << to_string(a) << ", " << to_string(b) << "]: " << total << " members\n";
    std::cout << "in [" << to_string(c) << ", " << to_string(d) << "]: " << hits << "\n";
    std::cout << "ratio = " << ratio << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  PredicateFlags pred;
  std::vector<int> L;
  std::optional<int> K;
  long trials = 10000;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

// lower bound on the success probability; for rational predicates both parts must succeed
Real theoretical_p(const Built& b, long L, int K) {
  if (b.parts.size() == 1) return probability(b.parts[0].desc, b.parts[0].bounds, L, K).p_f;
  Real pg = probability(b.parts[0].desc, b.parts[0].bounds, L, K).p_f;
  Real ph = probability(b.parts[1].desc, b.parts[1].bounds, L, K).p_f;
  return max(Real(0), pg + ph - Real(1));
}

int cmd_simulate(const SimulateFlags& s) {
  if (s.pred.predicate.empty()) throw UsageError("--predicate is required");
  if (s.L.empty()) throw UsageError("--L is required");
  if (s.trials < 0) throw UsageError("--trials must be nonnegative");
  Built b = build(s.pred);
  const std::uint64_t seed = s.seed.value_or(default_seed());
  const unsigned jobs = std::max(1u, s.jobs);
  std::cout << "L,K,trials,successes,empirical_p,theoretical_p_f\n";
  if (s.trials == 0) return 0;
  for (int L : s.L) {
    int K = s.K.value_or(0);
    if (!s.K) {
      K = 2;
      for (const auto& in : b.parts) K = std::max(K, exponent_requirement_expr(in.expr, in.desc.emax, L));
    }
    GridSpec g{L, K, b.emax};
    GuardedPredicate gp(b.full, b.input_sup(), g.format());
    const PerturbationBox box = b.box();
    const Rng base(seed ^ (static_cast<std::uint64_t>(L) << 32));
    std::vector<long> counts(jobs, 0);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        long ok = 0;
        for (long i = w; i < s.trials; i += jobs) {
          // per-trial streams keep results independent of the job count
          Rng rng = base.stream(static_cast<std::uint64_t>(i));
          ok += gp(sample_grid_point(box, g, rng)).ok();
        }
        counts[w] = ok;
      });
    }
    for (auto& t : pool) t.join();
    long ok = 0;
    for (long c : counts) ok += c;
    Real th = theoretical_p(b, L, K);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(ok) / static_cast<double>(s.trials));
    char tb[64];
    std::snprintf(tb, sizeof tb, "%.6f", th.lower_double());
    std::cout << L << "," << K << "," << s.trials << "," << ok << "," << buf << "," << tb << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- hull

struct HullFlags {
  std::string input;
  std::string shape = "box";
  std::string delta = "1/16";
  std::optional<std::uint64_t> seed;
  std::string psi_l = "2";
  int psi_k = 8;
  bool basic = false;
  int L0 = 24;
  int K0 = 8;
  long max_rounds = 64;
  std::string output;
};

int cmd_hull(const HullFlags& h) {
  std::vector<Point2> pts;
  if (h.input.empty() || h.input == "-") {
    pts = parse_points_csv(std::cin);
  } else {
    std::ifstream in(h.input);
    if (!in) throw UsageError("cannot read " + h.input);
    pts = parse_points_csv(in);
  }
  if (pts.empty()) throw UsageError("no points in input");
  PerturbationShape::Kind kind;
  if (h.shape == "box") kind = PerturbationShape::Kind::Box;
  else if (h.shape == "disc") kind = PerturbationShape::Kind::Disc;
  else throw UsageError("unknown shape '" + h.shape + "'");
  PerturbationShape shape{kind, dyadic(h.delta)};
  if (sgn(shape.delta) <= 0) throw UsageError("--delta must be positive");
  AcpParams prm;
  prm.L0 = h.L0;
  prm.K0 = h.K0;
  prm.psi_L = number(h.psi_l);
  prm.psi_K = h.psi_k;
  prm.eta = eta(shape);
  prm.max_rounds = h.max_rounds;
  prm.basic = h.basic;
  const std::uint64_t seed = h.seed.value_or(default_seed());
  json j;
  try {
    auto run = run_acp(hull_algorithm(), flatten(pts), shape, prm, seed);
    j["hull"] = run.result;
    j["perturbed"] = rationals(run.y);
    json st;
    st["seed"] = run.stats.seed;
    st["algorithm"] = h.basic ? "basic" : "adaptive";
    st["shape"] = to_string(kind);
    st["eta"] = h.basic ? 1 : prm.eta;
    st["rounds"] = run.stats.rounds;
    st["final_L"] = run.stats.final_L;
    st["final_K"] = run.stats.final_K;
    json outcomes = json::array(), evals = json::array(), attempts = json::array();
    for (const auto& at : run.stats.attempts) {
      outcomes.push_back(to_string(at.outcome));
      evals.push_back(at.evaluations);
      attempts.push_back({{"round", at.round}, {"L", at.L}, {"K", at.K}, {"delta", to_string(at.delta)}});
    }
    st["outcomes"] = outcomes;
    st["eval_counts"] = evals;
    st["attempts"] = attempts;
    j["stats"] = st;
  } catch (const IterationCapExceeded& e) {
    std::cerr << "IterationCapExceeded: " << e.what() << "\n";
    return kExitCap;
  }
  if (h.output.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(h.output);
    if (!out) throw UsageError("cannot write " + h.output);
    out << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled perturbation analysis and runs"};
  app.require_subcommand(1);

  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "derive (L_f, K_f) for a predicate or an algorithm");
  af.pred.add(analyze);
  analyze->add_option("--p", af.p, "target success probability");
  analyze->add_option("--algorithm", af.algorithm, "hull");
  analyze->add_option("--n", af.n, "input size for --algorithm");
  analyze->add_option("--shape", af.shape, "box|disc for --algorithm");
  analyze->add_flag("--json", af.as_json);

  EnumerateFlags ef;
  auto* enumerate = app.add_subcommand("enumerate", "exact member counts of F or G");
  enumerate->add_option("--L", ef.L)->required();
  enumerate->add_option("--K", ef.K)->required();
  enumerate->add_option("--emax", ef.emax);
  enumerate->add_option("--universe", ef.universe)->expected(2)->required();
  enumerate->add_option("--target", ef.target)->expected(2)->required();
  enumerate->add_flag("--grid", ef.grid, "enumerate the grid G_{L,K,emax}");
  enumerate->add_flag("--json", ef.as_json);

  SimulateFlags sf;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo success frequency on the grid");
  sf.pred.add(simulate);
  simulate->add_option("--L", sf.L, "one or more precisions")->required();
  simulate->add_option("--K", sf.K, "exponent bits; default: smallest overflow-free K");
  simulate->add_option("--trials", sf.trials);
  simulate->add_option("--seed", sf.seed);
  simulate->add_option("--jobs", sf.jobs);

  HullFlags hf;
  auto* hull = app.add_subcommand("hull", "convex hull under controlled perturbation");
  hull->add_option("--input", hf.input, "CSV of x,y points, '-' for stdin");
  hull->add_option("--shape", hf.shape, "box|disc");
  hull->add_option("--delta", hf.delta);
  hull->add_option("--seed", hf.seed);
  hull->add_option("--psi-l", hf.psi_l);
  hull->add_option("--psi-k", hf.psi_k);
  hull->add_flag("--basic", hf.basic, "double L on every failure, fixed K");
  hull->add_option("--L0", hf.L0);
  hull->add_option("--K0", hf.K0);
  hull->add_option("--max-rounds", hf.max_rounds);
  hull->add_option("--output", hf.output);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return cmd_analyze(af);
    if (*enumerate) return cmd_enumerate(ef);
    if (*simulate) return cmd_simulate(sf);
    if (*hull) return cmd_hull(hf);
  } catch (const NotAnalyzable& e) {
    std::cerr << "NotAnalyzable: " << e.what() << "\n";
    return kExitNotAnalyzable;
  } catch (const BudgetTooLarge& e) {
    std::cerr << "BudgetTooLarge: " << e.what() << "\n";
    return kExitNotAnalyzable;
  } catch (const GammaTooLarge& e) {
    std::cerr << "GammaTooLarge: " << e.what() << "\n";
    return kExitNotAnalyzable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
