#pragma once

// Path quantification. The mass of a path's constraint set under μ ⊗ λ^ω is
// computed in closed form when every atom bounds a single random variable
// affinely, and estimated by Monte Carlo otherwise. Summing the masses of
// (σ-pullback of A) ∩ pc ∩ po over final configurations gives the output
// measure of A.

#include "probsym/ast.hpp"
#include "probsym/concrete.hpp"
#include "probsym/desugar.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"
#include "probsym/parallel.hpp"
#include "probsym/symexec.hpp"
#include "probsym/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace probsym {

enum class MassMethod { Exact, MonteCarlo };

struct MassEstimate {
  double value = 0.0;
  MassMethod method = MassMethod::Exact;
  double std_error = 0.0;
  std::size_t samples_used = 0;
  /// An equality between a continuous variable and a constant was given
  /// mass zero.
  bool measure_zero_equality = false;

  static MassEstimate exact(double v) { return MassEstimate{v, MassMethod::Exact, 0.0, 0, false}; }
};

/// Standard normal CDF via the C library's erfc, whose error is within a
/// few ulp over the whole line (far below 1e-12 absolute).
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// 1 - Φ(x) without cancellation for large x.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Φ(hi) - Φ(lo), evaluated on the tail side that avoids cancellation.
inline double normal_interval(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
  if (hi <= 0.0) return normal_cdf(hi) - normal_cdf(lo);
  return 1.0 - normal_cdf(lo) - normal_sf(hi);
}

namespace detail {

// A random leaf: a program variable with a non-point input distribution,
// or a sample symbol.
struct LeafKey {
  enum class Kind { ProgramVar, Uniform, Normal };
  Kind kind;
  std::size_t index;
  auto operator<=>(const LeafKey&) const = default;
};

struct Affine {
  std::map<LeafKey, double> coef;
  double constant = 0.0;

  bool is_constant() const noexcept { return coef.empty(); }
};

inline bool random_var(const MeasureSpec& mu, std::size_t i) {
  return i < mu.size() && mu.components[i].kind != MeasureSpec::Kind::Point;
}

inline double point_value(const MeasureSpec& mu, std::size_t i) {
  return i < mu.size() ? mu.components[i].value : 0.0;
}

inline std::optional<Affine> linearize(const SymExpr& t, const MeasureSpec& mu) {
  switch (t.kind()) {
    case SymExpr::Kind::Const: return Affine{{}, t.value()};
    case SymExpr::Kind::Var:
      if (!random_var(mu, t.index())) return Affine{{}, point_value(mu, t.index())};
      return Affine{{{LeafKey{LeafKey::Kind::ProgramVar, t.index()}, 1.0}}, 0.0};
    case SymExpr::Kind::Sample: {
      const auto k = t.dist() == SampleDist::Uniform ? LeafKey::Kind::Uniform : LeafKey::Kind::Normal;
      return Affine{{{LeafKey{k, t.index()}, 1.0}}, 0.0};
    }
    case SymExpr::Kind::Op: break;
  }
  const auto args = t.args();
  auto a = linearize(args[0], mu);
  if (!a) return std::nullopt;
  switch (t.op_kind()) {
    case OpKind::Neg: {
      a->constant = apply_op(OpKind::Neg, a->constant);
      for (auto& [k, c] : a->coef) c = -c;
      return a;
    }
    case OpKind::Sqrt:
      if (!a->is_constant()) return std::nullopt;
      return Affine{{}, apply_op(OpKind::Sqrt, a->constant)};
    default: break;
  }
  auto b = linearize(args[1], mu);
  if (!b) return std::nullopt;
  switch (t.op_kind()) {
    case OpKind::Add:
    case OpKind::Sub: {
      const double sign = t.op_kind() == OpKind::Add ? 1.0 : -1.0;
      a->constant = apply_op(t.op_kind(), a->constant, b->constant);
      for (const auto& [k, c] : b->coef) a->coef[k] += sign * c;
      return a;
    }
    case OpKind::Mul: {
      if (!a->is_constant() && !b->is_constant()) return std::nullopt;
      if (a->is_constant()) std::swap(a, b);
      const double s = b->constant;
      a->constant = apply_op(OpKind::Mul, a->constant, s);
      for (auto& [k, c] : a->coef) c *= s;
      return a;
    }
    default: return std::nullopt;
  }
}

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool point = false;  // pinned by an equality
};

class SeparableBox {
 public:
  explicit SeparableBox(const MeasureSpec& mu) : mu_(mu) {}

  // Adds `f` (or its negation). False means the formula lies outside the
  // separable fragment.
  bool add(const SymBool& f, bool positive) {
    if (empty_) return true;
    if (auto v = constant_value(f)) {
      if (*v != positive) empty_ = true;
      return true;
    }
    switch (f.kind()) {
      case SymBool::Kind::True:
      case SymBool::Kind::False: return true;  // handled above
      case SymBool::Kind::Not: return add(f.operands()[0], !positive);
      case SymBool::Kind::And:
        if (!positive) return false;
        return add(f.operands()[0], true) && add(f.operands()[1], true);
      case SymBool::Kind::Or:
        if (positive) return false;
        return add(f.operands()[0], false) && add(f.operands()[1], false);
      case SymBool::Kind::Cmp: return add_atom(positive ? f.rel() : negate(f.rel()), f.lhs(), f.rhs());
    }
    return false;
  }

  MassEstimate mass() const {
    MassEstimate m = MassEstimate::exact(0.0);
    m.measure_zero_equality = zero_equality_;
    if (empty_) return m;
    double v = 1.0;
    for (const auto& [key, iv] : bounds_) {
      if (iv.point) {
        m.measure_zero_equality = true;
        return m;
      }
      v *= leaf_mass(key, iv);
    }
    m.value = std::clamp(v, 0.0, 1.0);
    return m;
  }

 private:
  bool random_leaves(const SymExpr& t) const {
    switch (t.kind()) {
      case SymExpr::Kind::Const: return false;
      case SymExpr::Kind::Var: return random_var(mu_, t.index());
      case SymExpr::Kind::Sample: return true;
      case SymExpr::Kind::Op:
        for (const auto& a : t.args())
          if (random_leaves(a)) return true;
        return false;
    }
    return false;
  }

  bool random_leaves(const SymBool& f) const {
    if (f.kind() == SymBool::Kind::Cmp) return random_leaves(f.lhs()) || random_leaves(f.rhs());
    for (const auto& o : f.operands())
      if (random_leaves(o)) return true;
    return false;
  }

  // Truth value when the formula mentions no random leaf; evaluated with
  // the same arithmetic as a concrete run.
  std::optional<bool> constant_value(const SymBool& f) const {
    if (random_leaves(f)) return std::nullopt;
    return evaluate(f, [&](const SymExpr& leaf) { return point_value(mu_, leaf.index()); });
  }

  bool add_atom(Rel rel, const SymExpr& lhs, const SymExpr& rhs) {
    auto l = linearize(lhs, mu_);
    auto r = linearize(rhs, mu_);
    if (!l || !r) return false;
    // (a_l - a_r) v  rel  c_r - c_l
    std::map<LeafKey, double> coef = l->coef;
    for (const auto& [k, c] : r->coef) coef[k] -= c;
    std::erase_if(coef, [](const auto& e) { return e.second == 0.0; });
    const double rhs_const = r->constant - l->constant;
    if (coef.empty()) {
      if (!holds(rel, 0.0, rhs_const)) empty_ = true;
      return true;
    }
    if (coef.size() != 1) return false;
    auto [key, a] = *coef.begin();
    if (a < 0.0) rel = mirror(rel);
    const double t = rhs_const / a;
    Interval& iv = bounds_[key];
    switch (rel) {
      case Rel::Lt:
      case Rel::Le: iv.hi = std::min(iv.hi, t); break;
      case Rel::Gt:
      case Rel::Ge: iv.lo = std::max(iv.lo, t); break;
      case Rel::Eq:
        iv.lo = std::max(iv.lo, t);
        iv.hi = std::min(iv.hi, t);
        iv.point = true;
        zero_equality_ = true;
        break;
      case Rel::Ne: break;  // removes a null set
    }
    return true;
  }

  double leaf_mass(const LeafKey& key, const Interval& iv) const {
    MeasureSpec::Kind dist = MeasureSpec::Kind::Uniform01;
    if (key.kind == LeafKey::Kind::Normal) dist = MeasureSpec::Kind::StdNormal;
    if (key.kind == LeafKey::Kind::ProgramVar) dist = mu_.components[key.index].kind;
    if (dist == MeasureSpec::Kind::Uniform01)
      return std::max(0.0, std::min(iv.hi, 1.0) - std::max(iv.lo, 0.0));
    return normal_interval(iv.lo, iv.hi);
  }

  const MeasureSpec& mu_;
  std::map<LeafKey, Interval> bounds_;
  bool empty_ = false;
  bool zero_equality_ = false;
};

}  // namespace detail

/// Closed-form μ ⊗ λ^ω mass of a conjunction, or nullopt when some atom
/// is not an affine bound on a single random variable.
inline std::optional<MassEstimate> exact_separable_mass(std::span<const SymBool> constraints,
                                                        const MeasureSpec& mu) {
  detail::SeparableBox box(mu);
  for (const auto& c : constraints)
    if (!box.add(c, true)) return std::nullopt;
  return box.mass();
}

/// Indicator-average estimate of the mass of a conjunction.
inline MassEstimate mc_mass(std::span<const SymBool> constraints, const MeasureSpec& mu,
                            std::size_t trials, std::uint64_t seed, unsigned threads = 1) {
  if (trials == 0) throw std::invalid_argument("mc_mass: trials must be positive");
  const std::size_t shards = (trials + kShardSize - 1) / kShardSize;
  std::vector<std::size_t> hits(shards, 0);
  parallel_for(shards, threads, [&](std::size_t shard) {
    SplitMix64 rng(derive_seed(seed, shard));
    const std::size_t begin = shard * kShardSize;
    const std::size_t end = std::min(trials, begin + kShardSize);
    std::size_t h = 0;
    for (std::size_t t = begin; t < end; ++t) {
      auto vars = mu.draw(rng);
      const Valuation rho(std::move(vars), rng());
      if (eval_conjunction(constraints, rho)) ++h;
    }
    hits[shard] = h;
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(total) / n;
  return MassEstimate{p, MassMethod::MonteCarlo, std::sqrt(p * (1.0 - p) / n), trials, false};
}

struct MassOptions {
  std::size_t mc_trials = 100'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Exact when separable, Monte Carlo otherwise.
inline MassEstimate path_mass(std::span<const SymBool> constraints, const MeasureSpec& mu,
                              std::size_t trials, std::uint64_t seed, unsigned threads = 1) {
  if (auto exact = exact_separable_mass(constraints, mu)) return *exact;
  return mc_mass(constraints, mu, trials, seed, threads);
}

struct PathMassReport {
  /// Index into the outcome list this report describes.
  std::size_t outcome = 0;
  MassEstimate prior;       // ⟨pc⟩
  MassEstimate likelihood;  // ⟨po⟩
  MassEstimate joint;       // ⟨pc⟩ ∩ ⟨po⟩
  std::optional<MassEstimate> query;  // σ-pullback of A ∩ ⟨pc⟩ ∩ ⟨po⟩
};

struct PathSumResult {
  /// Σ over final outcomes of the query mass (joint mass without a query).
  MassEstimate total;
  /// Σ over final outcomes of the joint mass.
  MassEstimate evidence;
  /// Joint mass of outcomes cut by the unroll budget: the most the bounded
  /// sum can be missing.
  MassEstimate truncation_bound;
  std::vector<PathMassReport> paths;
};

namespace detail {
inline void accumulate(MassEstimate& sum, const MassEstimate& m) {
  sum.value += m.value;
  sum.std_error = std::sqrt(sum.std_error * sum.std_error + m.std_error * m.std_error);
  sum.samples_used += m.samples_used;
  if (m.method == MassMethod::MonteCarlo) sum.method = MassMethod::MonteCarlo;
  sum.measure_zero_equality = sum.measure_zero_equality || m.measure_zero_equality;
}

inline std::vector<SymBool> concat(std::span<const SymBool> a, std::span<const SymBool> b) {
  std::vector<SymBool> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}
}  // namespace detail

/// Masses for already explored outcomes. Per-path Monte Carlo seeds are
/// derived from (seed, outcome index), and sums run in outcome order, so
/// results do not depend on `threads`.
inline PathSumResult quantify(std::span<const PathOutcome> outcomes, const MeasureSpec& mu,
                               const std::optional<BoolExpr>& query, const MassOptions& options) {
  PathSumResult result;
  result.paths.resize(outcomes.size());
  parallel_for(outcomes.size(), options.threads, [&](std::size_t i) {
    const PathOutcome& o = outcomes[i];
    const auto& c = o.cfg;
    auto seed = [&](std::uint64_t component) { return derive_seed(options.seed, i, component); };
    PathMassReport& r = result.paths[i];
    r.outcome = i;
    r.prior = path_mass(c.pc, mu, options.mc_trials, seed(0));
    r.likelihood = path_mass(c.po, mu, options.mc_trials, seed(1));
    const auto joint = detail::concat(c.pc, c.po);
    r.joint = path_mass(joint, mu, options.mc_trials, seed(2));
    if (query && o.status == PathStatus::Final) {
      std::vector<SymBool> q{apply_subst_bool(c.sigma, *query)};
      q.insert(q.end(), joint.begin(), joint.end());
      r.query = path_mass(q, mu, options.mc_trials, seed(3));
    }
  });
  result.total = MassEstimate::exact(0.0);
  result.evidence = MassEstimate::exact(0.0);
  result.truncation_bound = MassEstimate::exact(0.0);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& r = result.paths[i];
    if (outcomes[i].status == PathStatus::UnrollExhausted) {
      detail::accumulate(result.truncation_bound, r.joint);
      continue;
    }
    detail::accumulate(result.evidence, r.joint);
    detail::accumulate(result.total, r.query ? *r.query : r.joint);
  }
  return result;
}

/// Σ_{final (σ,k,pc,po)} (μ ⊗ λ^ω)(⟨σ⟩_k^{-1}[A × R^ω] ∩ ⟨pc⟩ ∩ ⟨po⟩).
inline PathSumResult path_sum(const Program& p, const MeasureSpec& mu, const BoolExpr& query,
                                   const ExploreOptions& explore_options = {},
                                   const MassOptions& options = {}) {
  if (mu.size() != p.n()) throw std::invalid_argument("path_sum: measure arity mismatch");
  const auto outcomes = explore(desugar(p), explore_options);
  return quantify(outcomes, mu, query, options);
}

struct PosteriorEstimate {
  double value = 0.0;
  /// Delta-method error of the ratio, ignoring the covariance of numerator
  /// and denominator.
  double std_error = 0.0;
  MassMethod method = MassMethod::Exact;
};

inline PosteriorEstimate posterior_from(const PathSumResult& r) {
  if (r.evidence.value == 0.0) throw ZeroEvidence();
  const double num = r.total.value;
  const double den = r.evidence.value;
  PosteriorEstimate out;
  out.value = std::clamp(num / den, 0.0, 1.0);
  const double a = r.total.std_error / den;
  const double b = num * r.evidence.std_error / (den * den);
  out.std_error = std::sqrt(a * a + b * b);
  out.method = r.total.method == MassMethod::Exact && r.evidence.method == MassMethod::Exact
                   ? MassMethod::Exact
                   : MassMethod::MonteCarlo;
  return out;
}

/// Normalised probability of A among accepted runs. Throws ZeroEvidence.
inline PosteriorEstimate posterior(const Program& p, const MeasureSpec& mu, const BoolExpr& query,
                                   const ExploreOptions& explore_options = {},
                                   const MassOptions& options = {}) {
  return posterior_from(path_sum(p, mu, query, explore_options, options));
}

}  // namespace probsym
