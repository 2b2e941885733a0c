#pragma once

// Concrete operational semantics with rejecting observe, and a Monte Carlo
// simulator that runs it over an input measure.

#include "probsym/ast.hpp"
#include "probsym/desugar.hpp"
#include "probsym/errors.hpp"
#include "probsym/interp.hpp"
#include "probsym/parallel.hpp"
#include "probsym/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace probsym {

/// Product input measure: each program variable independently a point
/// mass, uniform on [0,1], or standard normal.
struct MeasureSpec {
  enum class Kind { Point, Uniform01, StdNormal };
  struct Component {
    Kind kind = Kind::Point;
    double value = 0.0;  // Point only

    friend bool operator==(const Component&, const Component&) = default;
  };

  std::vector<Component> components;

  /// Dirac measure at (v, ..., v).
  static MeasureSpec point(std::size_t n, double v = 0.0) {
    return MeasureSpec{std::vector<Component>(n, Component{Kind::Point, v})};
  }

  std::size_t size() const noexcept { return components.size(); }

  bool is_discrete() const noexcept {
    for (const auto& c : components)
      if (c.kind != Kind::Point) return false;
    return true;
  }

  std::vector<double> draw(SplitMix64& rng) const {
    std::vector<double> v;
    v.reserve(components.size());
    for (const auto& c : components) {
      switch (c.kind) {
        case Kind::Point: v.push_back(c.value); break;
        case Kind::Uniform01: v.push_back(bits_to_unit(rng())); break;
        case Kind::StdNormal: v.push_back(bits_to_std_normal(rng())); break;
      }
    }
    return v;
  }

  friend bool operator==(const MeasureSpec&, const MeasureSpec&) = default;
};

struct Terminated {
  std::vector<double> vals;
  std::size_t ky = 0;  // uniform samples consumed
  std::size_t kz = 0;  // normal samples consumed
};
struct Aborted {};
struct OutOfFuel {};
struct ErrorResult {
  std::string message;
};

using RunResult = std::variant<Terminated, Aborted, OutOfFuel, ErrorResult>;

namespace detail {

class ConcreteRun {
 public:
  enum class Status { Ok, Abort, NoFuel };

  ConcreteRun(const Valuation& rho, std::size_t fuel) : rho_(rho), vals_(rho.vars()), fuel_(fuel) {}

  Status exec(const Stmt& s) {
    using K = Stmt::Kind;
    switch (s.kind()) {
      case K::Skip: return Status::Ok;
      case K::Assign: vals_[s.var()] = eval_expr(s.expr(), vals_); return Status::Ok;
      case K::SampleUniform: vals_[s.var()] = rho_.uniform(ky_++); return Status::Ok;
      case K::SampleStdNormal: vals_[s.var()] = rho_.normal(kz_++); return Status::Ok;
      case K::Observe: return eval_bool(s.cond(), vals_) ? Status::Ok : Status::Abort;
      case K::Seq: {
        const Status a = exec(s.first());
        if (a != Status::Ok) return a;
        return exec(s.second());
      }
      case K::If: return exec(eval_bool(s.cond(), vals_) ? s.first() : s.second());
      case K::While:
        while (eval_bool(s.cond(), vals_)) {
          if (fuel_ == 0) return Status::NoFuel;
          --fuel_;
          const Status st = exec(s.body());
          if (st != Status::Ok) return st;
        }
        return Status::Ok;
      case K::SampleBern:
      case K::SampleNorm: throw std::invalid_argument("run_concrete: program is not desugared");
    }
    return Status::Ok;
  }

  Terminated result() && { return Terminated{std::move(vals_), ky_, kz_}; }

 private:
  const Valuation& rho_;
  std::vector<double> vals_;
  std::size_t ky_ = 0;
  std::size_t kz_ = 0;
  std::size_t fuel_;
};

}  // namespace detail

/// f_p(ρ) on a core statement. `fuel` bounds the total number of loop
/// iterations; running out is reported as OutOfFuel, distinct from an
/// observe rejection.
inline RunResult run_concrete(const Stmt& core, const Valuation& rho, std::size_t fuel) {
  detail::ConcreteRun run(rho, fuel);
  try {
    switch (run.exec(core)) {
      case detail::ConcreteRun::Status::Ok: return std::move(run).result();
      case detail::ConcreteRun::Status::Abort: return Aborted{};
      case detail::ConcreteRun::Status::NoFuel: return OutOfFuel{};
    }
  } catch (const DomainError& e) {
    return ErrorResult{e.what()};
  }
  return Aborted{};
}

inline RunResult run_concrete(const Program& p, const Valuation& rho, std::size_t fuel) {
  return run_concrete(is_core(p.body) ? p.body : desugar(p.body), rho, fuel);
}

/// Two-sided 95% Wilson score interval.
struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

inline WilsonInterval wilson_interval(std::size_t hits, std::size_t trials) {
  if (trials == 0) return {};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct QueryFrequency {
  std::size_t hits = 0;
  double frequency = 0.0;
  double std_error = 0.0;  // binomial, from the observed frequency
  WilsonInterval wilson;
};

struct SimulationResult {
  std::size_t trials = 0;
  std::size_t terminated = 0;
  std::size_t aborted = 0;
  std::size_t out_of_fuel = 0;
  std::size_t errors = 0;
  std::vector<QueryFrequency> queries;
};

struct SimulationOptions {
  std::size_t trials = 100'000;
  std::uint64_t seed = 0;
  std::size_t fuel = 10'000;
  unsigned threads = 1;
};

/// Trials per independently seeded shard. Fixed so that results do not
/// depend on the thread count.
inline constexpr std::size_t kShardSize = 1u << 14;

/// Runs the program `trials` times with inputs drawn from μ and fresh
/// sample streams, counting outcomes and, per query set A, the runs that
/// terminate inside A.
inline SimulationResult simulate(const Program& p, const MeasureSpec& mu,
                                 std::span<const BoolExpr> queries,
                                 const SimulationOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("simulate: trials must be positive");
  if (mu.size() != p.n()) throw std::invalid_argument("simulate: measure arity mismatch");
  const Stmt core = desugar(p.body);
  const std::size_t shards = (options.trials + kShardSize - 1) / kShardSize;

  struct Counts {
    std::size_t terminated = 0, aborted = 0, out_of_fuel = 0, errors = 0;
    std::vector<std::size_t> hits;
  };
  std::vector<Counts> per_shard(shards);

  parallel_for(shards, options.threads, [&](std::size_t shard) {
    Counts& c = per_shard[shard];
    c.hits.assign(queries.size(), 0);
    SplitMix64 rng(derive_seed(options.seed, shard));
    const std::size_t begin = shard * kShardSize;
    const std::size_t end = std::min(options.trials, begin + kShardSize);
    for (std::size_t t = begin; t < end; ++t) {
      auto vars = mu.draw(rng);
      const Valuation rho(std::move(vars), rng());
      const RunResult r = run_concrete(core, rho, options.fuel);
      if (const auto* term = std::get_if<Terminated>(&r)) {
        ++c.terminated;
        for (std::size_t q = 0; q < queries.size(); ++q) {
          try {
            if (eval_bool(queries[q], term->vals)) ++c.hits[q];
          } catch (const DomainError&) {
          }
        }
      } else if (std::holds_alternative<Aborted>(r)) {
        ++c.aborted;
      } else if (std::holds_alternative<OutOfFuel>(r)) {
        ++c.out_of_fuel;
      } else {
        ++c.errors;
      }
    }
  });

  SimulationResult out;
  out.trials = options.trials;
  out.queries.resize(queries.size());
  for (const auto& c : per_shard) {
    out.terminated += c.terminated;
    out.aborted += c.aborted;
    out.out_of_fuel += c.out_of_fuel;
    out.errors += c.errors;
    for (std::size_t q = 0; q < queries.size(); ++q) out.queries[q].hits += c.hits[q];
  }
  const double n = static_cast<double>(options.trials);
  for (auto& q : out.queries) {
    q.frequency = static_cast<double>(q.hits) / n;
    q.std_error = std::sqrt(q.frequency * (1.0 - q.frequency) / n);
    q.wilson = wilson_interval(q.hits, options.trials);
  }
  return out;
}

}  // namespace probsym
