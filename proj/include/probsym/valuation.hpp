#pragma once

// Valuations: a finite vector of program-variable values followed by one
// infinite stream of samples per primitive distribution. Streams are
// realised lazily from a seeded generator; once drawn, a prefix never
// changes, so several valuations may share a stream and view it at
// different offsets.

#include "probsym/ast.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace probsym {

/// splitmix64 (Steele, Lea, Flood 2014). Small state, good avalanche, and
/// trivially splittable by seeding fresh instances from derived keys.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Independent child seed for (seed, a, b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  SplitMix64 g(seed ^ 0x5851f42d4c957f2dULL);
  std::uint64_t h = g();
  h ^= SplitMix64(a + 0x2545f4914f6cdd1dULL)();
  h = SplitMix64(h)();
  h ^= SplitMix64(b + 0x9e3779b97f4a7c15ULL)();
  return SplitMix64(h)();
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Standard normal variate by inverse-CDF transform of an open-interval
/// uniform.
inline double bits_to_std_normal(std::uint64_t bits) {
  const double p = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  static const boost::math::normal_distribution<double> std_normal;
  return boost::math::quantile(std_normal, p);
}

class SampleStream {
 public:
  SampleStream(SampleDist dist, std::uint64_t seed, std::vector<double> prefix = {})
      : dist_(dist), rng_(seed), values_(std::move(prefix)) {}

  double at(std::size_t i) {
    while (values_.size() <= i) {
      const std::uint64_t bits = rng_();
      values_.push_back(dist_ == SampleDist::Uniform ? bits_to_unit(bits) : bits_to_std_normal(bits));
    }
    return values_[i];
  }

  std::size_t drawn() const noexcept { return values_.size(); }
  SampleDist dist() const noexcept { return dist_; }

 private:
  SampleDist dist_;
  SplitMix64 rng_;
  std::vector<double> values_;
};

/// A point of R^{n+ω}: program variables plus uniform and normal streams.
class Valuation {
 public:
  /// Fresh streams derived from `seed`.
  Valuation(std::vector<double> vars, std::uint64_t seed)
      : Valuation(std::move(vars), {}, {}, seed) {}

  /// Streams start with the given prefixes and continue pseudo-randomly.
  Valuation(std::vector<double> vars, std::vector<double> uniform_prefix,
            std::vector<double> normal_prefix, std::uint64_t seed = 0)
      : vars_(std::move(vars)),
        uni_(std::make_shared<SampleStream>(SampleDist::Uniform, derive_seed(seed, 1),
                                            std::move(uniform_prefix))),
        nrm_(std::make_shared<SampleStream>(SampleDist::StdNormal, derive_seed(seed, 2),
                                            std::move(normal_prefix))) {}

  std::size_t n() const noexcept { return vars_.size(); }
  const std::vector<double>& vars() const noexcept { return vars_; }
  std::vector<double>& vars() noexcept { return vars_; }
  double var(std::size_t i) const { return vars_.at(i); }

  /// k-th remaining uniform sample.
  double uniform(std::size_t k) const { return uni_->at(uni_offset_ + k); }
  /// k-th remaining standard-normal sample.
  double normal(std::size_t k) const { return nrm_->at(nrm_offset_ + k); }
  double sample(SampleDist d, std::size_t k) const {
    return d == SampleDist::Uniform ? uniform(k) : normal(k);
  }

  /// Same variables; streams left-shifted by the given counts.
  Valuation shifted(std::size_t ky, std::size_t kz) const {
    Valuation v = *this;
    v.uni_offset_ += ky;
    v.nrm_offset_ += kz;
    return v;
  }

  Valuation with_vars(std::vector<double> vars) const {
    Valuation v = *this;
    v.vars_ = std::move(vars);
    return v;
  }

  std::size_t uniform_offset() const noexcept { return uni_offset_; }
  std::size_t normal_offset() const noexcept { return nrm_offset_; }

  /// True when both valuations read the same underlying streams.
  bool shares_streams_with(const Valuation& o) const noexcept {
    return uni_ == o.uni_ && nrm_ == o.nrm_;
  }

 private:
  std::vector<double> vars_;
  std::shared_ptr<SampleStream> uni_;
  std::shared_ptr<SampleStream> nrm_;
  std::size_t uni_offset_ = 0;
  std::size_t nrm_offset_ = 0;
};

}  // namespace probsym
