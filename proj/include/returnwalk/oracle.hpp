#pragma once

// Independent ground truth: taboo-probability dynamic programming, free
// position tables, Monte Carlo paths and brute-force enumeration.

#include "returnwalk/lattice_model.hpp"
#include "returnwalk/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rw {

enum class Arithmetic { Rational, Float };
std::string to_string(Arithmetic a);

// Rational tables are refused above this many cells in the final box.
inline constexpr std::size_t kRationalCellCap = 125000;
// exact_enumeration refuses when |support|^n exceeds this.
inline constexpr double kEnumerationCap = 1e7;

// One layer of a walk on the reachable box [-n a_r, n a_r].
struct LayerTable {
  int dim = 0;
  long horizon = 0;
  std::vector<long> radius;  // n a_r
  std::vector<double> values;
  std::optional<std::vector<BigInt>> scaled;  // exact values times scale
  BigInt scale = 1;                           // D^n

  std::size_t index_of(const Point& x) const;
  Point point_of(std::size_t idx) const;
  bool contains(const Point& x) const;
  double at(const Point& x) const;
  Rational exact_at(const Point& x) const;
};

struct TabooTable {
  LayerTable layer;                 // f_n(x) = P{S_n = x, tau > n}
  std::vector<double> first_return; // p_m, index 0 unused
  std::vector<double> survival;     // P{tau > m}
  std::optional<std::vector<Rational>> first_return_exact;
  std::optional<std::vector<Rational>> survival_exact;
};

TabooTable taboo_dp(const StepLaw& law, long n, Arithmetic mode);
// P{S_n = x} on the same box as taboo_dp(law, n, mode).
LayerTable position_dp(const StepLaw& law, long n, Arithmetic mode);

struct Lemma1Row {
  Point x;
  double taboo = 0.0;
  double free = 0.0;
  double ratio = 0.0;
  double deviation = 0.0;  // |ratio / (1-p) - 1|
};

struct Lemma1Result {
  long band_lo = 0, band_hi = 0;
  double target = 0.0;  // 1 - p
  double max_deviation = 0.0;
  Point worst;
  double ratio_min = 0.0, ratio_max = 0.0;
  double max_additive = 0.0;  // max |f_n(x) - (1-p) P{S_n = x}|
  std::optional<double> scaled_additive;  // max_additive / Q_n when Q_n is given
  std::vector<Lemma1Row> rows;
};

// Rows over x with band_lo <= |x|_inf <= band_hi and P{S_n = x} > 0.
Lemma1Result lemma1_check(const TabooTable& taboo, const LayerTable& position, double p, long band_lo,
                          long band_hi, std::optional<double> qn = std::nullopt);

struct WilsonInterval {
  double lo = 0.0, hi = 0.0;
};
inline constexpr double kWilsonZ99 = 2.5758293035489004;
WilsonInterval wilson(std::uint64_t hits, std::uint64_t trials, double z = kWilsonZ99);

struct MCEstimate {
  long n_max = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> hits_u;  // #{S_n = 0}, index 0 unused
  std::vector<std::uint64_t> hits_p;  // #{tau = n}
  std::vector<WilsonInterval> u_ci, p_ci;

  double u(long n) const { return static_cast<double>(hits_u[static_cast<std::size_t>(n)]) / static_cast<double>(trials); }
  double p(long n) const { return static_cast<double>(hits_p[static_cast<std::size_t>(n)]) / static_cast<double>(trials); }
};

inline constexpr std::uint64_t kTrialBlock = 4096;

// Trials are split into fixed blocks of kTrialBlock; block b draws from
// mt19937_64 seeded with seed_seq{seed, b}, so results do not depend on the
// worker count.
MCEstimate mc_paths(const StepLaw& law, long n_max, std::uint64_t trials, std::uint64_t seed);

struct Enumerated {
  Rational u;
  Rational p;
};

// Direct sum over support^n with pruning of paths that can no longer reach
// the origin. Requires a rational-mode finite law.
Enumerated exact_enumeration(const StepLaw& law, long n);

}  // namespace rw
