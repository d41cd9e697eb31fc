#pragma once

// Occupation sequence u_n = P{S_n = 0}: exact, aliased (torus) and rational
// computations, certified aliasing bounds, and the total mass U = sum u_n.

#include "returnwalk/lattice_model.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rw {

struct NormingPlan;

enum class UMethod { ExactDft, AliasedDft, Convolution, RationalDp };
std::string to_string(UMethod m);

struct USeq {
  std::vector<double> values;  // u_0 .. u_N
  std::vector<double> error;   // absolute error bound per entry
  UMethod method = UMethod::ExactDft;
  std::string law_fingerprint;
  std::optional<std::vector<Rational>> exact;  // RationalDp only

  long horizon() const { return static_cast<long>(values.size()) - 1; }
  double operator[](long n) const { return values[static_cast<std::size_t>(n)]; }
};

struct GridSpec {
  std::vector<long> sizes;  // M_r per dimension

  std::size_t total_points() const;
  std::string describe() const;  // "65x65x65"
};

// Byte cap for grids and reachable boxes (RWALK_MEMORY_CAP, default 2 GiB).
std::size_t memory_cap_bytes();

// Number of grid points actually evaluated after folding by the symmetries
// of the law, and the bytes that evaluation holds.
std::size_t folded_points(const StepLaw& law, const GridSpec& grid);
std::size_t grid_memory_estimate(const StepLaw& law, const GridSpec& grid, long horizon);

// u_n for n <= N with no aliasing: grid average of phi^n on M_r = 2 N a_r + 1.
USeq u_exact(const StepLaw& law, long horizon);
// The same sequence by iterated convolution on the reachable box.
USeq u_convolution(const StepLaw& law, long horizon);
// Exact rationals by scaled-integer convolution; requires a rational-mode law.
USeq u_rational(const StepLaw& law, long horizon);

// u_n^{(M)} = sum over x = 0 mod M of P{S_n = x}, via running powers of phi.
// When error_target is given and some n <= N has a certified bound above it,
// throws PreconditionError.
USeq u_aliased(const StepLaw& law, long horizon, const GridSpec& grid,
               std::optional<double> error_target = std::nullopt);

// Upper bound on P{S_n outside (-M_r/2, M_r/2] for some r}, which dominates
// u_n^{(M)} - u_n. Hoeffding per coordinate for bounded support; truncation
// plus Chebyshev for the power tail. Clamped to [0, 1].
double alias_error_bound(const StepLaw& law, long n, const GridSpec& grid);

// Smallest even uniform grid whose certified bound is <= target for every
// n <= horizon.
GridSpec grid_for_target(const StepLaw& law, long horizon, double target);

// Tail model for U beyond the computed horizon.
struct TailModel {
  enum class Kind { None, RegularlyVarying, Geometric };
  Kind kind = Kind::None;
  double g0 = 0.0;      // RegularlyVarying: u_n ~ g0 * n^-eta
  double eta = 0.0;
  double ratio = 0.0;   // Geometric: u_n <= ratio^n
};

TailModel regular_tail(double g0, const NormingPlan& plan);
// Chernoff bound along a drifted coordinate; requires nonzero drift.
TailModel geometric_tail(const StepLaw& law);

struct USum {
  double total = 0.0;  // U = sum_{n>=1} u_n including tail
  double tail = 0.0;
  double bound = 0.0;  // bracketing half-width; heuristic beyond the exact part
};

// sum_{n=m+1}^inf n^-eta via Euler-Maclaurin; eta > 1.
double power_tail_sum(long m, double eta);

// Throws PreconditionError for recurrent models (eta <= 1 with a regular tail).
USum u_sum(const USeq& u, const TailModel& tail);

}  // namespace rw
