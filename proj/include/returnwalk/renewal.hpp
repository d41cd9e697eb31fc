#pragma once

// Discrete renewal relation between the occupation sequence u and the
// first-return distribution p:  u_n = sum_{k=1}^n p_k u_{n-k},  u_0 = 1.

#include "returnwalk/occupation.hpp"
#include "returnwalk/rational.hpp"

#include <optional>
#include <vector>

namespace rw {

struct PEstimate {
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double defect() const { return 1.0 - p; }
};

// Defective first-return distribution. Index 0 is unused and held at 0 so
// values[n] is P{tau = n}.
struct TauDist {
  std::vector<double> values;
  std::vector<double> error;                   // first-order propagated bound
  std::optional<std::vector<Rational>> exact;  // rational mode
  std::optional<PEstimate> total;              // set by callers that estimate p

  long horizon() const { return static_cast<long>(values.size()) - 1; }
  double operator[](long n) const { return values[static_cast<std::size_t>(n)]; }
  double partial_mass() const;
  std::vector<double> cumulative() const;
};

TauDist make_tau(std::vector<double> p_1_to_n);
TauDist make_tau(std::vector<Rational> p_1_to_n);

// u from p. Exact when p is exact. Throws PreconditionError on negative mass
// or total mass above 1.
USeq forward_renewal(const TauDist& p, long horizon);

// p from u. Exact when u carries rationals. Throws PreconditionError when
// u_0 != 1 and InconsistentSequence when some p_n < -tolerance, where the
// tolerance is 1e-12 plus ten times the propagated error of p_n.
TauDist invert_renewal(const USeq& u);

// p = U / (1 + U) with the U bracket mapped through the monotone map.
PEstimate estimate_p(const USum& sum);

// k-fold convolution of (u_1, u_2, ...) truncated to indices <= N; index 0
// of the result is 0 and index j holds u^{*(k)}_j.
std::vector<double> selfconv_power(const USeq& u, int k);

struct AlternatingSeries {
  double value = 0.0;
  bool applicable = false;      // sum_{m>=1} u_m < 1
  std::vector<double> partial;  // partial sums after 1, 2, ... terms
  double omitted_term = 0.0;    // u^{*(K+1)}_n (0 when K >= n)
  double remainder_bound = 0.0; // U_n^{K+1} / (1 - U_n) with U_n = sum_{m<=n} u_m
};

// sum_{k=1}^{min(n,K)} (-1)^{k+1} u^{*(k)}_n. total_mass is U (with tail);
// when absent the partial sum of u over the horizon decides applicability.
AlternatingSeries alternating_series_pn(const USeq& u, long n, int max_terms,
                                        std::optional<double> total_mass = std::nullopt);

}  // namespace rw
