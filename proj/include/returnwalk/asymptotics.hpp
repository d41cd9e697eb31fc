#pragma once

// Norming plans, limit densities at the origin, and convergence diagnostics
// for u_n ~ g(0)/C_n and P{tau = n} ~ (1-p)^2 u_n.

#include "returnwalk/lattice_model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace rw {

struct USeq;
struct TauDist;

// Pure-power norming: c_{nr} = n^{1/alpha_r}, C_n = prod_r c_{nr}.
struct NormingPlan {
  std::vector<double> alpha;
  // Scale sigma_r of the limit law (phi_Y(t) = exp(-sigma^alpha |t|^alpha));
  // carried into g(0), not into C_n.
  std::vector<double> scale;
  double eta = 0.0;

  double c(long n, std::size_t r = 0) const;
  double C(long n) const;
};

NormingPlan make_norming(const StepLaw& law, const WalkClass& cls);

// (2 pi)^{-d/2} (det B)^{-1/2}.
double gaussian_g0(const Eigen::MatrixXd& covariance);
// Gamma(1 + 1/alpha) / (pi sigma): density at 0 of the law with
// characteristic function exp(-sigma^alpha |t|^alpha).
double product_stable_g0(double alpha, double sigma);

// g(0,...,0) for the plan's limit law (Gaussian with B, or product stable).
double theoretical_g0(const StepLaw& law, const WalkClass& cls, const NormingPlan& plan);

// Aitken delta-squared on x0, x1, x2. Returns nullopt when the differences
// do not contract with a common sign (no geometric convergence to accelerate).
std::optional<double> aitken(double x0, double x1, double x2);

struct LadderPoint {
  long n = 0;
  double value = 0.0;
};

struct Extrapolation {
  std::vector<LadderPoint> ladder;  // raw values on n_k = N / 2^k
  std::vector<double> trend;        // Aitken on consecutive triples (NaN where not contracting)
  double limit = 0.0;
  long top = 0;                     // largest n of the triple used
  bool accelerated = false;         // false: raw value at the top of the ladder
  bool degenerate = false;          // sequence identically zero on the ladder
};

// Geometric ladder N, N/2, N/4, ... down to n_min; indices with
// structurally-zero u_n step down to the nearest nonzero index. The limit is
// Aitken on the largest contracting triple, else the raw top value.
Extrapolation extrapolate_ladder(const std::vector<double>& seq, const std::vector<bool>& usable,
                                 long horizon, long n_min = 8);

struct EmpiricalG0 {
  double g0 = 0.0;
  Extrapolation extrapolation;
};

// Throws PreconditionError when fewer than three ladder points exist.
EmpiricalG0 empirical_g0(const USeq& u, const NormingPlan& plan);

double predict_pn(double p, double g0, const NormingPlan& plan, long n);

struct Verdicts {
  bool aperiodic = false;
  bool transient = false;
  bool drift_free = false;
  bool nondegenerate = false;
};

struct TheoremReport {
  Extrapolation ratio;       // rho_n = p_n / u_n
  double target = 0.0;       // (1-p)^2
  double ratio_gap = 0.0;    // |rho_inf - target| / target
  std::optional<EmpiricalG0> g0_empirical;
  double g0_theory = 0.0;
  double g0_gap = 0.0;
  double corollary_sup = 0.0;  // sup_{n<=N} C_n u_n
  Verdicts verdicts;
};

// Throws PreconditionError when u_n = 0 on the whole ladder.
TheoremReport ratio_diagnostics(const TauDist& tau, const USeq& u, double p);

struct Smoothness {
  double deviation = 0.0;
  long from = 0, to = 0;
  bool skipped = false;  // a zero p_n inside the window
};

// sup over [from, to) of |p_{n+1}/p_n - 1|.
Smoothness smoothness_check(const TauDist& tau, long from, long to);

}  // namespace rw
