#include "returnwalk/asymptotics.hpp"

#include "returnwalk/errors.hpp"
#include "returnwalk/occupation.hpp"
#include "returnwalk/renewal.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rw {

double NormingPlan::c(long n, std::size_t r) const {
  return std::pow(static_cast<double>(n), 1.0 / alpha[r]);
}

double NormingPlan::C(long n) const { return std::pow(static_cast<double>(n), eta); }

NormingPlan make_norming(const StepLaw& law, const WalkClass& cls) {
  if (!cls.drift_free) throw PreconditionError("nonzero drift: stability without centering fails");
  NormingPlan plan;
  if (law.is_finite()) {
    if (!cls.covariance) throw PreconditionError("finite-variance plan needs a covariance");
    const auto& b = *cls.covariance;
    for (int r = 0; r < law.dim(); ++r) {
      plan.alpha.push_back(2.0);
      plan.scale.push_back(std::sqrt(b(r, r) / 2.0));
    }
  } else {
    plan.alpha.push_back(law.alpha());
    plan.scale.push_back(std::pow(law.power_tail()->scale_power(), 1.0 / law.alpha()));
  }
  for (double a : plan.alpha) plan.eta += 1.0 / a;
  return plan;
}

double gaussian_g0(const Eigen::MatrixXd& b) {
  if (b.rows() != b.cols() || b.rows() == 0) throw PreconditionError("covariance must be a nonempty square matrix");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  const auto& ev = eig.eigenvalues();
  if (ev.minCoeff() <= 1e-14 * scale) throw PreconditionError("covariance is singular or not positive definite (det B = 0)");
  double log_det = 0.0;
  for (int i = 0; i < ev.size(); ++i) log_det += std::log(ev[i]);
  const double d = static_cast<double>(b.rows());
  return std::exp(-0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det);
}

double product_stable_g0(double alpha, double sigma) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw PreconditionError("stable index must lie in (0, 2]");
  if (!(sigma > 0.0)) throw PreconditionError("stable scale must be positive");
  return boost::math::tgamma(1.0 + 1.0 / alpha) / (std::numbers::pi * sigma);
}

double theoretical_g0(const StepLaw& law, const WalkClass& cls, const NormingPlan& plan) {
  if (law.is_finite()) {
    if (!cls.covariance) throw PreconditionError("no covariance for a finite-variance law");
    return gaussian_g0(*cls.covariance);
  }
  return product_stable_g0(plan.alpha[0], plan.scale[0]);
}

std::optional<double> aitken(double x0, double x1, double x2) {
  const double d1 = x1 - x0, d2 = x2 - x1;
  if (d1 == 0.0 && d2 == 0.0) return x2;
  if (d1 * d2 <= 0.0 || std::abs(d2) >= std::abs(d1)) return std::nullopt;
  return x2 - d2 * d2 / (d2 - d1);
}

Extrapolation extrapolate_ladder(const std::vector<double>& seq, const std::vector<bool>& usable, long horizon,
                                 long n_min) {
  Extrapolation ex;
  bool any_usable = false;
  for (long n = 1; n <= horizon; ++n) any_usable = any_usable || usable[static_cast<std::size_t>(n)];
  std::vector<LadderPoint> pts;
  for (long n = horizon; n >= std::max(1L, n_min); n /= 2) {
    long m = n;
    if (any_usable)
      while (m >= 1 && !usable[static_cast<std::size_t>(m)]) --m;
    if (m < 1) continue;
    if (!pts.empty() && pts.back().n == m) continue;
    pts.push_back({m, seq[static_cast<std::size_t>(m)]});
  }
  std::reverse(pts.begin(), pts.end());
  ex.ladder = pts;
  ex.degenerate = !any_usable;
  if (pts.size() < 3) return ex;
  ex.trend.assign(pts.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 2; i < pts.size(); ++i)
    if (auto a = aitken(pts[i - 2].value, pts[i - 1].value, pts[i].value)) ex.trend[i] = *a;
  ex.limit = pts.back().value;
  ex.top = pts.back().n;
  for (std::size_t i = pts.size(); i-- > 2;) {
    if (!std::isnan(ex.trend[i])) {
      ex.limit = ex.trend[i];
      ex.top = pts[i].n;
      ex.accelerated = true;
      break;
    }
  }
  return ex;
}

EmpiricalG0 empirical_g0(const USeq& u, const NormingPlan& plan) {
  const long horizon = u.horizon();
  std::vector<double> seq(static_cast<std::size_t>(horizon + 1), 0.0);
  std::vector<bool> usable(seq.size(), false);
  for (long n = 1; n <= horizon; ++n) {
    seq[static_cast<std::size_t>(n)] = plan.C(n) * u[n];
    usable[static_cast<std::size_t>(n)] = u[n] > 0.0;
  }
  EmpiricalG0 out;
  out.extrapolation = extrapolate_ladder(seq, usable, horizon);
  if (out.extrapolation.ladder.size() < 3)
    throw PreconditionError("horizon too short: fewer than 3 ladder points");
  out.g0 = out.extrapolation.degenerate ? 0.0 : out.extrapolation.limit;
  return out;
}

double predict_pn(double p, double g0, const NormingPlan& plan, long n) {
  if (!(p >= 0.0 && p < 1.0)) throw PreconditionError("predict_pn: p must lie in [0, 1)");
  return (1.0 - p) * (1.0 - p) * g0 / plan.C(n);
}

TheoremReport ratio_diagnostics(const TauDist& tau, const USeq& u, double p) {
  const long horizon = std::min(tau.horizon(), u.horizon());
  std::vector<double> rho(static_cast<std::size_t>(horizon + 1), 0.0);
  std::vector<bool> usable(rho.size(), false);
  for (long n = 1; n <= horizon; ++n) {
    if (u[n] > 0.0) {
      rho[static_cast<std::size_t>(n)] = tau[n] / u[n];
      usable[static_cast<std::size_t>(n)] = true;
    }
  }
  TheoremReport rep;
  rep.ratio = extrapolate_ladder(rho, usable, horizon);
  if (rep.ratio.degenerate) throw PreconditionError("ratio diagnostics: u_n = 0 on every ladder index");
  if (rep.ratio.ladder.size() < 3) throw PreconditionError("horizon too short: fewer than 3 ladder points");
  rep.target = (1.0 - p) * (1.0 - p);
  rep.ratio_gap = std::abs(rep.ratio.limit - rep.target) / rep.target;
  return rep;
}

Smoothness smoothness_check(const TauDist& tau, long from, long to) {
  if (from < 1 || to > tau.horizon() || from >= to) throw PreconditionError("smoothness window outside the horizon");
  Smoothness s;
  s.from = from;
  s.to = to;
  for (long n = from; n <= to; ++n) {
    if (tau[n] <= 0.0) {
      s.skipped = true;
      s.deviation = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
  }
  for (long n = from; n < to; ++n) s.deviation = std::max(s.deviation, std::abs(tau[n + 1] / tau[n] - 1.0));
  return s;
}

}  // namespace rw
