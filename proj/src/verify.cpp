#include "returnwalk/verify.hpp"

#include "returnwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rw {

MethodChoice choose_method(const StepLaw& law, long horizon, std::optional<GridSpec> grid, double alias_target) {
  MethodChoice c;
  if (grid) {
    c.method = UMethod::AliasedDft;
    c.grid = *grid;
    c.reason = "grid given on the command line";
    return c;
  }
  if (!law.is_finite()) {
    c.method = UMethod::AliasedDft;
    c.grid.sizes = {kDefaultPowerTailGrid};
    c.reason = "unbounded support: default torus";
    return c;
  }
  GridSpec exact;
  for (int r = 0; r < law.dim(); ++r) exact.sizes.push_back(std::max(3L, 2 * horizon * law.radius(r) + 1));
  const std::size_t mem = grid_memory_estimate(law, exact, horizon);
  const double work = static_cast<double>(folded_points(law, exact)) * static_cast<double>(horizon);
  std::ostringstream os;
  if (mem <= memory_cap_bytes() && work <= kExactWorkBudget) {
    c.method = UMethod::ExactDft;
    c.grid = exact;
    os << "exact grid " << exact.describe() << " fits (" << (mem >> 20) << " MiB, " << work << " point-steps)";
  } else {
    c.method = UMethod::AliasedDft;
    c.grid = grid_for_target(law, horizon, alias_target);
    os << "exact grid " << exact.describe() << " exceeds budget (" << (mem >> 20) << " MiB, " << work
       << " point-steps); aliased grid " << c.grid.describe() << " meets bound " << alias_target;
  }
  c.reason = os.str();
  return c;
}

std::vector<std::string> theorem_refusals(const StepLaw& law, const WalkClass& cls) {
  std::vector<std::string> out;
  if (!cls.drift_free) out.push_back("nonzero drift");
  if (!cls.aperiodic) {
    std::string msg = "periodic: support differences do not generate Z^" + std::to_string(law.dim());
    if (law.is_finite()) msg += " (lazify the law, e.g. hold with probability 1/2)";
    out.push_back(msg);
  }
  if (!cls.nondegenerate) out.push_back("degenerate: covariance is singular");
  if (cls.drift_free && !cls.transient) {
    std::ostringstream os;
    os << "recurrent (η = " << cls.eta << ")";
    out.push_back(os.str());
  }
  return out;
}

ComputeResult compute_pipeline(const StepLaw& law, const ComputeOptions& opt) {
  if (opt.horizon < 1) throw InputError("horizon ≥ 1 required");
  ComputeResult res;
  res.cls = classify(law);

  if (opt.mode == Arithmetic::Rational) {
    if (!law.exact()) throw InputError("rational mode needs exact probabilities in the model file");
    res.choice.method = UMethod::RationalDp;
    res.choice.reason = "rational mode";
    res.u = u_rational(law, opt.horizon);
  } else {
    res.choice = choose_method(law, opt.horizon, opt.grid, opt.alias_target);
    if (res.choice.method == UMethod::ExactDft)
      res.u = u_exact(law, opt.horizon);
    else
      res.u = u_aliased(law, opt.horizon, res.choice.grid,
                        opt.grid || !law.is_finite() ? std::nullopt : std::optional(opt.alias_target));
  }
  res.tau = invert_renewal(res.u);

  if (!res.cls.drift_free) {
    res.tail = geometric_tail(law);
  } else if (res.cls.transient) {
    res.plan = make_norming(law, res.cls);
    if (res.cls.nondegenerate) {
      res.g0_theory = theoretical_g0(law, res.cls, *res.plan);
      if (opt.horizon >= 16)
        res.tail = regular_tail(*res.g0_theory, *res.plan);
      else
        res.notes.push_back("horizon below 16: p not estimated");
    } else {
      res.notes.push_back("degenerate covariance: no tail model for U");
    }
  } else {
    res.notes.push_back("recurrent walk: U diverges and p = 1");
  }
  if (res.tail.kind != TailModel::Kind::None) {
    res.sum = u_sum(res.u, res.tail);
    res.p = estimate_p(*res.sum);
    res.tau.total = res.p;
  }
  return res;
}

VerifyResult verify_theorem(const StepLaw& law, const ComputeOptions& opt, const Tolerances& tol) {
  const WalkClass cls = classify(law);
  const auto refusals = theorem_refusals(law, cls);
  if (!refusals.empty()) {
    std::string msg = "theorem does not apply: ";
    for (std::size_t i = 0; i < refusals.size(); ++i) msg += (i ? "; " : "") + refusals[i];
    throw PreconditionError(msg);
  }
  VerifyResult v;
  v.compute = compute_pipeline(law, opt);
  const auto& c = v.compute;
  v.report = ratio_diagnostics(c.tau, c.u, c.p->p);
  v.report.verdicts = {cls.aperiodic, cls.transient, cls.drift_free, cls.nondegenerate};
  v.report.g0_empirical = empirical_g0(c.u, *c.plan);
  v.report.g0_theory = *c.g0_theory;
  v.report.g0_gap = std::abs(v.report.g0_empirical->g0 - v.report.g0_theory) / v.report.g0_theory;
  for (long n = 1; n <= c.u.horizon(); ++n) v.report.corollary_sup = std::max(v.report.corollary_sup, c.plan->C(n) * c.u[n]);
  const long top = c.tau.horizon();
  if (top >= 4) v.smoothness = smoothness_check(c.tau, top / 2, top);
  v.ratio_ok = v.report.ratio_gap <= tol.ratio;
  v.g0_ok = v.report.g0_gap <= tol.g0;
  if (!v.g0_ok) {
    std::ostringstream os;
    os << "empirical g0 " << v.report.g0_empirical->g0 << " differs from the predicted " << v.report.g0_theory
       << " by " << 100 * v.report.g0_gap << "%; check the model's scale constant";
    v.warnings.push_back(os.str());
  }
  return v;
}

}  // namespace rw
