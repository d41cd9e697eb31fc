#pragma once

// End-to-end pipelines shared by the CLI and the acceptance runner.

#include "returnwalk/asymptotics.hpp"
#include "returnwalk/lattice_model.hpp"
#include "returnwalk/occupation.hpp"
#include "returnwalk/oracle.hpp"
#include "returnwalk/renewal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rw {

// Work budget (grid points times horizon) for the unaliased grid.
inline constexpr double kExactWorkBudget = 4e9;
inline constexpr double kDefaultAliasTarget = 1e-12;
// Default torus for unbounded laws when no grid is given.
inline constexpr long kDefaultPowerTailGrid = 1L << 20;

struct MethodChoice {
  UMethod method = UMethod::ExactDft;
  GridSpec grid;
  std::string reason;
};

MethodChoice choose_method(const StepLaw& law, long horizon, std::optional<GridSpec> grid,
                           double alias_target = kDefaultAliasTarget);

struct ComputeOptions {
  long horizon = 0;
  std::optional<GridSpec> grid;
  Arithmetic mode = Arithmetic::Float;
  double alias_target = kDefaultAliasTarget;
};

struct ComputeResult {
  WalkClass cls;
  MethodChoice choice;
  USeq u;
  TauDist tau;
  std::optional<NormingPlan> plan;
  std::optional<double> g0_theory;
  TailModel tail;
  std::optional<USum> sum;
  std::optional<PEstimate> p;
  std::vector<std::string> notes;
};

ComputeResult compute_pipeline(const StepLaw& law, const ComputeOptions& opt);

// Failed hypotheses of the main theorem, in a fixed order; empty when all hold.
std::vector<std::string> theorem_refusals(const StepLaw& law, const WalkClass& cls);

struct Tolerances {
  double ratio = 0.02;
  double g0 = 0.03;
};

struct VerifyResult {
  ComputeResult compute;
  TheoremReport report;
  Smoothness smoothness;
  bool ratio_ok = false;
  bool g0_ok = false;
  std::vector<std::string> warnings;
  bool pass() const { return ratio_ok && g0_ok; }
};

// Throws PreconditionError listing the failed hypotheses when the theorem
// does not apply.
VerifyResult verify_theorem(const StepLaw& law, const ComputeOptions& opt, const Tolerances& tol);

}  // namespace rw
