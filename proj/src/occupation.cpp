#include "returnwalk/occupation.hpp"

#include "parallel.hpp"
#include "returnwalk/asymptotics.hpp"
#include "returnwalk/box_walk.hpp"
#include "returnwalk/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace rw {

std::string to_string(UMethod m) {
  switch (m) {
    case UMethod::ExactDft: return "exact-dft";
    case UMethod::AliasedDft: return "aliased-dft";
    case UMethod::Convolution: return "convolution";
    case UMethod::RationalDp: return "rational-dp";
  }
  return "unknown";
}

std::size_t GridSpec::total_points() const {
  std::size_t n = 1;
  for (long m : sizes) n *= static_cast<std::size_t>(m);
  return n;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  for (std::size_t r = 0; r < sizes.size(); ++r) os << (r ? "x" : "") << sizes[r];
  return os.str();
}

std::size_t memory_cap_bytes() {
  if (const char* env = std::getenv("RWALK_MEMORY_CAP")) {
    const unsigned long long v = std::strtoull(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::size_t{2} << 30;
}

namespace {

constexpr std::size_t kChunk = 2048;

struct Symmetry {
  std::vector<bool> reflect;  // phi even in lambda_r
  bool central = false;       // phi real
  bool permute = false;       // phi symmetric under coordinate permutations
};

bool same_prob(const StepLaw& law, const std::map<Point, const Atom*>& index, const Atom& at, const Point& y) {
  auto it = index.find(y);
  if (it == index.end()) return false;
  if (law.exact()) return *it->second->exact == *at.exact;
  return std::abs(it->second->prob - at.prob) <= 1e-15;
}

Symmetry detect_symmetry(const StepLaw& law, const GridSpec& grid) {
  const auto d = static_cast<std::size_t>(law.dim());
  Symmetry sym;
  sym.reflect.assign(d, true);
  if (!law.is_finite()) {
    sym.central = true;
    return sym;
  }
  std::map<Point, const Atom*> index;
  for (const auto& at : law.atoms()) index[at.x] = &at;
  sym.central = true;
  for (const auto& at : law.atoms()) {
    Point neg = at.x;
    for (auto& v : neg) v = -v;
    sym.central = sym.central && same_prob(law, index, at, neg);
    for (std::size_t r = 0; r < d; ++r) {
      Point y = at.x;
      y[r] = -y[r];
      if (!same_prob(law, index, at, y)) sym.reflect[r] = false;
    }
  }
  bool all_reflect = std::all_of(sym.reflect.begin(), sym.reflect.end(), [](bool b) { return b; });
  bool equal_sizes = std::adjacent_find(grid.sizes.begin(), grid.sizes.end(), std::not_equal_to<>()) == grid.sizes.end();
  sym.permute = d >= 2 && all_reflect && equal_sizes;
  for (std::size_t r = 0; sym.permute && r + 1 < d; ++r) {
    for (const auto& at : law.atoms()) {
      Point y = at.x;
      std::swap(y[r], y[r + 1]);
      if (!same_prob(law, index, at, y)) {
        sym.permute = false;
        break;
      }
    }
  }
  return sym;
}

// Grid points of the fundamental domain with their multiplicities.
struct FoldedGrid {
  std::vector<long> index;  // point-major, dim grid indices per point
  std::vector<double> weight;
  bool real = true;
};

double fold_weight(long j, long m) { return (j == 0 || 2 * j == m) ? 1.0 : 2.0; }

std::size_t count_folded(const Symmetry& sym, const GridSpec& grid) {
  const std::size_t d = grid.sizes.size();
  if (sym.permute) {
    // multiset coefficient C(K + d - 1, d)
    const std::size_t k = static_cast<std::size_t>(grid.sizes[0] / 2 + 1);
    double c = 1.0;
    for (std::size_t i = 0; i < d; ++i) c = c * static_cast<double>(k + i) / static_cast<double>(i + 1);
    return static_cast<std::size_t>(std::llround(c));
  }
  std::size_t n = 1;
  for (std::size_t r = 0; r < d; ++r)
    n *= static_cast<std::size_t>(sym.reflect[r] ? grid.sizes[r] / 2 + 1 : grid.sizes[r]);
  return n;
}

FoldedGrid fold_grid(const Symmetry& sym, const GridSpec& grid) {
  const std::size_t d = grid.sizes.size();
  FoldedGrid fg;
  fg.real = sym.central;
  std::vector<long> hi(d);
  for (std::size_t r = 0; r < d; ++r) hi[r] = sym.reflect[r] ? grid.sizes[r] / 2 : grid.sizes[r] - 1;
  std::vector<long> cur(d, 0);
  const std::size_t expect = count_folded(sym, grid);
  fg.index.reserve(expect * d);
  fg.weight.reserve(expect);
  while (true) {
    double w = 1.0;
    for (std::size_t r = 0; r < d; ++r)
      if (sym.reflect[r]) w *= fold_weight(cur[r], grid.sizes[r]);
    if (sym.permute) {
      // number of distinct orderings of a nondecreasing tuple
      double perms = 1.0, run = 1.0;
      for (std::size_t r = 1; r <= d; ++r) perms *= static_cast<double>(r);
      for (std::size_t r = 1; r < d; ++r) {
        if (cur[r] == cur[r - 1]) {
          run += 1.0;
          perms /= run;
        } else {
          run = 1.0;
        }
      }
      w *= perms;
    }
    fg.index.insert(fg.index.end(), cur.begin(), cur.end());
    fg.weight.push_back(w);
    // next tuple
    std::size_t r = d;
    while (r > 0) {
      --r;
      if (cur[r] < hi[r]) {
        ++cur[r];
        if (sym.permute)
          for (std::size_t k = r + 1; k < d; ++k) cur[k] = cur[r];
        else
          for (std::size_t k = r + 1; k < d; ++k) cur[k] = 0;
        break;
      }
      if (r == 0) return fg;
    }
    if (d == 0) return fg;
  }
}

// Sum over the full grid of Re phi(lambda_j)^n, n = 0..N, from the folded
// domain. Chunk partials are reduced in chunk order, so the result does not
// depend on the number of workers.
std::vector<double> grid_power_sums(const StepLaw& law, const GridSpec& grid, long horizon) {
  const Symmetry sym = detect_symmetry(law, grid);
  const FoldedGrid fg = fold_grid(sym, grid);
  const std::size_t d = grid.sizes.size();
  const std::size_t points = fg.weight.size();

  // exp(2 pi i k / M_r) tables for finite atoms
  std::vector<std::vector<std::complex<double>>> roots(d);
  if (law.is_finite()) {
    for (std::size_t r = 0; r < d; ++r) {
      const long m = grid.sizes[r];
      roots[r].resize(static_cast<std::size_t>(m));
      for (long k = 0; k < m; ++k) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
        roots[r][static_cast<std::size_t>(k)] = {std::cos(ang), std::sin(ang)};
      }
    }
  }
  auto phi_at = [&](const long* j) -> std::complex<double> {
    if (!law.is_finite()) {
      const long m = grid.sizes[0];
      long jj = j[0] > m / 2 ? j[0] - m : j[0];
      return {(*law.power_tail())(2.0 * std::numbers::pi * static_cast<double>(jj) / static_cast<double>(m)), 0.0};
    }
    std::complex<double> acc = 0.0;
    for (const auto& at : law.atoms()) {
      std::complex<double> term = at.prob;
      for (std::size_t r = 0; r < d; ++r) {
        const long m = grid.sizes[r];
        long k = (j[r] * at.x[r]) % m;
        if (k < 0) k += m;
        term *= roots[r][static_cast<std::size_t>(k)];
      }
      acc += term;
    }
    return acc;
  };

  const std::size_t chunks = (points + kChunk - 1) / kChunk;
  const auto width = static_cast<std::size_t>(horizon + 1);
  std::vector<std::vector<double>> partial_sum(chunks), partial_carry(chunks);
  detail::parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> sum(width, 0.0), carry(width, 0.0);
    const std::size_t lo = c * kChunk, hi = std::min(points, lo + kChunk);
    auto add = [&](std::size_t n, double x) {
      const double t = sum[n] + x;
      if (std::abs(sum[n]) >= std::abs(x))
        carry[n] += (sum[n] - t) + x;
      else
        carry[n] += (x - t) + sum[n];
      sum[n] = t;
    };
    for (std::size_t i = lo; i < hi; ++i) {
      const std::complex<double> phi = phi_at(fg.index.data() + i * d);
      const double w = fg.weight[i];
      if (fg.real) {
        const double f = phi.real();
        double z = w;
        for (std::size_t n = 0; n < width; ++n) {
          add(n, z);
          z *= f;
          if (std::abs(z) < 1e-300) break;
        }
      } else {
        std::complex<double> z = w;
        for (std::size_t n = 0; n < width; ++n) {
          add(n, z.real());
          z *= phi;
          if (std::abs(z.real()) + std::abs(z.imag()) < 1e-300) break;
        }
      }
    }
    partial_sum[c] = std::move(sum);
    partial_carry[c] = std::move(carry);
  });

  std::vector<double> out(width);
  for (std::size_t n = 0; n < width; ++n) {
    detail::CompensatedSum acc;
    for (std::size_t c = 0; c < chunks; ++c) {
      acc.add(partial_sum[c][n]);
      acc.add(partial_carry[c][n]);
    }
    out[n] = acc.value();
  }
  return out;
}

void check_horizon(long horizon) {
  if (horizon < 1) throw PreconditionError("horizon must be >= 1");
}

USeq finish_grid_sequence(const StepLaw& law, const GridSpec& grid, long horizon, UMethod method,
                          std::span<const long> modulus) {
  const auto sums = grid_power_sums(law, grid, horizon);
  const double total = static_cast<double>(grid.total_points());
  USeq u;
  u.method = method;
  u.law_fingerprint = law.fingerprint();
  u.values.resize(sums.size());
  u.error.assign(sums.size(), 0.0);
  for (std::size_t n = 0; n < sums.size(); ++n) {
    double v = sums[n] / total;
    if (!origin_reachable(law, static_cast<long>(n), modulus)) v = 0.0;
    if (v < 0.0) {
      if (v < -1e-12) throw InconsistentSequence("grid average produced u_" + std::to_string(n) + " < 0");
      v = 0.0;
    }
    u.values[n] = std::min(v, 1.0);
  }
  u.values[0] = 1.0;
  return u;
}

void check_grid_memory(const StepLaw& law, const GridSpec& grid, long horizon, const char* hint) {
  const std::size_t bytes = grid_memory_estimate(law, grid, horizon);
  if (bytes > memory_cap_bytes())
    throw CapExceeded("grid " + grid.describe() + " needs " + std::to_string(bytes >> 20) +
                      " MiB, above the memory cap" + hint);
}

}  // namespace

std::size_t folded_points(const StepLaw& law, const GridSpec& grid) {
  return count_folded(detect_symmetry(law, grid), grid);
}

std::size_t grid_memory_estimate(const StepLaw& law, const GridSpec& grid, long horizon) {
  const Symmetry sym = detect_symmetry(law, grid);
  const std::size_t points = count_folded(sym, grid);
  const std::size_t per_point = sizeof(double) + grid.sizes.size() * sizeof(long);
  const std::size_t chunks = (points + kChunk - 1) / kChunk;
  return points * per_point + chunks * 2 * static_cast<std::size_t>(horizon + 1) * sizeof(double);
}

USeq u_exact(const StepLaw& law, long horizon) {
  check_horizon(horizon);
  if (!law.is_finite()) throw PreconditionError("u_exact requires a finite-support law; use u_aliased");
  GridSpec grid;
  for (int r = 0; r < law.dim(); ++r) grid.sizes.push_back(std::max(3L, 2 * horizon * law.radius(r) + 1));
  check_grid_memory(law, grid, horizon, "; use the aliased method");
  return finish_grid_sequence(law, grid, horizon, UMethod::ExactDft, {});
}

USeq u_convolution(const StepLaw& law, long horizon) {
  check_horizon(horizon);
  BoxWalk<double> walk(law, horizon);
  USeq u;
  u.method = UMethod::Convolution;
  u.law_fingerprint = law.fingerprint();
  u.values.assign(static_cast<std::size_t>(horizon + 1), 0.0);
  u.error.assign(u.values.size(), 0.0);
  u.values[0] = 1.0;
  for (long n = 1; n <= horizon; ++n) u.values[static_cast<std::size_t>(n)] = walk.advance(false);
  return u;
}

USeq u_rational(const StepLaw& law, long horizon) {
  check_horizon(horizon);
  if (!law.exact()) throw PreconditionError("u_rational requires a rational-mode law");
  BoxWalk<BigInt> walk(law, horizon);
  const BigInt den = law.common_denominator();
  USeq u;
  u.method = UMethod::RationalDp;
  u.law_fingerprint = law.fingerprint();
  std::vector<Rational> exact{Rational(1)};
  BigInt scale = 1;
  for (long n = 1; n <= horizon; ++n) {
    scale *= den;
    Rational q(walk.advance(false), scale);
    q.canonicalize();
    exact.push_back(q);
  }
  for (const auto& q : exact) u.values.push_back(to_double(q));
  u.error.assign(u.values.size(), 0.0);
  u.exact = std::move(exact);
  return u;
}

USeq u_aliased(const StepLaw& law, long horizon, const GridSpec& grid, std::optional<double> error_target) {
  check_horizon(horizon);
  if (static_cast<int>(grid.sizes.size()) != law.dim()) throw PreconditionError("grid dimension does not match the law");
  for (long m : grid.sizes)
    if (m < 3) throw PreconditionError("grid sizes must be >= 3");
  check_grid_memory(law, grid, horizon, "");
  std::vector<double> bounds(static_cast<std::size_t>(horizon + 1));
  for (long n = 0; n <= horizon; ++n) bounds[static_cast<std::size_t>(n)] = alias_error_bound(law, n, grid);
  if (error_target) {
    const double worst = *std::max_element(bounds.begin(), bounds.end());
    if (worst > *error_target) {
      std::ostringstream os;
      os << "grid " << grid.describe() << " too small: certified alias bound " << worst << " exceeds target "
         << *error_target;
      throw PreconditionError(os.str());
    }
  }
  USeq u = finish_grid_sequence(law, grid, horizon, UMethod::AliasedDft, grid.sizes);
  u.error = std::move(bounds);
  return u;
}

double alias_error_bound(const StepLaw& law, long n, const GridSpec& grid) {
  if (n == 0) return 0.0;
  const double nn = static_cast<double>(n);
  if (law.is_finite()) {
    double total = 0.0;
    for (int r = 0; r < law.dim(); ++r) {
      const auto rr = static_cast<std::size_t>(r);
      double mean = 0.0;
      long lo = std::numeric_limits<long>::max(), hi = std::numeric_limits<long>::min();
      for (const auto& at : law.atoms()) {
        mean += at.prob * static_cast<double>(at.x[rr]);
        lo = std::min(lo, at.x[rr]);
        hi = std::max(hi, at.x[rr]);
      }
      const double half = static_cast<double>(grid.sizes[rr]) / 2.0;
      const double width = static_cast<double>(hi - lo);
      if (width == 0.0) {
        const double pos = nn * static_cast<double>(lo);
        total += (pos > -half && pos <= half) ? 0.0 : 1.0;
        continue;
      }
      const double t = half - nn * std::abs(mean);
      total += t <= 0.0 ? 1.0 : 2.0 * std::exp(-2.0 * t * t / (nn * width * width));
    }
    return std::min(total, 1.0);
  }
  // Power tail: truncate steps at level T, union bound on the truncated-away
  // steps plus Chebyshev on the (symmetric, mean-zero) truncated sum.
  const double alpha = law.alpha();
  const double c = law.tail_constant();
  const double half = static_cast<double>(grid.sizes[0]) / 2.0;
  auto second_moment = [&](double t) {
    const double big_t = std::floor(t);
    double s = 0.0;
    if (big_t <= 1e5) {
      for (long k = 1; k <= static_cast<long>(big_t); ++k) s += std::pow(static_cast<double>(k), 1.0 - alpha);
    } else if (alpha < 1.0) {
      s = (std::pow(big_t + 1.0, 2.0 - alpha) - 1.0) / (2.0 - alpha);
    } else {
      s = 1.0 + (std::pow(big_t, 2.0 - alpha) - 1.0) / (2.0 - alpha);
    }
    return 2.0 * c * s;
  };
  double best = 1.0;
  const double base = half / (2.0 * nn);  // M / (4n)
  for (int k = -20; k <= 40; ++k) {
    const double t = base * std::pow(2.0, 0.5 * k);
    if (t < 1.0) continue;
    const double tail = 2.0 * c * std::pow(std::floor(t), -alpha) / alpha;
    const double bound = nn * tail + nn * second_moment(t) / (half * half);
    best = std::min(best, bound);
  }
  return best;
}

GridSpec grid_for_target(const StepLaw& law, long horizon, double target) {
  check_horizon(horizon);
  if (!(target > 0.0)) throw PreconditionError("error target must be positive");
  auto ok = [&](long m) {
    GridSpec g{std::vector<long>(static_cast<std::size_t>(law.dim()), m)};
    return alias_error_bound(law, horizon, g) <= target;
  };
  long hi = 4;
  while (!ok(hi)) {
    if (hi > (1L << 40)) throw PreconditionError("no feasible grid for the requested error target");
    hi *= 2;
  }
  long lo = hi / 2;  // even values; ok(lo) false unless lo < 4
  if (lo < 4) return GridSpec{std::vector<long>(static_cast<std::size_t>(law.dim()), 4)};
  while (hi - lo > 2) {
    long mid = (lo + hi) / 2;
    if (mid % 2) ++mid;
    if (mid >= hi) break;
    if (ok(mid))
      hi = mid;
    else
      lo = mid;
  }
  return GridSpec{std::vector<long>(static_cast<std::size_t>(law.dim()), hi)};
}

// ---------------------------------------------------------------------------
// Total mass

TailModel regular_tail(double g0, const NormingPlan& plan) {
  TailModel t;
  t.kind = TailModel::Kind::RegularlyVarying;
  t.g0 = g0;
  t.eta = plan.eta;
  return t;
}

TailModel geometric_tail(const StepLaw& law) {
  if (!law.is_finite()) throw PreconditionError("geometric tail requires a finite-support law");
  double best = 1.0;
  for (int r = 0; r < law.dim(); ++r) {
    const auto rr = static_cast<std::size_t>(r);
    double mean = 0.0;
    for (const auto& at : law.atoms()) mean += at.prob * static_cast<double>(at.x[rr]);
    if (std::abs(mean) <= 1e-15) continue;
    // P{S_nr = 0} <= (E exp(theta xi_r))^n for every theta.
    auto mgf = [&](double theta) {
      double s = 0.0;
      for (const auto& at : law.atoms()) s += at.prob * std::exp(theta * static_cast<double>(at.x[rr]));
      return s;
    };
    const auto [theta, value] = boost::math::tools::brent_find_minima(mgf, -50.0, 50.0, 52);
    (void)theta;
    best = std::min(best, value);
  }
  if (best >= 1.0) throw PreconditionError("geometric tail requires nonzero drift");
  TailModel t;
  t.kind = TailModel::Kind::Geometric;
  t.ratio = best;
  return t;
}

double power_tail_sum(long m, double eta) {
  if (!(eta > 1.0)) throw PreconditionError("power tail sum diverges for eta <= 1");
  double direct = 0.0;
  long a = m + 1;
  for (; a <= 1000; ++a) direct += std::pow(static_cast<double>(a), -eta);
  const double x = static_cast<double>(a);
  const double integral = std::pow(x, 1.0 - eta) / (eta - 1.0);
  const double f = std::pow(x, -eta);
  const double d1 = -eta * std::pow(x, -eta - 1.0);
  const double d3 = -eta * (eta + 1.0) * (eta + 2.0) * std::pow(x, -eta - 3.0);
  return direct + integral + f / 2.0 - d1 / 12.0 + d3 / 720.0;
}

USum u_sum(const USeq& u, const TailModel& tail) {
  const long n_max = u.horizon();
  detail::CompensatedSum acc;
  double err = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    acc.add(u[n]);
    err += u.error[static_cast<std::size_t>(n)];
  }
  USum out;
  switch (tail.kind) {
    case TailModel::Kind::None:
      break;
    case TailModel::Kind::RegularlyVarying: {
      if (!(tail.eta > 1.0)) throw PreconditionError("recurrent plan: sum of u_n diverges (eta <= 1)");
      if (n_max < 16) throw PreconditionError("horizon too short for a stable tail fit (need N >= 16)");
      out.tail = tail.g0 * power_tail_sum(n_max, tail.eta);
      // Local constant from the last two entries (absorbs period-2 zeros).
      const double local = 0.5 * (u[n_max] + u[n_max - 1]) * std::pow(static_cast<double>(n_max), tail.eta);
      const double model = tail.g0 > 0.0 ? out.tail * std::abs(local / tail.g0 - 1.0) : 0.0;
      err += model;
      break;
    }
    case TailModel::Kind::Geometric:
      err += std::pow(tail.ratio, static_cast<double>(n_max + 1)) / (1.0 - tail.ratio);
      break;
  }
  // Rounding allowance for the summed grid averages.
  err += static_cast<double>(n_max) * std::numeric_limits<double>::epsilon() * (1.0 + acc.value());
  out.total = acc.value() + out.tail;
  out.bound = err;
  return out;
}

}  // namespace rw
