#include "returnwalk/oracle.hpp"

#include "parallel.hpp"
#include "returnwalk/box_walk.hpp"
#include "returnwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rw {

std::string to_string(Arithmetic a) { return a == Arithmetic::Rational ? "rational" : "float"; }

std::size_t LayerTable::index_of(const Point& x) const {
  std::size_t idx = 0;
  for (int r = 0; r < dim; ++r) {
    const auto rr = static_cast<std::size_t>(r);
    idx = idx * static_cast<std::size_t>(2 * radius[rr] + 1) + static_cast<std::size_t>(x[rr] + radius[rr]);
  }
  return idx;
}

Point LayerTable::point_of(std::size_t idx) const {
  Point x(static_cast<std::size_t>(dim));
  for (int r = dim - 1; r >= 0; --r) {
    const auto rr = static_cast<std::size_t>(r);
    const auto side = static_cast<std::size_t>(2 * radius[rr] + 1);
    x[rr] = static_cast<long>(idx % side) - radius[rr];
    idx /= side;
  }
  return x;
}

bool LayerTable::contains(const Point& x) const {
  if (static_cast<int>(x.size()) != dim) return false;
  for (int r = 0; r < dim; ++r)
    if (std::abs(x[static_cast<std::size_t>(r)]) > radius[static_cast<std::size_t>(r)]) return false;
  return true;
}

double LayerTable::at(const Point& x) const { return contains(x) ? values[index_of(x)] : 0.0; }

Rational LayerTable::exact_at(const Point& x) const {
  if (!scaled) throw PreconditionError("table holds no exact values");
  if (!contains(x)) return 0;
  Rational q((*scaled)[index_of(x)], scale);
  q.canonicalize();
  return q;
}

namespace {

void check_rational_cap(const StepLaw& law, long n) {
  double cells = 1.0;
  for (int r = 0; r < law.dim(); ++r) cells *= static_cast<double>(2 * n * law.radius(r) + 1);
  if (cells > static_cast<double>(kRationalCellCap)) {
    long ok = n;
    while (ok > 1) {
      double c = 1.0;
      for (int r = 0; r < law.dim(); ++r) c *= static_cast<double>(2 * ok * law.radius(r) + 1);
      if (c <= static_cast<double>(kRationalCellCap)) break;
      --ok;
    }
    throw CapExceeded("rational table for n = " + std::to_string(n) + " needs " +
                      std::to_string(static_cast<long long>(cells)) + " cells (cap " +
                      std::to_string(kRationalCellCap) + "); largest allowed horizon is n = " + std::to_string(ok) +
                      ", or use float mode");
  }
}

template <class T>
LayerTable snapshot(const BoxWalk<T>& box, const StepLaw& law, long n, const BigInt& scale) {
  LayerTable t;
  t.dim = law.dim();
  t.horizon = n;
  for (long side : box.side()) t.radius.push_back((side - 1) / 2);
  const auto& v = box.values();
  if constexpr (std::is_same_v<T, double>) {
    t.values = v;
  } else {
    t.scale = scale;
    t.values.reserve(v.size());
    const Rational s(scale);
    for (const auto& z : v) t.values.push_back(z == 0 ? 0.0 : to_double(Rational(z) / s));
    t.scaled = v;
  }
  return t;
}

template <class T>
TabooTable run_taboo(const StepLaw& law, long n) {
  BoxWalk<T> box(law, std::max(n, 1L));
  TabooTable out;
  out.first_return.assign(static_cast<std::size_t>(n + 1), 0.0);
  out.survival.assign(static_cast<std::size_t>(n + 1), 0.0);
  out.survival[0] = 1.0;
  const BigInt den = law.common_denominator();
  BigInt scale = 1;
  if constexpr (!std::is_same_v<T, double>) {
    out.first_return_exact.emplace(static_cast<std::size_t>(n + 1), Rational(0));
    out.survival_exact.emplace(static_cast<std::size_t>(n + 1), Rational(0));
    (*out.survival_exact)[0] = 1;
  }
  for (long m = 1; m <= n; ++m) {
    const T hit = box.advance(true);
    const T alive = box.total();
    const auto mm = static_cast<std::size_t>(m);
    if constexpr (std::is_same_v<T, double>) {
      out.first_return[mm] = hit;
      out.survival[mm] = alive;
    } else {
      scale *= den;
      Rational ph(hit, scale), sv(alive, scale);
      ph.canonicalize();
      sv.canonicalize();
      out.first_return[mm] = to_double(ph);
      out.survival[mm] = to_double(sv);
      (*out.first_return_exact)[mm] = ph;
      (*out.survival_exact)[mm] = sv;
    }
  }
  out.layer = snapshot(box, law, n, scale);
  return out;
}

template <class T>
LayerTable run_position(const StepLaw& law, long n) {
  BoxWalk<T> box(law, std::max(n, 1L));
  BigInt scale = 1;
  const BigInt den = law.common_denominator();
  for (long m = 1; m <= n; ++m) {
    box.advance(false);
    scale *= den;
  }
  return snapshot(box, law, n, scale);
}

void check_table_args(const StepLaw& law, long n, Arithmetic mode) {
  if (!law.is_finite()) throw PreconditionError("taboo tables need a finite-support law");
  if (n < 0) throw PreconditionError("horizon must be >= 0");
  if (mode == Arithmetic::Rational) {
    if (!law.exact()) throw PreconditionError("rational mode needs a law with exact probabilities");
    check_rational_cap(law, n);
  }
}

}  // namespace

TabooTable taboo_dp(const StepLaw& law, long n, Arithmetic mode) {
  check_table_args(law, n, mode);
  return mode == Arithmetic::Rational ? run_taboo<BigInt>(law, n) : run_taboo<double>(law, n);
}

LayerTable position_dp(const StepLaw& law, long n, Arithmetic mode) {
  check_table_args(law, n, mode);
  return mode == Arithmetic::Rational ? run_position<BigInt>(law, n) : run_position<double>(law, n);
}

Lemma1Result lemma1_check(const TabooTable& taboo, const LayerTable& position, double p, long band_lo,
                          long band_hi, std::optional<double> qn) {
  const LayerTable& f = taboo.layer;
  if (f.dim != position.dim || f.radius != position.radius)
    throw PreconditionError("lemma1_check: tables are not on a common box");
  if (!(p >= 0.0 && p < 1.0)) throw PreconditionError("lemma1_check: p must lie in [0, 1)");
  Lemma1Result res;
  res.band_lo = band_lo;
  res.band_hi = band_hi;
  res.target = 1.0 - p;
  res.ratio_min = std::numeric_limits<double>::infinity();
  res.ratio_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double q = position.values[i];
    if (!(q > 0.0)) continue;
    const Point x = f.point_of(i);
    long norm = 0;
    for (long c : x) norm = std::max(norm, std::abs(c));
    if (norm < band_lo || norm > band_hi) continue;
    Lemma1Row row{x, f.values[i], q, f.values[i] / q, 0.0};
    row.deviation = std::abs(row.ratio / res.target - 1.0);
    if (res.rows.empty() || row.deviation > res.max_deviation) {
      res.max_deviation = row.deviation;
      res.worst = x;
    }
    res.ratio_min = std::min(res.ratio_min, row.ratio);
    res.ratio_max = std::max(res.ratio_max, row.ratio);
    res.max_additive = std::max(res.max_additive, std::abs(row.taboo - res.target * q));
    res.rows.push_back(std::move(row));
  }
  if (res.rows.empty()) throw PreconditionError("lemma1_check: empty band");
  if (qn) res.scaled_additive = res.max_additive / *qn;
  return res;
}

WilsonInterval wilson(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(trials);
  const double ph = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double centre = (ph + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z / (1 + z2 / nn) * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
// In (0, 1].
double uniform_open0(std::mt19937_64& g) { return static_cast<double>((g() >> 11) + 1) * 0x1.0p-53; }

// Vose alias table.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& w) : prob_(w.size()), alias_(w.size()) {
    const std::size_t k = w.size();
    std::vector<double> scaled(k);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < k; ++i) {
      scaled[i] = w[i] * static_cast<double>(k);
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob_[i] = 1.0, alias_[i] = i;
    for (std::size_t i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t sample(std::mt19937_64& g) const {
    const double u = uniform01(g) * static_cast<double>(prob_.size());
    auto i = static_cast<std::size_t>(u);
    if (i >= prob_.size()) i = prob_.size() - 1;
    return u - static_cast<double>(i) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

// Devroye's rejection sampler for P{K = k} proportional to k^{-1-alpha}.
// Magnitudes are capped at 2^100, far beyond any return within the horizon.
class ZipfSampler {
 public:
  explicit ZipfSampler(double alpha) : alpha_(alpha), b_(std::pow(2.0, alpha)) {}

  double sample(std::mt19937_64& g) const {
    while (true) {
      const double u = uniform_open0(g), v = uniform01(g);
      const double x = std::floor(std::min(std::pow(u, -1.0 / alpha_), 0x1.0p100));
      const double t = std::pow(1.0 + 1.0 / x, alpha_);
      if (v * x * (t - 1.0) / (b_ - 1.0) <= t / b_) return x;
    }
  }

 private:
  double alpha_, b_;
};

struct BlockCounts {
  std::vector<std::uint64_t> u, p;
};

}  // namespace

MCEstimate mc_paths(const StepLaw& law, long n_max, std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw PreconditionError("mc_paths: trials must be >= 1");
  if (n_max < 1) throw PreconditionError("mc_paths: horizon must be >= 1");
  const auto width = static_cast<std::size_t>(n_max + 1);
  const std::uint64_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<BlockCounts> counts(blocks);
  const int d = law.dim();

  std::optional<AliasTable> alias;
  std::optional<ZipfSampler> zipf;
  if (law.is_finite()) {
    std::vector<double> w;
    for (const auto& a : law.atoms()) w.push_back(a.prob);
    alias.emplace(w);
  } else {
    zipf.emplace(law.alpha());
  }
  const auto& atoms = law.atoms();

  detail::parallel_for(blocks, [&](std::size_t b) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(static_cast<std::uint64_t>(b) >> 32)};
    std::mt19937_64 gen(sq);
    BlockCounts& c = counts[b];
    c.u.assign(width, 0);
    c.p.assign(width, 0);
    const std::uint64_t first = b * kTrialBlock;
    const std::uint64_t count = std::min(kTrialBlock, trials - first);
    std::vector<long> pos(static_cast<std::size_t>(d));
    for (std::uint64_t t = 0; t < count; ++t) {
      bool returned = false;
      if (alias) {
        std::fill(pos.begin(), pos.end(), 0L);
        for (long n = 1; n <= n_max; ++n) {
          const auto& x = atoms[alias->sample(gen)].x;
          bool zero = true;
          for (int r = 0; r < d; ++r) {
            const auto rr = static_cast<std::size_t>(r);
            pos[rr] += x[rr];
            zero = zero && pos[rr] == 0;
          }
          if (zero) {
            ++c.u[static_cast<std::size_t>(n)];
            if (!returned) ++c.p[static_cast<std::size_t>(n)];
            returned = true;
          }
        }
      } else {
        double s = 0.0;  // exact for |s| < 2^53; larger positions cannot return within the horizon
        for (long n = 1; n <= n_max; ++n) {
          const double k = zipf->sample(gen);
          s += (gen() >> 63) ? k : -k;
          if (s == 0.0) {
            ++c.u[static_cast<std::size_t>(n)];
            if (!returned) ++c.p[static_cast<std::size_t>(n)];
            returned = true;
          }
        }
      }
    }
  });

  MCEstimate est;
  est.n_max = n_max;
  est.trials = trials;
  est.seed = seed;
  est.hits_u.assign(width, 0);
  est.hits_p.assign(width, 0);
  for (const auto& c : counts)
    for (std::size_t n = 1; n < width; ++n) {
      est.hits_u[n] += c.u[n];
      est.hits_p[n] += c.p[n];
    }
  est.u_ci.resize(width);
  est.p_ci.resize(width);
  for (std::size_t n = 1; n < width; ++n) {
    est.u_ci[n] = wilson(est.hits_u[n], trials);
    est.p_ci[n] = wilson(est.hits_p[n], trials);
  }
  return est;
}

Enumerated exact_enumeration(const StepLaw& law, long n) {
  if (!law.is_finite() || !law.exact()) throw PreconditionError("exact_enumeration needs a rational-mode finite law");
  if (n < 1) throw PreconditionError("exact_enumeration: n must be >= 1");
  const auto& atoms = law.atoms();
  if (std::pow(static_cast<double>(atoms.size()), static_cast<double>(n)) > kEnumerationCap) {
    long ok = 1;
    while (std::pow(static_cast<double>(atoms.size()), static_cast<double>(ok + 1)) <= kEnumerationCap) ++ok;
    throw CapExceeded("enumeration of " + std::to_string(atoms.size()) + "^" + std::to_string(n) +
                      " paths exceeds the cap; largest allowed horizon is n = " + std::to_string(ok));
  }
  const int d = law.dim();
  const BigInt den = law.common_denominator();
  std::vector<BigInt> weight;
  for (const auto& a : atoms) weight.push_back(BigInt(Rational(*a.exact * den).get_num()));
  std::vector<long> reach;
  for (int r = 0; r < d; ++r) reach.push_back(law.radius(r));

  BigInt u_sum = 0, p_sum = 0;
  std::vector<BigInt> w(static_cast<std::size_t>(n + 1));
  std::vector<Point> pos(static_cast<std::size_t>(n + 1), Point(static_cast<std::size_t>(d), 0));
  std::vector<bool> visited(static_cast<std::size_t>(n + 1), false);
  std::vector<std::size_t> choice(static_cast<std::size_t>(n + 1), 0);
  w[0] = 1;

  // Iterative depth-first search; level m holds the path after m steps.
  long m = 1;
  choice[1] = 0;
  while (m >= 1) {
    const auto mm = static_cast<std::size_t>(m);
    if (choice[mm] == atoms.size()) {
      --m;
      if (m >= 1) ++choice[static_cast<std::size_t>(m)];
      continue;
    }
    const auto& x = atoms[choice[mm]].x;
    bool zero = true, feasible = true;
    const long left = n - m;
    for (int r = 0; r < d; ++r) {
      const auto rr = static_cast<std::size_t>(r);
      pos[mm][rr] = pos[mm - 1][rr] + x[rr];
      zero = zero && pos[mm][rr] == 0;
      feasible = feasible && std::abs(pos[mm][rr]) <= left * reach[rr];
    }
    if (!feasible) {
      ++choice[mm];
      continue;
    }
    w[mm] = w[mm - 1] * weight[choice[mm]];
    if (m == n) {
      if (zero) {
        u_sum += w[mm];
        if (!visited[mm - 1]) p_sum += w[mm];
      }
      ++choice[mm];
      continue;
    }
    visited[mm] = visited[mm - 1] || zero;
    ++m;
    choice[static_cast<std::size_t>(m)] = 0;
  }
  BigInt scale = 1;
  for (long k = 0; k < n; ++k) scale *= den;
  Enumerated out{Rational(u_sum, scale), Rational(p_sum, scale)};
  out.u.canonicalize();
  out.p.canonicalize();
  return out;
}

}  // namespace rw
