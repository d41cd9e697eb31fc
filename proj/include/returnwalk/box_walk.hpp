#pragma once

// Layer-by-layer evolution of the position law of a finite-support walk on
// the exact reachable box [-m a_r, m a_r]. Used for the convolution path of
// the occupation sequence and for taboo (origin-avoiding) probabilities.
//
// T is double (probabilities) or BigInt (probabilities scaled by D^m, where D
// is the common denominator of the step law).

#include "returnwalk/errors.hpp"
#include "returnwalk/lattice_model.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <type_traits>
#include <vector>

namespace rw {

std::size_t memory_cap_bytes();

template <class T>
class BoxWalk {
 public:
  BoxWalk(const StepLaw& law, long horizon) : dim_(law.dim()), horizon_(horizon) {
    if (!law.is_finite()) throw PreconditionError("box walk requires a finite-support law");
    std::size_t cells = 1;
    for (int r = 0; r < dim_; ++r) {
      const long a = law.radius(r);
      radius_.push_back(a);
      const long side = 2 * a * horizon + 1;
      side_.push_back(side);
      cells *= static_cast<std::size_t>(side);
    }
    const std::size_t bytes = 2 * cells * (sizeof(T) + (std::is_same_v<T, double> ? 0 : 16));
    if (bytes > memory_cap_bytes())
      throw CapExceeded("reachable box needs " + std::to_string(bytes >> 20) +
                        " MiB, above the memory cap; use the aliased method or a shorter horizon");
    stride_.assign(static_cast<std::size_t>(dim_), 1);
    for (int r = dim_ - 2; r >= 0; --r)
      stride_[static_cast<std::size_t>(r)] = stride_[static_cast<std::size_t>(r) + 1] * side_[static_cast<std::size_t>(r) + 1];
    cur_.assign(cells, T(0));
    next_.assign(cells, T(0));
    origin_ = index_of(Point(static_cast<std::size_t>(dim_), 0));
    cur_[origin_] = T(1);

    for (const auto& at : law.atoms()) {
      std::ptrdiff_t off = 0;
      for (int r = 0; r < dim_; ++r) off += at.x[static_cast<std::size_t>(r)] * stride_[static_cast<std::size_t>(r)];
      if constexpr (std::is_same_v<T, double>) {
        moves_.push_back({off, at.prob});
      } else {
        const BigInt den = law.common_denominator();
        const Rational scaled = *at.exact * den;
        moves_.push_back({off, T(scaled.get_num())});
      }
    }
  }

  long step_count() const { return steps_; }
  int dim() const { return dim_; }
  const std::vector<long>& side() const { return side_; }
  const std::vector<std::ptrdiff_t>& stride() const { return stride_; }
  std::size_t origin_index() const { return origin_; }
  const std::vector<T>& values() const { return cur_; }

  std::size_t index_of(const Point& x) const {
    std::ptrdiff_t idx = 0;
    for (int r = 0; r < dim_; ++r) {
      const auto rr = static_cast<std::size_t>(r);
      idx += (x[rr] + (side_[rr] - 1) / 2) * stride_[rr];
    }
    return static_cast<std::size_t>(idx);
  }

  // Advances one step. With taboo set, mass landing on the origin is removed
  // and returned (it is the first-return mass at this step); otherwise the
  // origin value after the step is returned.
  T advance(bool taboo) {
    if (steps_ >= horizon_) throw PreconditionError("box walk advanced past its horizon");
    const long reach = steps_;  // current support lies within radius reach * a
    std::fill_n(next_.begin(), next_.size(), T(0));
    for_each_in_box(reach, [&](std::size_t i) {
      const T& v = cur_[i];
      if (v == 0) return;
      for (const auto& [off, w] : moves_) accumulate(next_[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)], v, w);
    });
    std::swap(cur_, next_);
    ++steps_;
    T hit = cur_[origin_];
    if (taboo) cur_[origin_] = T(0);
    return hit;
  }

  // Sum over the reachable box.
  T total() const {
    T acc = 0;
    for_each_in_box(steps_, [&](std::size_t i) { acc += cur_[i]; });
    return acc;
  }

  // Calls fn(flat index) for every cell within radius reach*a_r of the origin.
  template <class Fn>
  void for_each_in_box(long reach, Fn&& fn) const {
    std::vector<long> lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_)), cur(static_cast<std::size_t>(dim_));
    for (int r = 0; r < dim_; ++r) {
      const auto rr = static_cast<std::size_t>(r);
      const long centre = (side_[rr] - 1) / 2;
      lo[rr] = centre - reach * radius_[rr];
      hi[rr] = centre + reach * radius_[rr];
      cur[rr] = lo[rr];
    }
    const auto last = static_cast<std::size_t>(dim_ - 1);
    while (true) {
      std::ptrdiff_t base = 0;
      for (std::size_t r = 0; r < last; ++r) base += cur[r] * stride_[r];
      for (long k = lo[last]; k <= hi[last]; ++k) fn(static_cast<std::size_t>(base + k));
      std::size_t r = last;
      while (r > 0) {
        --r;
        if (++cur[r] <= hi[r]) break;
        cur[r] = lo[r];
        if (r == 0) return;
      }
      if (last == 0) return;
    }
  }

  // Point coordinates of a flat index.
  Point point_of(std::size_t idx) const {
    Point x(static_cast<std::size_t>(dim_));
    auto rem = static_cast<std::ptrdiff_t>(idx);
    for (int r = 0; r < dim_; ++r) {
      const auto rr = static_cast<std::size_t>(r);
      x[rr] = rem / stride_[rr] - (side_[rr] - 1) / 2;
      rem %= stride_[rr];
    }
    return x;
  }

 private:
  static void accumulate(T& dst, const T& v, const T& w) {
    if constexpr (std::is_same_v<T, double>)
      dst += v * w;
    else
      mpz_addmul(dst.get_mpz_t(), v.get_mpz_t(), w.get_mpz_t());
  }

  int dim_;
  long horizon_;
  long steps_ = 0;
  std::vector<long> radius_, side_;
  std::vector<std::ptrdiff_t> stride_;
  std::vector<T> cur_, next_;
  std::size_t origin_ = 0;
  std::vector<std::pair<std::ptrdiff_t, T>> moves_;
};

}  // namespace rw
