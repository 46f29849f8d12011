#pragma once

// Parameter values A with infinitely many rational approximations m/n such
// that A - m/n lies in the window (u + [q^2 Xi lambda^n, q Xi lambda^n])/(gamma n).
// Only a finite schedule of (threshold, q) steps is realized and verified.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "polylab/numerics.hpp"

namespace polylab {

struct Rational {
  long long num = 1;
  long long den = 1;

  Real value() const { return Real(num) / Real(den); }
  std::string str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

  static Rational parse(const std::string& s) {
    try {
      std::size_t slash = s.find('/');
      Rational r;
      std::size_t used = 0;
      if (slash == std::string::npos) {
        r.num = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        r.den = 1;
      } else {
        r.num = std::stoll(s.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument(s);
        std::string d = s.substr(slash + 1);
        r.den = std::stoll(d, &used);
        if (used != d.size()) throw std::invalid_argument(s);
      }
      if (r.den <= 0) throw std::invalid_argument(s);
      return r;
    } catch (const std::logic_error&) {
      fail(ErrorKind::schema, "not a rational: '" + s + "'");
    }
  }
};

/// q in [1/2, 1) or (1, 2].
inline bool admissible_q(const Rational& q) {
  if (q.den <= 0) return false;
  // compare as integers: den/2 <= num <= 2 den, num != den
  return 2 * q.num >= q.den && q.num <= 2 * q.den && q.num != q.den;
}

struct Interval {
  Real lo;
  Real hi;

  Real width() const { return hi - lo; }
  Real midpoint() const { return (lo + hi) / 2; }
  bool contains_strictly(const Real& x) const { return lo < x && x < hi; }
  bool contains_strictly(const Interval& o) const { return lo < o.lo && o.hi < hi; }
};

struct LiouvilleSpec {
  Real gamma;
  Real u;
  Real Xi;
  Real lambda;
  std::vector<Rational> q_list;
  std::vector<long> N_schedule;
  Interval start{Real(1), Real(2)};

  void validate() const {
    if (!(gamma > 0)) fail(ErrorKind::precondition, "gamma must be positive");
    if (Xi == 0) fail(ErrorKind::precondition, "Xi must be nonzero");
    if (!(lambda > 0 && lambda < 1)) fail(ErrorKind::precondition, "lambda must lie in (0,1)");
    if (q_list.empty()) fail(ErrorKind::precondition, "q_list is empty");
    for (const auto& q : q_list)
      if (!admissible_q(q)) fail(ErrorKind::precondition, "q = " + q.str() + " outside [1/2,1) u (1,2]");
    for (std::size_t i = 0; i < N_schedule.size(); ++i) {
      if (N_schedule[i] < 1) fail(ErrorKind::precondition, "thresholds must be positive");
      if (i > 0 && N_schedule[i] < N_schedule[i - 1]) fail(ErrorKind::precondition, "thresholds must not decrease");
    }
    if (!(start.lo < start.hi)) fail(ErrorKind::precondition, "start interval is empty");
  }
};

struct Witness {
  long n = 0;
  long m = 0;
  Rational q;
  Interval window;
  std::size_t step = 0;
  long threshold = 0;
};

/// m/n + (u + [q^2 Xi lambda^n, q Xi lambda^n])/(gamma n), endpoints sorted.
inline Interval q_window(const LiouvilleSpec& spec, long n, long m, const Rational& q) {
  if (n < 1) fail(ErrorKind::precondition, "window needs n >= 1");
  if (!admissible_q(q)) fail(ErrorKind::precondition, "q = " + q.str() + " outside [1/2,1) u (1,2]");
  Real qv = q.value();
  Real ln = boost::multiprecision::pow(spec.lambda, n);
  Real base = Real(m) / n;
  Real gn = spec.gamma * n;
  Real a = base + (spec.u + qv * qv * spec.Xi * ln) / gn;
  Real b = base + (spec.u + qv * spec.Xi * ln) / gn;
  return a < b ? Interval{a, b} : Interval{b, a};
}

/// Mantissa bits needed to resolve windows at index n.
inline double window_bits(const LiouvilleSpec& spec, double n) {
  double l = -boost::multiprecision::log2(spec.lambda).convert_to<double>();
  return std::ceil(n * l + std::log2(n < 1 ? 1 : n) + 64);
}

struct ConstructConfig {
  std::uint64_t seed = 0;
  std::size_t pool = 4;          // choose among the first `pool` admissible (n, m)
  long scan_budget = 10'000'000;  // n values tried per step
};

struct Construction {
  Real A;
  std::vector<Witness> witnesses;
  std::vector<Interval> intervals;  // start interval, then one per step
};

/// Nested-interval construction: step k uses threshold N_schedule[k] and
/// q_list[k mod |q_list|].  Each chosen window lies strictly inside the
/// current interval and is at most half as wide.
inline Construction construct_A(const LiouvilleSpec& spec, std::size_t depth, const ConstructConfig& cfg = {}) {
  using boost::multiprecision::floor;
  using boost::multiprecision::log2;
  spec.validate();
  if (depth < 1 || depth > spec.N_schedule.size())
    fail(ErrorKind::precondition, "depth must be between 1 and the schedule length");
  if (cfg.pool == 0) fail(ErrorKind::precondition, "candidate pool must be nonempty");

  const unsigned bits = working_bits();
  {
    long n_max = 0;
    for (std::size_t k = 0; k < depth; ++k) n_max = std::max(n_max, spec.N_schedule[k] + 1);
    double need = window_bits(spec, static_cast<double>(n_max));
    if (need > bits)
      throw PrecisionError("schedule needs about " + std::to_string(static_cast<long long>(need)) + " bits", need);
  }

  std::mt19937_64 rng(cfg.seed);
  Construction out;
  Interval cur = spec.start;
  out.intervals.push_back(cur);

  for (std::size_t k = 0; k < depth; ++k) {
    const Rational& q = spec.q_list[k % spec.q_list.size()];
    const long Nk = spec.N_schedule[k];
    const Real half = cur.width() / 2;
    std::vector<Witness> pool;
    for (long n = Nk + 1; pool.size() < cfg.pool; ++n) {
      if (n - Nk > cfg.scan_budget)
        fail(ErrorKind::budget, "no admissible window within the scan budget at step " + std::to_string(k + 1));
      if (window_bits(spec, static_cast<double>(n)) > bits) {
        // typical first hit: n^2 |I| / 2 ~ 1
        double w = log2(cur.width()).convert_to<double>();
        double n_est = std::max(static_cast<double>(n), std::exp2((1.0 - w) / 2));
        double need = window_bits(spec, n_est);
        throw PrecisionError("step " + std::to_string(k + 1) + " needs windows near n ~ 2^" +
                                 std::to_string(std::log2(n_est)) + ", about " + std::to_string(need) + " bits",
                             need);
      }
      Interval off = q_window(spec, n, 0, q);
      if (off.width() > half) continue;
      Real m_first = floor(Real(n) * (cur.lo - off.lo)) + 1;
      for (Real m = m_first; pool.size() < cfg.pool; m += 1) {
        Interval w{off.lo + m / n, off.hi + m / n};
        if (!(w.hi < cur.hi)) break;
        if (!(w.lo > cur.lo) || m < 1) continue;
        pool.push_back({n, m.convert_to<long>(), q, w, k + 1, Nk});
      }
    }
    std::size_t pick = static_cast<std::size_t>(rng() % pool.size());
    // recompute so the stored window is exactly q_window(n, m)
    Witness w = pool[pick];
    w.window = q_window(spec, w.n, w.m, q);
    if (!cur.contains_strictly(w.window)) fail(ErrorKind::precision, "window lost nesting at working precision");
    cur = w.window;
    out.intervals.push_back(cur);
    out.witnesses.push_back(w);
  }
  out.A = cur.midpoint();
  return out;
}

enum class Membership { inside, boundary, outside };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::inside: return "inside";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
  }
  return "unknown";
}

struct WitnessCheck {
  Membership membership = Membership::outside;
  Interval window;
};

struct VerifyResult {
  bool ok = false;
  std::vector<WitnessCheck> checks;
  std::optional<std::size_t> first_failure;
};

/// Strict window membership of A for every witness.  A equal to an endpoint
/// or to the rational centre (m gamma + u)/(gamma n) is flagged as boundary.
inline VerifyResult verify(const Real& A, const LiouvilleSpec& spec, const std::vector<Witness>& witnesses) {
  using boost::multiprecision::abs;
  spec.validate();
  VerifyResult out;
  out.ok = true;
  const unsigned bits = working_bits();
  for (std::size_t i = 0; i < witnesses.size(); ++i) {
    const Witness& w = witnesses[i];
    double need = window_bits(spec, static_cast<double>(w.n));
    if (need > bits)
      throw PrecisionError("witness n = " + std::to_string(w.n) + " needs about " +
                               std::to_string(static_cast<long long>(need)) + " bits",
                           need);
    WitnessCheck c;
    c.window = q_window(spec, w.n, w.m, w.q);
    Real centre = (Real(w.m) * spec.gamma + spec.u) / (spec.gamma * w.n);
    if (c.window.contains_strictly(A))
      c.membership = Membership::inside;
    else if (A == c.window.lo || A == c.window.hi || A == centre)
      c.membership = Membership::boundary;
    else
      c.membership = Membership::outside;
    if (c.membership != Membership::inside && out.ok) {
      out.ok = false;
      out.first_failure = i;
    }
    out.checks.push_back(std::move(c));
  }
  return out;
}

/// |A - m/n| <= factor |Xi| lambda^n / (gamma n).
inline bool rational_approximation_bound(const Real& A, const LiouvilleSpec& spec, const Witness& w,
                                         const Real& factor = 2) {
  using boost::multiprecision::abs;
  using boost::multiprecision::pow;
  return abs(A - Real(w.m) / w.n) <= factor * abs(spec.Xi) * pow(spec.lambda, w.n) / (spec.gamma * w.n);
}

}  // namespace polylab
