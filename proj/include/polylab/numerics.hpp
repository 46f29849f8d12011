#pragma once

// Precision-controlled scalars and the log / double-log charts.
//
// Phase points x in (0,1) are carried as y = -ln x and parameters eps as
// z = ln(-ln eps).  Quantities like exp(-exp(30)) are then ordinary numbers,
// and a power map x -> C x^nu becomes the affine step y -> nu*y - ln C.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <limits>
#include <string>

#include "polylab/error.hpp"

namespace polylab {

using Real = boost::multiprecision::mpfr_float;

namespace detail {

inline unsigned& requested_bits_slot() {
  static unsigned bits = 256;
  return bits;
}

// Smallest Boost digits10 setting whose MPFR mantissa holds at least `bits`.
inline unsigned digits10_for_bits(unsigned bits) {
  unsigned d = 1;
  while (boost::multiprecision::detail::digits10_2_2(d) < bits) ++d;
  return d;
}

inline void widen_exponent_range() {
  static const bool done = [] {
    mpfr_set_emin(mpfr_get_emin_min());
    mpfr_set_emax(mpfr_get_emax_max());
    return true;
  }();
  (void)done;
}

}  // namespace detail

/// Working precision and the default comparison tolerance 2^(-bits/2).
struct Precision {
  unsigned bits = 256;

  Precision() = default;
  explicit Precision(unsigned b) : bits(b) {
    if (bits < 64) fail(ErrorKind::precondition, "precision must be at least 64 bits");
  }

  Real tol() const { return ldexp(Real(1), -static_cast<int>(bits / 2)); }
};

/// Requested mantissa bits of the innermost active WorkingPrecision.
inline unsigned working_bits() { return detail::requested_bits_slot(); }

/// Default tolerance for the current working precision.
inline Real working_tol() { return ldexp(Real(1), -static_cast<int>(working_bits() / 2)); }

/// RAII guard: every Real created inside the scope gets `bits` of mantissa.
/// Boost keeps the default precision process-wide, so guards must not be
/// interleaved across threads.
class WorkingPrecision {
 public:
  explicit WorkingPrecision(unsigned bits)
      : saved_digits_(Real::default_precision()), saved_bits_(detail::requested_bits_slot()) {
    if (bits < 64) fail(ErrorKind::precondition, "precision must be at least 64 bits");
    detail::widen_exponent_range();
    Real::default_precision(detail::digits10_for_bits(bits));
    detail::requested_bits_slot() = bits;
  }
  explicit WorkingPrecision(const Precision& p) : WorkingPrecision(p.bits) {}

  WorkingPrecision(const WorkingPrecision&) = delete;
  WorkingPrecision& operator=(const WorkingPrecision&) = delete;

  ~WorkingPrecision() {
    Real::default_precision(saved_digits_);
    detail::requested_bits_slot() = saved_bits_;
  }

 private:
  unsigned saved_digits_;
  unsigned saved_bits_;
};

inline Real infinity() { return std::numeric_limits<Real>::infinity(); }
inline bool is_inf(const Real& v) { return boost::multiprecision::isinf(v); }
inline bool is_finite(const Real& v) { return boost::multiprecision::isfinite(v); }
inline Real ln2() { return boost::multiprecision::log(Real(2)); }

/// Parses a decimal literal at the current working precision.
inline Real real_from_string(const std::string& s) {
  try {
    return Real(s);
  } catch (const std::exception&) {
    fail(ErrorKind::schema, "not a decimal number: '" + s + "'");
  }
}

/// Decimal rendering with `digits` significant digits (0 = bits/3).
inline std::string to_decimal(const Real& v, unsigned digits = 0) {
  if (digits == 0) digits = working_bits() / 3;
  return v.str(static_cast<std::streamsize>(digits), std::ios_base::scientific);
}

/// |a-b| <= tol * max(1, |a|, |b|): absolute near zero, relative elsewhere.
inline bool approx_equal(const Real& a, const Real& b, const Real& tol) {
  using boost::multiprecision::abs;
  Real scale = 1;
  if (abs(a) > scale) scale = abs(a);
  if (abs(b) > scale) scale = abs(b);
  return abs(a - b) <= tol * scale;
}

/// y = -ln x; +inf is the x = 0 sentinel.
struct LogValue {
  Real y;

  static LogValue from_x(const Real& x) {
    if (x < 0) fail(ErrorKind::domain, "log chart needs x >= 0");
    if (x == 0) return zero();
    return {-boost::multiprecision::log(x)};
  }
  static LogValue zero() { return {infinity()}; }

  bool is_zero() const { return is_inf(y) && y > 0; }
  Real x() const { return is_zero() ? Real(0) : Real(boost::multiprecision::exp(-y)); }
};

/// z = ln(-ln eps) for eps in (0,1); z = +inf flags the unperturbed eps = 0.
struct DoubleLogValue {
  Real z;

  static DoubleLogValue unperturbed() { return {infinity()}; }
  static DoubleLogValue from_eps(const Real& eps) {
    if (eps <= 0 || eps >= 1) fail(ErrorKind::domain, "double-log chart needs eps in (0,1)");
    return {boost::multiprecision::log(-boost::multiprecision::log(eps))};
  }

  bool is_unperturbed() const { return is_inf(z) && z > 0; }
  /// -ln eps; +inf for the unperturbed flag.
  Real neg_log_eps() const { return is_unperturbed() ? infinity() : Real(boost::multiprecision::exp(z)); }
  /// eps itself (may underflow to 0 for very large z).
  Real eps() const { return is_unperturbed() ? Real(0) : Real(boost::multiprecision::exp(-neg_log_eps())); }
};

/// -ln(e^{-a} + e^{-b}) without forming either exponential.
inline LogValue neg_log_add(const LogValue& a, const LogValue& b) {
  using boost::multiprecision::abs;
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const Real& lo = a.y < b.y ? a.y : b.y;
  Real gap = abs(a.y - b.y);
  // beyond bits*ln2 the smaller term is below the last mantissa bit
  if (gap > working_bits() * 0.6931471805599453) return {lo};
  return {lo - boost::multiprecision::log1p(boost::multiprecision::exp(-gap))};
}

inline DoubleLogValue to_double_log(const LogValue& v) {
  if (!(v.y > 0)) fail(ErrorKind::domain, "to_double_log needs y > 0");
  return {boost::multiprecision::log(v.y)};
}

inline LogValue from_double_log(const DoubleLogValue& v) {
  if (v.is_unperturbed()) return LogValue::zero();
  return {boost::multiprecision::exp(v.z)};
}

}  // namespace polylab
