#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kgl3 {

/// Working precision: x87 extended (64-bit mantissa) on the targets we build for.
using Real = long double;
using Complex = std::complex<Real>;

inline constexpr Real kPi = std::numbers::pi_v<Real>;
inline constexpr Real kTwoPi = 2 * std::numbers::pi_v<Real>;
inline constexpr Complex kI{0, 1};

/// Bad arguments or data: non-coprime residues, missing Satake data,
/// malformed fixtures.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested evaluation lies outside the regime the routine supports
/// (pole hit, series cap exceeded, convergence half-plane violated).
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge to the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// e(x) = exp(2 pi i x).
inline Complex e(Real x) {
  // Reduce first so large arguments keep their fractional accuracy.
  Real frac = x - std::floor(x);
  return {std::cos(kTwoPi * frac), std::sin(kTwoPi * frac)};
}

/// e(num / den) for integers, reduced exactly before the transcendental call.
inline Complex e_rational(std::int64_t num, std::int64_t den) {
  std::int64_t r = num % den;
  if (r < 0) r += den;
  return e(static_cast<Real>(r) / static_cast<Real>(den));
}

/// Value plus an honest estimate of quadrature/truncation error.
struct TransformResult {
  Complex value{0, 0};
  Real abs_error_estimate = 0;
  std::int64_t evaluations = 0;
};

inline Real relative_gap(Complex a, Complex b) {
  Real scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0) return 0;
  return std::abs(a - b) / scale;
}

/// Shortest decimal form of a long double that reads back to the same value;
/// 21 significant digits always suffice for the 64-bit mantissa.
inline std::string to_decimal(Real x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  int digits = 1;
  for (; digits < 21; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, x);
    if (std::strtold(buf, nullptr) == x) break;
  }
  // Integers below 1e21 print without an exponent.
  const int e = x == 0 ? 0 : static_cast<int>(std::floor(std::log10(std::fabs(x))));
  if (e >= digits && e < 21) digits = e + 1;
  std::snprintf(buf, sizeof buf, "%.*Lg", digits, x);
  return buf;
}

/// Parses a whole decimal string at full precision.
inline Real parse_decimal(const std::string& s) {
  if (s.empty()) throw InputError("parse_decimal: empty string");
  errno = 0;
  char* end = nullptr;
  Real v = std::strtold(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw InputError("parse_decimal: not a decimal number: '" + s + "'");
  return v;
}

}  // namespace kgl3
