#pragma once

// Shared basics: error types, exact rational arithmetic, deterministic
// shuffling, and small string/number helpers used across the library.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace booltree {

/// Bad command-line usage (maps to process exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed model/LP/solution/config file (exit code 2).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The requested model admits no feasible tree (exit code 3).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact rational scalar. Objectives, metric values and model coefficients
/// are kept in this form so equality checks never depend on float rounding.
using Rational = boost::rational<long long>;

inline double to_double(const Rational& r) {
  return boost::rational_cast<double>(r);
}

inline Rational rational(long long num, long long den = 1) {
  return Rational(num, den);
}

/// Render with up to 17 significant digits: enough for the double value of
/// the rational to round-trip through text exactly.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_g17(const Rational& r) { return format_g17(to_double(r)); }

/// Exact display form: "p/q", or just "p" for integers.
inline std::string rational_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Snap a double to the rational with a power-of-ten denominator carrying
/// ~17 significant digits. Decimal text that went through a double comes
/// back exactly (0.1 → 1/10); anything else lands within 1e-16 relative
/// error, far inside the model-checking tolerance.
inline Rational decimal_rational(double v) {
  if (!std::isfinite(v)) throw FormatError("non-finite number");
  if (v == 0.0) return Rational(0);
  const double mag = std::abs(v);
  long long den = 1;
  while (den <= 100000000000000000LL / 10 && mag * double(den * 10) <= 9.0e17) den *= 10;
  const long long num = std::llround(v * double(den));
  if (num == 0) return Rational(0);
  return Rational(num, den);
}

/// Parse "p/q", integer, plain decimal, or exponent-form decimal text into an
/// exact rational. "0.001" becomes 1/1000, not the nearest double.
inline Rational parse_rational(const std::string& text) {
  std::string s = text;
  if (s.empty()) throw FormatError("empty numeric value");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    long long num = 0, den = 0;
    try {
      num = std::stoll(s.substr(0, slash));
      den = std::stoll(s.substr(slash + 1));
    } catch (const std::exception&) {
      throw FormatError("bad rational literal: " + text);
    }
    if (den == 0) throw FormatError("zero denominator: " + text);
    return Rational(num, den);
  }
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  long long mantissa = 0;
  long long exp10 = 0;
  bool any_digit = false, seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) throw FormatError("bad numeric literal: " + text);
      seen_dot = true;
    } else if (c == 'e' || c == 'E') {
      long long e = 0;
      try {
        e = std::stoll(s.substr(i + 1));
      } catch (const std::exception&) {
        throw FormatError("bad numeric literal: " + text);
      }
      exp10 += e;
      i = s.size() - 1;
      break;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      if (mantissa > (std::numeric_limits<long long>::max() - 9) / 10)
        throw FormatError("numeric literal out of range: " + text);
      mantissa = mantissa * 10 + (c - '0');
      if (seen_dot) --exp10;
      any_digit = true;
    } else {
      throw FormatError("bad numeric literal: " + text);
    }
  }
  if (!any_digit) throw FormatError("bad numeric literal: " + text);
  Rational r(neg ? -mantissa : mantissa, 1);
  while (exp10 > 0) {
    r *= Rational(10, 1);
    --exp10;
  }
  while (exp10 < 0) {
    r /= Rational(10, 1);
    ++exp10;
  }
  return r;
}

/// Deterministic shuffling. std::shuffle's draw sequence is
/// implementation-defined, so index shuffles go through this explicit
/// Fisher-Yates to keep seed -> permutation stable everywhere.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform-ish draw in [0, n). Modulo bias is irrelevant here; stability is.
  std::uint64_t bounded(std::uint64_t n) { return gen_() % n; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_double(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  try {
    std::size_t pos = 0;
    out = std::stod(t, &pos);
    return pos == t.size();
  } catch (const std::exception&) {
    return false;
  }
}

using int128 = __int128;

inline double to_double(int128 v) { return static_cast<double>(v); }

}  // namespace booltree
