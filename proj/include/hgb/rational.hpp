#pragma once

// Exact rationals on top of GMP. Rat is always canonical (lowest terms,
// positive denominator) after every public helper in this header.

#include <gmpxx.h>

#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "hgb/errors.hpp"

namespace hgb {

using Rat = mpq_class;
using BigInt = mpz_class;

inline Rat make_rat(long num, long den = 1) {
  if (den == 0) throw Error(ErrorKind::DivisionByZero, "zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Rat make_rat(const BigInt& num, const BigInt& den) {
  if (den == 0) throw Error(ErrorKind::DivisionByZero, "zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

/// Fractional part in [0, 1).
inline Rat frac(const Rat& x) {
  BigInt fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  Rat r = x - Rat(fl);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rat& x) { return x.get_str(); }

inline long to_long(const BigInt& z) {
  if (!z.fits_slong_p()) throw Error(ErrorKind::PreconditionViolated, "integer overflow: " + z.get_str());
  return z.get_si();
}

inline long euler_phi(long c) {
  long result = c;
  long n = c;
  for (long p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

inline long mod_pos(long a, long c) {
  long r = a % c;
  return r < 0 ? r + c : r;
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses "a/b", "a", with optional leading sign. Floats are rejected.
inline Rat parse_rat(std::string_view token) {
  std::string_view s = detail::trim(token);
  std::string_view body = s;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
  if (!detail::all_digits(num) || !detail::all_digits(den))
    throw Error(ErrorKind::ParseError, "malformed rational '" + std::string(token) + "'");
  BigInt n(std::string(num), 10);
  BigInt d(std::string(den), 10);
  if (d == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + std::string(token) + "'");
  if (negative) n = -n;
  return make_rat(n, d);
}

/// Parses a decimal literal such as "0.3333" or "-1.25" as the exact rational it denotes.
inline Rat parse_decimal(std::string_view token) {
  std::string_view s = detail::trim(token);
  if (s.find('/') != std::string_view::npos) return parse_rat(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view ip = s.substr(0, dot);
  std::string_view fp = dot == std::string_view::npos ? std::string_view() : s.substr(dot + 1);
  if (ip.empty()) ip = "0";
  if (!detail::all_digits(ip) || (!fp.empty() && !detail::all_digits(fp)) ||
      (dot != std::string_view::npos && fp.empty()))
    throw Error(ErrorKind::ParseError, "malformed decimal '" + std::string(token) + "'");
  BigInt n(std::string(ip) + std::string(fp), 10);
  BigInt d;
  mpz_ui_pow_ui(d.get_mpz_t(), 10, fp.size());
  if (negative) n = -n;
  return make_rat(n, d);
}

/// Comma separated list; an empty string yields an empty list.
template <class Parser>
std::vector<Rat> parse_list(std::string_view text, Parser parse) {
  std::vector<Rat> out;
  text = detail::trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto comma = text.find(',', start);
    out.push_back(parse(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<Rat> parse_rat_list(std::string_view text) {
  return parse_list(text, [](std::string_view t) { return parse_rat(t); });
}

}  // namespace hgb
