#pragma once

// Exact scalars. Every measure, threshold and endpoint in the library is a
// GMP rational; there is no floating-point path.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace retsets {

using Integer = mpz_class;
using Rational = mpq_class;
using IntVec = std::vector<Integer>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

inline Rational make_rational(const Integer& num, const Integer& den)
{
    if (den == 0) {
        throw Error("rational with zero denominator");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

static_assert(sizeof(long) == sizeof(long long), "LP64 platform expected");

inline Integer make_integer(long long v)
{
    return Integer(static_cast<long>(v));
}

inline Rational make_rational(long long num, long long den = 1)
{
    return make_rational(make_integer(num), make_integer(den));
}

inline long long to_int64(const Integer& v)
{
    if (!v.fits_slong_p()) {
        throw Error("integer " + v.get_str() + " does not fit in 64 bits");
    }
    return v.get_si();
}

/// Always "p/q", including integers ("3/1") and zero ("0/1").
inline std::string to_string(const Rational& q)
{
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline std::string to_string(const Integer& z)
{
    return z.get_str();
}

namespace detail {

inline bool is_integer_literal(std::string_view s)
{
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        s.remove_prefix(1);
    }
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace detail

inline Integer parse_integer(std::string_view text)
{
    auto s = detail::trim(text);
    if (!detail::is_integer_literal(s)) {
        throw ParseError("not an integer: '" + std::string(text) + "'");
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    return Integer(std::string(s));
}

/// Accepts "p/q", "p" and signed forms. The result is canonical.
inline Rational parse_rational(std::string_view text)
{
    auto s = detail::trim(text);
    auto slash = s.find('/');
    if (slash == std::string_view::npos) {
        return Rational(parse_integer(s));
    }
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!detail::is_integer_literal(detail::trim(den)) || den.find('-') != std::string_view::npos) {
        throw ParseError("bad denominator in rational: '" + std::string(text) + "'");
    }
    Integer d = parse_integer(den);
    if (d == 0) {
        throw ParseError("zero denominator in rational: '" + std::string(text) + "'");
    }
    return make_rational(parse_integer(num), d);
}

inline Integer floor_of(const Rational& q)
{
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_of(const Rational& q)
{
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

/// Representative of q mod 1 in [0, 1).
inline Rational frac(const Rational& q)
{
    return q - Rational(floor_of(q));
}

/// Distance to the nearest integer, ||q|| in [0, 1/2].
inline Rational nearest_integer_distance(const Rational& q)
{
    Rational f = frac(q);
    Rational g = 1 - f;
    return f < g ? f : g;
}

inline Integer pow_int(const Integer& base, unsigned long e)
{
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Rational pow_rat(const Rational& base, unsigned long e)
{
    Rational r(pow_int(base.get_num(), e), pow_int(base.get_den(), e));
    r.canonicalize();
    return r;
}

inline Integer gcd_of(const Integer& a, const Integer& b)
{
    Integer r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Integer lcm_of(const Integer& a, const Integer& b)
{
    Integer r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

/// Least non-negative residue of v modulo m (m > 0).
inline long long mod_floor(long long v, long long m)
{
    long long r = v % m;
    return r < 0 ? r + m : r;
}

inline long long mod_floor(const Integer& v, long long m)
{
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), v.get_mpz_t(), make_integer(m).get_mpz_t());
    return r.get_si();
}

} // namespace retsets
