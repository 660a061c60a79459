#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "itl/errors.hpp"

namespace itl {

using Int = mpz_class;

/// Floor division and the matching nonnegative remainder (for b > 0).
inline Int floor_div(const Int& a, const Int& b)
{
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Int mod_floor(const Int& a, const Int& m)
{
    Int r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    if (r < 0) r += abs(m);
    return r;
}

inline Int gcd(const Int& a, const Int& b)
{
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Int lcm(const Int& a, const Int& b)
{
    Int l;
    mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return l;
}

/* g = s*a + t*b, g >= 0 */
inline Int ext_gcd(const Int& a, const Int& b, Int& s, Int& t)
{
    Int g;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline Int powmod(const Int& base, const Int& e, const Int& m)
{
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline Int ipow(const Int& base, unsigned long e)
{
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline Int invmod(const Int& a, const Int& m)
{
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw precondition_error("invmod: element not invertible");
    return r;
}

inline Int isqrt(const Int& n)
{
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline bool is_square(const Int& n)
{
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

inline bool is_prime(const Int& n)
{
    return n >= 2 && mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

inline int kronecker(const Int& a, const Int& n)
{
    return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

inline int valuation(Int n, const Int& p)
{
    if (n == 0) throw precondition_error("valuation of zero");
    int v = 0;
    while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
        n /= p;
        ++v;
    }
    return v;
}

inline std::string to_string(const Int& n) { return n.get_str(); }

/// long is 64 bits on the supported platforms; mpz_class has no long long constructor.
inline Int from_ll(long long v) { return Int(static_cast<long>(v)); }

inline long long to_ll(const Int& n)
{
    if (!n.fits_slong_p()) throw std::overflow_error("integer does not fit in 64 bits: " + n.get_str());
    return n.get_si();
}

/// Square root of a modulo an odd prime p (Tonelli-Shanks); the smaller of the two roots.
inline std::optional<Int> sqrt_mod_prime(const Int& a_in, const Int& p)
{
    Int a = mod_floor(a_in, p);
    if (a == 0) return Int(0);
    if (p == 2) return a;
    if (kronecker(a, p) != 1) return std::nullopt;
    Int q = p - 1;
    unsigned long s = 0;
    while (mpz_even_p(q.get_mpz_t())) {
        q /= 2;
        ++s;
    }
    Int z = 2;
    while (kronecker(z, p) != -1) ++z;
    Int m = s;
    Int c = powmod(z, q, p);
    Int t = powmod(a, q, p);
    Int r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        unsigned long i = 0;
        Int tt = t;
        while (tt != 1) {
            tt = tt * tt % p;
            ++i;
        }
        Int b = c;
        for (unsigned long j = 0; j + 1 + i < m.get_ui(); ++j) b = b * b % p;
        m = i;
        c = b * b % p;
        t = t * c % p;
        r = r * b % p;
    }
    Int other = p - r;
    return r < other ? r : other;
}

namespace detail {

inline Int pollard_brent(const Int& n, unsigned long seed)
{
    if (mpz_even_p(n.get_mpz_t())) return 2;
    Int y = seed % n, c = (seed * 7 + 1) % n, m = 128, g = 1, r = 1, q = 1, x, ys;
    auto f = [&](const Int& v) -> Int { return (v * v + c) % n; };
    while (g == 1) {
        x = y;
        for (Int i = 0; i < r; ++i) y = f(y);
        Int k = 0;
        while (k < r && g == 1) {
            ys = y;
            for (Int i = 0; i < m && i < r - k; ++i) {
                y = f(y);
                q = q * abs(x - y) % n;
            }
            g = gcd(q, n);
            k += m;
        }
        r *= 2;
    }
    if (g == n) {
        do {
            ys = f(ys);
            g = gcd(abs(x - ys), n);
        } while (g == 1);
    }
    return g;
}

inline void factor_into(Int n, std::vector<Int>& out)
{
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    for (unsigned long seed = 2;; ++seed) {
        Int d = pollard_brent(n, seed);
        if (d != n && d != 1) {
            factor_into(d, out);
            factor_into(n / d, out);
            return;
        }
    }
}

}  // namespace detail

/// Prime factorisation of |n| (n != 0), ascending primes.
inline std::vector<std::pair<Int, int>> factor_integer(Int n)
{
    if (n == 0) throw precondition_error("factor_integer: zero");
    n = abs(n);
    std::vector<Int> primes;
    for (unsigned long p = 2; p < 10000 && Int(p) * p <= n; p += (p == 2 ? 1 : 2)) {
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            primes.emplace_back(p);
            n /= p;
        }
    }
    detail::factor_into(n, primes);
    std::sort(primes.begin(), primes.end());
    std::vector<std::pair<Int, int>> out;
    for (const auto& p : primes) {
        if (!out.empty() && out.back().first == p)
            ++out.back().second;
        else
            out.emplace_back(p, 1);
    }
    return out;
}

inline std::vector<Int> prime_divisors(const Int& n)
{
    std::vector<Int> out;
    for (auto& [p, e] : factor_integer(n)) out.push_back(p);
    return out;
}

/// Multiplicative order of a modulo m, given that the group order divides `group_order`.
inline Int multiplicative_order(const Int& a, const Int& m, const Int& group_order)
{
    if (gcd(a, m) != 1) throw precondition_error("multiplicative_order: not a unit");
    Int ord = group_order;
    for (auto& [p, e] : factor_integer(group_order)) {
        for (int i = 0; i < e; ++i) {
            if (powmod(a, ord / p, m) == 1)
                ord /= p;
            else
                break;
        }
    }
    return ord;
}

inline Int euler_phi(const Int& m)
{
    Int phi = 1;
    for (auto& [p, e] : factor_integer(m)) phi *= (p - 1) * ipow(p, e - 1);
    return phi;
}

inline Int multiplicative_order(const Int& a, const Int& m) { return multiplicative_order(a, m, euler_phi(m)); }

}  // namespace itl
