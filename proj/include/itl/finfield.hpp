#pragma once

/*
 * Finite fields holding q-power roots of unity in characteristic p.
 *
 * Base field B = F_p[x]/(f), f the lexicographically smallest monic
 * irreducible of degree t1 = ord(p mod q) (coefficients compared from the
 * constant term up).  B^x contains a cyclic q-Sylow of order q^k0; zeta0 is
 * its smallest generator.  Higher q-power roots live in the Kummer extension
 * L_e = B[y]/(y^(q^e) - zeta0), which is a field of degree t1*q^e over F_p
 * (zeta0 is not a q-th power in B).  By lifting the exponent, t1*q^e is
 * exactly ord(p mod q^(k0+e)), so L_e is F_{p^t} with t = ord(p mod q^m) for
 * m = k0 + e.  Elements are stored sparsely in y, which keeps the roots of
 * unity (monomials c*y^b) cheap.
 */

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "itl/errors.hpp"
#include "itl/integer.hpp"

namespace itl {

namespace ff {

using u64 = std::uint64_t;
using Poly = std::vector<u64>;  // coefficients, constant term first

inline u64 mulmod64(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % p); }

inline u64 powmod64(u64 a, u64 e, u64 p)
{
    u64 r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mulmod64(r, a, p);
        a = mulmod64(a, a, p);
        e >>= 1;
    }
    return r;
}

inline u64 invmod64(u64 a, u64 p) { return powmod64(a, p - 2, p); }

/// a*b mod (f, p) for a, b of length t and monic f of degree t (f has t+1 entries).
inline Poly mulmod_poly(const Poly& a, const Poly& b, const Poly& f, u64 p)
{
    const std::size_t t = f.size() - 1;
    std::vector<u64> r(2 * t > 0 ? 2 * t - 1 : 1, 0);
    if (p < 65536) {
        // products fit in 32 bits, so sums of fewer than 2^32 of them fit in 64 bits
        for (std::size_t i = 0; i < t; ++i) {
            if (!a[i]) continue;
            for (std::size_t j = 0; j < t; ++j) r[i + j] += a[i] * b[j];
        }
        for (std::size_t i = r.size(); i-- > t;) {
            u64 c = r[i] % p;
            if (!c) continue;
            for (std::size_t j = 0; j < t; ++j) r[i - t + j] += c * (p - f[j]);
        }
        Poly out(t);
        for (std::size_t i = 0; i < t; ++i) out[i] = r[i] % p;
        return out;
    }
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < t; ++j) r[i + j] = (r[i + j] + mulmod64(a[i], b[j], p)) % p;
    for (std::size_t i = r.size(); i-- > t;) {
        u64 c = r[i];
        if (!c) continue;
        for (std::size_t j = 0; j < t; ++j) r[i - t + j] = (r[i - t + j] + mulmod64(c, p - f[j], p)) % p;
    }
    return Poly(r.begin(), r.begin() + static_cast<long>(t));
}

inline void trim(Poly& a)
{
    while (!a.empty() && a.back() == 0) a.pop_back();
}

/// gcd of two polynomials over F_p (monic result, empty for zero).
inline Poly gcd_poly(Poly a, Poly b, u64 p)
{
    trim(a);
    trim(b);
    while (!b.empty()) {
        // a mod b
        u64 inv = invmod64(b.back(), p);
        while (a.size() >= b.size()) {
            u64 c = mulmod64(a.back(), inv, p);
            std::size_t shift = a.size() - b.size();
            for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] = (a[shift + j] + p - mulmod64(c, b[j], p)) % p;
            trim(a);
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    if (!a.empty()) {
        u64 inv = invmod64(a.back(), p);
        for (auto& c : a) c = mulmod64(c, inv, p);
    }
    return a;
}

/// Rabin's irreducibility test for monic f of degree t over F_p.
inline bool is_irreducible(const Poly& f, u64 p)
{
    const std::size_t t = f.size() - 1;
    if (t == 1) return true;
    if (f[0] == 0) return false;
    Poly x(t, 0);
    x[1] = 1;
    auto frob = [&](const Poly& a) {
        // a^p mod f
        Poly r(t, 0), base = a;
        r[0] = 1;
        for (u64 e = p; e; e >>= 1) {
            if (e & 1) r = mulmod_poly(r, base, f, p);
            base = mulmod_poly(base, base, f, p);
        }
        return r;
    };
    std::vector<Poly> pw{x};  // x^(p^i)
    for (std::size_t i = 1; i <= t; ++i) pw.push_back(frob(pw.back()));
    if (pw[t] != x) return false;
    for (const auto& r : prime_divisors(Int(static_cast<unsigned long>(t)))) {
        Poly g = pw[t / r.get_ui()];
        g[1] = (g[1] + p - 1) % p;
        if (gcd_poly(g, f, p).size() != 1) return false;
    }
    return true;
}

/// Smallest monic irreducible of degree t, coefficients compared from the constant term up.
inline Poly smallest_irreducible(u64 p, std::size_t t)
{
    Poly f(t + 1, 0);
    f[t] = 1;
    // for t > 1 a zero constant term means divisibility by x, so start at c_0 = 1
    if (t > 1) f[0] = 1;
    for (;;) {
        if (is_irreducible(f, p)) return f;
        // increment (c_0, ..., c_{t-1}) with c_0 most significant
        std::size_t i = t;
        while (i-- > 0) {
            if (++f[i] < p) break;
            f[i] = 0;
        }
        if (i == static_cast<std::size_t>(-1)) throw std::logic_error("no irreducible polynomial found");
    }
}

/// F_p[x]/(f).
class BaseField {
public:
    BaseField(u64 p, std::size_t t) : p_(p), t_(t), f_(smallest_irreducible(p, t)) {}

    u64 p() const { return p_; }
    std::size_t degree() const { return t_; }
    const Poly& modulus() const { return f_; }

    Poly zero() const { return Poly(t_, 0); }
    Poly scalar(u64 c) const
    {
        Poly r(t_, 0);
        r[0] = c % p_;
        return r;
    }
    Poly one() const { return scalar(1); }
    static bool is_zero(const Poly& a)
    {
        for (u64 c : a)
            if (c) return false;
        return true;
    }

    Poly add(const Poly& a, const Poly& b) const
    {
        Poly r(t_);
        for (std::size_t i = 0; i < t_; ++i) r[i] = (a[i] + b[i]) % p_;
        return r;
    }
    Poly sub(const Poly& a, const Poly& b) const
    {
        Poly r(t_);
        for (std::size_t i = 0; i < t_; ++i) r[i] = (a[i] + p_ - b[i]) % p_;
        return r;
    }
    Poly mul(const Poly& a, const Poly& b) const { return mulmod_poly(a, b, f_, p_); }
    Poly pow(Poly a, Int e) const
    {
        if (e < 0) {
            a = inv(a);
            e = -e;
        }
        Poly r = one();
        const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
        for (std::size_t i = bits; i-- > 0;) {
            r = mul(r, r);
            if (mpz_tstbit(e.get_mpz_t(), i)) r = mul(r, a);
        }
        return r;
    }
    Poly inv(const Poly& a) const
    {
        if (is_zero(a)) throw precondition_error("finite field: inverse of zero");
        return pow(a, order() - 1);
    }
    /// |B^x| = p^t - 1.
    Int order() const { return ipow(Int(static_cast<unsigned long>(p_)), t_) - 1; }

private:
    u64 p_;
    std::size_t t_;
    Poly f_;
};

}  // namespace ff

/*
 * L_e = B[y]/(y^Q - zeta0), Q = q^e.  Fields with the same (p, q) form a
 * chain L_0 < L_1 < ..., with y_e = y_{e'}^(q^(e'-e)).
 */
class KummerField {
public:
    KummerField(std::shared_ptr<const ff::BaseField> base, unsigned long q, int k0, ff::Poly zeta0, int e)
        : base_(std::move(base)), q_(q), k0_(k0), zeta0_(std::move(zeta0)), e_(e), Q_(ipow(Int(q), static_cast<unsigned long>(e)).get_ui())
    {
    }

    const ff::BaseField& base() const { return *base_; }
    std::shared_ptr<const ff::BaseField> base_ptr() const { return base_; }
    ff::u64 p() const { return base_->p(); }
    unsigned long q() const { return q_; }
    int k0() const { return k0_; }   // q^k0 exactly divides p^t1 - 1
    int e() const { return e_; }
    ff::u64 kummer_degree() const { return Q_; }
    /// Degree over F_p.
    Int degree() const { return Int(static_cast<unsigned long>(base_->degree())) * Q_; }
    const ff::Poly& zeta0() const { return zeta0_; }
    /// Exponent m with the full group of q-power roots of unity equal to mu_{q^m}.
    int root_level() const { return k0_ + e_; }

private:
    std::shared_ptr<const ff::BaseField> base_;
    unsigned long q_;
    int k0_;
    ff::Poly zeta0_;
    int e_;
    ff::u64 Q_;
};

using KummerFieldPtr = std::shared_ptr<const KummerField>;

class FinFieldElt {
public:
    FinFieldElt() = default;
    explicit FinFieldElt(KummerFieldPtr F) : F_(std::move(F)) {}

    static FinFieldElt scalar(KummerFieldPtr F, const Int& c)
    {
        FinFieldElt r(F);
        Int cm = mod_floor(c, Int(static_cast<unsigned long>(F->p())));
        if (cm != 0) r.terms_[0] = F->base().scalar(cm.get_ui());
        return r;
    }
    static FinFieldElt one(KummerFieldPtr F) { return scalar(std::move(F), 1); }
    /// c * y^b with c in the base field.
    static FinFieldElt monomial(KummerFieldPtr F, ff::Poly c, ff::u64 b)
    {
        FinFieldElt r(F);
        if (!ff::BaseField::is_zero(c)) r.terms_[b] = std::move(c);
        return r;
    }

    const KummerFieldPtr& field() const { return F_; }
    const std::map<ff::u64, ff::Poly>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_monomial() const { return terms_.size() == 1; }

    /// Dense coordinates w.r.t. x^i y^b, index b*t1 + i.
    std::vector<ff::u64> coordinates() const
    {
        const std::size_t t1 = F_->base().degree();
        std::vector<ff::u64> out(t1 * F_->kummer_degree(), 0);
        for (const auto& [b, c] : terms_)
            for (std::size_t i = 0; i < t1; ++i) out[b * t1 + i] = c[i];
        return out;
    }

    /// The same element viewed in a larger field of the chain.
    FinFieldElt lift(const KummerFieldPtr& G) const
    {
        if (G.get() == F_.get()) return *this;
        if (G->p() != F_->p() || G->q() != F_->q() || G->e() < F_->e())
            throw precondition_error("finite field: elements belong to incompatible fields");
        const ff::u64 step = ipow(Int(F_->q()), static_cast<unsigned long>(G->e() - F_->e())).get_ui();
        FinFieldElt r(G);
        for (const auto& [b, c] : terms_) r.terms_[b * step] = c;
        return r;
    }

    friend FinFieldElt operator+(const FinFieldElt& a, const FinFieldElt& b) { return combine(a, b, false); }
    friend FinFieldElt operator-(const FinFieldElt& a, const FinFieldElt& b) { return combine(a, b, true); }

    friend FinFieldElt operator*(const FinFieldElt& a0, const FinFieldElt& b0)
    {
        auto [a, b] = unify(a0, b0);
        const auto& B = a.F_->base();
        const ff::u64 Q = a.F_->kummer_degree();
        FinFieldElt r(a.F_);
        for (const auto& [i, c] : a.terms_)
            for (const auto& [j, d] : b.terms_) {
                ff::Poly prod = B.mul(c, d);
                ff::u64 k = i + j;
                if (k >= Q) {
                    k -= Q;
                    prod = B.mul(prod, a.F_->zeta0());
                }
                auto it = r.terms_.find(k);
                if (it == r.terms_.end())
                    r.terms_.emplace(k, std::move(prod));
                else
                    it->second = B.add(it->second, prod);
            }
        r.normalize();
        return r;
    }

    friend bool operator==(const FinFieldElt& a0, const FinFieldElt& b0)
    {
        auto [a, b] = unify(a0, b0);
        return a.terms_ == b.terms_;
    }
    friend bool operator!=(const FinFieldElt& a, const FinFieldElt& b) { return !(a == b); }

    FinFieldElt inverse() const
    {
        if (is_zero()) throw precondition_error("finite field: inverse of zero");
        const auto& B = F_->base();
        if (is_monomial()) {
            const auto& [b, c] = *terms_.begin();
            ff::Poly ci = B.inv(c);
            if (b == 0) return monomial(F_, ci, 0);
            // y^-b = zeta0^-1 y^(Q-b)
            return monomial(F_, B.mul(ci, B.inv(F_->zeta0())), F_->kummer_degree() - b);
        }
        return general_inverse();
    }

    FinFieldElt pow(Int n) const
    {
        FinFieldElt a = *this;
        if (n < 0) {
            a = a.inverse();
            n = -n;
        }
        FinFieldElt r = one(F_);
        const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
        for (std::size_t i = bits; i-- > 0;) {
            r = r * r;
            if (mpz_tstbit(n.get_mpz_t(), i)) r = r * a;
        }
        return r;
    }

    FinFieldElt frobenius() const { return pow(Int(static_cast<unsigned long>(F_->p()))); }

    std::string to_string() const
    {
        if (terms_.empty()) return "0";
        std::string s;
        for (const auto& [b, c] : terms_) {
            if (!s.empty()) s += "+";
            s += "(";
            for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
            s += ")";
            if (b) s += "*y^" + std::to_string(b);
        }
        return s;
    }

private:
    static std::pair<FinFieldElt, FinFieldElt> unify(const FinFieldElt& a, const FinFieldElt& b)
    {
        if (!a.F_ || !b.F_) throw precondition_error("finite field: uninitialised element");
        if (a.F_.get() == b.F_.get()) return {a, b};
        if (a.F_->e() >= b.F_->e()) return {a, b.lift(a.F_)};
        return {a.lift(b.F_), b};
    }

    static FinFieldElt combine(const FinFieldElt& a0, const FinFieldElt& b0, bool subtract)
    {
        auto [a, b] = unify(a0, b0);
        const auto& B = a.F_->base();
        FinFieldElt r = a;
        for (const auto& [k, c] : b.terms_) {
            auto it = r.terms_.find(k);
            ff::Poly base = it == r.terms_.end() ? B.zero() : it->second;
            r.terms_[k] = subtract ? B.sub(base, c) : B.add(base, c);
        }
        r.normalize();
        return r;
    }

    void normalize()
    {
        for (auto it = terms_.begin(); it != terms_.end();)
            it = ff::BaseField::is_zero(it->second) ? terms_.erase(it) : std::next(it);
    }

    // Extended Euclid in B[y] against y^Q - zeta0.
    FinFieldElt general_inverse() const
    {
        const auto& B = F_->base();
        using BPoly = std::vector<ff::Poly>;
        const ff::u64 Q = F_->kummer_degree();
        auto trimB = [](BPoly& a) {
            while (!a.empty() && ff::BaseField::is_zero(a.back())) a.pop_back();
        };
        BPoly r0(Q + 1, B.zero()), r1(Q, B.zero());
        r0[Q] = B.one();
        r0[0] = B.sub(B.zero(), F_->zeta0());
        for (const auto& [b, c] : terms_) r1[b] = c;
        trimB(r1);
        BPoly s0, s1{B.one()};  // coefficients of this element
        auto sub_scaled = [&](BPoly& a, const BPoly& b, const ff::Poly& c, std::size_t shift) {
            if (a.size() < b.size() + shift) a.resize(b.size() + shift, B.zero());
            for (std::size_t j = 0; j < b.size(); ++j) a[j + shift] = B.sub(a[j + shift], B.mul(c, b[j]));
        };
        while (r1.size() > 1) {
            ff::Poly lead_inv = B.inv(r1.back());
            while (r0.size() >= r1.size()) {
                ff::Poly c = B.mul(r0.back(), lead_inv);
                std::size_t shift = r0.size() - r1.size();
                sub_scaled(r0, r1, c, shift);
                sub_scaled(s0, s1, c, shift);
                trimB(r0);
                trimB(s0);
                if (r0.empty()) break;
            }
            std::swap(r0, r1);
            std::swap(s0, s1);
        }
        if (r1.empty()) throw std::logic_error("finite field: modulus not irreducible");
        ff::Poly ci = B.inv(r1[0]);
        FinFieldElt out(F_);
        for (std::size_t j = 0; j < s1.size(); ++j) {
            ff::Poly c = B.mul(s1[j], ci);
            if (!ff::BaseField::is_zero(c)) out.terms_[j] = c;
        }
        return out;
    }

    KummerFieldPtr F_;
    std::map<ff::u64, ff::Poly> terms_;
};

namespace detail {

inline std::shared_ptr<const ff::BaseField> base_field(ff::u64 p, std::size_t t)
{
    static std::mutex mu;
    static std::map<std::pair<ff::u64, std::size_t>, std::shared_ptr<const ff::BaseField>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, t}];
    if (!slot) slot = std::make_shared<const ff::BaseField>(p, t);
    return slot;
}

}  // namespace detail

/// Coordinate-lexicographic order, constant coordinate most significant.
inline bool lex_less(const FinFieldElt& a, const FinFieldElt& b)
{
    if (a.field()->e() >= b.field()->e()) return a.coordinates() < b.lift(a.field()).coordinates();
    return a.lift(b.field()).coordinates() < b.coordinates();
}

/*
 * The field of the chain for (p, q) that contains the q^m-th roots of unity:
 * F_{p^t}, t = ord(p mod q^m).  Both p and q odd primes, p != q.
 */
inline KummerFieldPtr residue_field(const Int& p, const Int& q, int m)
{
    if (!is_prime(p) || !is_prime(q) || p == 2 || q == 2) throw precondition_error("residue_field: p and q must be odd primes");
    if (p == q) throw precondition_error("residue_field: q must differ from p");
    if (m < 0) throw precondition_error("residue_field: m must be >= 0");
    if (p >= Int(1UL << 31)) throw precondition_error("residue_field: p must be below 2^31");
    const std::size_t t1 = multiplicative_order(p, q).get_ui();
    if (t1 > 256) throw precondition_error("residue_field: ord(p mod q) = " + std::to_string(t1) + " exceeds 256");
    auto B = detail::base_field(p.get_ui(), t1);
    const Int group = B->order();
    const int k0 = static_cast<int>(valuation(group, q));
    const int e = std::max(0, m - k0);
    if (Int(static_cast<unsigned long>(t1)) * ipow(q, static_cast<unsigned long>(e)) > Int(10000000))
        throw precondition_error("residue_field: extension degree too large");

    static std::mutex mu;
    static std::map<std::tuple<unsigned long, unsigned long, int>, KummerFieldPtr> cache;
    const auto key = std::make_tuple(p.get_ui(), q.get_ui(), e);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    // zeta0: smallest generator of the q-Sylow subgroup of B^x
    const Int qk0 = ipow(q, static_cast<unsigned long>(k0));
    if (qk0 > Int(10000000)) throw precondition_error("residue_field: q-part of the base field too large");
    const Int cof = group / qk0;
    ff::Poly g;
    {
        // scan elements in a fixed order until a cofactor power has full q-power order
        ff::Poly cand = B->zero();
        for (;;) {
            // increment with the constant coordinate least significant, skipping zero
            std::size_t i = 0;
            while (i < t1 && ++cand[i] == B->p()) cand[i++] = 0;
            if (i == t1) throw std::logic_error("no q-Sylow generator found");
            ff::Poly h = B->pow(cand, cof);
            if (B->pow(h, qk0 / q) != B->one()) {
                g = h;
                break;
            }
        }
    }
    ff::Poly best, cur = B->one();
    const unsigned long qk0u = qk0.get_ui();
    for (unsigned long j = 1; j < qk0u; ++j) {
        cur = B->mul(cur, g);
        if (j % q.get_ui() == 0) continue;
        if (best.empty() || cur < best) best = cur;
    }
    auto F = std::make_shared<const KummerField>(B, q.get_ui(), k0, best, e);
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[key];
    if (!slot) slot = F;
    return slot;
}

/*
 * The smallest primitive q^m-th root of unity (coordinate-lexicographic,
 * constant coordinate most significant) in residue_field(p, q, m).
 */
inline FinFieldElt unity_image(const Int& p, const Int& q, int m)
{
    auto F = residue_field(p, q, m);
    const auto& B = F->base();
    if (m == 0) return FinFieldElt::one(F);
    const unsigned long qu = q.get_ui();
    if (F->e() == 0) {
        // all q^m-th roots lie in B: zeta0^(j q^(k0-m)), q not dividing j
        ff::Poly step = B.pow(F->zeta0(), ipow(q, static_cast<unsigned long>(F->k0() - m)));
        ff::Poly cur = B.one(), best;
        const unsigned long n = ipow(q, static_cast<unsigned long>(m)).get_ui();
        for (unsigned long j = 1; j < n; ++j) {
            cur = B.mul(cur, step);
            if (j % qu == 0) continue;
            if (best.empty() || cur < best) best = cur;
        }
        return FinFieldElt::monomial(F, best, 0);
    }
    // primitive roots are c*y^b with q not dividing b; the largest b = Q-1 gives the longest zero prefix
    ff::Poly cur = B.one(), best = B.one();
    const unsigned long qk0 = ipow(q, static_cast<unsigned long>(F->k0())).get_ui();
    for (unsigned long a = 1; a < qk0; ++a) {
        cur = B.mul(cur, F->zeta0());
        if (cur < best) best = cur;
    }
    return FinFieldElt::monomial(F, best, F->kummer_degree() - 1);
}

}  // namespace itl
