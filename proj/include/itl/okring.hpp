#pragma once

/*
 * Exact arithmetic in the ring of integers O_K of the nine imaginary
 * quadratic fields K = Q(sqrt(-d)) of class number one.
 *
 * Elements are x + y*w over the integral basis {1, w}, where
 *   w = sqrt(-d)          if -d is not 1 mod 4   (d = 1, 2)
 *   w = (1 + sqrt(-d))/2  if -d is 1 mod 4       (d = 3, 7, 11, 19, 43, 67, 163)
 * so that w^2 = t*w - n with t = trace(w) and n = norm(w).
 */

#include <algorithm>
#include <array>
#include <cctype>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "itl/errors.hpp"
#include "itl/integer.hpp"

namespace itl {

inline constexpr std::array<int, 9> class_number_one_d{1, 2, 3, 7, 11, 19, 43, 67, 163};

class FieldTag {
public:
    FieldTag() : FieldTag(1) {}

    explicit FieldTag(int d) : d_(d)
    {
        if (std::find(class_number_one_d.begin(), class_number_one_d.end(), d) == class_number_one_d.end())
            throw precondition_error("d=" + std::to_string(d) + " is not one of the nine class-number-one fields");
        half_ = (d % 4 == 3);
        trace_ = half_ ? 1 : 0;
        norm_w_ = half_ ? (1 + d) / 4 : d;
        disc_ = half_ ? -d : -4 * d;
        units_ = d == 1 ? 4 : d == 3 ? 6 : 2;
    }

    int d() const { return d_; }
    int discriminant() const { return disc_; }
    int unit_count() const { return units_; }
    /// True when w = (1 + sqrt(-d))/2.
    bool half_integral() const { return half_; }
    int trace_w() const { return trace_; }
    int norm_w() const { return norm_w_; }

    friend bool operator==(const FieldTag& a, const FieldTag& b) { return a.d_ == b.d_; }

private:
    int d_;
    bool half_{false};
    int trace_{0};
    int norm_w_{1};
    int disc_{-4};
    int units_{4};
};

class OkElement {
public:
    OkElement() = default;
    OkElement(FieldTag tag, Int x, Int y = 0) : tag_(tag), x_(std::move(x)), y_(std::move(y)) {}

    static OkElement from_sqrt_coords(FieldTag tag, const Int& a, const Int& b, const Int& denom = 1);

    const FieldTag& tag() const { return tag_; }
    const Int& x() const { return x_; }
    const Int& y() const { return y_; }
    bool is_zero() const { return x_ == 0 && y_ == 0; }

    Int norm() const { return x_ * x_ + tag_.trace_w() * x_ * y_ + tag_.norm_w() * y_ * y_; }
    Int trace() const { return 2 * x_ + tag_.trace_w() * y_; }
    OkElement conj() const { return {tag_, x_ + tag_.trace_w() * y_, -y_}; }

    /// Coordinates (a, b, denom) with element = (a + b*sqrt(-d))/denom, denom in {1, 2} minimal.
    std::tuple<Int, Int, int> sqrt_coords() const
    {
        if (!tag_.half_integral()) return {x_, y_, 1};
        Int a = 2 * x_ + y_;
        if (mpz_even_p(a.get_mpz_t()) && mpz_even_p(y_.get_mpz_t())) return {a / 2, y_ / 2, 1};
        return {a, y_, 2};
    }

    friend OkElement operator+(const OkElement& a, const OkElement& b)
    {
        check_same(a, b);
        return {a.tag_, a.x_ + b.x_, a.y_ + b.y_};
    }
    friend OkElement operator-(const OkElement& a, const OkElement& b)
    {
        check_same(a, b);
        return {a.tag_, a.x_ - b.x_, a.y_ - b.y_};
    }
    friend OkElement operator-(const OkElement& a) { return {a.tag_, -a.x_, -a.y_}; }
    friend OkElement operator*(const OkElement& a, const OkElement& b)
    {
        check_same(a, b);
        const int t = a.tag_.trace_w(), n = a.tag_.norm_w();
        Int yy = a.y_ * b.y_;
        return {a.tag_, a.x_ * b.x_ - n * yy, a.x_ * b.y_ + a.y_ * b.x_ + t * yy};
    }
    friend OkElement operator*(const Int& k, const OkElement& a) { return {a.tag_, k * a.x_, k * a.y_}; }

    friend bool operator==(const OkElement& a, const OkElement& b)
    {
        return a.tag_ == b.tag_ && a.x_ == b.x_ && a.y_ == b.y_;
    }

    /// Exact quotient a/b if b divides a in O_K.
    friend std::optional<OkElement> divide_exact(const OkElement& a, const OkElement& b)
    {
        check_same(a, b);
        if (b.is_zero()) throw precondition_error("division by zero element");
        OkElement num = a * b.conj();
        Int n = b.norm();
        if (!mpz_divisible_p(num.x_.get_mpz_t(), n.get_mpz_t()) || !mpz_divisible_p(num.y_.get_mpz_t(), n.get_mpz_t()))
            return std::nullopt;
        return OkElement(a.tag_, num.x_ / n, num.y_ / n);
    }

    friend bool divides(const OkElement& b, const OkElement& a) { return divide_exact(a, b).has_value(); }

    OkElement pow(unsigned long e) const
    {
        OkElement r(tag_, 1, 0), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            b = b * b;
            e >>= 1;
        }
        return r;
    }

private:
    static void check_same(const OkElement& a, const OkElement& b)
    {
        if (!(a.tag_ == b.tag_)) throw precondition_error("elements from different fields");
    }

    FieldTag tag_;
    Int x_{0};
    Int y_{0};
};

inline OkElement OkElement::from_sqrt_coords(FieldTag tag, const Int& a, const Int& b, const Int& denom)
{
    // (a + b sqrt(-d))/denom
    if (denom != 1 && denom != 2) throw precondition_error("denominator must be 1 or 2");
    if (!tag.half_integral()) {
        if (denom != 1) {
            if (a % 2 != 0 || b % 2 != 0) throw precondition_error("not an algebraic integer");
            return {tag, a / 2, b / 2};
        }
        return {tag, a, b};
    }
    // sqrt(-d) = 2w - 1
    Int A = a, B = b;
    if (denom == 1) {
        A *= 2;
        B *= 2;
    }
    // element = (A + B(2w-1))/2 = (A - B)/2 + B w
    if ((A - B) % 2 != 0) throw precondition_error("not an algebraic integer");
    return {tag, (A - B) / 2, B};
}

inline OkElement ok_one(FieldTag tag) { return {tag, 1, 0}; }

/// All roots of unity of O_K: powers of a generator (w for d=1,3; -1 otherwise).
inline std::vector<OkElement> units(FieldTag tag)
{
    OkElement gen = tag.unit_count() == 2 ? OkElement(tag, -1, 0) : OkElement(tag, 0, 1);
    std::vector<OkElement> out;
    OkElement u = ok_one(tag);
    for (int i = 0; i < tag.unit_count(); ++i) {
        out.push_back(u);
        u = u * gen;
    }
    return out;
}

inline OkElement unit_generator(FieldTag tag) { return units(tag)[1]; }

inline bool is_unit(const OkElement& e) { return e.norm() == 1; }

/*
 * Total order used for canonical representatives: (sign x, x, y) compared
 * lexicographically, larger wins.
 */
inline bool associate_key_less(const OkElement& a, const OkElement& b)
{
    return std::make_tuple(sgn(a.x()), a.x(), a.y()) < std::make_tuple(sgn(b.x()), b.x(), b.y());
}

inline OkElement canonical_associate(const OkElement& e)
{
    if (e.is_zero()) throw precondition_error("canonical_associate: zero element");
    OkElement best = e;
    for (const auto& u : units(e.tag())) {
        OkElement c = u * e;
        if (associate_key_less(best, c)) best = c;
    }
    return best;
}

inline bool are_associates(const OkElement& a, const OkElement& b)
{
    return canonical_associate(a) == canonical_associate(b);
}

/// Order on canonical generators: y descending, then x descending.
inline bool generator_order(const OkElement& a, const OkElement& b)
{
    if (a.y() != b.y()) return a.y() > b.y();
    return a.x() > b.x();
}

enum class SplitKind { split, inert, ramified };

inline const char* to_string(SplitKind k)
{
    switch (k) {
    case SplitKind::split: return "split";
    case SplitKind::inert: return "inert";
    case SplitKind::ramified: return "ramified";
    }
    return "?";
}

inline SplitKind split_type(FieldTag tag, const Int& ell)
{
    if (ell < 2) throw precondition_error("split_type: ell must be >= 2");
    int k = kronecker(Int(tag.discriminant()), ell);
    return k == 0 ? SplitKind::ramified : k == 1 ? SplitKind::split : SplitKind::inert;
}

struct OkPrime {
    OkElement generator;
    Int residue_char;
    SplitKind kind{SplitKind::split};
    int residue_degree{1};

    Int norm() const { return residue_degree == 1 ? residue_char : residue_char * residue_char; }

    friend bool operator==(const OkPrime& a, const OkPrime& b) { return a.generator == b.generator; }
    friend bool operator<(const OkPrime& a, const OkPrime& b)
    {
        if (a.residue_char != b.residue_char) return a.residue_char < b.residue_char;
        return generator_order(a.generator, b.generator);
    }
};

namespace detail {

/// Solve norm(x + y w) = ell for a split prime ell via Cornacchia; returns one solution.
inline OkElement cornacchia_split(FieldTag tag, const Int& ell)
{
    const Int d = tag.d();
    if (ell == 2) {
        for (int x = -2; x <= 2; ++x)
            for (int y = -2; y <= 2; ++y) {
                OkElement e(tag, x, y);
                if (e.norm() == 2) return e;
            }
        throw precondition_error("no element of norm 2");
    }
    if (!tag.half_integral()) {
        // x^2 + d y^2 = ell
        Int x0 = *sqrt_mod_prime(-d, ell);
        if (2 * x0 < ell) x0 = ell - x0;
        Int a = ell, b = x0, l = isqrt(ell);
        while (b > l) {
            Int r = a % b;
            a = b;
            b = r;
        }
        Int rest = ell - b * b;
        if (rest % d != 0 || !is_square(rest / d)) throw precondition_error("Cornacchia failed");
        return {tag, b, isqrt(rest / d)};
    }
    // X^2 + d Y^2 = 4 ell with X = 2x + y, Y = y
    Int x0 = *sqrt_mod_prime(-d, ell);
    if (mpz_odd_p(x0.get_mpz_t()) != mpz_odd_p(Int(-d).get_mpz_t())) x0 = ell - x0;
    Int a = 2 * ell, b = x0, l = isqrt(4 * ell);
    while (b > l) {
        Int r = a % b;
        a = b;
        b = r;
    }
    Int rest = 4 * ell - b * b;
    if (rest % d != 0 || !is_square(rest / d)) throw precondition_error("Cornacchia failed");
    Int Y = isqrt(rest / d);
    return OkElement::from_sqrt_coords(tag, b, Y, 2);
}

}  // namespace detail

/// Primes of O_K above the rational prime ell: one (inert/ramified) or a conjugate pair (split).
inline std::vector<OkPrime> primes_above(FieldTag tag, const Int& ell)
{
    if (!is_prime(ell)) throw precondition_error("primes_above: " + ell.get_str() + " is not prime");
    SplitKind kind = split_type(tag, ell);
    switch (kind) {
    case SplitKind::inert:
        return {OkPrime{OkElement(tag, ell, 0), ell, kind, 2}};
    case SplitKind::ramified: {
        OkElement g = (ell == 2) ? (tag.d() == 1 ? OkElement(tag, 1, 1) : OkElement(tag, 0, 1))
                                 : OkElement::from_sqrt_coords(tag, 0, 1);
        return {OkPrime{canonical_associate(g), ell, kind, 1}};
    }
    case SplitKind::split: {
        OkElement g = detail::cornacchia_split(tag, ell);
        OkPrime a{canonical_associate(g), ell, kind, 1};
        OkPrime b{canonical_associate(g.conj()), ell, kind, 1};
        if (b < a) std::swap(a, b);
        return {a, b};
    }
    }
    return {};
}

struct PrimeFactorization {
    OkElement unit;
    std::vector<std::pair<OkPrime, int>> factors;

    OkElement rebuild() const
    {
        OkElement r = unit;
        for (const auto& [p, e] : factors) r = r * p.generator.pow(static_cast<unsigned long>(e));
        return r;
    }
};

inline PrimeFactorization factor(const OkElement& e)
{
    if (e.is_zero()) throw precondition_error("factor: zero element");
    PrimeFactorization out;
    OkElement rest = e;
    for (const auto& [ell, mult] : factor_integer(e.norm())) {
        for (const auto& P : primes_above(e.tag(), ell)) {
            int k = 0;
            while (auto q = divide_exact(rest, P.generator)) {
                rest = *q;
                ++k;
            }
            if (k > 0) out.factors.emplace_back(P, k);
        }
    }
    if (!is_unit(rest)) throw std::logic_error("factor: cofactor is not a unit");
    out.unit = rest;
    std::sort(out.factors.begin(), out.factors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

/// Canonical generator of (a) + (b).
inline OkElement gcd_ok(const OkElement& a, const OkElement& b)
{
    if (a.is_zero() && b.is_zero()) throw precondition_error("gcd_ok: both arguments zero");
    if (a.is_zero()) return canonical_associate(b);
    if (b.is_zero()) return canonical_associate(a);
    auto fb = factor(b);
    OkElement g = ok_one(a.tag());
    for (const auto& [P, ea] : factor(a).factors) {
        for (const auto& [Q, eb] : fb.factors)
            if (P == Q) g = g * P.generator.pow(static_cast<unsigned long>(std::min(ea, eb)));
    }
    return canonical_associate(g);
}

/// Canonical generator of (a) intersect (b).
inline OkElement lcm_ok(const OkElement& a, const OkElement& b)
{
    if (a.is_zero() || b.is_zero()) throw precondition_error("lcm_ok: zero argument");
    auto fa = factor(a).factors, fb = factor(b).factors;
    OkElement g = ok_one(a.tag());
    for (const auto& [P, ea] : fa) {
        int e = ea;
        for (const auto& [Q, eb] : fb)
            if (P == Q) e = std::max(e, eb);
        g = g * P.generator.pow(static_cast<unsigned long>(e));
    }
    for (const auto& [Q, eb] : fb) {
        bool seen = std::any_of(fa.begin(), fa.end(), [&](const auto& pe) { return pe.first == Q; });
        if (!seen) g = g * Q.generator.pow(static_cast<unsigned long>(eb));
    }
    return canonical_associate(g);
}

// ---------------------------------------------------------------------------
// Text form: "d=<n>:a+b*w" where w stands for sqrt(-d), or "d=<n>:(a+b*w)/2"
// for half-integral elements.  The parser also accepts omega coordinates
// written with the symbol o: "d=43:3+2*o".

namespace detail {

inline std::string format_linear(const Int& a, const Int& b, const char* sym)
{
    std::string s = a.get_str();
    s += (b < 0 ? "-" : "+");
    s += Int(abs(b)).get_str();
    s += "*";
    s += sym;
    return s;
}

}  // namespace detail

inline std::string to_text(const OkElement& e)
{
    auto [a, b, den] = e.sqrt_coords();
    std::string body = detail::format_linear(a, b, "w");
    if (den == 2) body = "(" + body + ")/2";
    return "d=" + std::to_string(e.tag().d()) + ":" + body;
}

inline std::ostream& operator<<(std::ostream& os, const OkElement& e) { return os << to_text(e); }

inline OkElement parse_element(const std::string& text, std::optional<FieldTag> default_tag = std::nullopt)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    std::optional<FieldTag> tag = default_tag;
    if (s.rfind("d=", 0) == 0) {
        auto colon = s.find(':');
        if (colon == std::string::npos) throw precondition_error("element text: missing ':' after field tag");
        tag = FieldTag(std::stoi(s.substr(2, colon - 2)));
        s = s.substr(colon + 1);
    }
    if (!tag) throw precondition_error("element text: missing field tag");
    int denom = 1;
    if (s.size() > 2 && s.front() == '(' && s.substr(s.size() - 3) == ")/2") {
        denom = 2;
        s = s.substr(1, s.size() - 4);
    }
    // terms: [+-]int, [+-][int*]sym, sym in {w, o, i}
    Int a = 0, b = 0;
    char sym = 0;
    std::size_t pos = 0;
    if (s.empty()) throw precondition_error("element text: empty");
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1 : 1;
            ++pos;
        }
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string digits = s.substr(start, pos - start);
        bool has_sym = false;
        char this_sym = 0;
        if (pos < s.size() && s[pos] == '*') ++pos;
        if (pos < s.size() && (s[pos] == 'w' || s[pos] == 'o' || s[pos] == 'i')) {
            has_sym = true;
            this_sym = s[pos];
            ++pos;
        }
        if (digits.empty() && !has_sym) throw precondition_error("element text: cannot parse '" + text + "'");
        Int coeff = digits.empty() ? Int(1) : Int(digits);
        coeff *= sign;
        if (has_sym) {
            if (sym && sym != this_sym) throw precondition_error("element text: mixed symbols");
            sym = this_sym;
            b += coeff;
        } else {
            a += coeff;
        }
    }
    if (sym == 'o') {
        if (denom != 1) throw precondition_error("element text: omega coordinates take no denominator");
        return {*tag, a, b};
    }
    return OkElement::from_sqrt_coords(*tag, a, b, denom);
}

}  // namespace itl

template <>
struct std::hash<itl::OkElement> {
    std::size_t operator()(const itl::OkElement& e) const noexcept
    {
        std::size_t h1 = mpz_get_ui(e.x().get_mpz_t()) * 0x9E3779B97F4A7C15ULL;
        std::size_t h2 = mpz_get_ui(e.y().get_mpz_t());
        return h1 ^ (h2 + 0x7F4A7C15ULL + (h1 << 6) + (h1 >> 2)) ^ static_cast<std::size_t>(mpz_sgn(e.x().get_mpz_t()) + 3 * mpz_sgn(e.y().get_mpz_t()));
    }
};
