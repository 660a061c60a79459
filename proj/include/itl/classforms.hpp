#pragma once

/*
 * Positive definite binary quadratic forms (a, b, c), b^2 - 4ac = D < 0.
 * Class groups of primitive forms via Gauss composition and reduction, the
 * S-class quotient by the classes of primes above S, and p-ranks.
 */

#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "itl/errors.hpp"
#include "itl/group_algorithms.hpp"
#include "itl/integer.hpp"
#include "itl/smith.hpp"

namespace itl {

using i128 = __int128;

struct QuadForm {
    long long a{1}, b{0}, c{1};

    long long discriminant() const { return b * b - 4 * a * c; }

    bool is_reduced() const { return std::llabs(b) <= a && a <= c && !((std::llabs(b) == a || a == c) && b < 0); }

    friend bool operator==(const QuadForm& x, const QuadForm& y) { return x.a == y.a && x.b == y.b && x.c == y.c; }
    friend bool operator!=(const QuadForm& x, const QuadForm& y) { return !(x == y); }
    friend bool operator<(const QuadForm& x, const QuadForm& y)
    {
        return std::tie(x.a, x.b, x.c) < std::tie(y.a, y.b, y.c);
    }

    std::string to_string() const { return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")"; }
};

struct QuadFormHash {
    std::size_t operator()(const QuadForm& f) const noexcept
    {
        std::size_t h = std::hash<long long>()(f.a);
        h = h * 1000003u ^ std::hash<long long>()(f.b);
        return h * 1000003u ^ std::hash<long long>()(f.c);
    }
};

inline constexpr long long max_form_discriminant = 100000000;

inline void check_discriminant(long long D)
{
    if (D >= 0) throw precondition_error("discriminant must be negative");
    if (((D % 4) + 4) % 4 > 1) throw precondition_error("discriminant must be 0 or 1 mod 4");
    if (-D > max_form_discriminant) throw precondition_error("|discriminant| above 10^8");
}

inline QuadForm reduce(QuadForm f)
{
    auto normalize = [](QuadForm& g) {
        // b into (-a, a]
        const long long two_a = 2 * g.a;
        long long r = ((g.b % two_a) + two_a) % two_a;  // [0, 2a)
        if (r > g.a) r -= two_a;
        const long long k = (r - g.b) / two_a;  // b + 2ak = r
        g.c = static_cast<long long>(static_cast<i128>(g.a) * k * k + static_cast<i128>(g.b) * k + g.c);
        g.b = r;
    };
    normalize(f);
    while (f.a > f.c) {
        std::swap(f.a, f.c);
        f.b = -f.b;
        normalize(f);
    }
    if (f.a == f.c && f.b < 0) f.b = -f.b;
    return f;
}

inline QuadForm principal_form(long long D)
{
    check_discriminant(D);
    return D % 2 == 0 ? QuadForm{1, 0, -D / 4} : QuadForm{1, 1, (1 - D) / 4};
}

inline QuadForm inverse(const QuadForm& f) { return reduce({f.a, -f.b, f.c}); }

/*
 * Composition (Shanks): e = gcd(a1, a2, (b1+b2)/2) = u a1 + v a2 + w (b1+b2)/2,
 * A = a1 a2 / e^2, B = (u a1 b2 + v a2 b1 + w (b1 b2 + D)/2) / e mod 2A.
 */
inline QuadForm compose(const QuadForm& f, const QuadForm& g)
{
    const long long D = f.discriminant();
    if (g.discriminant() != D) throw precondition_error("compose: forms of different discriminant");
    const Int a1 = from_ll(f.a), a2 = from_ll(g.a), b1 = from_ll(f.b), b2 = from_ll(g.b), Dz = from_ll(D);
    const Int beta = (b1 + b2) / 2;
    Int x1, y1, x2, y2;
    const Int g1 = ext_gcd(a1, a2, x1, y1);
    const Int e = ext_gcd(g1, beta, x2, y2);
    const Int u = x2 * x1, v = x2 * y1, w = y2;
    const Int A = a1 * a2 / (e * e);
    Int B = (u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + Dz) / 2) / e;
    B = mod_floor(B, 2 * A);
    const Int C = (B * B - Dz) / (4 * A);
    return reduce({to_ll(A), to_ll(B), to_ll(C)});
}

inline std::vector<QuadForm> reduced_forms(long long D)
{
    check_discriminant(D);
    std::vector<QuadForm> out;
    for (long long a = 1; 3 * a * a <= -D; ++a)
        for (long long b = -a + 1; b <= a; ++b) {
            if (((b - D) % 2) != 0) continue;
            const long long num = b * b - D;
            if (num % (4 * a)) continue;
            const long long c = num / (4 * a);
            if (c < a) continue;
            if (a == c && b < 0) continue;
            if (std::gcd(std::gcd(a, std::llabs(b)), c) != 1) continue;
            out.push_back({a, b, c});
        }
    return out;
}

struct FormClassGroup {
    long long discriminant{0};
    std::vector<QuadForm> forms;         // all reduced primitive forms
    std::vector<Int> invariants;         // n_1 | n_2 | ...
    std::vector<QuadForm> generators;    // one per invariant

    Int order() const { return group_order(invariants); }
};

/// Class group with the data needed for discrete logs.
class FormGroup {
public:
    explicit FormGroup(long long D) : group_(principal_form(D), [](const QuadForm& x, const QuadForm& y) { return compose(x, y); })
    {
        info_.discriminant = D;
        info_.forms = reduced_forms(D);
        for (const auto& f : info_.forms) {
            if (group_.order() == info_.forms.size()) break;
            group_.add_generator(f);
        }
        if (group_.order() != info_.forms.size()) throw std::logic_error("form class group: generators do not exhaust the forms");
        map_ = quotient_presentation(group_.relations(), group_.generators().size());
        info_.invariants = map_.invariants;
        const auto& gens = group_.generators();
        for (const auto& row : map_.from_new) {
            QuadForm x = principal_form(D);
            for (std::size_t j = 0; j < gens.size(); ++j) {
                // exponents may be negative: use the inverse form
                Int e = row[j];
                QuadForm base = e < 0 ? inverse(gens[j]) : gens[j];
                for (Int k = abs(e); k > 0; --k) x = compose(x, base);
            }
            info_.generators.push_back(x);
        }
    }

    const FormClassGroup& info() const { return info_; }

    /// Coordinates of the class of f w.r.t. info().generators.
    std::vector<Int> log(const QuadForm& f) const
    {
        auto v = group_.log(reduce(f));
        if (!v) throw precondition_error("form is not a primitive form of this discriminant");
        std::vector<Int> raw(v->begin(), v->end());
        return apply_coordinates(raw, map_);
    }

private:
    EnumeratedGroup<QuadForm, QuadFormHash> group_;
    QuotientMap map_;
    FormClassGroup info_;
};

inline FormClassGroup class_group(long long D) { return FormGroup(D).info(); }

/// A form (l, b, c) representing the prime l, if l is split or ramified; primitive forms only.
inline std::optional<QuadForm> prime_form(long long D, long long ell)
{
    check_discriminant(D);
    if (ell < 2 || !is_prime(from_ll(ell))) throw precondition_error("prime_form: l must be prime");
    const long long four_l = 4 * ell;
    const long long Dm = ((D % four_l) + four_l) % four_l;
    auto make = [&](long long b) -> std::optional<QuadForm> {
        if (static_cast<i128>(b) * b % four_l != Dm) return std::nullopt;
        const long long c = static_cast<long long>((static_cast<i128>(b) * b - D) / four_l);
        if (std::gcd(std::gcd(ell, b), c) != 1) return std::nullopt;
        return QuadForm{ell, b, c};
    };
    if (ell == 2 || D % ell == 0) {
        for (long long b : {0LL, ell % 2 ? ell : 1LL, 2LL})
            if (b <= ell)
                if (auto f = make(b)) return f;
        return std::nullopt;
    }
    auto r = sqrt_mod_prime(from_ll(((D % ell) + ell) % ell), from_ll(ell));
    if (!r) return std::nullopt;  // inert
    const long long b = to_ll(*r);
    return make(((b - D) % 2 == 0) ? b : ell - b);
}

struct SClassGroup {
    long long discriminant{0};
    std::vector<long long> S;
    std::vector<Int> invariants;
    std::size_t primes_above_S{0};  // number of prime ideals above S

    Int order() const { return group_order(invariants); }
};

/// Cl / <classes of primes above S>.
inline SClassGroup s_class_group(long long D, const std::vector<long long>& S)
{
    FormGroup G(D);
    const auto& inv = G.info().invariants;
    const std::size_t k = inv.size();
    IntMatrix rel;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<Int> r(k, Int(0));
        r[i] = inv[i];
        rel.push_back(std::move(r));
    }
    SClassGroup out;
    out.discriminant = D;
    out.S = S;
    for (long long ell : S) {
        auto f = prime_form(D, ell);
        if (!f) continue;
        out.primes_above_S += (D % ell == 0) ? 1 : 2;
        if (k) rel.push_back(G.log(*f));
    }
    out.invariants = quotient_presentation(rel, k).invariants;
    return out;
}

/// dim_{F_p} G[p] for G with the given invariant factors.
inline int p_rank(const std::vector<Int>& invariants, const Int& p)
{
    int r = 0;
    for (const auto& n : invariants)
        if (n % p == 0) ++r;
    return r;
}

}  // namespace itl
