#pragma once

/*
 * Residue-characteristic-p tools for the non-vanishing arguments (reduction
 * modulo a split prime above p, Euler factors in F_{p^t}, the level N1
 * beyond which no q-power character kills the Euler factor) and numeric
 * evaluation of imprimitive Hecke L-series for finite-order ray class
 * characters.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <thread>
#include <vector>

#include "itl/finfield.hpp"
#include "itl/okring.hpp"
#include "itl/rayclass.hpp"
#include "itl/residue.hpp"

namespace itl {

/// O_K -> F_p with sqrt(-d) -> s, killing P = (p, sqrt(-d) - s).
struct ResidueEmbedding {
    FieldTag tag;
    Int p;
    Int s;
    Int omega;  // image of w
};

/// p an odd prime split in K; s defaults to the smaller square root of -d mod p.
inline ResidueEmbedding make_residue_embedding(FieldTag tag, const Int& p, std::optional<Int> s = std::nullopt)
{
    if (!is_prime(p) || p == 2) throw precondition_error("residue embedding: p must be an odd prime");
    if (split_type(tag, p) != SplitKind::split) throw precondition_error("residue embedding: p must split in K");
    const Int minus_d = mod_floor(Int(-tag.d()), p);
    Int root;
    if (s) {
        root = mod_floor(*s, p);
        if (mod_floor(root * root - minus_d, p) != 0) throw precondition_error("residue embedding: s^2 != -d mod p");
    } else {
        root = *sqrt_mod_prime(minus_d, p);
    }
    ResidueEmbedding E{tag, p, root, 0};
    E.omega = tag.half_integral() ? mod_floor((1 + root) * invmod(2, p), p) : root;
    return E;
}

inline Int embed(const ResidueEmbedding& E, const OkElement& e)
{
    if (e.tag().d() != E.tag.d()) throw precondition_error("embed: element from a different field");
    return mod_floor(e.x() + e.y() * E.omega, E.p);
}

namespace detail {

inline void check_same_characteristic(const ResidueEmbedding& E, const FinFieldElt& a)
{
    if (!a.field() || Int(static_cast<unsigned long>(a.field()->p())) != E.p)
        throw precondition_error("finite field element has the wrong characteristic");
}

/// N(lambda) * lambda^-k * phi0^-1 in the residue field.
inline FinFieldElt euler_residue(const ResidueEmbedding& E, const OkElement& lambda, const Int& k, const FinFieldElt& phi0)
{
    check_same_characteristic(E, phi0);
    const Int lam = embed(E, lambda);
    if (lam == 0) throw precondition_error("lambda lies in the chosen prime above p");
    if (phi0.is_zero()) throw precondition_error("phi0 image must be nonzero");
    const auto& F = phi0.field();
    FinFieldElt a = FinFieldElt::scalar(F, embed(E, OkElement(lambda.tag(), lambda.norm(), 0)));
    return a * FinFieldElt::scalar(F, powmod(lam, mod_floor(-k, E.p - 1), E.p)) * phi0.inverse();
}

}  // namespace detail

/*
 * Whether N(lambda) - lambda^k phi0 eta reduces to zero, i.e. whether the
 * Euler factor at (lambda) has positive valuation.
 */
inline bool euler_factor_vanishes(const ResidueEmbedding& E, const OkElement& lambda, const Int& k, const FinFieldElt& phi0_image,
                                  const FinFieldElt& eta_image)
{
    detail::check_same_characteristic(E, phi0_image);
    detail::check_same_characteristic(E, eta_image);
    const Int lam = embed(E, lambda);
    if (lam == 0) throw precondition_error("euler_factor_vanishes: lambda lies in the chosen prime above p");
    const auto& F = phi0_image.field();
    FinFieldElt norm = FinFieldElt::scalar(F, embed(E, OkElement(lambda.tag(), lambda.norm(), 0)));
    FinFieldElt lk = FinFieldElt::scalar(F, powmod(lam, mod_floor(k, E.p - 1), E.p));
    return (norm - lk * phi0_image * eta_image).is_zero();
}

/// m with a of exact order q^m, if a is a q-power root of unity.
inline std::optional<int> q_power_order(const FinFieldElt& a)
{
    const auto& F = a.field();
    const Int q(F->q());
    FinFieldElt one = FinFieldElt::one(F), cur = a;
    for (int m = 0; m <= F->root_level(); ++m) {
        if (cur == one) return m;
        cur = cur.pow(q);
    }
    return std::nullopt;
}

/*
 * N1 = m0 + 1 when a = N(lambda) lambda^-k phi0^-1 has exact order q^m0,
 * else 0.  Characters eta of exact order q^m with m >= N1 never make the
 * Euler factor vanish.
 */
inline int compute_N1(const ResidueEmbedding& E, const OkElement& lambda, const Int& k, const FinFieldElt& phi0_image, const Int& q)
{
    if (Int(phi0_image.field()->q()) != q) throw precondition_error("compute_N1: phi0 image lives in a field built for another q");
    auto m0 = q_power_order(detail::euler_residue(E, lambda, k, phi0_image));
    return m0 ? *m0 + 1 : 0;
}

/// Pairwise distinctness of the images of the q^M-th roots of unity.
inline bool distinctness_check(const Int& p, const Int& q, int M)
{
    if (M < 0) throw precondition_error("distinctness_check: M must be >= 0");
    FinFieldElt zeta = unity_image(p, q, M);
    const auto& F = zeta.field();
    const unsigned long n = ipow(q, static_cast<unsigned long>(M)).get_ui();
    std::vector<std::vector<ff::u64>> keys;
    keys.reserve(n);
    FinFieldElt cur = FinFieldElt::one(F);
    for (unsigned long j = 0; j < n; ++j) {
        if (cur.is_zero()) return false;
        std::vector<ff::u64> key;
        for (const auto& [b, c] : cur.terms()) {
            key.push_back(b);
            key.insert(key.end(), c.begin(), c.end());
        }
        keys.push_back(std::move(key));
        cur = cur * zeta;
    }
    if (cur != FinFieldElt::one(F)) return false;
    std::sort(keys.begin(), keys.end());
    return std::adjacent_find(keys.begin(), keys.end()) == keys.end();
}

// ---------------------------------------------------------------------------
// L-series

struct LSeriesValue {
    std::complex<double> value;
    std::uint64_t B{0};
    double error{0};
    bool real{true};  // character takes only real values
};

enum class LMethod { dirichlet, euler };

inline unsigned worker_threads()
{
    if (const char* env = std::getenv("ITL_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

/*
 * Character values on residues mod h.  A character with exponents e_i on the
 * ray class group with invariants n_i sends class c to exp(2 pi i sum e_i c_i / n_i).
 */
class CharacterTable {
public:
    CharacterTable(const RayClassGroup& G, const CharacterSpec& chi) : A_(to_ll(G.unit_group().lattice().A())), B_(to_ll(G.unit_group().lattice().B())), C_(to_ll(G.unit_group().lattice().C()))
    {
        const auto& inv = G.invariants();
        if (chi.exponents.size() != inv.size()) throw precondition_error("character: exponent vector does not match the group");
        if (chi.k != 0) throw precondition_error("character: only finite-order characters (k = 0) are supported");
        if (G.modulus().norm() > 1000000) throw precondition_error("character table: modulus norm above 10^6");
        Int exponent = 1;
        for (const auto& n : inv) exponent = lcm(exponent, n);
        N_ = to_ll(exponent);
        trivial_ = true;
        for (std::size_t i = 0; i < inv.size(); ++i)
            if (mod_floor(chi.exponents[i], inv[i]) != 0) trivial_ = false;
        real_ = true;

        const UnitGroup& U = G.unit_group();
        const auto& uinv = U.invariants();
        // angle (in units of 1/N) of chi on each unit-group generator
        std::vector<long long> gen_angle(uinv.size());
        for (std::size_t j = 0; j < uinv.size(); ++j) {
            std::vector<Int> e(uinv.size(), Int(0));
            e[j] = 1;
            auto c = G.class_of_unit_coords(e);
            Int a = 0;
            for (std::size_t i = 0; i < inv.size(); ++i) a += chi.exponents[i] * c[i] * (exponent / inv[i]);
            gen_angle[j] = to_ll(mod_floor(a, exponent));
        }
        values_.assign(static_cast<std::size_t>(A_ * C_), std::complex<double>(0, 0));
        const IdealLattice& L = U.lattice();
        const auto& gens = U.generators();
        // walk the unit group: element and angle updated incrementally
        std::vector<long long> radix;
        for (const auto& n : uinv) radix.push_back(to_ll(n));
        std::vector<long long> coords(uinv.size(), 0);
        std::vector<OkElement> prefix(uinv.size() + 1, L.reduce(ok_one(G.modulus().tag())));
        std::vector<long long> angle(uinv.size() + 1, 0);
        for (;;) {
            const OkElement& x = prefix[0];
            long long idx = to_ll(L.index(x));
            values_[static_cast<std::size_t>(idx)] = value_of(angle[0]);
            // increment mixed radix, least significant first
            std::size_t i = 0;
            while (i < coords.size() && ++coords[i] == radix[i]) coords[i++] = 0;
            if (i == coords.size()) break;
            // recompute prefixes 0..i: prefix[j] = prefix[j+1] * g_j^coords[j]
            for (std::size_t j = i + 1; j-- > 0;) {
                if (j == i) {
                    prefix[j] = L.mul(prefix[j], gens[j]);
                    angle[j] = (angle[j] + gen_angle[j]) % N_;
                } else {
                    prefix[j] = prefix[j + 1];
                    angle[j] = angle[j + 1];
                }
            }
        }
    }

    bool trivial() const { return trivial_; }
    bool real() const { return real_; }

    /// chi((x + y w)); zero for ideals not coprime to the modulus.
    std::complex<double> operator()(long long x, long long y) const
    {
        long long yr = y % C_;
        if (yr < 0) yr += C_;
        long long k = (y - yr) / C_;
        // x - k*B mod A without overflow for |k*B| up to 2^62
        __int128 xr = (static_cast<__int128>(x) - static_cast<__int128>(k) * B_) % A_;
        if (xr < 0) xr += A_;
        return values_[static_cast<std::size_t>(yr * A_ + static_cast<long long>(xr))];
    }

private:
    std::complex<double> value_of(long long a)
    {
        a %= N_;
        if (a == 0) return {1, 0};
        if (2 * a == N_) return {-1, 0};
        real_ = false;
        if (4 * a == N_) return {0, 1};
        if (4 * a == 3 * N_) return {0, -1};
        const double th = 2 * M_PI * static_cast<double>(a) / static_cast<double>(N_);
        return {std::cos(th), std::sin(th)};
    }

    long long A_, B_, C_;
    long long N_{1};
    bool trivial_{true};
    bool real_{true};
    std::vector<std::complex<double>> values_;
};

namespace detail {

/// Bound for sum_{n > B} d(n) n^-s, from sum_{n <= x} d(n) <= x (ln x + 1); kept monotone in B.
inline double dirichlet_tail_bound(double s, double B)
{
    auto f = [s](double b) {
        const double a = s - 1;
        return s * std::pow(b, -a) * (std::log(b) / a + 1 / (a * a) + 1 / a);
    };
    return std::min(f(1.0), f(std::max(B, 1.0)));
}

inline constexpr double summation_rounding_allowance = 1e-10;

// Exact range of x with x^2 + t x y + n y^2 <= B for fixed y.
inline std::optional<std::pair<long long, long long>> x_range(long long t, long long n, long long y, long long B)
{
    const __int128 disc = static_cast<__int128>(t * t - 4 * n) * y * y + static_cast<__int128>(4) * B;
    if (disc < 0) return std::nullopt;
    auto norm = [&](long long x) { return static_cast<__int128>(x) * x + static_cast<__int128>(t) * x * y + static_cast<__int128>(n) * y * y; };
    const double r = std::sqrt(static_cast<double>(disc));
    long long lo = static_cast<long long>(std::floor((-static_cast<double>(t * y) - r) / 2)) - 2;
    long long hi = static_cast<long long>(std::ceil((-static_cast<double>(t * y) + r) / 2)) + 2;
    while (lo <= hi && norm(lo) > B) ++lo;
    while (hi >= lo && norm(hi) > B) --hi;
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
}

inline std::vector<long long> primes_up_to(long long B)
{
    std::vector<bool> composite(static_cast<std::size_t>(B + 1), false);
    std::vector<long long> out;
    for (long long i = 2; i <= B; ++i) {
        if (composite[static_cast<std::size_t>(i)]) continue;
        out.push_back(i);
        for (long long j = i * i; j <= B; j += i) composite[static_cast<std::size_t>(j)] = true;
    }
    return out;
}

inline int legendre_ll(long long a, long long p)
{
    a %= p;
    if (a < 0) a += p;
    if (a == 0) return 0;
    return ff::powmod64(static_cast<ff::u64>(a), static_cast<ff::u64>((p - 1) / 2), static_cast<ff::u64>(p)) == 1 ? 1 : -1;
}

}  // namespace detail

/*
 * L_h(chi, s) = sum over ideals a coprime to h of chi(a) N(a)^-s, either as
 * the partial Dirichlet sum over N(a) <= B or as the Euler product over
 * prime ideals of norm <= B, with a rigorous bound on the truncation error.
 */
inline LSeriesValue evaluate_imprimitive_L(const RayClassGroup& G, const CharacterSpec& chi, double s, std::uint64_t B,
                                           LMethod method = LMethod::dirichlet)
{
    if (!(s > 1)) throw precondition_error("evaluate_imprimitive_L: s must exceed 1");
    if (B < 1) throw precondition_error("evaluate_imprimitive_L: B must be >= 1");
    if (B > 1000000000ULL) throw precondition_error("evaluate_imprimitive_L: B above 10^9");
    const CharacterTable table(G, chi);
    const FieldTag tag = G.modulus().tag();
    const long long t = to_ll(Int(tag.trace_w())), n = to_ll(Int(tag.norm_w()));
    const long long Bl = static_cast<long long>(B);
    LSeriesValue out;
    out.B = B;
    out.real = table.real();

    if (method == LMethod::dirichlet) {
        // all nonzero x + y w with norm <= B, divided by the number of units
        const long long absD = 4 * n - t * t;
        long long ymax = static_cast<long long>(std::sqrt(4.0 * static_cast<double>(Bl) / static_cast<double>(absD))) + 2;
        constexpr long long rows_per_chunk = 8;
        const long long nrows = 2 * ymax + 1;
        const long long nchunks = (nrows + rows_per_chunk - 1) / rows_per_chunk;
        std::vector<std::complex<long double>> partial(static_cast<std::size_t>(nchunks));
        std::atomic<long long> next{0};
        auto worker = [&] {
            for (long long c; (c = next.fetch_add(1)) < nchunks;) {
                long double re = 0, im = 0;
                for (long long row = c * rows_per_chunk; row < std::min(nrows, (c + 1) * rows_per_chunk); ++row) {
                    const long long y = row - ymax;
                    auto range = detail::x_range(t, n, y, Bl);
                    if (!range) continue;
                    for (long long x = range->first; x <= range->second; ++x) {
                        if (x == 0 && y == 0) continue;
                        const long long nm = x * x + t * x * y + n * y * y;
                        const auto v = table(x, y);
                        if (v == std::complex<double>(0, 0)) continue;
                        const long double w = std::pow(static_cast<long double>(nm), -static_cast<long double>(s));
                        re += w * v.real();
                        im += w * v.imag();
                    }
                }
                partial[static_cast<std::size_t>(c)] = {re, im};
            }
        };
        const unsigned nt = std::max(1u, std::min<unsigned>(worker_threads(), static_cast<unsigned>(nchunks)));
        std::vector<std::thread> pool;
        for (unsigned i = 1; i < nt; ++i) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
        long double re = 0, im = 0;
        for (const auto& p : partial) {
            re += p.real();
            im += p.imag();
        }
        const long double w = tag.unit_count();
        out.value = {static_cast<double>(re / w), static_cast<double>(im / w)};
        out.error = detail::dirichlet_tail_bound(s, static_cast<double>(B)) + detail::summation_rounding_allowance;
        return out;
    }

    // Euler product, ascending rational primes
    const Int D = tag.discriminant();
    const long long Dl = to_ll(D);
    std::complex<long double> prod(1, 0);
    auto factor_at = [&](long long x, long long y, long double norm) {
        const auto v = table(x, y);
        if (v == std::complex<double>(0, 0)) return;
        const long double w = std::pow(norm, -static_cast<long double>(s));
        prod /= std::complex<long double>(1, 0) - std::complex<long double>(v.real(), v.imag()) * w;
    };
    const Int hn = G.modulus().norm();
    for (long long ell : detail::primes_up_to(Bl)) {
        int kind;
        if (Dl % ell == 0)
            kind = 0;
        else if (ell == 2)
            kind = (((Dl % 8) + 8) % 8 == 1) ? 1 : -1;
        else
            kind = detail::legendre_ll(Dl, ell);
        const long double le = static_cast<long double>(ell);
        if (kind == -1) {
            if (ell > Bl / ell) continue;
            factor_at(ell, 0, le * le);
        } else if (kind == 0 || table.trivial() == false || hn % static_cast<long>(ell) == 0) {
            for (const auto& P : primes_above(tag, Int(static_cast<long>(ell)))) factor_at(to_ll(P.generator.x()), to_ll(P.generator.y()), le);
        } else {
            // trivial character, prime ideals above ell coprime to h: both contribute 1
            const long double w = std::pow(le, -static_cast<long double>(s));
            prod /= (1 - w) * (1 - w);
        }
    }
    out.value = {static_cast<double>(prod.real()), static_cast<double>(prod.imag())};
    const double Bd = static_cast<double>(B);
    const double delta = 2 * std::pow(Bd, 1 - s) / ((s - 1) * (1 - std::pow(Bd, -s)));
    out.error = std::abs(out.value) * std::expm1(delta) + detail::summation_rounding_allowance;
    return out;
}

inline LSeriesValue evaluate_imprimitive_L(const OkElement& h, const CharacterSpec& chi, double s, std::uint64_t B,
                                           LMethod method = LMethod::dirichlet)
{
    return evaluate_imprimitive_L(RayClassGroup(h), chi, s, B, method);
}

inline CharacterSpec trivial_character(const RayClassGroup& G)
{
    CharacterSpec c;
    c.exponents.assign(G.invariants().size(), Int(0));
    return c;
}

}  // namespace itl
