#pragma once

/*
 * Unit groups (O_K/h)^x, ray class groups of K (class number one, so the ray
 * class group mod h is (O_K/h)^x modulo the image of the roots of unity),
 * Artin symbols, characters and anticyclotomic Z_q-tower layers.
 */

#include <algorithm>
#include <functional>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "itl/group_algorithms.hpp"
#include "itl/okring.hpp"
#include "itl/residue.hpp"
#include "itl/smith.hpp"

namespace itl {

struct ResidueClass {
    OkElement modulus;
    OkElement representative;
};

struct AbelianGroupStructure {
    std::vector<Int> invariants;            // n_1 | n_2 | ...
    std::vector<ResidueClass> generators;   // may be empty for abstract groups

    Int order() const { return group_order(invariants); }
};

/// |(O_K/h)^x| = N(h) * prod_{P | h} (1 - 1/N(P)).
inline Int euler_phi_K(const OkElement& h)
{
    if (h.is_zero()) throw precondition_error("euler_phi_K: zero modulus");
    Int phi = 1;
    for (const auto& [P, e] : factor(h).factors) {
        Int np = P.norm();
        phi *= (np - 1) * ipow(np, static_cast<unsigned long>(e - 1));
    }
    return phi;
}

/*
 * (O_K/h)^x assembled from its prime-power CRT factors.  Each factor
 * (O_K/P^e)^x is split as the cyclic prime-to-l part (isomorphic to the
 * residue field's multiplicative group) times the 1-units (1+P)/(1+P^e),
 * except when O_K/P^e = Z/l^e with l odd, where the whole factor is cyclic.
 */
class UnitGroup {
public:
    explicit UnitGroup(const OkElement& modulus) : lattice_(modulus)
    {
        if (modulus.is_zero()) throw precondition_error("unit group of the zero modulus");
        const FieldTag& tag = modulus.tag();
        const auto fac = factor(modulus).factors;
        for (const auto& [P, e] : fac) {
            auto loc = std::make_shared<Local>();
            loc->prime = P;
            loc->exponent = e;
            loc->power = P.generator.pow(static_cast<unsigned long>(e));
            loc->lattice = IdealLattice(loc->power);
            loc->prime_lattice = IdealLattice(P.generator);
            OkElement cofactor = *divide_exact(modulus, loc->power);
            loc->idempotent = fac.size() == 1 ? ok_one(tag) : crt_idempotent(cofactor, loc->power);
            build_local(*loc);
            locals_.push_back(loc);
        }
        // global raw presentation
        std::size_t K = 0;
        for (const auto& loc : locals_) K += loc->raw_orders.size();
        IntMatrix rel;
        std::size_t offset = 0;
        for (const auto& loc : locals_) {
            loc->offset = offset;
            for (const auto& row : loc->raw_relations) {
                std::vector<Int> r(K, Int(0));
                for (std::size_t j = 0; j < row.size(); ++j) r[offset + j] = row[j];
                rel.push_back(std::move(r));
            }
            for (const auto& g : loc->raw_gens) raw_gens_.push_back(lift(*loc, g));
            for (const auto& o : loc->raw_orders) raw_local_order_.push_back(o);
            offset += loc->raw_orders.size();
        }
        map_ = quotient_presentation(rel, K);
        for (const auto& row : map_.from_new) {
            OkElement g = lattice_.reduce(ok_one(tag));
            for (std::size_t j = 0; j < K; ++j)
                g = lattice_.mul(g, lattice_.pow(raw_gens_[j], mod_floor(row[j], raw_local_order_[j])));
            gens_.push_back(g);
        }
    }

    const IdealLattice& lattice() const { return lattice_; }
    const OkElement& modulus() const { return lattice_.generator(); }
    const std::vector<Int>& invariants() const { return map_.invariants; }
    const std::vector<OkElement>& generators() const { return gens_; }
    Int order() const { return group_order(map_.invariants); }

    AbelianGroupStructure structure() const
    {
        AbelianGroupStructure s;
        s.invariants = map_.invariants;
        for (const auto& g : gens_) s.generators.push_back({modulus(), g});
        return s;
    }

    bool is_unit(const OkElement& x) const { return coprime_ideals(x, modulus()); }

    /// Coordinates of x w.r.t. generators(); x must be coprime to the modulus.
    std::vector<Int> log(const OkElement& x) const
    {
        if (!is_unit(x)) throw precondition_error("unit group log: element not coprime to modulus");
        std::vector<Int> raw;
        for (const auto& loc : locals_) {
            auto v = local_log(*loc, loc->lattice.reduce(x));
            raw.insert(raw.end(), v.begin(), v.end());
        }
        return apply_coordinates(raw, map_);
    }

    OkElement element(const std::vector<Int>& coords) const
    {
        OkElement g = lattice_.reduce(ok_one(modulus().tag()));
        for (std::size_t i = 0; i < coords.size(); ++i) g = lattice_.mul(g, lattice_.pow(gens_[i], mod_floor(coords[i], map_.invariants[i])));
        return g;
    }

private:
    struct Local {
        OkPrime prime;
        int exponent{1};
        OkElement power;
        IdealLattice lattice;
        IdealLattice prime_lattice;
        OkElement idempotent;
        std::size_t offset{0};

        bool cyclic_integer{false};  // O/P^e = Z/l^e with l odd
        Int cyc_order{1};            // order of the cyclic component(s)
        OkElement cyc_gen;           // generator of cyclic component (mod P^e)
        OkElement residue_gen;       // primitive element of (O/P)^x
        Int one_unit_order{1};       // N(P)^(e-1)
        std::shared_ptr<EnumeratedGroup<OkElement>> one_units;

        std::vector<OkElement> raw_gens;
        std::vector<Int> raw_orders;  // exponent bound for each raw generator
        IntMatrix raw_relations;      // local block
    };

    OkElement lift(const Local& loc, const OkElement& g) const
    {
        const FieldTag& tag = g.tag();
        return lattice_.reduce(ok_one(tag) + loc.idempotent * (g - ok_one(tag)));
    }

    static OkElement primitive_residue(const IdealLattice& pl, const Int& m)
    {
        const auto primes = prime_divisors(m > 1 ? m : Int(2));
        for (Int idx = 1; idx < pl.norm(); ++idx) {
            OkElement c = pl.from_index(idx);
            if (pl.reduce(c).is_zero()) continue;
            bool ok = pl.pow(c, m) == pl.reduce(ok_one(c.tag()));
            if (!ok) continue;
            if (m == 1) return c;
            for (const auto& r : primes)
                if (pl.pow(c, m / r) == pl.reduce(ok_one(c.tag()))) ok = false;
            if (ok) return c;
        }
        return pl.reduce(ok_one(pl.tag()));
    }

    void build_local(Local& loc) const
    {
        const FieldTag& tag = loc.power.tag();
        const Int np = loc.prime.norm();
        const Int& ell = loc.prime.residue_char;
        loc.one_unit_order = ipow(np, static_cast<unsigned long>(loc.exponent - 1));
        const Int m = np - 1;
        loc.residue_gen = primitive_residue(loc.prime_lattice, m);

        if (loc.lattice.C() == 1 && ell != 2) {
            // Z/l^e, l odd: cyclic of order phi(l^e), generated by a primitive root mod l^e
            loc.cyclic_integer = true;
            const Int N = loc.lattice.norm();
            loc.cyc_order = (ell - 1) * loc.one_unit_order;
            Int g = loc.prime_lattice.index(loc.residue_gen);
            if (loc.exponent > 1 && powmod(g, ell - 1, ell * ell) == 1) g += ell;
            loc.cyc_gen = OkElement(tag, g, 0);
            loc.raw_gens = {loc.cyc_gen};
            loc.raw_orders = {loc.cyc_order};
            loc.raw_relations = {{loc.cyc_order}};
            (void)N;
            return;
        }

        loc.cyc_order = m;
        loc.cyc_gen = loc.lattice.pow(loc.residue_gen, loc.one_unit_order);
        const Int local_order = m * loc.one_unit_order;
        if (m > 1) {
            loc.raw_gens.push_back(loc.cyc_gen);
            loc.raw_orders.push_back(local_order);
        }
        // 1-units, generated by 1 + b for b running over Z-bases of P^i, 1 <= i < e
        const IdealLattice& L = loc.lattice;
        auto group = std::make_shared<EnumeratedGroup<OkElement>>(
            L.reduce(ok_one(tag)), [&L](const OkElement& a, const OkElement& b) { return L.mul(a, b); });
        OkElement pi_power = loc.prime.generator;
        for (int i = 1; i < loc.exponent; ++i) {
            IdealLattice Pi(pi_power);
            group->add_generator(L.reduce(ok_one(tag) + OkElement(tag, Pi.A(), 0)));
            group->add_generator(L.reduce(ok_one(tag) + OkElement(tag, Pi.B(), Pi.C())));
            pi_power = pi_power * loc.prime.generator;
        }
        if (Int(static_cast<unsigned long>(group->order())) != loc.one_unit_order)
            throw std::logic_error("1-unit enumeration has the wrong order");
        // capture by value of the lattice: rebind the multiplication to the stored lattice
        loc.one_units = group;
        const std::size_t base = loc.raw_gens.size();
        for (const auto& g : group->generators()) {
            loc.raw_gens.push_back(g);
            loc.raw_orders.push_back(local_order);
        }
        const std::size_t k = loc.raw_gens.size();
        if (m > 1) {
            std::vector<Int> r(k, Int(0));
            r[0] = m;
            loc.raw_relations.push_back(std::move(r));
        }
        for (const auto& row : group->relations()) {
            std::vector<Int> r(k, Int(0));
            for (std::size_t j = 0; j < row.size(); ++j) r[base + j] = row[j];
            loc.raw_relations.push_back(std::move(r));
        }
    }

    std::vector<Int> local_log(const Local& loc, const OkElement& x) const
    {
        const FieldTag& tag = x.tag();
        if (loc.cyclic_integer) {
            const Int N = loc.lattice.norm();
            Int xi = loc.lattice.index(x);
            Int g = loc.cyc_gen.x();
            std::function<Int(const Int&, const Int&)> mul = [&N](const Int& a, const Int& b) { return Int(a * b % N); };
            std::function<Int(const Int&, const Int&)> pw = [&N](const Int& a, const Int& e) { return powmod(a, e, N); };
            auto k = discrete_log<Int, IntHash>(g, xi, loc.cyc_order, mul, pw, Int(1));
            if (!k) throw std::logic_error("discrete log failed in cyclic unit group");
            return {*k};
        }
        std::vector<Int> out;
        const IdealLattice& pl = loc.prime_lattice;
        const IdealLattice& L = loc.lattice;
        const Int m = loc.cyc_order;
        Int k = 0;
        if (m > 1) {
            std::function<OkElement(const OkElement&, const OkElement&)> mul = [&pl](const OkElement& a, const OkElement& b) { return pl.mul(a, b); };
            std::function<OkElement(const OkElement&, const Int&)> pw = [&pl](const OkElement& a, const Int& e) { return pl.pow(a, e); };
            auto kp = discrete_log<OkElement>(loc.residue_gen, pl.reduce(x), m, mul, pw, pl.reduce(ok_one(tag)));
            if (!kp) throw std::logic_error("discrete log failed in residue field");
            k = mod_floor(*kp * invmod(mod_floor(loc.one_unit_order, m), m), m);
            out.push_back(k);
        }
        OkElement u = L.mul(x, L.pow(loc.cyc_gen, mod_floor(-k, m)));
        auto v = loc.one_units->log(u);
        if (!v) throw std::logic_error("1-unit discrete log failed");
        for (long c : *v) out.emplace_back(c);
        return out;
    }

    struct IntHash {
        std::size_t operator()(const Int& a) const noexcept { return mpz_get_ui(a.get_mpz_t()); }
    };

    IdealLattice lattice_;
    std::vector<std::shared_ptr<Local>> locals_;
    std::vector<OkElement> raw_gens_;
    std::vector<Int> raw_local_order_;
    QuotientMap map_;
    std::vector<OkElement> gens_;
};

inline AbelianGroupStructure unit_group_structure(const OkElement& h) { return UnitGroup(h).structure(); }

/*
 * Ray class group mod h: (O_K/h)^x modulo the image of mu_K.  Its order is
 * the degree [R(h):K] of the ray class field.
 */
class RayClassGroup {
public:
    explicit RayClassGroup(const OkElement& h) : units_(std::make_shared<UnitGroup>(h))
    {
        const std::size_t k = units_->invariants().size();
        IntMatrix rel;
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<Int> r(k, Int(0));
            r[i] = units_->invariants()[i];
            rel.push_back(std::move(r));
        }
        if (k > 0) rel.push_back(units_->log(unit_generator(h.tag())));
        map_ = quotient_presentation(rel, k);
        for (const auto& row : map_.from_new) {
            std::vector<Int> coords(row.begin(), row.end());
            gens_.push_back(units_->element(coords));
        }
    }

    const OkElement& modulus() const { return units_->modulus(); }
    const UnitGroup& unit_group() const { return *units_; }
    const std::vector<Int>& invariants() const { return map_.invariants; }
    const std::vector<OkElement>& generators() const { return gens_; }
    Int degree() const { return group_order(map_.invariants); }

    AbelianGroupStructure structure() const
    {
        AbelianGroupStructure s;
        s.invariants = map_.invariants;
        for (const auto& g : gens_) s.generators.push_back({modulus(), g});
        return s;
    }

    /// Ray class of the ideal (x), as coordinates w.r.t. generators().
    std::vector<Int> class_of(const OkElement& x) const { return apply_coordinates(units_->log(x), map_); }

    /// Image of a unit-group element given by its coordinates.
    std::vector<Int> class_of_unit_coords(const std::vector<Int>& u) const { return apply_coordinates(u, map_); }

    /// Size of the image of mu_K in (O_K/h)^x.
    Int unit_image_order() const { return units_->order() / degree(); }

private:
    std::shared_ptr<UnitGroup> units_;
    QuotientMap map_;
    std::vector<OkElement> gens_;
};

inline RayClassGroup ray_class_group(const OkElement& h) { return RayClassGroup(h); }

/// Artin symbol of (lambda) in the ray class group mod h.
inline std::vector<Int> artin_symbol(const RayClassGroup& G, const OkElement& lambda)
{
    if (!coprime_ideals(lambda, G.modulus())) throw precondition_error("artin_symbol: lambda not coprime to the modulus");
    if (is_unit(lambda)) throw precondition_error("artin_symbol: lambda is a root of unity");
    return G.class_of(lambda);
}

inline std::vector<Int> artin_symbol(const OkElement& h, const OkElement& lambda)
{
    return artin_symbol(RayClassGroup(h), lambda);
}

/// Order of an element given by coordinates in a group with the given invariants.
inline Int element_order(const std::vector<Int>& coords, const std::vector<Int>& invariants)
{
    Int o = 1;
    for (std::size_t i = 0; i < coords.size(); ++i) o = lcm(o, invariants[i] / gcd(mod_floor(coords[i], invariants[i]), invariants[i]));
    return o;
}

struct LcmDegreeCheck {
    bool a_ok;
    bool b_ok;
    bool lcm_ok;
    Int degree_a, degree_b, degree_lcm;
};

/// (p does not divide [R(a):K], same for b, same for lcm(a,b)).
inline LcmDegreeCheck lcm_degree_check(const OkElement& a, const OkElement& b, const Int& p)
{
    if (a.is_zero() || b.is_zero()) throw precondition_error("lcm_degree_check: zero modulus");
    LcmDegreeCheck c;
    c.degree_a = RayClassGroup(a).degree();
    c.degree_b = RayClassGroup(b).degree();
    c.degree_lcm = RayClassGroup(lcm_ok(a, b)).degree();
    c.a_ok = c.degree_a % p != 0;
    c.b_ok = c.degree_b % p != 0;
    c.lcm_ok = c.degree_lcm % p != 0;
    return c;
}

// ---------------------------------------------------------------------------
// Characters

struct CharacterSpec {
    std::vector<Int> exponents;  // chi(g_i) = exp(2 pi i * exponents[i] / invariants[i])
    Int order{1};
    Int q_order{1};  // q-primary part of the order (1 when no q was given)
    int k{0};        // exponent of the infinity-type part; 0 for finite-order characters
};

struct CharacterFilter {
    std::optional<Int> exact_order;
    std::optional<Int> q;  // fills CharacterSpec::q_order
};

inline std::vector<CharacterSpec> characters(const std::vector<Int>& invariants, const CharacterFilter& filter = {})
{
    std::vector<CharacterSpec> out;
    std::vector<Int> e(invariants.size(), Int(0));
    for (;;) {
        Int ord = element_order(e, invariants);
        if (!filter.exact_order || ord == *filter.exact_order) {
            CharacterSpec c;
            c.exponents = e;
            c.order = ord;
            if (filter.q) {
                c.q_order = 1;
                Int o = ord;
                while (o % *filter.q == 0) {
                    o /= *filter.q;
                    c.q_order *= *filter.q;
                }
            }
            out.push_back(std::move(c));
        }
        std::size_t i = 0;
        while (i < e.size()) {
            ++e[i];
            if (e[i] < invariants[i]) break;
            e[i] = 0;
            ++i;
        }
        if (i == e.size()) break;
    }
    return out;
}

inline std::vector<CharacterSpec> characters(const RayClassGroup& G, const CharacterFilter& filter = {})
{
    return characters(G.invariants(), filter);
}

// ---------------------------------------------------------------------------
// Anticyclotomic tower

struct TowerLevel {
    int n{0};
    std::vector<Int> invariants;  // of the minus quotient
    Int order{1};
    Int layer_degree{1};  // [F_n : F] = q^n
    bool cyclic{true};
};

struct AnticyclotomicTower {
    FieldTag tag;
    Int q;
    std::vector<TowerLevel> levels;
};

/// q-primary part of G / {x * c(x)} where c is complex conjugation (modulus must be conjugation-stable).
inline std::vector<Int> minus_quotient(const RayClassGroup& G, const Int& q)
{
    const OkElement& h = G.modulus();
    if (!are_associates(h, h.conj())) throw precondition_error("minus_quotient: modulus is not conjugation-stable");
    const auto& inv = G.invariants();
    const std::size_t k = inv.size();
    IntMatrix rel;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<Int> r(k, Int(0));
        r[i] = inv[i];
        rel.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < k; ++i) {
        auto c = G.class_of(G.generators()[i].conj());
        c[i] += 1;
        rel.push_back(std::move(c));
    }
    auto quotient = quotient_presentation(rel, k).invariants;
    std::vector<Int> qparts;
    for (const auto& d : quotient) {
        Int part = 1, rest = d;
        while (rest % q == 0) {
            rest /= q;
            part *= q;
        }
        if (part > 1) qparts.push_back(part);
    }
    return invariant_factors(qparts);
}

inline AnticyclotomicTower anticyclotomic_tower(FieldTag tag, const Int& q, int depth, int max_depth = 4)
{
    if (!is_prime(q) || q < 5) throw precondition_error("anticyclotomic_tower: q must be a prime >= 5");
    if (split_type(tag, q) != SplitKind::split) throw precondition_error("anticyclotomic_tower: q does not split in K");
    if (depth < 0 || depth > max_depth)
        throw precondition_error("anticyclotomic_tower: depth " + std::to_string(depth) + " outside [0, " + std::to_string(max_depth) + "]");
    AnticyclotomicTower t{tag, q, {}};
    for (int n = 0; n <= depth; ++n) {
        RayClassGroup G(OkElement(tag, ipow(q, static_cast<unsigned long>(n + 1)), 0));
        TowerLevel lvl;
        lvl.n = n;
        lvl.invariants = minus_quotient(G, q);
        lvl.order = group_order(lvl.invariants);
        lvl.layer_degree = ipow(q, static_cast<unsigned long>(n));
        lvl.cyclic = lvl.invariants.size() <= 1;
        t.levels.push_back(std::move(lvl));
    }
    return t;
}

}  // namespace itl
