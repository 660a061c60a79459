#pragma once

/*
 * Auxiliary CM curve data: the twist-prime search Q = 4r + sqrt(-d) with
 * 16r^2 + d prime, the conductor degrees [R(f):K], the condition that every
 * prime divisor of the degree is 2, 3 or non-split in K, and the nine-row
 * table of bad primes and degrees.
 */

#include <optional>
#include <string>
#include <vector>

#include "itl/okring.hpp"
#include "itl/rayclass.hpp"

namespace itl {

struct ConditionC {
    bool satisfied{true};
    std::vector<Int> offending;  // split primes dividing the degree
};

/// True iff every prime divisor of `degree` is 2, 3, or non-split in K.
inline ConditionC condition_c_check(const Int& degree, FieldTag tag)
{
    if (degree < 1) throw precondition_error("condition_c_check: degree must be >= 1");
    ConditionC c;
    if (degree == 1) return c;
    for (const auto& r : prime_divisors(degree)) {
        if (r == 2 || r == 3) continue;
        if (split_type(tag, r) == SplitKind::split) c.offending.push_back(r);
    }
    c.satisfied = c.offending.empty();
    return c;
}

struct TwistCandidate {
    FieldTag tag;
    Int r;
    OkPrime Q;          // (4r + sqrt(-d))
    OkElement alpha;    // -d + 4r sqrt(-d) = sqrt(-d) * (4r + sqrt(-d))
    OkElement conductor;
    Int degree;
    bool congruence_ok{false};  // Q = sqrt(-d) mod 4 O_K
    ConditionC condition_c;
};

inline TwistCandidate make_twist_candidate(FieldTag tag, const Int& r)
{
    const Int d = tag.d();
    TwistCandidate c;
    c.tag = tag;
    c.r = r;
    OkElement Q = OkElement::from_sqrt_coords(tag, 4 * r, 1);
    OkElement root = OkElement::from_sqrt_coords(tag, 0, 1);
    c.Q = OkPrime{Q, Q.norm(), SplitKind::split, 1};
    c.alpha = OkElement::from_sqrt_coords(tag, -d, 4 * r);
    if (!(c.alpha == root * Q)) throw std::logic_error("alpha != P*Q");
    // Q - sqrt(-d) in 4 O_K
    OkElement diff = Q - root;
    c.congruence_ok = diff.x() % 4 == 0 && diff.y() % 4 == 0;
    c.conductor = Q;
    c.degree = RayClassGroup(Q).degree();
    c.condition_c = condition_c_check(c.degree, tag);
    return c;
}

/// All r in [1, r_bound] with 16 r^2 + d an odd rational prime.
inline std::vector<TwistCandidate> find_twist_candidates(FieldTag tag, long r_bound)
{
    if (tag.d() <= 3) throw precondition_error("find_twist_candidates: d <= 3 rows are fixed data, not searched");
    std::vector<TwistCandidate> out;
    for (long r = 1; r <= r_bound; ++r) {
        Int n = 16 * Int(r) * r + tag.d();
        if (n % 2 == 0 || !is_prime(n)) continue;
        out.push_back(make_twist_candidate(tag, Int(r)));
    }
    return out;
}

enum class RowSource { fixed, searched };

inline const char* to_string(RowSource s) { return s == RowSource::fixed ? "fixed" : "searched"; }

struct TableRow {
    int d{1};
    std::vector<OkElement> bad_primes;
    Int norm;        // norm of the conductor (product of bad primes)
    Int degree;
    ConditionC condition_c;
    RowSource source{RowSource::fixed};
    std::string flag;  // empty unless the row carries a documented discrepancy
    std::optional<Int> printed_degree;  // degree from the literally printed prime, when it differs
};

namespace detail {

inline TableRow fixed_row(int d, std::vector<OkElement> primes)
{
    FieldTag tag(d);
    TableRow row;
    row.d = d;
    row.bad_primes = std::move(primes);
    OkElement f = ok_one(tag);
    for (const auto& p : row.bad_primes) f = f * p;
    row.norm = f.norm();
    row.degree = RayClassGroup(f).degree();
    row.condition_c = condition_c_check(row.degree, tag);
    row.source = RowSource::fixed;
    return row;
}

}  // namespace detail

/// The nine rows of auxiliary-curve data, ascending in d.
inline std::vector<TableRow> table2()
{
    std::vector<TableRow> rows;
    auto S = [](int d, long a, long b, long den = 1) { return OkElement::from_sqrt_coords(FieldTag(d), a, b, den); };
    rows.push_back(detail::fixed_row(1, {S(1, 2, 1)}));
    rows.push_back(detail::fixed_row(2, {S(2, 1, -1)}));
    rows.push_back(detail::fixed_row(3, {S(3, 2, 1), S(3, 2, -1)}));
    rows.push_back(detail::fixed_row(7, {S(7, 6, -1)}));
    rows.push_back(detail::fixed_row(11, {S(11, -1, -1, 2)}));
    {
        // printed prime (-1+sqrt(-19))/2 has norm 5; the curve's conductor has norm 49
        TableRow row = detail::fixed_row(19, {S(19, -3, 1, 2)});
        OkElement printed = S(19, -1, 1, 2);
        row.printed_degree = RayClassGroup(printed).degree();
        row.flag = "printed bad prime " + to_text(printed) + " has norm " + printed.norm().get_str() + " and degree " +
                   row.printed_degree->get_str() + "; norm-7 prime " + to_text(row.bad_primes[0]) + " gives degree " +
                   row.degree.get_str();
        rows.push_back(std::move(row));
    }
    for (int d : {43, 67, 163}) {
        auto cands = find_twist_candidates(FieldTag(d), 1);
        if (cands.empty()) throw std::logic_error("no r = 1 twist candidate for d=" + std::to_string(d));
        const auto& c = cands.front();
        TableRow row;
        row.d = d;
        row.bad_primes = {c.Q.generator};
        row.norm = c.Q.residue_char;
        row.degree = c.degree;
        row.condition_c = c.condition_c;
        row.source = RowSource::searched;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// p | Nv + 1 - a_v; requires the Hasse bound |a_v| <= 2 sqrt(Nv).
inline bool is_anomalous(const Int& Nv, const Int& a_v, const Int& p)
{
    if (Nv < 1) throw precondition_error("is_anomalous: Nv must be positive");
    if (a_v * a_v > 4 * Nv) throw precondition_error("is_anomalous: a_v violates the Hasse bound");
    return mod_floor(Nv + 1 - a_v, p) == 0;
}

}  // namespace itl
