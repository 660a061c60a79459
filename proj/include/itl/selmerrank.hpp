#pragma once

/*
 * Rank bookkeeping for fine Selmer groups in Z_q-towers.
 *
 * Sel0 never gets computed here.  It enters through Hom(Cl_S, A[p]) (mod p
 * level) or as an externally supplied model (Q_p/Z_p)^s + T.  Everything
 * else is p-rank arithmetic, prime decomposition in the cyclotomic tower,
 * and exact fitting of e_n = mu q^n + lambda n + nu.
 */

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "itl/csv.hpp"
#include "itl/errors.hpp"
#include "itl/integer.hpp"

namespace itl {

// ---------------------------------------------------------------- rank calculus

/// r_p(Sel0(A[p]/F)) = r_p(Hom(Cl_S, (Z/p)^{2d})) when A[p] is rational.
inline long long fine_selmer_mod_p_rank(long long r_cls, long long d)
{
    if (r_cls < 0 || d < 1) throw precondition_error("fine_selmer_mod_p_rank: need r >= 0, d >= 1");
    return 2 * d * r_cls;
}

/// For 0 -> P -> Q -> R -> S -> 0 exact: |r_p(Q) - r_p(R)| <= 2 r_p(P) + r_p(S).
inline long long rank_gap_bound(long long r_P, long long r_S)
{
    if (r_P < 0 || r_S < 0) throw precondition_error("rank_gap_bound: ranks must be nonnegative");
    return 2 * r_P + r_S;
}

/*
 * |r_p(Sel0(A[p]/F_n)) - r_p(Sel0(A/F_n))|: the kernel has rank <= 2d and the
 * cokernel is bounded by ker(gamma_n), of rank <= 2d |S_f|.
 */
inline long long control_gap_bound(long long d, long long s_f)
{
    if (d < 1 || s_f < 0) throw precondition_error("control_gap_bound: need d >= 1, s_f >= 0");
    return rank_gap_bound(2 * d, 2 * d * s_f);
}

// ---------------------------------------------------------------- CofinPGroup

/// (Q_p/Z_p)^corank + T with T given by its p-power cyclic orders, sorted ascending.
class CofinPGroup {
public:
    CofinPGroup(long long p, long long corank, std::vector<Int> torsion) : p_(p), s_(corank), T_(std::move(torsion))
    {
        if (p < 2 || !is_prime(from_ll(p))) throw precondition_error("CofinPGroup: p must be prime");
        if (corank < 0) throw precondition_error("CofinPGroup: negative corank");
        for (const auto& t : T_)
            if (t < from_ll(p) || !is_p_power(t)) throw precondition_error("CofinPGroup: torsion orders must be powers p^k, k >= 1");
        std::sort(T_.begin(), T_.end());
    }

    long long p() const { return p_; }
    long long corank() const { return s_; }
    const std::vector<Int>& torsion() const { return T_; }

    long long p_rank() const { return s_ + static_cast<long long>(T_.size()); }
    Int torsion_order() const
    {
        Int n = 1;
        for (const auto& t : T_) n *= t;
        return n;
    }

    friend bool operator==(const CofinPGroup& a, const CofinPGroup& b) { return a.p_ == b.p_ && a.s_ == b.s_ && a.T_ == b.T_; }
    friend bool operator!=(const CofinPGroup& a, const CofinPGroup& b) { return !(a == b); }

    std::string to_string() const
    {
        std::string out = "s=" + std::to_string(s_) + " T=[";
        for (std::size_t i = 0; i < T_.size(); ++i) out += (i ? "," : "") + T_[i].get_str();
        return out + "]";
    }

private:
    bool is_p_power(Int t) const
    {
        const Int P = from_ll(p_);
        while (t % P == 0) t /= P;
        return t == 1;
    }

    long long p_;
    long long s_;
    std::vector<Int> T_;
};

/// Whether a admits a split injection into b: s_a <= s_b and T_a a sub-multiset of T_b.
inline bool split_injects(const CofinPGroup& a, const CofinPGroup& b)
{
    if (a.p() != b.p() || a.corank() > b.corank()) return false;
    return std::includes(b.torsion().begin(), b.torsion().end(), a.torsion().begin(), a.torsion().end());
}

/*
 * Smallest index N' such that entries N', N'+1, ... are all isomorphic,
 * provided that tail has at least two entries.  Consecutive entries must be
 * linked by split injections.
 */
inline std::optional<std::size_t> stabilization_detect(const std::vector<CofinPGroup>& series)
{
    for (std::size_t i = 0; i + 1 < series.size(); ++i)
        if (!split_injects(series[i], series[i + 1]))
            throw precondition_error("stabilization_detect: entry " + std::to_string(i) + " does not split-inject into entry " +
                                     std::to_string(i + 1));
    if (series.size() < 2) return std::nullopt;
    std::size_t start = series.size() - 1;
    while (start > 0 && series[start - 1] == series.back()) --start;
    if (series.size() - start < 2) return std::nullopt;
    return start;
}

// ---------------------------------------------------------------- cyclotomic Z_q tower

/// Number of primes above l in the layers Q_0, ..., Q_{n_max} of the cyclotomic Z_q-extension of Q.
inline std::vector<Int> decomposition_counts(long long ell, long long q, int n_max)
{
    if (ell < 2 || !is_prime(from_ll(ell))) throw precondition_error("decomposition_counts: l must be prime");
    if (q < 3 || !is_prime(from_ll(q))) throw precondition_error("decomposition_counts: q must be an odd prime");
    if (n_max < 0 || n_max > 40) throw precondition_error("decomposition_counts: n_max must lie in [0, 40]");
    std::vector<Int> out;
    const Int Q = from_ll(q);
    for (int n = 0; n <= n_max; ++n) {
        if (ell == q) {
            out.push_back(1);  // totally ramified
            continue;
        }
        // Gal(Q_n/Q) = (Z/q^{n+1})^x / mu_{q-1}; the Frobenius has order the q-part of ord(l)
        const Int ord = multiplicative_order(from_ll(ell), ipow(Q, n + 1));
        Int qpart = 1;
        for (Int o = ord; o % Q == 0; o /= Q) qpart *= Q;
        out.push_back(ipow(Q, n) / qpart);
    }
    return out;
}

// ---------------------------------------------------------------- Iwasawa fit

struct IwasawaFit {
    Int mu, lambda, nu;
    std::size_t n0{0};
    friend bool operator==(const IwasawaFit& a, const IwasawaFit& b)
    {
        return a.mu == b.mu && a.lambda == b.lambda && a.nu == b.nu && a.n0 == b.n0;
    }
};

/*
 * Smallest n0 such that e_n = mu q^n + lambda n + nu holds exactly for all
 * n >= n0 with integers mu, lambda >= 0, over a tail of length >= 3.
 * Three consecutive values determine the triple:
 *   e_{n+2} - 2e_{n+1} + e_n = mu q^n (q-1)^2.
 */
inline std::optional<IwasawaFit> fit_iwasawa(const std::vector<Int>& e, long long q)
{
    if (e.size() < 4) throw precondition_error("fit_iwasawa: need at least 4 values");
    if (q < 2 || !is_prime(from_ll(q))) throw precondition_error("fit_iwasawa: q must be prime");
    const Int Q = from_ll(q);
    auto value = [&](const IwasawaFit& f, std::size_t n) -> Int { return f.mu * ipow(Q, n) + f.lambda * Int(static_cast<unsigned long>(n)) + f.nu; };
    for (std::size_t n0 = 0; n0 + 3 <= e.size(); ++n0) {
        const Int qn = ipow(Q, n0);
        const Int second = e[n0 + 2] - 2 * e[n0 + 1] + e[n0];
        const Int scale = qn * (Q - 1) * (Q - 1);
        if (second % scale != 0) continue;
        IwasawaFit f;
        f.n0 = n0;
        f.mu = second / scale;
        f.lambda = e[n0 + 1] - e[n0] - f.mu * qn * (Q - 1);
        f.nu = e[n0] - f.mu * qn - f.lambda * Int(static_cast<unsigned long>(n0));
        if (f.mu < 0 || f.lambda < 0) continue;
        bool ok = true;
        for (std::size_t n = n0; n < e.size() && ok; ++n) ok = value(f, n) == e[n];
        if (ok) return f;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- tower data

struct SeriesLevel {
    long long n{0};
    long long s_f{0};    // |S_f(F_n)|
    long long r_cl{0};   // r_p(Cl(F_n))
    long long r_cls{0};  // r_p(Cl_S(F_n))
    std::optional<long long> e_n;          // ord_p h(F_n)
    std::optional<CofinPGroup> sel0;       // model of Sel0(A/F_n)
};

struct TowerSeries {
    std::string label;
    long long q{0}, d{1}, p{0};
    std::vector<SeriesLevel> levels;
};

/// A tower file failed to load.  kind() separates the failure classes.
class tower_error : public schema_error {
public:
    enum class Kind { io, syntax, schema, level_order, s_f_decreasing, inconsistent_ranks };

    tower_error(Kind k, const std::string& what) : schema_error(what), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

inline const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw tower_error(tower_error::Kind::schema, where + ": missing field \"" + key + "\"");
    return *it;
}

inline long long integer(const nlohmann::json& v, const std::string& where, long long lo)
{
    if (!v.is_number_integer()) throw tower_error(tower_error::Kind::schema, where + ": expected an integer");
    if (v.is_number_unsigned() && v.get<unsigned long long>() > 9000000000000000000ULL)
        throw tower_error(tower_error::Kind::schema, where + ": integer out of range");
    const long long x = v.get<long long>();
    if (x < lo) throw tower_error(tower_error::Kind::schema, where + ": must be >= " + std::to_string(lo));
    return x;
}

inline void only_keys(const nlohmann::json& obj, std::initializer_list<const char*> keys, const std::string& where)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw tower_error(tower_error::Kind::schema, where + ": unknown field \"" + it.key() + "\"");
    }
}

inline bool odd_prime(long long x) { return x > 2 && is_prime(from_ll(x)); }

}  // namespace detail

/// Validates and converts a parsed tower document.
inline TowerSeries tower_from_json(const nlohmann::json& j)
{
    using detail::integer;
    using detail::member;
    using K = tower_error::Kind;
    if (!j.is_object()) throw tower_error(K::schema, "tower: top level must be an object");
    detail::only_keys(j, {"label", "q", "d", "p", "levels"}, "tower");
    TowerSeries t;
    const auto& label = member(j, "label", "tower");
    if (!label.is_string()) throw tower_error(K::schema, "tower.label: expected a string");
    t.label = label.get<std::string>();
    t.q = integer(member(j, "q", "tower"), "tower.q", 2);
    t.d = integer(member(j, "d", "tower"), "tower.d", 1);
    t.p = integer(member(j, "p", "tower"), "tower.p", 2);
    if (!is_prime(from_ll(t.q))) throw tower_error(K::schema, "tower.q: must be prime");
    if (!detail::odd_prime(t.p)) throw tower_error(K::schema, "tower.p: must be an odd prime");
    if (t.p == t.q) throw tower_error(K::schema, "tower: p and q must differ");
    const auto& levels = member(j, "levels", "tower");
    if (!levels.is_array() || levels.empty()) throw tower_error(K::schema, "tower.levels: expected a nonempty array");

    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& L = levels[i];
        const std::string where = "levels[" + std::to_string(i) + "]";
        if (!L.is_object()) throw tower_error(K::schema, where + ": expected an object");
        detail::only_keys(L, {"n", "s_f", "r_cl", "r_cls", "e_n", "sel0"}, where);
        SeriesLevel lv;
        lv.n = integer(member(L, "n", where), where + ".n", 0);
        lv.s_f = integer(member(L, "s_f", where), where + ".s_f", 0);
        lv.r_cl = integer(member(L, "r_cl", where), where + ".r_cl", 0);
        lv.r_cls = integer(member(L, "r_cls", where), where + ".r_cls", 0);
        if (auto it = L.find("e_n"); it != L.end()) lv.e_n = integer(*it, where + ".e_n", 0);
        if (auto it = L.find("sel0"); it != L.end()) {
            const auto& S = *it;
            if (!S.is_object()) throw tower_error(K::schema, where + ".sel0: expected an object");
            detail::only_keys(S, {"s", "T"}, where + ".sel0");
            const long long s = integer(member(S, "s", where + ".sel0"), where + ".sel0.s", 0);
            const auto& T = member(S, "T", where + ".sel0");
            if (!T.is_array()) throw tower_error(K::schema, where + ".sel0.T: expected an array");
            std::vector<Int> orders;
            for (std::size_t k = 0; k < T.size(); ++k) orders.push_back(from_ll(integer(T[k], where + ".sel0.T[" + std::to_string(k) + "]", 2)));
            try {
                lv.sel0 = CofinPGroup(t.p, s, orders);
            } catch (const precondition_error&) {
                throw tower_error(K::schema, where + ".sel0.T: orders must be powers of p = " + std::to_string(t.p));
            }
        }

        const std::string at = "level n=" + std::to_string(lv.n);
        if (!t.levels.empty() && lv.n <= t.levels.back().n)
            throw tower_error(K::level_order, at + ": levels must be strictly increasing (previous n=" + std::to_string(t.levels.back().n) + ")");
        if (!t.levels.empty() && lv.s_f < t.levels.back().s_f)
            throw tower_error(K::s_f_decreasing, at + ": |S_f| decreases from " + std::to_string(t.levels.back().s_f) + " to " +
                                                     std::to_string(lv.s_f));
        // Cl_S is a quotient of Cl by a subgroup generated by s_f classes
        if (lv.r_cls > lv.r_cl || lv.r_cl > lv.r_cls + lv.s_f)
            throw tower_error(K::inconsistent_ranks, at + ": need r_cls <= r_cl <= r_cls + s_f, got r_cl=" + std::to_string(lv.r_cl) +
                                                         " r_cls=" + std::to_string(lv.r_cls) + " s_f=" + std::to_string(lv.s_f));
        t.levels.push_back(std::move(lv));
    }
    return t;
}

inline TowerSeries parse_tower(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw tower_error(tower_error::Kind::syntax, std::string("tower: malformed JSON: ") + e.what());
    }
    return tower_from_json(j);
}

inline TowerSeries ingest_tower(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tower_error(tower_error::Kind::io, "cannot read tower file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_tower(ss.str());
}

inline nlohmann::ordered_json to_json(const TowerSeries& t)
{
    nlohmann::ordered_json j;
    j["label"] = t.label;
    j["q"] = t.q;
    j["d"] = t.d;
    j["p"] = t.p;
    j["levels"] = nlohmann::ordered_json::array();
    for (const auto& lv : t.levels) {
        nlohmann::ordered_json L;
        L["n"] = lv.n;
        L["s_f"] = lv.s_f;
        L["r_cl"] = lv.r_cl;
        L["r_cls"] = lv.r_cls;
        if (lv.e_n) L["e_n"] = *lv.e_n;
        if (lv.sel0) {
            nlohmann::ordered_json T = nlohmann::ordered_json::array();
            for (const auto& o : lv.sel0->torsion()) T.push_back(to_ll(o));
            L["sel0"] = {{"s", lv.sel0->corank()}, {"T", T}};
        }
        j["levels"].push_back(std::move(L));
    }
    return j;
}

// ---------------------------------------------------------------- reports

struct RankGapReport {
    long long n{0};
    long long bound{0};
    long long observed{0};
    bool satisfied{true};
    std::string source;  // "sel0" when a Sel0 model is present, else "mod_p"
};

/*
 * Gap |r_p(Sel0) - 2d r_p(Cl)| at one level.  With a Sel0 model the bound is
 * control_gap_bound + 2d rank_gap_bound(s_f, 0); at the mod p level only the
 * Cl -> Cl_S step remains.  Constants are this tool's choice; the theorem
 * only asserts boundedness.
 */
inline RankGapReport rank_gap(const TowerSeries& t, const SeriesLevel& lv)
{
    RankGapReport r;
    r.n = lv.n;
    const long long cl_term = 2 * t.d * lv.r_cl;
    const long long cls_step = 2 * t.d * rank_gap_bound(lv.s_f, 0);
    if (lv.sel0) {
        r.source = "sel0";
        r.bound = control_gap_bound(t.d, lv.s_f) + cls_step;
        r.observed = std::llabs(lv.sel0->p_rank() - cl_term);
    } else {
        r.source = "mod_p";
        r.bound = cls_step;
        r.observed = std::llabs(fine_selmer_mod_p_rank(lv.r_cls, t.d) - cl_term);
    }
    r.satisfied = r.observed <= r.bound;
    return r;
}

struct TowerReport {
    std::vector<RankGapReport> gaps;
    bool has_sel0{false};                  // every level carries a Sel0 model
    std::optional<long long> stable_from;  // level n from which Sel0 is constant
    std::optional<long long> e_stable_from;
    std::optional<IwasawaFit> fit;         // of e_n, when all levels carry it
};

inline TowerReport analyze_tower(const TowerSeries& t)
{
    TowerReport rep;
    for (const auto& lv : t.levels) rep.gaps.push_back(rank_gap(t, lv));

    rep.has_sel0 = std::all_of(t.levels.begin(), t.levels.end(), [](const SeriesLevel& l) { return l.sel0.has_value(); });
    if (rep.has_sel0) {
        std::vector<CofinPGroup> s;
        for (const auto& lv : t.levels) s.push_back(*lv.sel0);
        if (auto i = stabilization_detect(s)) rep.stable_from = t.levels[*i].n;
    }

    const bool has_e = std::all_of(t.levels.begin(), t.levels.end(), [](const SeriesLevel& l) { return l.e_n.has_value(); });
    if (has_e) {
        std::size_t i = t.levels.size() - 1;
        while (i > 0 && *t.levels[i - 1].e_n == *t.levels.back().e_n) --i;
        if (t.levels.size() - i >= 2) rep.e_stable_from = t.levels[i].n;
        // the fit needs consecutive levels 0, 1, 2, ...
        bool consecutive = true;
        for (std::size_t k = 0; k < t.levels.size(); ++k) consecutive = consecutive && t.levels[k].n == static_cast<long long>(k);
        if (consecutive && t.levels.size() >= 4) {
            std::vector<Int> e;
            for (const auto& lv : t.levels) e.push_back(from_ll(*lv.e_n));
            rep.fit = fit_iwasawa(e, t.q);
        }
    }
    return rep;
}

/// One record per level: bounds, observed gaps, stabilization verdict.
inline nlohmann::ordered_json report_records(const TowerSeries& t, const TowerReport& rep)
{
    using J = nlohmann::ordered_json;
    auto opt = [](const std::optional<long long>& x) { return x ? J(*x) : J(); };
    J out = J::array();
    for (std::size_t i = 0; i < t.levels.size(); ++i) {
        const auto& lv = t.levels[i];
        const auto& g = rep.gaps[i];
        std::string verdict;
        if (!rep.has_sel0)
            verdict = "no_sel0_data";
        else if (!rep.stable_from)
            verdict = "not_stable";
        else
            verdict = lv.n >= *rep.stable_from ? "stable" : "before";
        J r;
        r["label"] = t.label;
        r["p"] = t.p;
        r["q"] = t.q;
        r["d"] = t.d;
        r["n"] = lv.n;
        r["s_f"] = lv.s_f;
        r["r_cl"] = lv.r_cl;
        r["r_cls"] = lv.r_cls;
        r["e_n"] = opt(lv.e_n);
        r["sel0"] = lv.sel0 ? J(lv.sel0->to_string()) : J();
        r["sel0_rank"] = lv.sel0 ? J(lv.sel0->p_rank()) : J();
        r["selp_rank"] = fine_selmer_mod_p_rank(lv.r_cls, t.d);
        r["gap_source"] = g.source;
        r["bound"] = g.bound;
        r["bound_basis"] = "chosen_constants";
        r["observed"] = g.observed;
        r["satisfied"] = g.satisfied;
        r["stable_from"] = opt(rep.stable_from);
        r["verdict"] = verdict;
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_report_csv(std::ostream& os, const TowerSeries& t, const TowerReport& rep) { csv::write_records(os, report_records(t, rep)); }

}  // namespace itl
