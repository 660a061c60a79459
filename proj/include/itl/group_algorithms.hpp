#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "itl/errors.hpp"
#include "itl/integer.hpp"
#include "itl/smith.hpp"

namespace itl {

/*
 * Finite abelian group generated by explicit elements, enumerated in full.
 * Each element of the subgroup is stored with one exponent vector over the
 * effective generators; `relations` is a full-rank triangular basis of the
 * relation lattice.  Only suitable for groups of desk size (<= a few 1e6).
 */
template <class E, class Hash = std::hash<E>, class Eq = std::equal_to<E>>
class EnumeratedGroup {
public:
    using Mul = std::function<E(const E&, const E&)>;

    EnumeratedGroup(E one, Mul mul) : one_(std::move(one)), mul_(std::move(mul))
    {
        table_.emplace(one_, std::vector<long>{});
    }

    /// Adds g to the generating set; no-op if g is already in the subgroup.
    bool add_generator(const E& g)
    {
        if (table_.count(g)) return false;
        long m = 1;
        E cur = g;
        while (!table_.count(cur)) {
            cur = mul_(cur, g);
            ++m;
        }
        const std::size_t k = gens_.size();
        std::vector<Int> rel(k + 1, Int(0));
        const auto& back = table_.at(cur);
        for (std::size_t j = 0; j < back.size(); ++j) rel[j] = -back[j];
        rel[k] = m;
        for (auto& r : relations_) r.push_back(Int(0));
        relations_.push_back(std::move(rel));
        gens_.push_back(g);

        const std::vector<std::pair<E, std::vector<long>>> base(table_.begin(), table_.end());
        E power = g;
        for (long i = 1; i < m; ++i) {
            for (const auto& [e, v] : base) {
                auto w = v;
                w.resize(k + 1, 0);
                w[k] = i;
                table_.emplace(mul_(power, e), std::move(w));
            }
            power = mul_(power, g);
        }
        return true;
    }

    std::size_t order() const { return table_.size(); }
    const std::vector<E>& generators() const { return gens_; }
    const IntMatrix& relations() const { return relations_; }

    /// Exponent vector of e over generators(), if e lies in the subgroup.
    std::optional<std::vector<long>> log(const E& e) const
    {
        auto it = table_.find(e);
        if (it == table_.end()) return std::nullopt;
        auto v = it->second;
        v.resize(gens_.size(), 0);
        return v;
    }

    template <class F>
    void for_each(F&& f) const
    {
        for (const auto& [e, v] : table_) f(e);
    }

private:
    E one_;
    Mul mul_;
    std::vector<E> gens_;
    IntMatrix relations_;
    std::unordered_map<E, std::vector<long>, Hash, Eq> table_;
};

/*
 * Discrete logarithm in a cyclic group of known order (Pohlig-Hellman with
 * baby-step giant-step in each prime-order layer).  Returns x in [0, order)
 * with base^x = target, or nullopt when target is outside <base>.
 */
template <class E, class Hash = std::hash<E>>
std::optional<Int> discrete_log(const E& base, const E& target, const Int& order,
                                const std::function<E(const E&, const E&)>& mul,
                                const std::function<E(const E&, const Int&)>& pow, const E& one)
{
    if (order == 1) return (target == one) ? std::optional<Int>(Int(0)) : std::nullopt;

    auto bsgs = [&](const E& g, const E& h, const Int& r) -> std::optional<Int> {
        // g has order r
        Int m = isqrt(r) + 1;
        std::unordered_map<E, Int, Hash> baby;
        E cur = one;
        for (Int j = 0; j < m; ++j) {
            baby.emplace(cur, j);
            cur = mul(cur, g);
        }
        E giant = pow(g, r - m);  // g^{-m}
        E gamma = h;
        for (Int i = 0; i < m; ++i) {
            auto it = baby.find(gamma);
            if (it != baby.end()) return mod_floor(i * m + it->second, r);
            gamma = mul(gamma, giant);
        }
        return std::nullopt;
    };

    Int x = 0, modulus = 1;
    for (const auto& [r, f] : factor_integer(order)) {
        Int rf = ipow(r, f);
        E g = pow(base, order / rf);
        E h = pow(target, order / rf);
        E gamma = pow(g, rf / r);  // order r
        Int xr = 0;
        for (int k = 0; k < f; ++k) {
            E hk = mul(pow(g, mod_floor(-xr, rf)), h);
            hk = pow(hk, ipow(r, f - 1 - k));
            auto d = bsgs(gamma, hk, r);
            if (!d) return std::nullopt;
            xr += *d * ipow(r, k);
        }
        // CRT merge x mod modulus with xr mod rf
        Int s, t;
        ext_gcd(modulus, rf, s, t);
        x = mod_floor(x + (xr - x) * s * modulus, modulus * rf);
        modulus *= rf;
    }
    if (!(pow(base, x) == target)) return std::nullopt;
    return x;
}

}  // namespace itl
