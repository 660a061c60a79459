#pragma once

// Brute-force oracles for tests.  Plain 64-bit arithmetic, written
// independently of the library's residue and group code paths.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using i64 = std::int64_t;

struct Ring {
    i64 t, n;  // w^2 = t w - n
    int w;     // number of roots of unity
    explicit Ring(int d)
    {
        bool half = d % 4 == 3;
        t = half ? 1 : 0;
        n = half ? (1 + d) / 4 : d;
        w = d == 1 ? 4 : d == 3 ? 6 : 2;
    }
    std::pair<i64, i64> mul(std::pair<i64, i64> a, std::pair<i64, i64> b) const
    {
        i64 yy = a.second * b.second;
        return {a.first * b.first - n * yy, a.first * b.second + a.second * b.first + t * yy};
    }
    i64 norm(std::pair<i64, i64> a) const { return a.first * a.first + t * a.first * a.second + n * a.second * a.second; }
    std::pair<i64, i64> conj(std::pair<i64, i64> a) const { return {a.first + t * a.second, -a.second}; }
    std::vector<std::pair<i64, i64>> units() const
    {
        std::vector<std::pair<i64, i64>> out;
        std::pair<i64, i64> g = w == 2 ? std::pair<i64, i64>{-1, 0} : std::pair<i64, i64>{0, 1}, u{1, 0};
        for (int i = 0; i < w; ++i) {
            out.push_back(u);
            u = mul(u, g);
        }
        return out;
    }
};

inline i64 fmod_pos(i64 a, i64 m) { return ((a % m) + m) % m; }

/// Residues modulo the principal ideal (h): box [0,A) x [0,C).
struct Residues {
    Ring R;
    i64 A, B, C;
    Residues(const Ring& ring, std::pair<i64, i64> h) : R(ring)
    {
        // lattice spanned by h and h*w; find C = gcd of second coords by Euclid on vectors
        std::pair<i64, i64> u = h, v = R.mul(h, {0, 1});
        while (v.second != 0) {
            i64 q = u.second / v.second;
            u = {u.first - q * v.first, u.second - q * v.second};
            std::swap(u, v);
        }
        if (u.second < 0) u = {-u.first, -u.second};
        C = u.second;
        // v is now horizontal
        A = std::llabs(v.first);
        B = fmod_pos(u.first, A);
    }
    i64 size() const { return A * C; }
    std::pair<i64, i64> reduce(std::pair<i64, i64> e) const
    {
        i64 y = fmod_pos(e.second, C);
        i64 k = (e.second - y) / C;
        return {fmod_pos(e.first - k * B, A), y};
    }
    i64 index(std::pair<i64, i64> e) const
    {
        auto r = reduce(e);
        return r.second * A + r.first;
    }
    std::pair<i64, i64> at(i64 idx) const { return {idx % A, idx / A}; }
    std::pair<i64, i64> mul(std::pair<i64, i64> a, std::pair<i64, i64> b) const { return reduce(R.mul(a, b)); }
};

/// Indices of invertible residues, found by searching for an inverse.
inline std::vector<i64> invertible(const Residues& res)
{
    const i64 N = res.size();
    const i64 one = res.index({1, 0});
    std::vector<i64> out;
    for (i64 i = 0; i < N; ++i) {
        auto x = res.at(i);
        for (i64 j = 0; j < N; ++j)
            if (res.index(res.R.mul(x, res.at(j))) == one) {
                out.push_back(i);
                break;
            }
    }
    return out;
}

/// Distinct images of the roots of unity.
inline std::set<i64> unit_image(const Residues& res)
{
    std::set<i64> s;
    for (auto u : res.R.units()) s.insert(res.index(u));
    return s;
}

inline std::vector<i64> prime_factors(i64 n)
{
    std::vector<i64> out;
    for (i64 p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

/*
 * Invariant factors of a finite abelian group from element orders:
 * for each prime r, #{x : x^(r^j) = 1} = prod_i r^min(a_i, j).
 */
inline std::vector<i64> invariants_from_orders(const std::vector<i64>& orders)
{
    i64 size = static_cast<i64>(orders.size());
    std::map<i64, std::vector<int>> sylow;  // r -> exponents a_i
    for (i64 r : prime_factors(size)) {
        std::vector<i64> counts{1};
        for (i64 rj = r;; rj *= r) {
            i64 c = 0;
            for (i64 o : orders)
                if (rj % o == 0) ++c;
            counts.push_back(c);
            if (c == counts[counts.size() - 2]) break;
        }
        // n_j = number of cyclic factors with exponent >= j = log_r(c_j / c_{j-1})
        std::vector<int> exps;
        std::vector<int> nj;
        for (std::size_t j = 1; j < counts.size(); ++j) {
            i64 ratio = counts[j] / counts[j - 1];
            int k = 0;
            while (ratio > 1) {
                ratio /= r;
                ++k;
            }
            nj.push_back(k);
        }
        // number with exponent exactly j = n_j - n_{j+1}
        for (std::size_t j = 0; j < nj.size(); ++j) {
            int next = j + 1 < nj.size() ? nj[j + 1] : 0;
            for (int c = 0; c < nj[j] - next; ++c) exps.push_back(static_cast<int>(j + 1));
        }
        sylow[r] = exps;
    }
    // assemble invariant factors: largest exponents go to the last factor
    std::size_t k = 0;
    for (auto& [r, e] : sylow) k = std::max(k, e.size());
    std::vector<i64> inv(k, 1);
    for (auto& [r, e] : sylow) {
        auto sorted = e;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            i64 pw = 1;
            for (int c = 0; c < sorted[i]; ++c) pw *= r;
            inv[k - sorted.size() + i] *= pw;
        }
    }
    return inv;
}

/// Order of the coset x*H in G/H for H given as a set of indices.
template <class MulIdx>
i64 coset_order(i64 x, const std::set<i64>& H, MulIdx mul)
{
    i64 cur = x, k = 1;
    while (!H.count(cur)) {
        cur = mul(cur, x);
        ++k;
    }
    return k;
}

}  // namespace oracle
