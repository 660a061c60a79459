#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "itl/integer.hpp"

namespace itl {

using IntMatrix = std::vector<std::vector<Int>>;

inline IntMatrix identity_matrix(std::size_t n)
{
    IntMatrix m(n, std::vector<Int>(n, Int(0)));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

/*
 * Smith normal form U*R*V = D of an r x k integer matrix R.  Only the column
 * transform V (and its inverse) is tracked: a row vector x in Z^k maps to
 * x*V, and the row lattice of R maps onto the row lattice of D.
 */
struct SmithForm {
    std::vector<Int> diag;  // length min(r,k), d_1 | d_2 | ..., nonnegative
    IntMatrix V;            // k x k
    IntMatrix Vinv;         // k x k
};

inline SmithForm smith_normal_form(IntMatrix A, std::size_t cols)
{
    const std::size_t rows = A.size();
    for (auto& row : A) row.resize(cols, Int(0));
    SmithForm out;
    out.V = identity_matrix(cols);
    out.Vinv = identity_matrix(cols);
    auto& V = out.V;
    auto& Vinv = out.Vinv;

    auto swap_cols = [&](std::size_t i, std::size_t j) {
        if (i == j) return;
        for (auto& row : A) std::swap(row[i], row[j]);
        for (auto& row : V) std::swap(row[i], row[j]);
        std::swap(Vinv[i], Vinv[j]);
    };
    // col j -= f * col i
    auto col_axpy = [&](std::size_t j, std::size_t i, const Int& f) {
        if (f == 0) return;
        for (auto& row : A) row[j] -= f * row[i];
        for (auto& row : V) row[j] -= f * row[i];
        for (std::size_t c = 0; c < cols; ++c) Vinv[i][c] += f * Vinv[j][c];
    };
    auto negate_col = [&](std::size_t i) {
        for (auto& row : A) row[i] = -row[i];
        for (auto& row : V) row[i] = -row[i];
        for (auto& v : Vinv[i]) v = -v;
    };
    auto row_axpy = [&](std::size_t j, std::size_t i, const Int& f) {
        if (f == 0) return;
        for (std::size_t c = 0; c < cols; ++c) A[j][c] -= f * A[i][c];
    };

    const std::size_t n = std::min(rows, cols);
    for (std::size_t t = 0; t < n; ++t) {
        for (;;) {
            // pivot: smallest nonzero |entry| in the trailing block
            std::size_t pr = rows, pc = cols;
            for (std::size_t i = t; i < rows; ++i)
                for (std::size_t j = t; j < cols; ++j)
                    if (A[i][j] != 0 && (pr == rows || abs(A[i][j]) < abs(A[pr][pc]))) {
                        pr = i;
                        pc = j;
                    }
            if (pr == rows) break;  // remaining block is zero
            std::swap(A[t], A[pr]);
            swap_cols(t, pc);
            if (A[t][t] < 0) negate_col(t);

            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (A[i][t] == 0) continue;
                row_axpy(i, t, floor_div(A[i][t], A[t][t]));
                if (A[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (A[t][j] == 0) continue;
                col_axpy(j, t, floor_div(A[t][j], A[t][t]));
                if (A[t][j] != 0) clean = false;
            }
            if (!clean) continue;

            // divisibility condition on the rest of the block
            bool divides = true;
            for (std::size_t i = t + 1; i < rows && divides; ++i)
                for (std::size_t j = t + 1; j < cols; ++j)
                    if (A[i][j] % A[t][t] != 0) {
                        for (std::size_t c = 0; c < cols; ++c) A[t][c] += A[i][c];
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
    }
    out.diag.resize(n);
    for (std::size_t t = 0; t < n; ++t) out.diag[t] = abs(A[t][t]);
    return out;
}

/*
 * Finite abelian group Z^k / <relations>, rewritten in invariant-factor form.
 * Coordinates: y = x * to_new (component i taken mod invariants[i]).
 * Generators: new generator i = sum_j from_new[i][j] * (old generator j).
 */
struct QuotientMap {
    std::vector<Int> invariants;
    IntMatrix to_new;    // k x m
    IntMatrix from_new;  // m x k
};

inline QuotientMap quotient_presentation(const IntMatrix& relations, std::size_t k)
{
    QuotientMap q;
    if (k == 0) return q;
    SmithForm s = smith_normal_form(relations, k);
    if (s.diag.size() < k) throw precondition_error("quotient_presentation: group is infinite");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < k; ++i) {
        if (s.diag[i] == 0) throw precondition_error("quotient_presentation: group is infinite");
        if (s.diag[i] != 1) keep.push_back(i);
    }
    q.invariants.reserve(keep.size());
    q.to_new.assign(k, std::vector<Int>(keep.size()));
    q.from_new.assign(keep.size(), std::vector<Int>(k));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const Int& d = s.diag[keep[c]];
        q.invariants.push_back(d);
        for (std::size_t j = 0; j < k; ++j) {
            q.to_new[j][c] = mod_floor(s.V[j][keep[c]], d);
            q.from_new[c][j] = s.Vinv[keep[c]][j];
        }
    }
    return q;
}

inline std::vector<Int> apply_coordinates(const std::vector<Int>& x, const QuotientMap& q)
{
    std::vector<Int> y(q.invariants.size(), Int(0));
    for (std::size_t c = 0; c < y.size(); ++c) {
        Int acc = 0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * q.to_new[j][c];
        y[c] = mod_floor(acc, q.invariants[c]);
    }
    return y;
}

inline Int group_order(const std::vector<Int>& invariants)
{
    Int n = 1;
    for (const auto& d : invariants) n *= d;
    return n;
}

/// Invariant factors of a group given as a direct sum of cyclic groups of arbitrary orders.
inline std::vector<Int> invariant_factors(const std::vector<Int>& cyclic_orders)
{
    IntMatrix rel(cyclic_orders.size(), std::vector<Int>(cyclic_orders.size(), Int(0)));
    for (std::size_t i = 0; i < cyclic_orders.size(); ++i) rel[i][i] = cyclic_orders[i];
    return quotient_presentation(rel, cyclic_orders.size()).invariants;
}

}  // namespace itl
