#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "itl/okring.hpp"

namespace itl {

/*
 * The principal ideal (h) as a lattice in Z^2 (coordinates w.r.t. {1, w}),
 * in Hermite normal form with basis (A, 0) and (B, C), C > 0, 0 <= B < A.
 * A*C = N(h).  Residues are reduced to the box 0 <= x < A, 0 <= y < C.
 */
class IdealLattice {
public:
    IdealLattice() = default;

    explicit IdealLattice(const OkElement& h) : gen_(h)
    {
        if (h.is_zero()) throw precondition_error("ideal lattice of the zero element");
        const FieldTag& tag = h.tag();
        // basis vectors: h and h*w
        Int x1 = h.x(), y1 = h.y();
        Int x2 = -tag.norm_w() * h.y(), y2 = h.x() + tag.trace_w() * h.y();
        Int s, t;
        C_ = ext_gcd(y1, y2, s, t);
        Int bx = s * x1 + t * x2;
        Int ax = (y2 / C_) * x1 - (y1 / C_) * x2;
        A_ = abs(ax);
        B_ = mod_floor(bx, A_);
        norm_ = A_ * C_;
        if (norm_ != h.norm()) throw std::logic_error("IdealLattice: HNF determinant mismatch");
    }

    const OkElement& generator() const { return gen_; }
    const Int& A() const { return A_; }
    const Int& B() const { return B_; }
    const Int& C() const { return C_; }
    const Int& norm() const { return norm_; }
    const FieldTag& tag() const { return gen_.tag(); }

    OkElement reduce(const OkElement& e) const
    {
        Int y = mod_floor(e.y(), C_);
        Int k = (e.y() - y) / C_;
        Int x = mod_floor(e.x() - k * B_, A_);
        return {e.tag(), x, y};
    }

    bool contains(const OkElement& e) const { return reduce(e).is_zero(); }

    /// Index of the reduced residue in [0, N(h)).
    Int index(const OkElement& e) const
    {
        OkElement r = reduce(e);
        return r.y() * A_ + r.x();
    }

    OkElement from_index(const Int& idx) const
    {
        return {gen_.tag(), mod_floor(idx, A_), floor_div(idx, A_)};
    }

    OkElement mul(const OkElement& a, const OkElement& b) const { return reduce(a * b); }

    OkElement pow(const OkElement& a, Int e) const
    {
        OkElement r = reduce(ok_one(a.tag())), b = reduce(a);
        while (e > 0) {
            if (mpz_odd_p(e.get_mpz_t())) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    }

private:
    OkElement gen_;
    Int A_{1}, B_{0}, C_{1}, norm_{1};
};

/// True iff (a) + (b) = O_K, decided on lattices (no factorisation).
inline bool coprime_ideals(const OkElement& a, const OkElement& b)
{
    // (a) + (b) = O_K iff the four generators a, aw, b, bw span Z^2
    IdealLattice la(a), lb(b);
    Int g2 = gcd(la.C(), lb.C());
    if (g2 != 1) return false;
    Int xcomb = lb.C() * la.B() - la.C() * lb.B();
    return gcd(gcd(la.A(), lb.A()), xcomb) == 1;
}

/*
 * For coprime (a), (b): returns u in (a) with u = 1 mod (b).
 */
inline OkElement crt_idempotent(const OkElement& a, const OkElement& b)
{
    IdealLattice la(a), lb(b);
    const FieldTag& tag = a.tag();
    Int s, t;
    if (ext_gcd(la.C(), lb.C(), s, t) != 1) throw precondition_error("crt_idempotent: moduli not coprime");
    // X = C_b * (B_a, C_a) - C_a * (B_b, C_b), purely horizontal
    Int X = lb.C() * la.B() - la.C() * lb.B();
    Int s1, t1, s2, t2;
    Int g1 = ext_gcd(la.A(), lb.A(), s1, t1);
    Int g = ext_gcd(g1, X, s2, t2);
    if (g != 1) throw precondition_error("crt_idempotent: moduli not coprime");
    // 1 = s2*(s1*A_a + t1*A_b) + t2*X ; keep the part lying in (a)
    Int ax = s2 * s1 * la.A() + t2 * lb.C() * la.B();
    Int ay = t2 * lb.C() * la.C();
    OkElement u(tag, ax, ay);
    return u;
}

}  // namespace itl
