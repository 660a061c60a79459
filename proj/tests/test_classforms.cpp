#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "brute.hpp"

using namespace itl;

using oracle::analytic_class_number;
using oracle::form_to_ideal;
using oracle::fundamental;
using oracle::Ideal;
using oracle::ideal_mul;
using oracle::ideal_to_form;
using oracle::minkowski_class_number;
using oracle::Order;

TEST(QuadForm, ReductionAndEnumeration)
{
    auto f23 = reduced_forms(-23);
    EXPECT_EQ(f23, (std::vector<QuadForm>{{1, 1, 6}, {2, -1, 3}, {2, 1, 3}}));
    for (long long D = -3; D >= -3000; --D) {
        if (((D % 4) + 4) % 4 > 1) continue;
        for (const auto& f : reduced_forms(D)) {
            ASSERT_TRUE(f.is_reduced());
            ASSERT_EQ(f.discriminant(), D);
            ASSERT_EQ(reduce(f), f);
        }
    }
    EXPECT_EQ(reduce({6, 1, 1}), (QuadForm{1, 1, 6}));
    EXPECT_EQ(reduce({3, 5, 4}), reduce({3, -1, 2}));
    EXPECT_THROW(class_group(-5), precondition_error);
    EXPECT_THROW(class_group(4), precondition_error);
}

TEST(ClassGroup, Examples)
{
    EXPECT_EQ(class_group(-4).order(), 1);
    auto g23 = class_group(-23);
    EXPECT_EQ(g23.invariants, std::vector<Int>{3});
    auto g47 = class_group(-47);
    EXPECT_EQ(g47.invariants, std::vector<Int>{5});
    // D = -84: Cl = (Z/2)^2
    EXPECT_EQ(class_group(-84).invariants, (std::vector<Int>{2, 2}));
    for (const auto& f : g23.generators) EXPECT_TRUE(f.is_reduced());
}

TEST(ClassGroup, MatchesMinkowskiIdealEnumeration)
{
    for (long long D = -3; D >= -2000; --D) {
        if (!fundamental(D)) continue;
        const auto G = class_group(D);
        ASSERT_EQ(G.order(), G.forms.size());
        ASSERT_EQ(to_ll(G.order()), minkowski_class_number(D)) << "D=" << D;
        ASSERT_EQ(to_ll(G.order()), analytic_class_number(D)) << "D=" << D;
    }
}

TEST(Composition, GroupAxiomsExhaustive)
{
    for (long long D = -3; D >= -500; --D) {
        if (((D % 4) + 4) % 4 > 1) continue;
        const auto err = oracle::form_group_axioms(D);
        ASSERT_FALSE(err) << "D=" << D << ": " << *err;
    }
}

TEST(Composition, AgreesWithIdealMultiplication)
{
    for (long long D = -3; D >= -600; --D) {
        if (!fundamental(D)) continue;
        Order O(D);
        const auto forms = reduced_forms(D);
        for (const auto& f : forms) {
            ASSERT_EQ(ideal_to_form(O, form_to_ideal(f)), f);
            for (const auto& g : forms) {
                Ideal P = ideal_mul(O, form_to_ideal(f), form_to_ideal(g));
                ASSERT_EQ(ideal_to_form(O, P), compose(f, g)) << f.to_string() << g.to_string();
            }
        }
    }
}

TEST(ClassGroup, LogCoordinatesRebuildTheClass)
{
    for (long long D : {-84LL, -23LL, -4004LL, -3299LL, -9971LL}) {
        FormGroup G(D);
        const auto& info = G.info();
        for (const auto& f : info.forms) {
            auto c = G.log(f);
            QuadForm x = principal_form(D);
            for (std::size_t i = 0; i < c.size(); ++i)
                for (Int k = 0; k < c[i]; ++k) x = compose(x, info.generators[i]);
            ASSERT_EQ(x, f);
        }
    }
}

TEST(SClassGroup, Examples)
{
    EXPECT_EQ(s_class_group(-23, {2}).order(), 1);
    EXPECT_EQ(s_class_group(-23, {}).order(), 3);
    EXPECT_EQ(s_class_group(-23, {}).invariants, std::vector<Int>{3});
    EXPECT_EQ(s_class_group(-4, {2, 5}).order(), 1);
    // 5 is inert in Q(sqrt -23): no contribution
    EXPECT_EQ(s_class_group(-23, {5}).order(), 3);
    EXPECT_EQ(s_class_group(-23, {5}).primes_above_S, 0u);
    EXPECT_EQ(s_class_group(-23, {23}).primes_above_S, 1u);
}

TEST(SClassGroup, OrderDividesAndRankInequality)
{
    const std::vector<std::vector<long long>> sets{{2}, {3}, {2, 3}, {5, 7}, {11}, {2, 3, 5, 7}};
    for (long long D = -3; D >= -1500; D -= 1) {
        if (!fundamental(D)) continue;
        const auto G = class_group(D);
        for (const auto& S : sets) {
            const auto CS = s_class_group(D, S);
            ASSERT_EQ(G.order() % CS.order(), 0);
            for (long p : {2L, 3L, 5L}) {
                const int diff = p_rank(G.invariants, p) - p_rank(CS.invariants, p);
                ASSERT_GE(diff, 0);
                ASSERT_LE(diff, static_cast<int>(CS.primes_above_S));
            }
        }
    }
}

TEST(PRank, Examples)
{
    EXPECT_EQ(p_rank({Int(3)}, 3), 1);
    EXPECT_EQ(p_rank({Int(2), Int(6), Int(12)}, 2), 3);
    EXPECT_EQ(p_rank({Int(2), Int(6), Int(12)}, 3), 2);
    EXPECT_EQ(p_rank({Int(1)}, 7), 0);
}
