#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "brute.hpp"

using namespace itl;
using oracle::isomorphic_by_counts;
using oracle::random_chain;
using oracle::tower_around;

namespace {

tower_error::Kind kind_of(const std::string& text)
{
    try {
        parse_tower(text);
    } catch (const tower_error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "accepted: " << text;
    return tower_error::Kind::io;
}

const char* valid_tower = R"({"label":"t","q":5,"d":1,"p":3,"levels":[
  {"n":0,"s_f":1,"r_cl":1,"r_cls":0,"e_n":1,"sel0":{"s":0,"T":[3]}},
  {"n":1,"s_f":2,"r_cl":1,"r_cls":1,"e_n":2,"sel0":{"s":1,"T":[3]}},
  {"n":2,"s_f":2,"r_cl":2,"r_cls":1,"e_n":2,"sel0":{"s":1,"T":[3]}}]})";

}  // namespace

TEST(RankCalculus, Examples)
{
    EXPECT_EQ(fine_selmer_mod_p_rank(3, 1), 6);
    EXPECT_EQ(fine_selmer_mod_p_rank(0, 5), 0);
    EXPECT_EQ(fine_selmer_mod_p_rank(2, 2), 8);
    EXPECT_EQ(rank_gap_bound(1, 0), 2);
    EXPECT_EQ(rank_gap_bound(0, 0), 0);
    EXPECT_EQ(rank_gap_bound(2, 3), 7);
    EXPECT_EQ(control_gap_bound(1, 1), 6);
    EXPECT_EQ(control_gap_bound(1, 0), 4);
    EXPECT_EQ(control_gap_bound(3, 2), 24);
    EXPECT_THROW(fine_selmer_mod_p_rank(-1, 1), precondition_error);
    EXPECT_THROW(fine_selmer_mod_p_rank(1, 0), precondition_error);
    EXPECT_THROW(control_gap_bound(0, 1), precondition_error);
}

TEST(RankCalculus, HomRankIdentityBruteForce)
{
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 200; ++trial) {
        const auto h = oracle::hom_rank_trial(rng);
        ASSERT_EQ(h.per_rank, h.p_rank) << "trial " << trial;
        ASSERT_EQ(h.hom_rank, fine_selmer_mod_p_rank(h.p_rank, h.d)) << "trial " << trial;
    }
}

TEST(RankCalculus, Lemma32OnRandomExactSequences)
{
    std::mt19937_64 rng(77);
    int nontrivial = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto s = oracle::random_four_term(rng);
        const long long gap = std::llabs(static_cast<long long>(s.rQ) - s.rR);
        ASSERT_LE(gap, rank_gap_bound(s.rP, s.rS)) << "trial " << trial;
        nontrivial += s.rP > 0 && s.rS > 0;

        // the control bound is the lemma with r_P <= 2d, r_S <= 2d s_f
        const long long d = std::max(1, (s.rP + 1) / 2);
        const long long s_f = (s.rS + 2 * d - 1) / (2 * d);
        ASSERT_LE(gap, control_gap_bound(d, s_f));
    }
    EXPECT_GT(nontrivial, 50);
}

TEST(CofinPGroupModel, Basics)
{
    CofinPGroup G(3, 2, {Int(9), Int(3)});
    EXPECT_EQ(G.p_rank(), 4);
    EXPECT_EQ(G.torsion_order(), 27);
    EXPECT_EQ(G.torsion(), (std::vector<Int>{3, 9}));
    EXPECT_THROW(CofinPGroup(3, 0, {Int(6)}), precondition_error);
    EXPECT_THROW(CofinPGroup(3, 0, {Int(1)}), precondition_error);
    EXPECT_THROW(CofinPGroup(4, 0, {}), precondition_error);
    EXPECT_TRUE(split_injects(CofinPGroup(3, 0, {Int(3)}), CofinPGroup(3, 1, {Int(3), Int(9)})));
    EXPECT_FALSE(split_injects(CofinPGroup(3, 0, {Int(3)}), CofinPGroup(3, 1, {Int(9)})));
}

TEST(Stabilization, Examples)
{
    const CofinPGroup A(3, 1, {});
    EXPECT_EQ(stabilization_detect({A, A, A}), std::optional<std::size_t>(0));
    const CofinPGroup B0(3, 0, {Int(3)}), B1(3, 1, {Int(3)});
    EXPECT_EQ(stabilization_detect({B0, B1, B1, B1}), std::optional<std::size_t>(1));
    EXPECT_EQ(stabilization_detect({CofinPGroup(3, 0, {}), CofinPGroup(3, 1, {}), CofinPGroup(3, 2, {}), CofinPGroup(3, 3, {})}),
              std::nullopt);
    // a single stable entry at the end is not evidence
    EXPECT_EQ(stabilization_detect({B0, B1}), std::nullopt);
    EXPECT_THROW(stabilization_detect({B1, B0}), precondition_error);
}

TEST(Stabilization, SyntheticTowersThroughIngestion)
{
    std::mt19937_64 rng(5150);
    int negatives = 0, positives = 0;
    for (int t = 0; t < 50; ++t) {
        const auto chain = oracle::synthetic_chain(t, rng);
        const long long p = chain.front().p();
        const TowerSeries tower = tower_around(chain, p, 7, 1 + t % 2, rng);
        const std::string path = oracle::temp_path("tower" + std::to_string(t) + ".json");
        {
            std::ofstream out(path);
            out << to_json(tower).dump(2);
        }
        const TowerSeries loaded = ingest_tower(path);
        std::remove(path.c_str());

        std::vector<CofinPGroup> sel;
        for (const auto& lv : loaded.levels) sel.push_back(*lv.sel0);
        ASSERT_EQ(sel, chain);
        const auto expected = oracle::stable_index(chain);
        const auto report = analyze_tower(loaded);
        ASSERT_TRUE(report.has_sel0);
        if (expected) {
            ++positives;
            ASSERT_EQ(report.stable_from, std::optional<long long>(static_cast<long long>(*expected))) << "tower " << t;
            // minimality
            if (*expected > 0) {
                ASSERT_FALSE(isomorphic_by_counts(chain[*expected - 1], chain.back()));
            }
        } else {
            ++negatives;
            ASSERT_FALSE(report.stable_from.has_value()) << "tower " << t;
        }
    }
    EXPECT_GE(negatives, 10);
    EXPECT_GE(positives, 20);
}

TEST(Stabilization, ConstantRankTailStabilizes)
{
    // constant e_n from level N onward with split injections forces a stable Sel0
    std::mt19937_64 rng(8);
    for (int t = 0; t < 100; ++t) {
        const std::size_t N = rng() % 5, len = N + 2 + rng() % 4;
        auto chain = random_chain(rng, 3, len, N + 1);
        auto tower = tower_around(chain, 3, 5, 1, rng);
        for (std::size_t n = 0; n < len; ++n) tower.levels[n].e_n = static_cast<long long>(std::min(n, N));
        const auto rep = analyze_tower(tower);
        ASSERT_TRUE(rep.e_stable_from.has_value());
        ASSERT_LE(*rep.e_stable_from, static_cast<long long>(N));
        ASSERT_TRUE(rep.stable_from.has_value()) << t;
        ASSERT_LE(*rep.stable_from, static_cast<long long>(N));
    }
}

TEST(Decomposition, Examples)
{
    EXPECT_EQ(decomposition_counts(3, 3, 4), (std::vector<Int>{1, 1, 1, 1, 1}));
    EXPECT_EQ(decomposition_counts(17, 3, 3), (std::vector<Int>{1, 3, 3, 3}));
    EXPECT_EQ(decomposition_counts(7, 3, 3), (std::vector<Int>{1, 1, 1, 1}));
    EXPECT_THROW(decomposition_counts(15, 3, 2), precondition_error);
    EXPECT_THROW(decomposition_counts(5, 2, 2), precondition_error);
}

TEST(Decomposition, MatchesFrobeniusOrbitEnumeration)
{
    for (long long q : {3LL, 5LL, 7LL})
        for (long long ell = 2; ell < 300; ++ell) {
            if (!is_prime(from_ll(ell))) continue;
            const int n_max = q == 3 ? 6 : 4;
            const auto counts = decomposition_counts(ell, q, n_max);
            if (ell == q) continue;
            for (int n = 0; n <= n_max; ++n) {
                ASSERT_EQ(counts[n], from_ll(oracle::frobenius_orbit_count(ell, q, n))) << ell << " " << q << " " << n;
            }
            // non-decreasing, q-power steps, constant q^{v-1} from n = v-1 with v = ord_q(l^{q-1} - 1)
            const int v = valuation(ipow(from_ll(ell), static_cast<unsigned long>(q - 1)) - 1, from_ll(q));
            for (int n = 0; n <= n_max; ++n) {
                ASSERT_EQ(counts[n], ipow(from_ll(q), static_cast<unsigned long>(std::min(n, v - 1))));
                if (n) {
                    ASSERT_TRUE(counts[n] == counts[n - 1] || counts[n] == from_ll(q) * counts[n - 1]);
                }
            }
        }
}

TEST(IwasawaFitting, Examples)
{
    auto v = [](std::initializer_list<long> xs) {
        std::vector<Int> out;
        for (long x : xs) out.push_back(Int(x));
        return out;
    };
    EXPECT_EQ(fit_iwasawa(v({5, 5, 5, 5}), 3), (IwasawaFit{0, 0, 5, 0}));
    // 2*3^n + n + 1
    EXPECT_EQ(fit_iwasawa(v({3, 8, 21, 58}), 3), (IwasawaFit{2, 1, 1, 0}));
    // e_n = n - 1 from n = 1 on
    EXPECT_EQ(fit_iwasawa(v({0, 0, 1, 2, 3}), 3), (IwasawaFit{0, 1, -1, 1}));
    // no tail of length 3 fits
    EXPECT_EQ(fit_iwasawa(v({4, 8, 20, 58}), 3), std::nullopt);
    // negative mu is rejected
    EXPECT_EQ(fit_iwasawa(v({10, 8, 2, -16}), 3), std::nullopt);
    EXPECT_THROW(fit_iwasawa(v({1, 2, 3}), 3), precondition_error);
}

TEST(IwasawaFitting, RecoversGeneratingTriple)
{
    std::mt19937_64 rng(99);
    for (int t = 0; t < 1000; ++t) {
        const long long q = t % 3 == 0 ? 2 : t % 3 == 1 ? 3 : 5;
        const long mu = static_cast<long>(rng() % 4), lambda = static_cast<long>(rng() % 6), nu = static_cast<long>(rng() % 11) - 5;
        const std::size_t n0 = rng() % 5, len = n0 + 3 + rng() % 4;
        std::vector<Int> e;
        for (std::size_t n = 0; n < len; ++n) {
            Int val = Int(mu) * ipow(from_ll(q), n) + Int(lambda) * Int(static_cast<unsigned long>(n)) + Int(nu);
            if (n < n0) val += 1 + static_cast<long>(rng() % 7);  // noise, never matching the formula
            e.push_back(val);
        }
        if (e.size() < 4) continue;
        const auto f = fit_iwasawa(e, q);
        ASSERT_TRUE(f.has_value()) << t;
        ASSERT_EQ(*f, (IwasawaFit{Int(mu), Int(lambda), Int(nu), n0})) << t;
    }
}

TEST(Ingestion, ValidFileAndReports)
{
    const auto t = parse_tower(valid_tower);
    EXPECT_EQ(t.levels.size(), 3u);
    EXPECT_EQ(t.p, 3);
    const auto rep = analyze_tower(t);
    ASSERT_EQ(rep.gaps.size(), 3u);
    // level 0: |1 - 2| <= 4 + 2 + 4
    EXPECT_EQ(rep.gaps[0].observed, 1);
    EXPECT_EQ(rep.gaps[0].bound, control_gap_bound(1, 1) + 2 * rank_gap_bound(1, 0));
    EXPECT_EQ(rep.gaps[0].source, "sel0");
    for (const auto& g : rep.gaps) EXPECT_EQ(g.satisfied, g.observed <= g.bound);
    EXPECT_EQ(rep.stable_from, std::optional<long long>(1));
    EXPECT_EQ(rep.e_stable_from, std::optional<long long>(1));
}

TEST(Ingestion, DistinctDiagnostics)
{
    using K = tower_error::Kind;
    EXPECT_EQ(kind_of("{\"label\": "), K::syntax);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"levels":[{"n":0,"s_f":0,"r_cl":0,"r_cls":0}]})"), K::schema);  // no p
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":"1","r_cl":0,"r_cls":0}]})"), K::schema);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":0,"r_cl":0,"r_cls":0,"extra":1}]})"), K::schema);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":9,"levels":[{"n":0,"s_f":0,"r_cl":0,"r_cls":0}]})"), K::schema);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":0,"r_cl":0,"r_cls":0,"sel0":{"s":0,"T":[6]}}]})"),
              K::schema);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":1,"s_f":0,"r_cl":0,"r_cls":0},{"n":1,"s_f":0,"r_cl":0,"r_cls":0}]})"),
              K::level_order);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":2,"r_cl":0,"r_cls":0},{"n":1,"s_f":1,"r_cl":0,"r_cls":0}]})"),
              K::s_f_decreasing);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":0,"r_cl":0,"r_cls":1}]})"), K::inconsistent_ranks);
    EXPECT_EQ(kind_of(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":1,"r_cl":3,"r_cls":1}]})"), K::inconsistent_ranks);

    try {
        parse_tower(R"({"label":"t","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":2,"r_cl":0,"r_cls":0},{"n":4,"s_f":1,"r_cl":0,"r_cls":0}]})");
        FAIL();
    } catch (const tower_error& e) {
        EXPECT_NE(std::string(e.what()).find("n=4"), std::string::npos);
    }
    try {
        ingest_tower("/nonexistent/tower.json");
        FAIL();
    } catch (const tower_error& e) {
        EXPECT_EQ(e.kind(), K::io);
    }
}

TEST(Ingestion, ClassGroupStubRoundTrips)
{
    // D = -23: Cl = Z/3; both primes above 2 kill it
    TowerSeries t;
    t.label = "disc -23, S = {2}";
    t.p = 3;
    t.q = 5;
    t.d = 1;
    const auto cl = class_group(-23);
    const auto cls = s_class_group(-23, {2});
    SeriesLevel lv;
    lv.n = 0;
    lv.s_f = static_cast<long long>(cls.primes_above_S);
    lv.r_cl = p_rank(cl.invariants, 3);
    lv.r_cls = p_rank(cls.invariants, 3);
    lv.e_n = valuation(cl.order(), Int(3));
    lv.sel0 = CofinPGroup(3, 0, {});
    t.levels.push_back(lv);
    EXPECT_EQ(lv.r_cl, 1);
    EXPECT_EQ(lv.r_cls, 0);
    EXPECT_EQ(lv.s_f, 2);

    const std::string text = to_json(t).dump();
    const auto back = parse_tower(text);
    EXPECT_EQ(back.label, t.label);
    ASSERT_EQ(back.levels.size(), 1u);
    EXPECT_EQ(back.levels[0].r_cl, 1);
    EXPECT_EQ(back.levels[0].r_cls, 0);
    EXPECT_EQ(back.levels[0].e_n, std::optional<long long>(1));
    EXPECT_EQ(back.levels[0].sel0, lv.sel0);
    EXPECT_EQ(to_json(back).dump(), text);
}

TEST(Report, CsvShape)
{
    auto t = parse_tower(valid_tower);
    t.label = "a, \"quoted\" label";
    const auto rep = analyze_tower(t);
    std::ostringstream a, b;
    write_report_csv(a, t, rep);
    write_report_csv(b, t, analyze_tower(t));
    EXPECT_EQ(a.str(), b.str());
    const std::string s = a.str();
    EXPECT_EQ(s.rfind("label,p,q,d,n,", 0), 0u);
    EXPECT_NE(s.find("\"a, \"\"quoted\"\" label\""), std::string::npos);
    std::size_t rows = 0;
    for (std::size_t pos = 0; (pos = s.find("\r\n", pos)) != std::string::npos; pos += 2) ++rows;
    EXPECT_EQ(rows, 4u);
    EXPECT_NE(s.find(",before"), std::string::npos);
    EXPECT_NE(s.find(",stable"), std::string::npos);
}
