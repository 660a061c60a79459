#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "itl/cli.hpp"

using namespace itl;
using Json = nlohmann::ordered_json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args)
{
    args.push_back("--format");
    args.push_back("json");
    auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return Json::parse(r.out);
}

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t pos; (pos = s.find("\r\n", start)) != std::string::npos; start = pos + 2) out.push_back(s.substr(start, pos - start));
    return out;
}

std::string sample(const std::string& name) { return std::string(ITL_SAMPLES_DIR) + "/" + name; }

std::string temp_file(const std::string& name, const std::string& content)
{
    auto path = std::filesystem::temp_directory_path() / ("itl_cli_" + std::to_string(::getpid()) + "_" + name);
    std::ofstream(path) << content;
    return path.string();
}

}  // namespace

TEST(Cli, Table2Csv)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto r = run_cli({"table2", "--format", "csv"});
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
    ASSERT_EQ(r.code, 0) << r.err;
    auto L = lines(r.out);
    ASSERT_EQ(L.size(), 10u);
    EXPECT_EQ(L[0], "d,bad_primes,norm,degree,condition_c,source,flag,config");

    auto j = run_json({"table2"});
    ASSERT_EQ(j.size(), 9u);
    const int degrees[] = {1, 1, 6, 21, 1, 3, 29, 41, 89};
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_EQ(j[i]["degree"].get<int>(), degrees[i]);
        EXPECT_EQ(j[i]["flag"].get<std::string>().empty(), j[i]["d"] != 19);
        EXPECT_EQ(j[i]["config"]["command"], "table2");
    }
}

TEST(Cli, FitExample)
{
    auto j = run_json({"fit", "--q", "3", "--e", "5,5,5,5"});
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["status"], "fit");
    EXPECT_EQ(j[0]["mu"], 0);
    EXPECT_EQ(j[0]["lambda"], 0);
    EXPECT_EQ(j[0]["nu"], 5);
    EXPECT_EQ(j[0]["config"]["e"], "5,5,5,5");
    auto none = run_json({"fit", "--q", "3", "--e", "4,8,20,58"});
    EXPECT_EQ(none[0]["status"], "no_fit");
}

TEST(Cli, NonvanishReportsN1)
{
    auto j = run_json({"nonvanish", "--d", "1", "--p", "5", "--q", "3", "--lambda", "7", "--k", "4"});
    ASSERT_EQ(j.size(), 4u);  // m = 0..3
    const auto E = make_residue_embedding(FieldTag(1), 5);
    const auto F = residue_field(5, 3, 3);
    const int n1 = compute_N1(E, OkElement(FieldTag(1), 7, 0), 4, FinFieldElt::one(F), 3);
    for (const auto& r : j) {
        EXPECT_EQ(r["N1"], n1);
        EXPECT_EQ(r["config"]["embedding_s"], "2");
        EXPECT_EQ(r["config"]["p"], 5);
    }
    // N(7) 7^-4 = 4 = -1 mod 5: not a q-power root of unity
    EXPECT_EQ(n1, 0);

    // phi0 = 4 makes the residue 1: only the trivial eta vanishes
    auto k = run_json({"nonvanish", "--d", "1", "--p", "5", "--q", "3", "--lambda", "7", "--k", "4", "--phi0", "4"});
    EXPECT_EQ(k[0]["N1"], 1);
    EXPECT_EQ(k[0]["vanishing"], 1);
    long long chars = 0;
    for (std::size_t m = 1; m < k.size(); ++m) {
        EXPECT_EQ(k[m]["vanishing"], 0);
        chars += k[m]["characters"].get<long long>();
    }
    EXPECT_EQ(chars, 2 + 6 + 18);
}

TEST(Cli, LSeriesValueSchema)
{
    auto j = run_json({"lseries", "--d", "1", "--B", "20000"});
    ASSERT_EQ(j.size(), 2u);
    for (const auto& r : j) {
        EXPECT_TRUE(r["value"].is_number());
        EXPECT_EQ(r["B"], 20000);
        EXPECT_TRUE(r["error"].is_number());
    }
    // zeta_{Q(i)}(2) = zeta(2) * Catalan
    const double exact = 1.6449340668482264 * 0.9159655941772190;
    for (const auto& r : j) EXPECT_LE(std::abs(r["value"].get<double>() - exact), r["error"].get<double>());

    auto c = run_json({"lseries", "--d", "1", "--modulus", "5", "--chi", "1", "--B", "20000", "--method", "euler"});
    ASSERT_EQ(c.size(), 1u);
    EXPECT_TRUE(c[0]["value"].is_array());
    EXPECT_EQ(c[0]["chi_order"], 4);
}

TEST(Cli, DeterministicAcrossRunsAndThreads)
{
    const std::vector<std::vector<std::string>> cmds{
        {"table2"},
        {"rayclass", "--d", "7", "--modulus", "(5+3*w)/2"},
        {"tower", "--d", "2", "--q", "11", "--depth", "2"},
        {"cmsearch", "--d", "67", "--rbound", "20"},
        {"classgroup", "--disc", "-4004", "--S", "2,3,5"},
        {"lseries", "--d", "3", "--modulus", "7", "--chi", "1", "--B", "50000"},
        {"selmer", "--input", sample("tower.json")},
        {"fit", "--q", "5", "--e", "1,2,3,4,5"},
    };
    for (const auto& c : cmds) {
        for (const char* fmt : {"csv", "json"}) {
            auto args = c;
            args.push_back("--format");
            args.push_back(fmt);
            ::setenv("ITL_THREADS", "1", 1);
            auto a = run_cli(args);
            ::setenv("ITL_THREADS", "5", 1);
            auto b = run_cli(args);
            ::unsetenv("ITL_THREADS");
            ASSERT_EQ(a.code, 0) << c[0] << ": " << a.err;
            EXPECT_EQ(a.out, b.out) << c[0];
        }
    }
}

TEST(Cli, EveryRecordEchoesConfig)
{
    for (const auto& args : std::vector<std::vector<std::string>>{{"rayclass", "--d", "7", "--modulus", "9"},
                                                                  {"tower", "--d", "1", "--q", "5", "--depth", "1"},
                                                                  {"classgroup", "--disc", "-23"}}) {
        auto j = run_json(args);
        ASSERT_FALSE(j.empty());
        for (const auto& r : j) {
            ASSERT_TRUE(r.contains("config"));
            EXPECT_EQ(r["config"]["command"], args[0]);
            EXPECT_EQ(r["config"]["format"], "json");
        }
    }
    auto r = run_cli({"cmsearch", "--d", "43", "--rbound", "1"});
    ASSERT_EQ(r.code, 0);
    const auto L = lines(r.out);
    ASSERT_EQ(L.size(), 2u);
    EXPECT_NE(L[1].find("\"{\"\"command\"\":\"\"cmsearch\"\",\"\"d\"\":43"), std::string::npos) << L[1];
}

TEST(Cli, HeaderPresentWithoutRecords)
{
    // 16 + 19 = 35 is not prime
    auto r = run_cli({"cmsearch", "--d", "19", "--rbound", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto L = lines(r.out);
    ASSERT_EQ(L.size(), 1u);
    EXPECT_EQ(L[0].rfind("r,Q,norm,", 0), 0u);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"nosuch"}).code, 2);
    EXPECT_EQ(run_cli({"table2", "--format", "xml"}).code, 2);
    EXPECT_EQ(run_cli({"tower", "--d", "1", "--q", "5", "--depth", "5"}).code, 2);
    EXPECT_EQ(run_cli({"rayclass", "--d", "1", "--modulus", "1001"}).code, 2);  // norm 1002001
    EXPECT_EQ(run_cli({"lseries", "--d", "1", "--B", "100000001"}).code, 2);
    EXPECT_EQ(run_cli({"rayclass", "--d", "5", "--modulus", "3"}).code, 2);
    EXPECT_EQ(run_cli({"nonvanish", "--d", "1", "--p", "3", "--q", "3", "--lambda", "2", "--k", "1"}).code, 2);

    auto pre = run_cli({"tower", "--d", "1", "--q", "7", "--depth", "1"});
    EXPECT_EQ(pre.code, 3);
    EXPECT_NE(pre.err.find("does not split"), std::string::npos);
    EXPECT_EQ(run_cli({"nonvanish", "--d", "1", "--p", "7", "--q", "3", "--lambda", "2", "--k", "1"}).code, 3);  // 7 inert
    EXPECT_EQ(run_cli({"classgroup", "--disc", "-23", "--S", "4"}).code, 2);

    EXPECT_EQ(run_cli({"selmer", "--input", "/nonexistent.json"}).code, 4);
    const auto bad = temp_file("bad.json", R"({"label":"x","q":5,"d":1,"p":3,"levels":[{"n":0,"s_f":3,"r_cl":0,"r_cls":0},{"n":1,"s_f":1,"r_cl":0,"r_cls":0}]})");
    auto rej = run_cli({"selmer", "--input", bad});
    EXPECT_EQ(rej.code, 4);
    EXPECT_NE(rej.err.find("n=1"), std::string::npos);
    std::filesystem::remove(bad);
    EXPECT_EQ(run_cli({"selmer", "--input", sample("tower.json"), "--p", "5"}).code, 2);
}

TEST(Cli, SelmerSampleReport)
{
    auto j = run_json({"selmer", "--input", sample("tower.json"), "--p", "3", "--dim", "1"});
    ASSERT_EQ(j.size(), 5u);
    for (const auto& r : j) {
        EXPECT_EQ(r["stable_from"], 2);
        EXPECT_EQ(r["verdict"], r["n"].get<int>() >= 2 ? "stable" : "before");
        EXPECT_EQ(r["satisfied"], true);
    }
    EXPECT_EQ(j[0]["config"]["iwasawa"], "mu=0 lambda=0 nu=3 n0=2");
}

TEST(Cli, OutputFile)
{
    const auto path = (std::filesystem::temp_directory_path() / ("itl_cli_out_" + std::to_string(::getpid()) + ".csv")).string();
    auto r = run_cli({"fit", "--q", "3", "--e", "3,8,21,58", "--output", path});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(lines(ss.str()).size(), 2u);
    EXPECT_NE(ss.str().find("fit,2,1,1,0"), std::string::npos);
    std::filesystem::remove(path);
}
