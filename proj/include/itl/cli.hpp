#pragma once

/*
 * Command-line front end.  run() parses argv-style arguments, executes one
 * subcommand and writes CSV or JSON records.  Every record ends with the
 * resolved configuration; output depends only on the arguments.
 *
 * Exit codes: 0 ok, 2 invalid configuration, 3 precondition violated,
 * 4 tower file rejected, 1 anything unexpected.
 */

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "itl/classforms.hpp"
#include "itl/cmsearch.hpp"
#include "itl/csv.hpp"
#include "itl/errors.hpp"
#include "itl/lvaluation.hpp"
#include "itl/rayclass.hpp"
#include "itl/selmerrank.hpp"

namespace itl::cli {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2, exit_precondition = 3, exit_ingestion = 4 };

inline constexpr int max_tower_depth = 4;
inline constexpr long long max_modulus_norm = 1000000;
inline constexpr unsigned long long max_truncation = 100000000ULL;

/// Invalid flags, out-of-range values or a hard cap hit.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string int_list(const std::vector<long long>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline Json ints(const std::vector<Int>& v)
{
    Json a = Json::array();
    for (const auto& x : v) a.push_back(x.fits_slong_p() ? Json(x.get_si()) : Json(x.get_str()));
    return a;
}

inline Json integer(const Int& x) { return x.fits_slong_p() ? Json(x.get_si()) : Json(x.get_str()); }

inline FieldTag field(int d)
{
    if (std::find(class_number_one_d.begin(), class_number_one_d.end(), d) == class_number_one_d.end())
        throw config_error("--d " + std::to_string(d) + ": must be one of 1,2,3,7,11,19,43,67,163");
    return FieldTag(d);
}

inline OkElement element(const std::string& text, FieldTag tag, const char* flag)
{
    OkElement e;
    try {
        e = parse_element(text, tag);
    } catch (const precondition_error& ex) {
        throw config_error(std::string(flag) + " '" + text + "': " + ex.what());
    }
    if (e.tag().d() != tag.d()) throw config_error(std::string(flag) + " '" + text + "': element of another field than --d");
    return e;
}

inline OkElement modulus(const std::string& text, FieldTag tag)
{
    OkElement h = element(text, tag, "--modulus");
    if (h.is_zero()) throw config_error("--modulus must be nonzero");
    if (h.norm() > from_ll(max_modulus_norm))
        throw config_error("--modulus has norm " + h.norm().get_str() + ", above the hard cap 10^6");
    return h;
}

inline Json structure(const RayClassGroup& G)
{
    Json j;
    j["modulus"] = to_text(G.modulus());
    j["invariants"] = ints(G.invariants());
    j["order"] = integer(G.degree());
    return j;
}

inline std::string form_text(const QuadForm& f) { return f.to_string(); }

}  // namespace detail

/// Options shared by every subcommand plus the per-command resolved config.
struct RunConfig {
    std::string command;
    std::string format{"csv"};
    std::string output;
    Json resolved = Json::object();
};

class Runner {
public:
    Runner() : app_("Class groups, ray class fields and fine Selmer ranks over imaginary quadratic fields", "itl")
    {
        app_.require_subcommand(1);
        app_.fallthrough();
        app_.add_option("--format", cfg_.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        app_.add_option("--output", cfg_.output, "Write records to this file instead of stdout");
        add_table2();
        add_rayclass();
        add_tower();
        add_cmsearch();
        add_nonvanish();
        add_lseries();
        add_classgroup();
        add_selmer();
        add_fit();
    }

    int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
    {
        try {
            std::vector<std::string> rev(args.rbegin(), args.rend());
            app_.parse(rev);
        } catch (const CLI::CallForHelp&) {
            out << app_.help();
            return exit_ok;
        } catch (const CLI::CallForAllHelp&) {
            out << app_.help("", CLI::AppFormatMode::All);
            return exit_ok;
        } catch (const CLI::ParseError& e) {
            err << "invalid configuration: " << e.what() << "\n";
            return exit_config;
        }

        Json records = Json::array();
        std::vector<std::string> header;
        try {
            for (auto* sub : app_.get_subcommands()) {
                cfg_.command = sub->get_name();
                cfg_.resolved = Json::object();
                cfg_.resolved["command"] = cfg_.command;
                handlers_.at(cfg_.command)(records, header);
            }
        } catch (const config_error& e) {
            err << "invalid configuration: " << e.what() << "\n";
            return exit_config;
        } catch (const tower_error& e) {
            err << "tower file rejected: " << e.what() << "\n";
            return exit_ingestion;
        } catch (const schema_error& e) {
            err << "input rejected: " << e.what() << "\n";
            return exit_ingestion;
        } catch (const precondition_error& e) {
            err << "precondition violated: " << e.what() << "\n";
            return exit_precondition;
        } catch (const std::exception& e) {
            err << "internal error: " << e.what() << "\n";
            return exit_internal;
        }

        cfg_.resolved["format"] = cfg_.format;
        for (auto& r : records) r["config"] = cfg_.resolved;
        header.push_back("config");

        std::ostringstream buf;
        if (cfg_.format == "json") {
            buf << records.dump(2) << "\n";
        } else {
            for (auto& r : records) r["config"] = cfg_.resolved.dump();
            csv::write_records(buf, records, header);
        }
        if (cfg_.output.empty()) {
            out << buf.str();
        } else {
            std::ofstream f(cfg_.output, std::ios::binary);
            if (!f || !(f << buf.str())) {
                err << "invalid configuration: cannot write " << cfg_.output << "\n";
                return exit_config;
            }
        }
        return exit_ok;
    }

private:
    using Handler = std::function<void(Json&, std::vector<std::string>&)>;

    CLI::App* sub(const std::string& name, const std::string& help, Handler h)
    {
        handlers_[name] = std::move(h);
        return app_.add_subcommand(name, help);
    }

    void add_table2()
    {
        sub("table2", "Auxiliary curve table: conductors and ray class field degrees for the nine fields", [this](Json& rec, auto& header) {
            header = {"d", "bad_primes", "norm", "degree", "condition_c", "source", "flag"};
            for (const auto& row : table2()) {
                Json r;
                r["d"] = row.d;
                Json primes = Json::array();
                for (const auto& p : row.bad_primes) primes.push_back(to_text(p));
                r["bad_primes"] = primes;
                r["norm"] = detail::integer(row.norm);
                r["degree"] = detail::integer(row.degree);
                r["condition_c"] = row.condition_c.satisfied;
                r["source"] = to_string(row.source);
                r["flag"] = row.flag;
                rec.push_back(std::move(r));
            }
            cfg_.resolved["search_r"] = 1;
        });
    }

    void add_rayclass()
    {
        auto* s = sub("rayclass", "Ray class group mod h: invariants, generators, degree", [this](Json& rec, auto& header) {
            const FieldTag tag = detail::field(d_);
            const OkElement h = detail::modulus(modulus_, tag);
            cfg_.resolved["d"] = d_;
            cfg_.resolved["modulus"] = to_text(h);
            const RayClassGroup G(h);
            header = {"modulus", "invariants", "order", "generators", "unit_image_order"};
            Json r = detail::structure(G);
            Json gens = Json::array();
            for (const auto& g : G.generators()) gens.push_back(to_text(g));
            r["generators"] = gens;
            r["unit_image_order"] = detail::integer(G.unit_image_order());
            rec.push_back(std::move(r));
        });
        s->add_option("--d", d_, "Field Q(sqrt(-d))")->required();
        s->add_option("--modulus", modulus_, "Modulus element, e.g. 2+w or (1+w)/2")->required();
    }

    void add_tower()
    {
        auto* s = sub("tower", "Minus quotients along the anticyclotomic Z_q-tower", [this](Json& rec, auto& header) {
            const FieldTag tag = detail::field(d_);
            if (depth_ < 0 || depth_ > max_tower_depth) throw config_error("--depth " + std::to_string(depth_) + " outside the hard cap [0, 4]");
            cfg_.resolved["d"] = d_;
            cfg_.resolved["q"] = q_;
            cfg_.resolved["depth"] = depth_;
            cfg_.resolved["modulus"] = "q^(n+1)";
            const auto T = anticyclotomic_tower(tag, from_ll(q_), depth_, max_tower_depth);
            header = {"n", "order", "invariants", "layer_degree", "cyclic"};
            for (const auto& lv : T.levels) {
                Json r;
                r["n"] = lv.n;
                r["order"] = detail::integer(lv.order);
                r["invariants"] = detail::ints(lv.invariants);
                r["layer_degree"] = detail::integer(lv.layer_degree);
                r["cyclic"] = lv.cyclic;
                rec.push_back(std::move(r));
            }
        });
        s->add_option("--d", d_, "Field Q(sqrt(-d))")->required();
        s->add_option("--q", q_, "Split prime q >= 5")->required();
        s->add_option("--depth", depth_, "Last level n (at most 4)")->required();
    }

    void add_cmsearch()
    {
        auto* s = sub("cmsearch", "Twist candidates Q = 4r + sqrt(-d) with 16r^2 + d prime", [this](Json& rec, auto& header) {
            const FieldTag tag = detail::field(d_);
            if (rbound_ < 1) throw config_error("--rbound must be >= 1");
            if (16 * rbound_ * rbound_ + d_ > max_modulus_norm) throw config_error("--rbound gives conductor norms above the hard cap 10^6");
            cfg_.resolved["d"] = d_;
            cfg_.resolved["rbound"] = rbound_;
            header = {"r", "Q", "norm", "alpha", "degree", "congruence_ok", "condition_c", "offending"};
            for (const auto& c : find_twist_candidates(tag, rbound_)) {
                Json r;
                r["r"] = detail::integer(c.r);
                r["Q"] = to_text(c.Q.generator);
                r["norm"] = detail::integer(c.Q.generator.norm());
                r["alpha"] = to_text(c.alpha);
                r["degree"] = detail::integer(c.degree);
                r["congruence_ok"] = c.congruence_ok;
                r["condition_c"] = c.condition_c.satisfied;
                r["offending"] = detail::ints(c.condition_c.offending);
                rec.push_back(std::move(r));
            }
        });
        s->add_option("--d", d_, "Field Q(sqrt(-d)), d >= 7")->required();
        s->add_option("--rbound", rbound_, "Largest r searched")->required();
    }

    void add_nonvanish()
    {
        auto* s = sub("nonvanish", "Euler factor N(l) - l^k phi0 eta mod p over q-power characters eta, and N1", [this](Json& rec, auto& header) {
            const FieldTag tag = detail::field(d_);
            const OkElement lam = detail::element(lambda_, tag, "--lambda");
            if (p_ == q_) throw config_error("--p and --q must differ");
            if (mmax_ < 0 || mmax_ > 5) throw config_error("--mmax must lie in [0, 5]");
            const Int P = from_ll(p_), Q = from_ll(q_), K = from_ll(k_);
            const ResidueEmbedding E = root_.empty() ? make_residue_embedding(tag, P) : make_residue_embedding(tag, P, Int(root_));
            const KummerFieldPtr F = residue_field(P, Q, mmax_);
            const FinFieldElt phi0 = FinFieldElt::scalar(F, from_ll(phi0_));
            if (phi0.is_zero()) throw precondition_error("--phi0 must be nonzero mod p");
            const int n1 = compute_N1(E, lam, K, phi0, Q);

            cfg_.resolved["d"] = d_;
            cfg_.resolved["p"] = p_;
            cfg_.resolved["q"] = q_;
            cfg_.resolved["lambda"] = to_text(lam);
            cfg_.resolved["k"] = k_;
            cfg_.resolved["phi0"] = phi0_;
            cfg_.resolved["mmax"] = mmax_;
            cfg_.resolved["embedding_s"] = E.s.get_str();
            cfg_.resolved["residue_field_degree"] = detail::integer(F->degree());
            cfg_.resolved["roots_of_unity"] = "lex-smallest primitive root";
            header = {"m", "characters", "vanishing", "N1"};
            for (int m = 0; m <= mmax_; ++m) {
                const FinFieldElt zeta = unity_image(P, Q, m).lift(F);
                const long long n = to_ll(ipow(Q, static_cast<unsigned long>(m)));
                long long chars = 0, vanish = 0;
                FinFieldElt eta = FinFieldElt::one(F);
                for (long long j = 0; j < n; ++j, eta = eta * zeta) {
                    if (m > 0 && j % q_ == 0) continue;
                    ++chars;
                    vanish += euler_factor_vanishes(E, lam, K, phi0, eta);
                }
                Json r;
                r["m"] = m;
                r["characters"] = chars;
                r["vanishing"] = vanish;
                r["N1"] = n1;
                rec.push_back(std::move(r));
            }
        });
        s->add_option("--d", d_, "Field Q(sqrt(-d))")->required();
        s->add_option("--p", p_, "Odd prime split in K")->required();
        s->add_option("--q", q_, "Odd prime q != p")->required();
        s->add_option("--lambda", lambda_, "Element lambda of O_K")->required();
        s->add_option("--k", k_, "Infinity-type exponent k")->required();
        s->add_option("--phi0", phi0_, "Image of phi0 in F_p")->capture_default_str();
        s->add_option("--mmax", mmax_, "Largest m scanned (at most 5)")->capture_default_str();
        s->add_option("--root", root_, "Square root s of -d mod p fixing the prime above p (default: smaller root)");
    }

    void add_lseries()
    {
        auto* s = sub("lseries", "Imprimitive Hecke L-value L_h(chi, s) by Dirichlet sum and Euler product", [this](Json& rec, auto& header) {
            const FieldTag tag = detail::field(d_);
            const OkElement h = detail::modulus(modulus_, tag);
            if (B_ < 1 || B_ > max_truncation) throw config_error("--B " + std::to_string(B_) + " outside the hard cap [1, 10^8]");
            if (!(s_ > 1)) throw config_error("--s must exceed 1");
            const RayClassGroup G(h);
            CharacterSpec chi = trivial_character(G);
            if (!chi_.empty()) {
                if (chi_.size() != G.invariants().size())
                    throw config_error("--chi needs " + std::to_string(G.invariants().size()) + " exponents for invariants of this group");
                for (std::size_t i = 0; i < chi_.size(); ++i) chi.exponents[i] = mod_floor(from_ll(chi_[i]), G.invariants()[i]);
                chi.order = element_order(chi.exponents, G.invariants());
            }
            cfg_.resolved["d"] = d_;
            cfg_.resolved["modulus"] = to_text(h);
            cfg_.resolved["invariants"] = detail::ints(G.invariants());
            cfg_.resolved["chi"] = detail::ints(chi.exponents);
            cfg_.resolved["s"] = s_;
            cfg_.resolved["B"] = B_;
            cfg_.resolved["method"] = method_;
            header = {"method", "value", "B", "error", "chi_order"};
            for (const char* m : {"dirichlet", "euler"}) {
                if (method_ != "both" && method_ != m) continue;
                const auto v = evaluate_imprimitive_L(G, chi, s_, B_, std::string(m) == "euler" ? LMethod::euler : LMethod::dirichlet);
                Json r;
                r["method"] = m;
                r["value"] = v.real ? Json(v.value.real()) : Json::array({v.value.real(), v.value.imag()});
                r["B"] = v.B;
                r["error"] = v.error;
                r["chi_order"] = detail::integer(chi.order);
                rec.push_back(std::move(r));
            }
        });
        s->add_option("--d", d_, "Field Q(sqrt(-d))")->required();
        s->add_option("--modulus", modulus_, "Modulus h")->capture_default_str();
        s->add_option("--s", s_, "Real s > 1")->capture_default_str();
        s->add_option("--B", B_, "Truncation: ideal norms (Dirichlet) or prime norms (Euler) up to B")->capture_default_str();
        s->add_option("--chi", chi_, "Character exponents w.r.t. the group generators (default trivial)")->delimiter(',');
        s->add_option("--method", method_, "dirichlet, euler or both")->check(CLI::IsMember({"dirichlet", "euler", "both"}))->capture_default_str();
    }

    void add_classgroup()
    {
        auto* s = sub("classgroup", "Class group of primitive forms of discriminant D, optionally modulo primes above S", [this](Json& rec, auto& header) {
            cfg_.resolved["disc"] = disc_;
            cfg_.resolved["S"] = S_;
            if (disc_ >= 0 || ((disc_ % 4) + 4) % 4 > 1) throw config_error("--disc must be negative and 0 or 1 mod 4");
            if (-disc_ > max_form_discriminant) throw config_error("--disc beyond the hard cap |D| <= 10^8");
            for (long long ell : S_)
                if (ell < 2 || !is_prime(from_ll(ell))) throw config_error("--S entries must be primes");
            const auto G = class_group(disc_);
            header = {"discriminant", "invariants", "order", "generators", "s_invariants", "s_order", "primes_above_S"};
            Json r;
            r["discriminant"] = disc_;
            r["invariants"] = detail::ints(G.invariants);
            r["order"] = detail::integer(G.order());
            Json gens = Json::array();
            for (const auto& f : G.generators) gens.push_back(detail::form_text(f));
            r["generators"] = gens;
            const auto CS = s_class_group(disc_, S_);
            r["s_invariants"] = detail::ints(CS.invariants);
            r["s_order"] = detail::integer(CS.order());
            r["primes_above_S"] = CS.primes_above_S;
            rec.push_back(std::move(r));
        });
        s->add_option("--disc", disc_, "Negative discriminant D")->required();
        s->add_option("--S", S_, "Rational primes whose prime ideals are inverted")->delimiter(',');
    }

    void add_selmer()
    {
        auto* s = sub("selmer", "Rank-gap reports and Sel0 stabilization for an ingested tower file", [this](Json& rec, auto& header) {
            const TowerSeries t = ingest_tower(input_);
            if (sel_p_ && *sel_p_ != t.p) throw config_error("--p " + std::to_string(*sel_p_) + " disagrees with the file's p = " + std::to_string(t.p));
            if (dim_ && *dim_ != t.d) throw config_error("--dim " + std::to_string(*dim_) + " disagrees with the file's d = " + std::to_string(t.d));
            cfg_.resolved["input"] = input_;
            cfg_.resolved["p"] = t.p;
            cfg_.resolved["q"] = t.q;
            cfg_.resolved["dim"] = t.d;
            const auto rep = analyze_tower(t);
            if (rep.fit) {
                cfg_.resolved["iwasawa"] = "mu=" + rep.fit->mu.get_str() + " lambda=" + rep.fit->lambda.get_str() + " nu=" +
                                           rep.fit->nu.get_str() + " n0=" + std::to_string(rep.fit->n0);
            }
            rec = report_records(t, rep);
            for (auto it = rec[0].begin(); it != rec[0].end(); ++it) header.push_back(it.key());
        });
        s->add_option("--input", input_, "Tower JSON file")->required();
        s->add_option("--p", sel_p_, "Expected p (checked against the file)");
        s->add_option("--dim", dim_, "Expected abelian-variety dimension (checked against the file)");
    }

    void add_fit()
    {
        auto* s = sub("fit", "Fit e_n = mu q^n + lambda n + nu exactly on the longest tail", [this](Json& rec, auto& header) {
            cfg_.resolved["q"] = q_;
            cfg_.resolved["e"] = detail::int_list(e_);
            if (q_ < 2 || !is_prime(from_ll(q_))) throw config_error("--q must be prime");
            if (e_.size() < 4) throw config_error("--e needs at least 4 values");
            std::vector<Int> e;
            for (long long x : e_) e.push_back(from_ll(x));
            header = {"status", "mu", "lambda", "nu", "n0"};
            Json r;
            if (auto f = fit_iwasawa(e, q_)) {
                r["status"] = "fit";
                r["mu"] = detail::integer(f->mu);
                r["lambda"] = detail::integer(f->lambda);
                r["nu"] = detail::integer(f->nu);
                r["n0"] = f->n0;
            } else {
                r["status"] = "no_fit";
                r["mu"] = nullptr;
                r["lambda"] = nullptr;
                r["nu"] = nullptr;
                r["n0"] = nullptr;
            }
            rec.push_back(std::move(r));
        });
        s->add_option("--q", q_, "Prime q of the Z_q-tower")->required();
        s->add_option("--e", e_, "e_0,e_1,... (at least 4 values)")->delimiter(',')->required();
    }

    CLI::App app_;
    RunConfig cfg_;
    std::map<std::string, Handler> handlers_;

    int d_{1};
    std::string modulus_{"1"};
    long long q_{0}, p_{0}, k_{0}, phi0_{1};
    int depth_{0};
    long rbound_{1};
    int mmax_{3};
    std::string lambda_, root_;
    double s_{2.0};
    unsigned long long B_{100000};
    std::vector<long long> chi_;
    std::string method_{"both"};
    long long disc_{0};
    std::vector<long long> S_;
    std::string input_;
    std::optional<long long> sel_p_, dim_;
    std::vector<long long> e_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) { return Runner().run(args, out, err); }

}  // namespace itl::cli
