#pragma once

// Command-line front end.  Exit codes: 0 every check passed, 1 some check
// failed (the report carries the witness), 2 usage or input error.

#include <chrono>
#include <deque>
#include <future>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detlb/suite.hpp"

namespace detlb::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

struct Options {
    bool text = false;
    int bound = 40;
    std::string model;
    std::string model_file;
    int n = 1;
    int m = 1;
    int e = 0;
    unsigned jobs = 1;
    bool timing = false;
};

inline ChowModel pick_model(const Options& o, const std::string& fallback, ojson& inputs)
{
    if (!o.model_file.empty()) {
        if (!o.model.empty()) {
            throw ParseError("--model and --model-file cannot be combined");
        }
        inputs["model_file"] = o.model_file;
        return load_model_file(o.model_file);
    }
    const std::string name = o.model.empty() ? fallback : o.model;
    inputs["model"] = name;
    if (name == "Pn") {
        inputs["n"] = o.n;
    } else if (name == "PnxPm") {
        inputs["n"] = o.n;
        inputs["m"] = o.m;
    } else if (name == "Hirzebruch") {
        inputs["e"] = o.e;
    }
    return builtin_model(name, {o.n, o.m, o.e});
}

inline ojson components_json(const CharClass& c, int top)
{
    auto a = ojson::array();
    for (int k = 0; k <= top; ++k) {
        a.push_back({{"degree", k}, {"terms", to_json(c.component(k))}});
    }
    return a;
}

inline Report cmd_coeffs(unsigned d, bool matrix)
{
    Report r;
    r.command = "coeffs";
    r.inputs = {{"dim", d}, {"matrix", matrix}};
    CoeffTable t = coeff_table(d);
    r.result["dim"] = d;
    r.result["entries"] = strings(t.entries);
    if (matrix) {
        auto rows = ojson::array();
        for (const auto& row : coeff_matrix(d)) {
            rows.push_back(strings(row));
        }
        r.result["matrix"] = rows;
    }
    r.checks.push_back(checks::binomial_expansion(d));
    return r;
}

inline Report cmd_polyid(unsigned k)
{
    if (k > 4096) {
        throw DomainError("--k above 4096 is not supported");
    }
    Report r;
    r.command = "polyid";
    r.inputs = {{"k", k}};
    IntPoly t({0, 1});
    r.result["P_k"] = to_string(pk_poly(k));
    r.result["t*P_k"] = to_string(t * pk_poly(k));
    r.add("pk-identity", "t-times-Pk", pk_identity_check(k), {{"k", k}});
    return r;
}

inline VirtualCombo load_combo(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open combo file '" + path + "'");
    }
    try {
        auto j = nlohmann::json::parse(in);
        VirtualCombo c;
        for (const auto& t : j) {
            ComboTerm term;
            const auto& coeff = t.at("coeff");
            term.coeff = coeff.is_string() ? Integer(coeff.get<std::string>()) : Integer(coeff.get<long>());
            term.twist = t.value("twist", 0L);
            term.sym = t.value("sym", 0U);
            term.dual = t.value("dual", false);
            c.push_back(term);
        }
        if (c.empty()) {
            throw ParseError("combo file '" + path + "' has no terms");
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("combo file: " + std::string(e.what()));
    }
}

inline Report cmd_universal(unsigned d, const std::string& preset, const std::string& combo_file, bool degenerate)
{
    Report r;
    r.command = "universal";
    r.inputs = {{"dim", d}};
    VirtualCombo combo;
    bool main = false;
    if (!combo_file.empty()) {
        r.inputs["combo"] = combo_file;
        combo = load_combo(combo_file);
    } else if (preset == "main") {
        r.inputs["preset"] = preset;
        combo = main_combo(d, degenerate);
        main = true;
    } else if (preset == "deligne-d1") {
        r.inputs["preset"] = preset;
        if (d != 1) {
            throw DomainError("the deligne-d1 preset is a relative-dimension-1 combination");
        }
        combo = deligne_combo_d1();
    } else {
        throw ParseError("unknown preset '" + preset + "' (expected main or deligne-d1)");
    }
    if (degenerate) {
        r.inputs["allow_degenerate"] = true;
    }
    CharClass defect = universal_defect(d, combo);
    const int top = static_cast<int>(d) + 1;
    r.result["components"] = components_json(defect, top);
    TruncatedSeries top_part = defect.component(top);
    r.add("top-degree-vanishes", "main-identity-universal", top_part.is_zero(),
          {{"degree", top}, {"component", to_string(top_part)}});
    if (main && d >= 1) {
        TruncatedSeries below = defect.component(top - 1);
        r.add("degree-d-nonzero", "non-vacuity-control", !below.is_zero(),
              {{"degree", top - 1}, {"terms", below.terms().size()}});
    }
    return r;
}

inline Report cmd_ducrot(unsigned d, bool drop_one)
{
    Report r;
    r.command = "ducrot";
    r.inputs = {{"dim", d}, {"drop_one", drop_one}};
    auto lines = default_line_names(drop_one ? d + 1 : d + 2);
    CharClass p = drop_one ? ducrot_product(d, lines) : ducrot_defect(d, lines);
    r.result["lines"] = lines;
    r.result["product"] = to_json(p);
    if (drop_one) {
        r.add("product-nonzero", "ducrot-triviality", !p.is_zero(), {{"factors", lines.size()}});
    } else {
        r.add("product-vanishes", "ducrot-triviality", p.is_zero(), {{"factors", lines.size()}});
    }
    return r;
}

inline Report cmd_c1lambda(const Options& o, const std::string& bundle)
{
    Report r;
    r.command = "c1lambda";
    ChowModel m = pick_model(o, "PnxPm", r.inputs);
    r.inputs["bundle"] = bundle;
    Rational deg = c1_lambda(m, bundle);
    r.result["degree"] = to_string(deg);
    r.add("c1-lambda", "grr-degree", true, {{"degree", to_string(deg)}});
    return r;
}

inline Report cmd_verify_main(const Options& o, const std::string& line)
{
    Report r;
    r.command = "verify-main";
    ChowModel m = pick_model(o, "PnxPm", r.inputs);
    r.inputs["line"] = line;
    MainReport mr = verify_main_on_model(m, parse_bundle(m, line));
    auto terms = ojson::array();
    for (const auto& t : mr.terms) {
        terms.push_back({{"j", t.j}, {"c", t.coeff.get_str()}, {"degree", to_string(t.degree)}});
    }
    r.result = {{"dim", mr.dim},
                {"lambda_L", to_string(mr.lambda_l)},
                {"lhs", to_string(mr.lhs)},
                {"rhs", to_string(mr.rhs)},
                {"terms", terms}};
    r.add("main-identity", "main-identity-on-family", mr.pass,
          {{"lhs", to_string(mr.lhs)}, {"rhs", to_string(mr.rhs)}});
    return r;
}

inline Report cmd_euler(const Options& o, const std::string& bundle)
{
    Report r;
    r.command = "euler";
    ChowModel m = pick_model(o, "Pn", r.inputs);
    r.inputs["bundle"] = bundle;
    Rational chi = euler_char(m, parse_bundle(m, bundle));
    r.result["chi"] = to_string(chi);
    bool checked = false;
    std::smatch match;
    static const std::regex line_re(R"(\s*O\(\s*(-?\d+)\s*\)\s*)");
    if (o.model_file.empty() && (o.model.empty() || o.model == "Pn") && std::regex_match(bundle, match, line_re)) {
        int a = std::stoi(match[1]);
        Integer want = projective_euler_oracle(o.n, a);
        r.add("monomial-count-oracle", "hirzebruch-riemann-roch", chi == Rational(want),
              {{"chi", to_string(chi)}, {"oracle", want.get_str()}});
        checked = true;
    }
    if (!checked) {
        r.add("euler-characteristic", "hirzebruch-riemann-roch", true, {{"chi", to_string(chi)}});
    }
    return r;
}

inline Report cmd_picard(const std::string& file, const std::string& goal)
{
    Report r;
    r.command = "picard";
    r.inputs = {{"relations", file}, {"goal", goal}};
    PicardLattice lat = load_lattice_file(file);
    auto rows = ojson::array();
    for (const auto& row : lat.relations()) {
        rows.push_back(lat.render(row));
    }
    const bool ok = picard_deduce(lat, goal);
    r.result = {{"symbols", lat.symbols()}, {"hermite_basis", rows}, {"goal", lat.render(lat.parse(goal))}};
    r.add("derivable", "integral-span-membership", ok, {{"goal", goal}});
    return r;
}

inline Report cmd_rewrite(const std::string& chain, const std::string& script_file, const std::string& start,
                          const std::string& end, int corrupt)
{
    Report r;
    r.command = "rewrite";
    k::Script s;
    if (!chain.empty()) {
        r.inputs["chain"] = chain;
        s = builtin_script(chain);
    } else {
        r.inputs["script"] = script_file;
        s = k::load_script_file(script_file);
    }
    if (!start.empty()) {
        s.start = start;
        r.inputs["start"] = start;
    }
    if (!end.empty()) {
        s.end = end;
        r.inputs["end"] = end;
    }
    if (s.start.empty() || s.end.empty()) {
        throw ParseError("the script has no start/end; pass --start and --end");
    }
    if (corrupt != 0) {
        r.inputs["corrupt"] = corrupt;
        if (corrupt < 1 || static_cast<std::size_t>(corrupt) > s.steps.size()) {
            throw ParseError("--corrupt must name a step between 1 and " + std::to_string(s.steps.size()));
        }
        s = k::corrupt_script(std::move(s), static_cast<std::size_t>(corrupt - 1));
    }
    k::ChainReport cr = k::chain_verify(s);
    k::Context ctx{s.bundles};
    r.result = {{"name", s.name}, {"start", cr.start}, {"end", cr.end}, {"displays", cr.displays}};
    for (const auto& st : cr.steps) {
        ojson w;
        w["axiom"] = st.axiom;
        w["position"] = st.position;
        if (st.rtl) {
            w["dir"] = "rtl";
        }
        w["input_display"] = st.input_display;
        w["result"] = st.result;
        if (!st.expected.empty()) {
            w["expected"] = st.expected;
        }
        if (st.nf_preserved) {
            w["normal_form_preserved"] = *st.nf_preserved;
        }
        if (st.pass) {
            const std::string& shown = cr.displays[st.index];
            try {
                w["normal_form"] = k::print(k::normalize(k::parse(shown), ctx));
            } catch (const std::exception& e) {
                w["normal_form"] = std::string("unavailable: ") + e.what();
            }
        } else {
            w["error"] = st.error;
        }
        std::string name = "step " + std::to_string(st.index);
        if (!st.note.empty()) {
            name += " " + st.note;
        }
        r.add(name, st.anchor.empty() ? st.axiom : st.anchor, st.pass, std::move(w));
    }
    if (cr.first_failure == 0) {
        r.add("endpoint", s.anchor, cr.end_matches, {{"final", cr.final_normal_form}, {"end", cr.end_normal_form}});
    } else {
        r.add("endpoint", s.anchor, false, {{"reached", false}, {"first_failure", cr.first_failure}});
    }
    return r;
}

inline Report cmd_quotient(const std::string& vars, int bound)
{
    if (bound < 2 || bound > 2000) {
        throw DomainError("--bound must lie in [2, 2000]");
    }
    Report r;
    r.command = "quotient";
    r.inputs = {{"vars", vars}, {"bound", bound}};
    GradedAlgebra a = parse_graded_algebra(vars);
    FlatnessReport f = flatness_verdict(a, bound);
    FixedIdeal fi = fixed_ideal(a);
    const std::size_t n = static_cast<std::size_t>(bound) + 1;
    r.result["hs_R"] = strings(f.hs_r, n);
    r.result["hs_R0"] = strings(f.hs_r0, n);
    r.result["ratio"] = strings(f.ratio, n);
    r.result["verdict"] = to_string(f.verdict);
    r.result["basis"] = f.basis;
    r.result["fixed_ideal"] = fi.generators;
    r.result["cartier"] = fi.cartier;
    r.result["trivial_action"] = fi.trivial_action;
    if (f.first_negative >= 0) {
        r.result["first_negative"] = f.first_negative;
    }

    HilbertSeries odd = anti_invariants_hs(a, bound);
    bool split = true;
    for (std::size_t i = 0; i < n; ++i) {
        split = split && f.hs_r0[i] + odd[i] == f.hs_r[i];
    }
    r.add("parity-split", "invariant-series", split);
    if (fi.cartier) {
        const bool c = conormal_degree_zero(a, bound);
        r.result["conormal_degree_zero"] = c;
        r.add("conormal-degree-zero", "conormal-degree-zero", c);
    } else {
        r.result["conormal_degree_zero"] = nullptr;
    }
    return r;
}

inline Check run_guarded(const std::function<Check()>& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        return {"error", "internal", false, {{"exception", e.what()}}};
    }
}

inline int cmd_verify_all(const Options& o, unsigned max_dim, std::ostream& out)
{
    auto t0 = std::chrono::steady_clock::now();
    auto suite = full_suite(max_dim);
    std::vector<std::string> failed;
    std::size_t total = 0;
    auto emit = [&](const Check& c) {
        ++total;
        if (!c.pass) {
            failed.push_back(c.name);
        }
        if (o.text) {
            out << check_line(c, 36) << "\n";
        } else {
            ojson j = to_json(c);
            out << j.dump() << "\n";
        }
        out.flush();
    };
    if (o.jobs <= 1) {
        for (const auto& f : suite) {
            emit(run_guarded(f));
        }
    } else {
        // Results are emitted in suite order whatever finishes first.
        std::deque<std::future<Check>> window;
        std::size_t next = 0;
        while (next < suite.size() || !window.empty()) {
            while (next < suite.size() && window.size() < o.jobs) {
                window.push_back(std::async(std::launch::async, run_guarded, suite[next++]));
            }
            emit(window.front().get());
            window.pop_front();
        }
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (o.text) {
        out << (failed.empty() ? "overall: pass" : "overall: FAIL") << " (" << total << " checks)";
        if (o.timing) {
            out << "  (" << ms << " ms)";
        }
        out << "\n";
    } else {
        ojson s;
        s["command"] = "verify-all";
        s["inputs"] = {{"max_dim", max_dim}};
        s["checks"] = total;
        s["failed"] = failed;
        s["pass"] = failed.empty();
        if (o.timing) {
            s["wall_ms"] = ms;
        }
        out << s.dump() << "\n";
    }
    return failed.empty() ? kPass : kFail;
}

inline int emit_report(Report r, const Options& o, double ms, std::ostream& out)
{
    if (o.timing) {
        r.wall_ms = ms;
    }
    if (o.text) {
        out << to_text(r);
    } else {
        out << to_json(r).dump(2) << "\n";
    }
    return r.pass() ? kPass : kFail;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Exact checks for determinant-of-cohomology identities", "detlb"};
    app.fallthrough();
    app.require_subcommand(1);

    Options o;
    auto* json_flag = app.add_flag("--json", "JSON report (default)");
    auto* text_flag = app.add_flag("--text", o.text, "aligned text report");
    json_flag->excludes(text_flag);
    app.add_option("--bound", o.bound, "series bound for the quotient lab")->capture_default_str();
    app.add_option("--model", o.model, "built-in model: Pn, PnxPm, Hirzebruch");
    app.add_option("--model-file", o.model_file, "model description (JSON)");
    app.add_option("--n", o.n, "dimension parameter n")->check(CLI::Range(0, 12));
    app.add_option("--m", o.m, "dimension parameter m")->check(CLI::Range(0, 12));
    app.add_option("--e", o.e, "Hirzebruch twist e")->check(CLI::Range(-64, 64));
    app.add_option("--jobs", o.jobs, "worker threads for verify-all")->check(CLI::Range(1U, 64U));
    app.add_flag("--timing", o.timing, "include wall time in the report");

    unsigned dim = 1;
    bool matrix = false;
    auto* coeffs = app.add_subcommand("coeffs", "coefficient table c_j(d)");
    coeffs->add_option("--dim", dim, "relative dimension d >= 1")->required()->check(CLI::Range(1U, 64U));
    coeffs->add_flag("--matrix", matrix, "also print the substitution matrix");

    unsigned kk = 2;
    auto* polyid = app.add_subcommand("polyid", "t P_k(t) = 2^{k+1} - (2 - t)^{k+1}");
    polyid->add_option("--k", kk, "index k")->required();

    std::string preset = "main";
    std::string combo_file;
    bool degenerate = false;
    unsigned udim = 1;
    auto* universal = app.add_subcommand("universal", "universal defect of a virtual combination");
    universal->add_option("--dim", udim, "relative dimension")->required()->check(CLI::Range(0U, 8U));
    auto* preset_opt = universal->add_option("--preset", preset, "main or deligne-d1");
    universal->add_option("--combo", combo_file, "combination file (JSON)")->excludes(preset_opt);
    universal->add_flag("--allow-degenerate", degenerate, "allow d = 0 with the main preset");

    unsigned ddim = 1;
    bool drop_one = false;
    auto* ducrot = app.add_subcommand("ducrot", "product of d+2 classes (1 - e^{l_i})");
    ducrot->add_option("--dim", ddim, "relative dimension")->required()->check(CLI::Range(0U, 8U));
    ducrot->add_flag("--drop-one", drop_one, "use d+1 factors (negative control)");

    std::string bundle;
    auto* c1 = app.add_subcommand("c1lambda", "degree of the determinant of cohomology");
    c1->add_option("--bundle", bundle, "bundle expression, e.g. O(1,2) or Sym(2,Omega)")->required();

    std::string line = "O";
    auto* vmain = app.add_subcommand("verify-main", "main identity on a concrete family");
    vmain->add_option("--line", line, "line bundle expression")->capture_default_str();

    std::string ebundle;
    auto* euler = app.add_subcommand("euler", "Euler characteristic on a model over a point");
    euler->add_option("--bundle", ebundle, "bundle expression")->required();

    std::string relations;
    std::string goal;
    auto* picard = app.add_subcommand("picard", "integral consequences of line-bundle relations");
    picard->add_option("--relations", relations, "relations file (JSON)")->required();
    picard->add_option("--goal", goal, "relation to derive")->required();

    std::string chain;
    std::string script;
    std::string start;
    std::string end;
    int corrupt = 0;
    auto* rewrite = app.add_subcommand("rewrite", "check a proof chain step by step");
    auto* chain_opt = rewrite->add_option("--chain", chain, "built-in chain");
    auto* script_opt = rewrite->add_option("--script", script, "script file (JSON)");
    chain_opt->excludes(script_opt);
    rewrite->add_option("--start", start, "override the start expression");
    rewrite->add_option("--end", end, "override the end expression");
    rewrite->add_option("--corrupt", corrupt, "swap step N with its neighbour (negative control)");

    std::string vars;
    auto* quotient = app.add_subcommand("quotient", "sign action on a polynomial algebra");
    quotient->add_option("--vars", vars, "variables, e.g. \"x:1:odd,y:1:even\"")->required();

    unsigned max_dim = 3;
    auto* verify_all = app.add_subcommand("verify-all", "run the full suite");
    verify_all->add_option("--max-dim", max_dim, "largest relative dimension")->capture_default_str()->check(
        CLI::Range(1U, 6U));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kPass;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kPass;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };
    try {
        if (rewrite->parsed() && chain.empty() && script.empty()) {
            throw ParseError("rewrite needs --chain or --script");
        }
        if (*coeffs) {
            return emit_report(cmd_coeffs(dim, matrix), o, elapsed(), out);
        }
        if (*polyid) {
            return emit_report(cmd_polyid(kk), o, elapsed(), out);
        }
        if (*universal) {
            return emit_report(cmd_universal(udim, preset, combo_file, degenerate), o, elapsed(), out);
        }
        if (*ducrot) {
            return emit_report(cmd_ducrot(ddim, drop_one), o, elapsed(), out);
        }
        if (*c1) {
            return emit_report(cmd_c1lambda(o, bundle), o, elapsed(), out);
        }
        if (*vmain) {
            return emit_report(cmd_verify_main(o, line), o, elapsed(), out);
        }
        if (*euler) {
            return emit_report(cmd_euler(o, ebundle), o, elapsed(), out);
        }
        if (*picard) {
            return emit_report(cmd_picard(relations, goal), o, elapsed(), out);
        }
        if (*rewrite) {
            return emit_report(cmd_rewrite(chain, script, start, end, corrupt), o, elapsed(), out);
        }
        if (*quotient) {
            return emit_report(cmd_quotient(vars, o.bound), o, elapsed(), out);
        }
        if (*verify_all) {
            return cmd_verify_all(o, max_dim, out);
        }
    } catch (const std::exception& e) {
        ojson j;
        j["error"] = e.what();
        err << j.dump() << "\n";
        return kUsage;
    }
    return kUsage;
}

} // namespace detlb::cli
