#pragma once

// Named checks with frozen expectations, shared by `verify-all` and the
// per-command reports.

#include <functional>
#include <string>
#include <vector>

#include "detlb/builtin_scripts.hpp"
#include "detlb/bundle_expr.hpp"
#include "detlb/chowmodel.hpp"
#include "detlb/combinat.hpp"
#include "detlb/grrcheck.hpp"
#include "detlb/picard.hpp"
#include "detlb/quotientlab.hpp"
#include "detlb/report.hpp"
#include "detlb/rewrite.hpp"

namespace detlb {

inline ojson strings(const std::vector<Integer>& v)
{
    auto a = ojson::array();
    for (const auto& x : v) {
        a.push_back(x.get_str());
    }
    return a;
}

inline ojson strings(const HilbertSeries& v, std::size_t n)
{
    auto a = ojson::array();
    for (std::size_t i = 0; i < v.size() && i < n; ++i) {
        a.push_back(v[i].get_str());
    }
    return a;
}

inline k::Script builtin_script(const std::string& name)
{
    for (const auto& [n, text] : builtin_script_sources()) {
        if (n == name) {
            return k::load_script_text(std::string(text));
        }
    }
    std::string known;
    for (const auto& [n, text] : builtin_script_sources()) {
        known += (known.empty() ? "" : ", ") + std::string(n);
    }
    throw ParseError("unknown chain '" + name + "' (known: " + known + ")");
}

// Binomial coefficient count of degree-a monomials in n+1 variables, with
// Serre duality for negative a: the Euler characteristic of O(a) on P^n.
inline Integer projective_euler_oracle(int n, int a)
{
    auto monomials = [n](int deg) -> Integer {
        if (deg < 0) {
            return 0;
        }
        // Stars and bars, counted by recursion over the variables.
        std::vector<Integer> ways(deg + 1, 0);
        ways[0] = 1;
        for (int v = 0; v <= n; ++v) {
            for (int s = 1; s <= deg; ++s) {
                ways[s] += ways[s - 1];
            }
        }
        return ways[deg];
    };
    if (a >= 0) {
        return monomials(a);
    }
    Integer h = monomials(-a - n - 1);
    return n % 2 == 0 ? h : Integer(-h);
}

namespace checks {

inline Check coeff_table_frozen(unsigned d, const std::vector<long>& expected)
{
    CoeffTable t = coeff_table(d);
    std::vector<Integer> want(expected.begin(), expected.end());
    return {"coeff-table-d" + std::to_string(d), "coefficient-table", t.entries == want,
            {{"dim", d}, {"entries", strings(t.entries)}, {"expected", strings(want)}}};
}

inline Check binomial_expansion(unsigned d)
{
    return {"binomial-expansion-d" + std::to_string(d), "pk-binomial-substitution", binomial_expansion_check(d),
            {{"dim", d}, {"entries", strings(coeff_table(d).entries)}}};
}

inline Check pk_identity(unsigned kmax)
{
    auto bad = ojson::array();
    for (unsigned k = 0; k <= kmax; ++k) {
        if (!pk_identity_check(k)) {
            bad.push_back(k);
        }
    }
    return {"pk-identity-k0.." + std::to_string(kmax), "t-times-Pk", bad.empty(),
            {{"k_max", kmax}, {"failures", bad}}};
}

inline Check universal(unsigned d)
{
    CharClass defect = universal_defect(d, main_combo(d));
    TruncatedSeries top = defect.component(static_cast<int>(d) + 1);
    TruncatedSeries below = defect.component(static_cast<int>(d));
    return {"universal-defect-d" + std::to_string(d), "main-identity-universal",
            top.is_zero() && !below.is_zero(),
            {{"dim", d},
             {"top_degree_terms", top.terms().size()},
             {"degree_d_terms", below.terms().size()}}};
}

inline Check deligne_d1()
{
    CharClass defect = universal_defect(1, deligne_combo_d1());
    TruncatedSeries top = defect.component(2);
    return {"deligne-d1", "deligne-combination", top.is_zero(), {{"degree_2", to_json(top)}}};
}

inline Check ducrot(unsigned d)
{
    CharClass p = ducrot_defect(d, default_line_names(d + 2));
    return {"ducrot-d" + std::to_string(d), "ducrot-triviality", p.is_zero(), {{"dim", d}, {"factors", d + 2}}};
}

inline Check ducrot_drop_one(unsigned d)
{
    CharClass p = ducrot_product(d, default_line_names(d + 1));
    return {"ducrot-drop-one-d" + std::to_string(d), "ducrot-triviality", !p.is_zero(),
            {{"dim", d}, {"factors", d + 1}, {"top", to_string(p.component(static_cast<int>(d) + 1))}}};
}

inline Check trivial_family_o11()
{
    ChowModel m = builtin::product(1, 1);
    MainReport r = verify_main_on_model(m, parse_bundle(m, "O(1,1)"));
    auto terms = ojson::array();
    for (const auto& t : r.terms) {
        terms.push_back({{"j", t.j}, {"c", t.coeff.get_str()}, {"degree", to_string(t.degree)}});
    }
    // 16 * 2 = 32 = 7*6 - 4*2 - 2
    const bool ok = r.pass && r.lambda_l == 2 && r.lhs == 32 && r.terms.size() == 3 && r.terms[0].degree == 6
                    && r.terms[1].degree == 2 && r.terms[2].degree == -2;
    return {"trivial-family-O(1,1)", "main-identity-on-family", ok,
            {{"lambda_L", to_string(r.lambda_l)}, {"lhs", to_string(r.lhs)}, {"rhs", to_string(r.rhs)}, {"terms", terms}}};
}

inline Check trivial_family_closed_form(int range)
{
    ChowModel m = builtin::product(1, 1);
    auto bad = ojson::array();
    for (int a = -range; a <= range; ++a) {
        for (int b = -range; b <= range; ++b) {
            Rational got = c1_lambda(m, line_ch(m, {a, b}));
            if (got != Rational(b * (a + 1))) {
                bad.push_back({{"a", a}, {"b", b}, {"got", to_string(got)}});
            }
        }
    }
    return {"trivial-family-closed-form", "trivial-family-determinant", bad.empty(),
            {{"range", range}, {"failures", bad}}};
}

inline Check main_on_product_grid(int range)
{
    ChowModel m = builtin::product(1, 1);
    auto bad = ojson::array();
    for (int a = -range; a <= range; ++a) {
        for (int b = -range; b <= range; ++b) {
            MainReport r = verify_main_on_model(m, line_ch(m, {a, b}));
            if (!r.pass) {
                bad.push_back({{"a", a}, {"b", b}, {"lhs", to_string(r.lhs)}, {"rhs", to_string(r.rhs)}});
            }
        }
    }
    return {"main-identity-P1xP1-grid", "main-identity-on-family", bad.empty(), {{"range", range}, {"failures", bad}}};
}

inline Check main_on_hirzebruch(int e)
{
    ChowModel m = builtin::hirzebruch(e);
    MainReport r = verify_main_on_model(m, m.one());
    return {"main-identity-hirzebruch-e" + std::to_string(e), "main-identity-on-family", r.pass,
            {{"e", e}, {"lhs", to_string(r.lhs)}, {"rhs", to_string(r.rhs)}}};
}

inline Check hirzebruch0_matches_product()
{
    ChowModel h = builtin::hirzebruch(0);
    ChowModel p = builtin::product(1, 1);
    MainReport rh = verify_main_on_model(h, h.one());
    MainReport rp = verify_main_on_model(p, p.one());
    bool same = rh.lhs == rp.lhs && rh.terms.size() == rp.terms.size();
    for (std::size_t j = 0; same && j < rh.terms.size(); ++j) {
        same = rh.terms[j].degree == rp.terms[j].degree;
    }
    return {"hirzebruch0-vs-product", "main-identity-on-family", same, {{"lhs", to_string(rh.lhs)}}};
}

inline Check mumford_ratio(int e)
{
    ChowModel m = builtin::hirzebruch(e);
    Rational l1 = c1_lambda(m, "Omega");
    Rational l2 = c1_lambda(m, "Omega^2");
    return {"mumford-ratio-e" + std::to_string(e), "mumford-isomorphism", l2 == 13 * l1,
            {{"e", e}, {"lambda1", to_string(l1)}, {"lambda2", to_string(l2)}}};
}

inline PicardLattice mumford_lattice()
{
    PicardLattice lat({"l0", "l1", "l2"});
    lat.add_relation("16 l0 = 7 l0 - 4 l1 + l2");
    lat.add_relation("l0 = l1");
    return lat;
}

inline Check picard_mumford()
{
    PicardLattice lat = mumford_lattice();
    const bool thirteen = picard_deduce(lat, "13 l1 = l2");
    const bool control = !picard_deduce(lat, "l1 = 0");
    lat.add_relation("l2 = l1");
    const bool twelve = picard_deduce(lat, "12 l1 = 0");
    const bool control12 = !picard_deduce(lat, "6 l1 = 0");
    return {"picard-mumford", "mumford-isomorphism", thirteen && twelve && control && control12,
            {{"13 l1 = l2", thirteen}, {"12 l1 = 0", twelve}, {"l1 = 0 refused", control}, {"6 l1 = 0 refused", control12}}};
}

inline Check chain(const std::string& name)
{
    k::ChainReport r = k::chain_verify(builtin_script(name));
    return {"chain-" + name, builtin_script(name).anchor, r.pass,
            {{"steps", r.steps.size()}, {"first_failure", r.first_failure}, {"final", r.final_normal_form}}};
}

inline Check chain_corruptions(const std::string& name)
{
    k::Script s = builtin_script(name);
    auto bad = ojson::array();
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        k::ChainReport r = k::chain_verify(k::corrupt_script(s, i));
        std::size_t other = i + 1 < s.steps.size() ? i + 1 : i - 1;
        std::size_t want = std::min(i, other) + 1;
        if (r.pass || r.first_failure != want) {
            bad.push_back({{"corrupted", i + 1}, {"first_failure", r.first_failure}});
        }
    }
    return {"corruptions-" + name, "negative-control", bad.empty(), {{"steps", s.steps.size()}, {"misses", bad}}};
}

inline Check multadd(const std::vector<std::string>& lines, const std::string& q)
{
    k::MultaddResult r = k::multiadditivity_expand(lines, q);
    return {"multadd-" + std::to_string(lines.size()) + "-lines-Q=" + q, "multiadditivity", r.chain.pass,
            {{"lhs", r.lhs}, {"rhs", r.rhs}, {"first_failure", r.chain.first_failure}}};
}

inline Check quotient_verdict(const std::string& vars, FlatnessVerdict want)
{
    FlatnessReport r = flatness_verdict(parse_graded_algebra(vars));
    return {"quotient-" + vars, "flatness-of-quotient", r.verdict == want,
            {{"verdict", to_string(r.verdict)}, {"expected", to_string(want)}, {"basis", r.basis}}};
}

inline Check conormal(const std::string& vars)
{
    bool ok = conormal_degree_zero(parse_graded_algebra(vars));
    return {"conormal-" + vars, "conormal-degree-zero", ok, {{"vars", vars}}};
}

inline Check euler_projective(int n, int lo, int hi)
{
    ChowModel m = builtin::projective_space(n);
    auto bad = ojson::array();
    for (int a = lo; a <= hi; ++a) {
        Rational got = euler_char(m, line_ch(m, {a}));
        if (got != Rational(projective_euler_oracle(n, a))) {
            bad.push_back({{"a", a}, {"got", to_string(got)}});
        }
    }
    return {"euler-P" + std::to_string(n), "hirzebruch-riemann-roch", bad.empty(),
            {{"range", {lo, hi}}, {"failures", bad}}};
}

} // namespace checks

// The full suite in its fixed order.
inline std::vector<std::function<Check()>> full_suite(unsigned max_dim)
{
    using namespace checks;
    std::vector<std::function<Check()>> s;
    s.push_back([] { return coeff_table_frozen(1, {7, -4, 1}); });
    s.push_back([] { return coeff_table_frozen(2, {31, -26, 16, -6, 1}); });
    s.push_back([] { return coeff_table_frozen(3, {127, -120, 99, -64, 29, -8, 1}); });
    for (unsigned d = 1; d <= max_dim; ++d) {
        s.push_back([d] { return binomial_expansion(d); });
    }
    s.push_back([] { return pk_identity(64); });
    for (unsigned d = 1; d <= max_dim; ++d) {
        s.push_back([d] { return universal(d); });
    }
    s.push_back([] { return deligne_d1(); });
    for (unsigned d = 1; d <= std::min(max_dim, 3U); ++d) {
        s.push_back([d] { return ducrot(d); });
        s.push_back([d] { return ducrot_drop_one(d); });
    }
    s.push_back([] { return trivial_family_o11(); });
    s.push_back([] { return trivial_family_closed_form(3); });
    s.push_back([] { return main_on_product_grid(2); });
    for (int e = 0; e <= 3; ++e) {
        s.push_back([e] { return main_on_hirzebruch(e); });
    }
    s.push_back([] { return hirzebruch0_matches_product(); });
    for (int e = 1; e <= 3; ++e) {
        s.push_back([e] { return mumford_ratio(e); });
    }
    s.push_back([] { return picard_mumford(); });
    for (const char* c : {"invfunc-a-k", "invfunc-l-p", "invfunc-sym", "multadd-d1"}) {
        std::string name = c;
        s.push_back([name] { return chain(name); });
    }
    for (const char* c : {"invfunc-a-k", "invfunc-l-p"}) {
        std::string name = c;
        s.push_back([name] { return chain_corruptions(name); });
    }
    s.push_back([] { return multadd({"L1", "L2"}, "Q"); });
    s.push_back([] { return multadd({"L1", "L2"}, "O"); });
    s.push_back([] { return multadd({"L1"}, "Q"); });
    s.push_back([] { return quotient_verdict("x:1:odd", FlatnessVerdict::Free); });
    s.push_back([] { return quotient_verdict("x:1:odd,y:1:odd", FlatnessVerdict::NotFree); });
    s.push_back([] { return quotient_verdict("x:1:odd,y:1:even", FlatnessVerdict::Free); });
    s.push_back([] { return conormal("x:1:odd"); });
    s.push_back([] { return conormal("x:1:odd,y:1:even"); });
    s.push_back([] { return conormal("x:2:odd,y:1:even,z:3:even"); });
    s.push_back([] { return euler_projective(1, -3, 3); });
    s.push_back([] { return euler_projective(2, 0, 3); });
    return s;
}

} // namespace detlb
