#include <gtest/gtest.h>

#include "detlb/combinat.hpp"
#include "detlb/errors.hpp"
#include "detlb/rewrite.hpp"
#include "detlb/suite.hpp"

using namespace detlb;
using namespace detlb::k;

namespace {

const char* const kScripts[] = {"invfunc-a-k", "invfunc-l-p", "invfunc-sym", "multadd-d1"};

Script from_file(const std::string& name)
{
    return load_script_file(std::string(DETLB_DATA_DIR) + "/scripts/" + name + ".json");
}

} // namespace

TEST(Chain, ShippedScriptsVerify)
{
    for (const char* name : kScripts) {
        Script s = from_file(name);
        ChainReport r = chain_verify(s);
        EXPECT_TRUE(r.pass) << name << " first failure " << r.first_failure;
        EXPECT_TRUE(r.end_matches) << name;
        EXPECT_EQ(r.steps.size(), s.steps.size());
        EXPECT_EQ(r.displays.size(), s.steps.size() + 1);
        for (const auto& st : r.steps) {
            EXPECT_TRUE(st.pass) << name << " step " << st.index << ": " << st.error;
            EXPECT_FALSE(st.anchor.empty());
        }
    }
}

TEST(Chain, EmbeddedScriptsMatchDataFiles)
{
    for (const char* name : kScripts) {
        Script a = builtin_script(name);
        Script b = from_file(name);
        EXPECT_EQ(a.start, b.start);
        EXPECT_EQ(a.end, b.end);
        ASSERT_EQ(a.steps.size(), b.steps.size());
        for (std::size_t i = 0; i < a.steps.size(); ++i) {
            EXPECT_EQ(a.steps[i].axiom, b.steps[i].axiom);
            EXPECT_EQ(a.steps[i].position, b.steps[i].position);
        }
    }
    EXPECT_THROW(builtin_script("no-such-chain"), ParseError);
}

TEST(Chain, EverySwapOfNeighbouringStepsIsCaught)
{
    for (const char* name : kScripts) {
        Script s = from_file(name);
        for (std::size_t i = 0; i < s.steps.size(); ++i) {
            const std::size_t other = i + 1 < s.steps.size() ? i + 1 : i - 1;
            const bool same = s.steps[i].axiom == s.steps[other].axiom && s.steps[i].position == s.steps[other].position
                              && s.steps[i].rtl == s.steps[other].rtl && s.steps[i].from == s.steps[other].from;
            ChainReport r = chain_verify(corrupt_script(s, i));
            if (same) {
                EXPECT_TRUE(r.pass) << name << " " << i;
                continue;
            }
            EXPECT_FALSE(r.pass) << name << " swap " << i + 1;
            EXPECT_EQ(r.first_failure, std::min(i, other) + 1) << name << " swap " << i + 1;
        }
        EXPECT_THROW(corrupt_script(s, s.steps.size()), DomainError);
    }
}

TEST(Chain, BrokenStepsFailWithoutThrowing)
{
    Script s;
    s.start = "P[1](L)";
    s.end = "4*O - L";
    s.steps.push_back({"pk-def", 1, "", std::string("2*O + (2*O - L)"), {}, false});
    EXPECT_TRUE(chain_verify(s).pass);

    Script unknown = s;
    unknown.steps[0].axiom = "frobnicate";
    ChainReport r = chain_verify(unknown);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.first_failure, 1U);
    EXPECT_NE(r.steps[0].error.find("unknown axiom"), std::string::npos);

    Script far = s;
    far.steps[0].position = 7;
    r = chain_verify(far);
    EXPECT_EQ(r.first_failure, 1U);
    EXPECT_NE(r.steps[0].error.find("does not apply"), std::string::npos);

    Script reversed = s;
    reversed.steps[0].rtl = true;
    EXPECT_EQ(chain_verify(reversed).first_failure, 1U);

    Script wrong_expect = s;
    wrong_expect.steps[0].expect = "3*O - L";
    EXPECT_EQ(chain_verify(wrong_expect).first_failure, 1U);

    Script ahead = s;
    ahead.steps[0].from = 3;
    EXPECT_EQ(chain_verify(ahead).first_failure, 1U);

    // Right steps, wrong destination.
    EXPECT_FALSE(chain_verify(s, s.start, "4*O").pass);
    EXPECT_FALSE(chain_verify(s, s.start, "4*O").end_matches);
}

TEST(Chain, NonFormalAxiomsAreNotHeldToTheNormalForm)
{
    // A declared axiom that changes the class is accepted as geometric input.
    Script s;
    s.start = "lambda(pull_iota(L))";
    s.end = "lambda(N)";
    s.axioms.push_back({"adjunction", "pull_iota(L)", "N", "adjunction", false});
    s.steps.push_back({"adjunction", 1, "", std::string("lambda(N)"), {}, false});
    EXPECT_TRUE(chain_verify(s).pass);
    s.axioms[0].formal = true;
    ChainReport r = chain_verify(s);
    EXPECT_FALSE(r.pass);
    ASSERT_EQ(r.steps.size(), 1U);
    EXPECT_EQ(r.steps[0].nf_preserved, false);
}

TEST(Script, JsonForms)
{
    Script bare = load_script_text(R"([{"axiom": "pk-def", "position": 1}, {"axiom": "cancel", "position": "*"}])");
    ASSERT_EQ(bare.steps.size(), 2U);
    EXPECT_EQ(bare.steps[1].position, 0U);
    EXPECT_TRUE(chain_verify(bare, "P[1](L)", "4*O - L").pass);

    Script full = load_script_text(R"({"name": "x", "bundles": ["F"], "dim": 3, "start": "F", "end": "F",
        "axioms": [{"name": "a", "lhs": "F", "rhs": "F"}],
        "steps": [{"axiom": "a", "dir": "rtl", "from": 0, "expect": "F", "note": "n"}]})");
    EXPECT_EQ(full.dim, 3U);
    EXPECT_EQ(full.bundles.count("F"), 1U);
    EXPECT_TRUE(full.steps[0].rtl);
    EXPECT_EQ(full.steps[0].from, 0U);
    EXPECT_TRUE(chain_verify(full).pass);

    for (const char* bad : {R"([{"axiom": "cancel", "position": 0}])", R"([{"axiom": "cancel", "position": "x"}])",
                            R"([{"axiom": "cancel", "dir": "up"}])", R"([{"axiom": "cancel", "from": -1}])",
                            R"([{"position": 1}])", R"("steps")", R"({"steps": )", R"({"start": "O"})"}) {
        EXPECT_THROW(load_script_text(bad), ParseError) << bad;
    }
    EXPECT_THROW(load_script_file("/nonexistent/script.json"), ParseError);
}

TEST(Pattern, IntegerVariables)
{
    PatternAxiom ax("pushforward-sym", "", parse("push_p(Nt{-1}^?j)"), parse("Sym[?j](N{-1})"), false);
    auto r = apply_axiom(parse("push_p(Nt{-1}^3)"), ax, 1, false);
    ASSERT_TRUE(r);
    EXPECT_EQ(print(r->result), "Sym[3](N{-1})");
    r = apply_axiom(parse("push_p(Nt{-1})"), ax, 1, false);
    ASSERT_TRUE(r);
    EXPECT_EQ(print(r->result), "Sym[1](N{-1})");
    r = apply_axiom(parse("push_p(O)"), ax, 1, false);
    ASSERT_TRUE(r);
    EXPECT_EQ(print(r->result), "Sym[0](N{-1})");
    r = apply_axiom(parse("Sym[2](N{-1})"), ax, 1, true);
    ASSERT_TRUE(r);
    EXPECT_EQ(print(r->result), "push_p(Nt{-1}^2)");
    EXPECT_FALSE(apply_axiom(parse("push_p(Mt{-1}^3)"), ax, 1, false));
}

TEST(Pattern, CommutativeMatching)
{
    PatternAxiom ax("swap", "", parse("?a*(O - ?b)"), parse("?a - ?a*?b"), true);
    auto r = apply_axiom(parse("(O - Q)*L"), ax, 1, false);
    ASSERT_TRUE(r);
    EXPECT_TRUE(canon_equal(r->result, parse("L - L*Q")));
    EXPECT_EQ(count_sites(parse("lambda((O - Q)*L) * lambda(M*(O - L))"), ax, false), 2U);

    PatternAxiom unbound("bad", "", parse("?a"), parse("?a*?c"), false);
    EXPECT_THROW(apply_axiom(parse("L"), unbound, 1, false), DomainError);
}

TEST(Multadd, Variants)
{
    for (auto [lines, q] : std::vector<std::pair<std::vector<std::string>, std::string>>{
             {{"L1"}, "Q"}, {{"L1", "L2"}, "Q"}, {{"L1", "L2"}, "O"}, {{"L1", "L2", "L3"}, "Q"}}) {
        MultaddResult r = multiadditivity_expand(lines, q);
        EXPECT_TRUE(r.chain.pass) << r.lhs << " failed at " << r.chain.first_failure;
        EXPECT_EQ(r.rhs, "lambda(0)");
    }
    EXPECT_THROW(multiadditivity_expand({}, "Q"), DomainError);
}

TEST(Multadd, WrongDimensionIsRejected)
{
    // Three line factors but a one-dimensional fibre: the multiadditivity
    // step has no licence to fire.
    Script s = multadd_script({"L1", "L2", "L3"}, "Q");
    s.dim = 1;
    ChainReport r = chain_verify(s);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.first_failure, 5U);
}

// After t P_k(t) = 2^{k+1} - (2 - t)^{k+1} with t = O - L, the determinant
// exponents are the coefficients of 2^{k+1} - (1 + x)^{k+1}.
TEST(PkStep, ExponentsMatchPolynomialExpansion)
{
    AxiomRegistry reg = native_axioms(1);
    const Axiom& pk_id = *reg.find("pk-identity");
    for (unsigned k = 0; k <= 6; ++k) {
        const std::string ks = std::to_string(k);
        Expr start = parse("lambda(M*((O - L)*P[" + ks + "](O - L)))");
        auto r = apply_axiom(start, pk_id, 1, false);
        ASSERT_TRUE(r) << k;

        IntPoly x = IntPoly::t();
        IntPoly want = IntPoly::constant(pow2(k + 1)) - (IntPoly::constant(1) + x).pow(k + 1);
        std::vector<Term> terms;
        for (int j = 0; j <= want.degree(); ++j) {
            if (want[static_cast<std::size_t>(j)] == 0) {
                continue;
            }
            Expr mono = j == 0 ? atom("M") : tensor({atom("M"), power(atom("L"), j)});
            terms.push_back({want[static_cast<std::size_t>(j)], mono});
        }
        Expr expected = lambda(sum(terms));
        EXPECT_TRUE(nf_equal(r->result, expected)) << k << ": " << print(normalize(r->result));
        EXPECT_TRUE(nf_equal(start, expected)) << k;
        // lambda(M) appears with exponent 2^{k+1} - 1.
        EXPECT_EQ(want[0], pow2(k + 1) - 1);
    }
}
