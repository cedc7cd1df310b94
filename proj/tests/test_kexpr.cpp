#include <algorithm>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "detlb/errors.hpp"
#include "detlb/kexpr.hpp"
#include "detlb/knormal.hpp"
#include "detlb/rewrite.hpp"

using namespace detlb;
using namespace detlb::k;

namespace {

std::string nf(const std::string& s, const Context& ctx = {}) { return print(normalize(parse(s), ctx)); }

class RandomExpr {
public:
    explicit RandomExpr(unsigned seed) : rng_(seed) {}

    Expr k_class(int depth)
    {
        if (depth <= 0 || pick(0, 3) == 0) {
            return leaf();
        }
        switch (pick(0, 11)) {
        case 0: {
            std::vector<Term> terms;
            const int n = pick(1, 3);
            for (int i = 0; i < n; ++i) {
                int c = pick(-2, 2);
                terms.push_back({c == 0 ? 1 : c, k_class(depth - 1)});
            }
            return sum(terms);
        }
        case 1:
            return tensor({k_class(depth - 1), k_class(depth - 1)});
        case 2:
            return power(leaf(), pick(-2, 3));
        case 3:
            return dual(k_class(depth - 1));
        case 4:
            return twist(k_class(depth - 1));
        case 5:
            return k::apply("pull_f", k_class(depth - 1));
        case 6:
            return pk(pick(0, 2), leaf());
        case 7:
            return k::apply("push_p", k_class(depth - 1));
        case 8:
            return sym(pick(0, 2), pick(0, 1) ? leaf() : twist(leaf()));
        case 9:
            return power(sum({{1, unit()}, {-1, leaf()}}), pick(0, 3));
        case 10: {
            Expr t = leaf();
            return tensor({t, pk(pick(0, 2), t)});
        }
        default:
            return sum({{1, unit()}, {-1, leaf()}});
        }
    }

    Expr lambda_class(int depth) { return lambda(k_class(depth - 1)); }

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::mt19937& rng() { return rng_; }

private:
    Expr leaf()
    {
        static const char* names[] = {"L", "M", "Q"};
        if (pick(0, 4) == 0) {
            return unit();
        }
        return atom(names[pick(0, 2)]);
    }

    std::mt19937 rng_;
};

// Reverses the children of every sum and tensor.
Expr shuffled(const Expr& e)
{
    std::vector<Expr> kids;
    for (const auto& c : e->kids) {
        kids.push_back(shuffled(c));
    }
    if (e->kind == Kind::Sum) {
        std::vector<Term> terms;
        for (std::size_t i = kids.size(); i-- > 0;) {
            terms.push_back({e->coeffs[i], kids[i]});
        }
        return sum(terms);
    }
    if (e->kind == Kind::Tensor) {
        std::reverse(kids.begin(), kids.end());
        return tensor(kids);
    }
    return with_kids(e, kids);
}

} // namespace

TEST(KExpr, ParsePrintRoundTrip)
{
    for (const char* s : {"O", "L{-1}", "L^v", "L^-2", "2*L - M", "(O - L)*(O - Q)", "Sym[2](N{-1})",
                          "P[3](L)", "lambda(L*(O - M))", "pull_f(L)^?j", "push_p(Nt{-1}^?j)", "0",
                          "-L + O", "lambda(F)^-1"}) {
        Expr e = parse(s);
        EXPECT_EQ(print(e), s);
        EXPECT_TRUE(equal(parse(print(e)), e)) << s;
    }
}

TEST(KExpr, ParseErrors)
{
    for (const char* s : {"", "(L", "L{-2}", "Sym[2]L", "L +", "lambda L", "L)"}) {
        EXPECT_THROW(parse(s), ParseError) << s;
    }
}

TEST(KNormal, CanonicalExamples)
{
    EXPECT_EQ(print(canon(parse("F{-1}{-1}"))), "F");
    EXPECT_EQ(print(canon(parse("L^v^v"))), "L");
    EXPECT_EQ(print(canon(parse("2*O - (O + L{-1})"))), "-L{-1} + O");
    EXPECT_EQ(print(canon(parse("L^2*L^-1"))), "L");
    EXPECT_TRUE(canon_equal(parse("M + L"), parse("L + M")));
    EXPECT_FALSE(canon_equal(parse("L"), parse("L{-1}")));
}

TEST(KNormal, NormalFormExamples)
{
    EXPECT_EQ(nf("(O - L)*(O - Q)"), "-L + L*Q + O - Q");
    // P_2(t) = 12 - 6t + t^2.
    EXPECT_EQ(nf("P[2](L)"), "-6*L + L^2 + 12*O");
    EXPECT_EQ(nf("lambda(2*L - M)"), "lambda(L)^2*lambda(M)^-1");
    EXPECT_EQ(nf("lambda(L*(O - M))"), "lambda(L)*lambda(L*M)^-1");
    // The sign twist is additive inverse inside a determinant.
    EXPECT_EQ(nf("lambda(L{-1})"), "lambda(L)^-1");
    Context ctx{{"F"}};
    EXPECT_EQ(nf("lambda(F{-1})", ctx), "lambda(F)^-1");
    EXPECT_EQ(nf("Sym[2](F)", ctx), "Sym[2](F)");
}

TEST(KNormal, InvolutionsAndIdempotence)
{
    RandomExpr gen(5);
    for (int i = 0; i < 300; ++i) {
        Expr e = gen.k_class(4);
        Expr n = normalize(e);
        EXPECT_TRUE(equal(normalize(n), n)) << print(e);
        EXPECT_TRUE(nf_equal(dual(dual(e)), e)) << print(e);
        EXPECT_TRUE(nf_equal(twist(twist(e)), e)) << print(e);
        EXPECT_TRUE(equal(canon(canon(e)), canon(e))) << print(e);
    }
}

TEST(KNormalProperty, ShuffledChildrenHaveTheSameForm)
{
    RandomExpr gen(29);
    for (int i = 0; i < 500; ++i) {
        Expr e = gen.pick(0, 1) ? gen.lambda_class(6) : gen.k_class(6);
        EXPECT_EQ(print(normalize(shuffled(e))), print(normalize(e))) << print(e);
        EXPECT_TRUE(canon_equal(shuffled(e), e)) << print(e);
    }
}

// Formal axioms applied in random order at random sites never change the
// normal form.
TEST(KNormalProperty, FormalAxiomsAreConfluent)
{
    AxiomRegistry reg = native_axioms(2);
    std::vector<const Axiom*> formal;
    for (const auto& name : reg.names()) {
        const Axiom* a = reg.find(name);
        if (a->formal() && !a->root_only()) {
            formal.push_back(a);
        }
    }
    ASSERT_GE(formal.size(), 8U);

    RandomExpr gen(41);
    std::size_t corpus = 0;
    std::size_t rewrites = 0;
    std::map<std::string, std::size_t> fired;
    while (corpus < 1000) {
        Expr e = gen.pick(0, 2) == 0 ? gen.k_class(6) : gen.lambda_class(6);
        const std::string before = print(normalize(e));
        ++corpus;
        Expr cur = e;
        for (int round = 0; round < 3; ++round) {
        std::shuffle(formal.begin(), formal.end(), gen.rng());
        for (const Axiom* a : formal) {
            const bool rtl = a->reversible() && gen.pick(0, 1) == 1;
            std::size_t n = count_sites(cur, *a, rtl);
            if (n == 0) {
                continue;
            }
            auto r = apply_axiom(cur, *a, static_cast<std::size_t>(gen.pick(1, static_cast<int>(n))), rtl);
            ASSERT_TRUE(r.has_value());
            cur = r->result;
            ++rewrites;
            ++fired[a->name()];
            ASSERT_EQ(print(normalize(cur)), before) << a->name() << (rtl ? " rtl" : "") << " on " << print(e);
        }
        }
    }
    for (const Axiom* a : formal) {
        EXPECT_GT(fired[a->name()], 0U) << a->name();
    }
    EXPECT_GT(rewrites, 1000U);
}
