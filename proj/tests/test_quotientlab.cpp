#include <random>

#include <gtest/gtest.h>

#include "detlb/errors.hpp"
#include "detlb/quotientlab.hpp"

using namespace detlb;

namespace {

// Counts monomials of weighted degree n, split by the parity of the total
// odd exponent.
void count_monomials(const GradedAlgebra& a, std::size_t i, int left, int odd, Integer& even_out, Integer& odd_out)
{
    if (i == a.vars().size()) {
        if (left == 0) {
            (odd % 2 == 0 ? even_out : odd_out) += 1;
        }
        return;
    }
    const auto& v = a.vars()[i];
    for (int e = 0; e * v.degree <= left; ++e) {
        count_monomials(a, i + 1, left - e * v.degree, odd + (v.parity == 1 ? e : 0), even_out, odd_out);
    }
}

GradedAlgebra random_algebra(std::mt19937& rng, int max_odd)
{
    std::uniform_int_distribution<int> nvars(1, 4);
    std::uniform_int_distribution<int> deg(1, 3);
    std::vector<GradedVar> vars;
    const int n = nvars(rng);
    int odd = 0;
    for (int i = 0; i < n; ++i) {
        GradedVar v;
        v.name = "v" + std::to_string(i);
        v.degree = deg(rng);
        v.parity = (odd < max_odd && rng() % 2 == 0) ? 1 : 0;
        odd += v.parity;
        vars.push_back(v);
    }
    return GradedAlgebra(vars);
}

} // namespace

TEST(Quotient, ParseSpecs)
{
    GradedAlgebra a = parse_graded_algebra("x:2:odd, y : 1 : even,z");
    ASSERT_EQ(a.vars().size(), 3U);
    EXPECT_EQ(a.vars()[0].degree, 2);
    EXPECT_EQ(a.vars()[0].parity, 1);
    EXPECT_EQ(a.vars()[1].name, "y");
    EXPECT_EQ(a.vars()[2].degree, 1);
    EXPECT_EQ(a.vars()[2].parity, 0);
    for (const char* bad : {"", "x:1:odd,x:1:even", "x:0:odd", "x:1:weird", "x:a:odd", ":1:odd", "x:1:odd:4",
                            "x:2x:even"}) {
        EXPECT_THROW(parse_graded_algebra(bad), ParseError) << bad;
    }
    EXPECT_THROW(hilbert_series(a, -1), DomainError);
}

TEST(Quotient, HilbertSeriesAgainstMonomialCount)
{
    std::mt19937 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        GradedAlgebra a = random_algebra(rng, 4);
        const int bound = 14;
        auto all = hilbert_series(a, bound);
        auto inv = invariants_hs(a, bound);
        auto anti = anti_invariants_hs(a, bound);
        for (int n = 0; n <= bound; ++n) {
            Integer even = 0;
            Integer odd = 0;
            count_monomials(a, 0, n, 0, even, odd);
            EXPECT_EQ(all[n], even + odd);
            EXPECT_EQ(inv[n], even);
            EXPECT_EQ(anti[n], odd);
        }
    }
}

TEST(Quotient, KnownVerdicts)
{
    auto both_odd = flatness_verdict(parse_graded_algebra("x:1:odd,y:1:odd"));
    EXPECT_EQ(both_odd.verdict, FlatnessVerdict::NotFree);
    EXPECT_EQ(both_odd.first_negative, 3);
    EXPECT_EQ(both_odd.ratio[0], 1);
    EXPECT_EQ(both_odd.ratio[1], 2);
    EXPECT_EQ(both_odd.ratio[2], 0);
    EXPECT_EQ(both_odd.ratio[3], -2);
    EXPECT_EQ(both_odd.basis, (std::vector<std::string>{"1", "x", "y", "x*y"}));

    auto one_odd = flatness_verdict(parse_graded_algebra("x:1:odd"));
    EXPECT_EQ(one_odd.verdict, FlatnessVerdict::Free);
    EXPECT_EQ(one_odd.ratio[0], 1);
    EXPECT_EQ(one_odd.ratio[1], 1);
    EXPECT_EQ(one_odd.ratio[2], 0);

    EXPECT_EQ(flatness_verdict(parse_graded_algebra("x:1:odd,y:1:even")).verdict, FlatnessVerdict::Free);
    EXPECT_EQ(flatness_verdict(parse_graded_algebra("x:1:even,y:2:even")).verdict, FlatnessVerdict::Free);
    // Even variables cancel out of the ratio.
    EXPECT_EQ(flatness_verdict(parse_graded_algebra("x:1:odd,y:1:odd,z:2:even")).verdict, FlatnessVerdict::NotFree);
    EXPECT_EQ(flatness_verdict(parse_graded_algebra("x:2:odd,y:2:odd")).first_negative, 6);
    EXPECT_EQ(to_string(FlatnessVerdict::NotFree), std::string("NOT-FREE"));
}

TEST(Quotient, FixedIdealAndConormal)
{
    FixedIdeal f = fixed_ideal(parse_graded_algebra("x:1:odd,y:1:even"));
    EXPECT_TRUE(f.cartier);
    EXPECT_EQ(f.generators, (std::vector<std::string>{"x"}));
    EXPECT_TRUE(fixed_ideal(parse_graded_algebra("y:1:even")).trivial_action);
    EXPECT_FALSE(fixed_ideal(parse_graded_algebra("x:1:odd,y:1:odd")).cartier);

    EXPECT_TRUE(conormal_degree_zero(parse_graded_algebra("x:1:odd")));
    EXPECT_TRUE(conormal_degree_zero(parse_graded_algebra("x:1:odd,y:1:even")));
    EXPECT_TRUE(conormal_degree_zero(parse_graded_algebra("x:2:odd,y:1:even,z:3:even")));
    EXPECT_THROW(conormal_degree_zero(parse_graded_algebra("x:1:odd,y:1:odd")), PreconditionError);
    EXPECT_THROW(conormal_degree_zero(parse_graded_algebra("y:1:even")), PreconditionError);
}

TEST(QuotientProperty, AtMostOneOddVariableIsFree)
{
    std::mt19937 rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        GradedAlgebra a = random_algebra(rng, 1);
        auto r = flatness_verdict(a, 30);
        EXPECT_EQ(r.verdict, FlatnessVerdict::Free);
        EXPECT_EQ(series_multiply(r.hs_r0, r.basis_series, 31), r.hs_r);
        EXPECT_EQ(r.ratio, r.basis_series);
    }
}

TEST(QuotientProperty, VerdictsAreConsistent)
{
    std::mt19937 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        GradedAlgebra a = random_algebra(rng, 4);
        auto r = flatness_verdict(a, 24);
        EXPECT_EQ(series_multiply(r.ratio, r.hs_r0, 25), r.hs_r);
        if (r.verdict == FlatnessVerdict::NotFree) {
            ASSERT_GE(r.first_negative, 0);
            EXPECT_LT(r.ratio[r.first_negative], 0);
            for (int n = 0; n < r.first_negative; ++n) {
                EXPECT_GE(r.ratio[n], 0);
            }
        } else {
            EXPECT_EQ(r.first_negative, -1);
        }
        if (a.odd_indices().size() >= 2) {
            EXPECT_NE(r.verdict, FlatnessVerdict::Free);
        }
    }
}
