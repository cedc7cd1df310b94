#include <random>

#include <gtest/gtest.h>

#include "detlb/combinat.hpp"
#include "detlb/errors.hpp"

using namespace detlb;

namespace {

// (2^{k+1} - (1 - u)^{k+1}) / (1 + u) by synthetic division, i.e. P_k(1 + u)
// without going through P_k itself.
std::vector<Integer> shifted_pk_oracle(unsigned k)
{
    std::vector<Integer> num(k + 2);
    for (unsigned i = 0; i <= k + 1; ++i) {
        Integer c = binomial(k + 1, i);
        num[i] = (i % 2 == 0) ? Integer(-c) : c;
    }
    num[0] += pow2(k + 1);
    // Divide by (1 + u) from the low end.
    std::vector<Integer> q(k + 1);
    Integer carry = 0;
    for (unsigned i = 0; i <= k; ++i) {
        q[i] = num[i] - carry;
        carry = q[i];
    }
    EXPECT_EQ(num[k + 1], carry);
    return q;
}

Integer eval(const IntPoly& p, const Integer& t)
{
    Integer acc = 0;
    for (int i = p.degree(); i >= 0; --i) {
        acc = acc * t + p[static_cast<std::size_t>(i)];
    }
    return acc;
}

} // namespace

TEST(CoeffTable, FrozenLowDimensions)
{
    EXPECT_EQ(coeff_table(1).entries, (std::vector<Integer>{7, -4, 1}));
    EXPECT_EQ(coeff_table(2).entries, (std::vector<Integer>{31, -26, 16, -6, 1}));
    EXPECT_EQ(coeff_table(3).entries, (std::vector<Integer>{127, -120, 99, -64, 29, -8, 1}));
}

TEST(CoeffTable, MatchesShiftedPkOracle)
{
    for (unsigned d = 1; d <= 12; ++d) {
        EXPECT_EQ(coeff_table(d).entries, shifted_pk_oracle(2 * d)) << "d=" << d;
        EXPECT_TRUE(binomial_expansion_check(d));
    }
}

TEST(CoeffTable, ValueIdentities)
{
    // u = 1 is t = 2 where P_k = 2^k; u = -1 is t = 0 where P_k = (k+1) 2^k.
    for (unsigned d = 1; d <= 10; ++d) {
        Integer sum = 0;
        Integer alt = 0;
        auto e = coeff_table(d).entries;
        for (std::size_t j = 0; j < e.size(); ++j) {
            sum += e[j];
            alt += (j % 2 == 0) ? e[j] : Integer(-e[j]);
        }
        EXPECT_EQ(sum, pow2(2 * d));
        EXPECT_EQ(alt, Integer(2 * d + 1) * pow2(2 * d));
        EXPECT_EQ(e.front(), pow2(2 * d + 1) - 1);
        EXPECT_EQ(e.back(), 1);
    }
}

TEST(CoeffTable, DimensionZeroIsRejected)
{
    EXPECT_THROW(coeff_table(0), DomainError);
    EXPECT_THROW(coeff_matrix(0), DomainError);
}

TEST(PkIdentity, HoldsUpTo64)
{
    for (unsigned k = 0; k <= 64; ++k) {
        EXPECT_TRUE(pk_identity_check(k)) << k;
    }
}

TEST(PkIdentity, PointValuesAgainstClosedForm)
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> pick(-40, 40);
    for (unsigned k = 0; k <= 20; ++k) {
        IntPoly p = pk_poly(k);
        for (int trial = 0; trial < 10; ++trial) {
            Integer t = pick(rng);
            if (t == 0) {
                continue;
            }
            Integer two_minus_t = Integer(2) - t;
            Integer pw = 1;
            for (unsigned i = 0; i <= k; ++i) {
                pw *= two_minus_t;
            }
            Integer num = pow2(k + 1) - pw;
            ASSERT_TRUE(mpz_divisible_p(num.get_mpz_t(), t.get_mpz_t()));
            EXPECT_EQ(eval(p, t), num / t) << "k=" << k << " t=" << t;
        }
    }
}

TEST(IntPoly, Arithmetic)
{
    IntPoly t = IntPoly::t();
    IntPoly one = IntPoly::constant(1);
    EXPECT_EQ((t + one).pow(3), IntPoly({1, 3, 3, 1}));
    EXPECT_EQ((t - one) * (t + one), IntPoly({-1, 0, 1}));
    EXPECT_EQ(IntPoly({1, 2, 1}).compose(IntPoly({-1, 1})), IntPoly({0, 0, 1}));
    EXPECT_TRUE((t - t).is_zero());
    EXPECT_EQ(to_string(IntPoly({7, -4, 1})), "7 - 4*t + t^2");
}
