#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "detlb/bundle_expr.hpp"
#include "detlb/chowmodel.hpp"
#include "detlb/errors.hpp"

using namespace detlb;

namespace {

ChowModelSpec p1_spec()
{
    ChowModelSpec s;
    s.name = "p1";
    s.generators = {{"h", 1}};
    s.relations.push_back({{2}, {}});
    s.rel_dim = 1;
    s.total_dim = 1;
    s.tangent_chern = {{{0}, 1}, {{1}, 2}};
    s.point_class = {1};
    return s;
}

std::string read(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(ChowModel, ProjectiveSpaceIntegrals)
{
    for (int n = 0; n <= 5; ++n) {
        ChowModel m = builtin::projective_space(n);
        auto h = m.gen("h");
        EXPECT_EQ(m.integrate(series_pow(h, n)), 1) << n;
        EXPECT_EQ(m.standard_monomials(n).size(), 1U);
        if (n > 0) {
            EXPECT_EQ(m.integrate(series_pow(h, n - 1)), 0);
        }
    }
}

TEST(ChowModel, ProductIntegralsAndPushforward)
{
    ChowModel m = builtin::product(2, 1);
    auto h = m.gen("h");
    auto s = m.gen("s");
    EXPECT_EQ(m.integrate(h * h * s), 1);
    EXPECT_EQ(m.integrate(h * s), 0);
    EXPECT_TRUE(m.normal_form(s * s).is_zero());
    auto pushed = m.fiber_pushforward(h * h * s * Rational(3));
    EXPECT_EQ(m.integrate_base(pushed), 3);
    EXPECT_EQ(m.rel_dim(), 2);
    EXPECT_EQ(m.base_dim(), 1);
}

TEST(ChowModel, HirzebruchIntersectionNumbers)
{
    for (int e = 0; e <= 4; ++e) {
        ChowModel m = builtin::hirzebruch(e);
        auto z = m.gen("z");
        auto f = m.gen("f");
        EXPECT_EQ(m.integrate(z * f), 1);
        EXPECT_EQ(m.integrate(z * z), -e);
        EXPECT_EQ(m.integrate(f * f), 0);
        // The relative canonical class K = -2z - e f has K^2 = 0.
        auto k = z * Rational(-2) - f * Rational(e);
        EXPECT_EQ(m.integrate(k * k), 0);
    }
}

TEST(ChowModel, FileModelMatchesBuiltin)
{
    ChowModel file = load_model_file(std::string(DETLB_DATA_DIR) + "/models/hirzebruch-1.json");
    ChowModel built = builtin::hirzebruch(1);
    for (const auto& e : std::vector<Exponents>{{2, 0}, {1, 1}, {0, 2}}) {
        EXPECT_EQ(file.integrate(file.zero().monomial_like(e)), built.integrate(built.zero().monomial_like(e)));
    }
    EXPECT_EQ(file.tangent_chern(), file.zero().constant_like(1) + file.gen("z") * Rational(2) + file.gen("f"));
}

TEST(ChowModel, RejectsBrokenModels)
{
    EXPECT_NO_THROW(ChowModel{p1_spec()});

    auto s = p1_spec();
    s.relations.clear();
    EXPECT_THROW(ChowModel{s}, ModelError);

    s = p1_spec();
    s.tangent_chern = {{{0}, 2}};
    EXPECT_THROW(ChowModel{s}, ModelError);

    s = p1_spec();
    s.point_class = {0};
    EXPECT_THROW(ChowModel{s}, ModelError);

    s = p1_spec();
    s.base_generators = {"q"};
    EXPECT_THROW(ChowModel{s}, ModelError);

    // f^2 -> z^2 climbs the order and would loop.
    ChowModelSpec t;
    t.name = "loop";
    t.generators = {{"z", 1}, {"f", 1}};
    t.relations.push_back({{2, 0}, {}});
    t.relations.push_back({{0, 2}, {{{2, 0}, 1}}});
    t.rel_dim = 2;
    t.total_dim = 2;
    t.tangent_chern = {{{0, 0}, 1}};
    t.point_class = {1, 1};
    EXPECT_THROW(ChowModel{t}, ModelError);

    // Not homogeneous.
    t.relations[1] = {{0, 2}, {{{1, 0}, 1}}};
    EXPECT_THROW(ChowModel{t}, ModelError);
}

TEST(ChowModel, LoaderErrors)
{
    EXPECT_THROW(load_model_text("{"), ParseError);
    EXPECT_THROW(load_model_text("{\"generators\": []}"), ParseError);
    EXPECT_THROW(load_model_file("/nonexistent/model.json"), ParseError);
    std::string text = read(std::string(DETLB_DATA_DIR) + "/models/hirzebruch-1.json");
    auto j = nlohmann::json::parse(text);
    j["point_class"] = {2, 0};
    EXPECT_THROW(load_model(j), ModelError);
}

TEST(ChowModel, BuiltinNames)
{
    EXPECT_EQ(builtin_model("Pn", {3, 1, 0}).total_dim(), 3);
    EXPECT_EQ(builtin_model("PnxPm", {1, 1, 0}).total_dim(), 2);
    EXPECT_EQ(builtin_model("Hirzebruch", {1, 1, 2}).name(), "Hirzebruch2");
    EXPECT_THROW(builtin_model("Grassmannian", {}), ParseError);
    EXPECT_THROW(builtin::hirzebruch(-1), ModelError);
}

TEST(BundleExpr, ParsesAndCombines)
{
    ChowModel m = builtin::product(1, 1);
    EXPECT_EQ(parse_bundle(m, "O(1,2)"), line_ch(m, {1, 2}));
    EXPECT_EQ(parse_bundle(m, "O(1,0)^3"), line_ch(m, {3, 0}));
    EXPECT_EQ(parse_bundle(m, "O(1,0)^-1"), line_ch(m, {-1, 0}));
    EXPECT_EQ(parse_bundle(m, "dual(O(2,1))"), line_ch(m, {-2, -1}));
    EXPECT_EQ(parse_bundle(m, "O(1,1)*O(0,2)"), line_ch(m, {1, 3}));
    EXPECT_EQ(parse_bundle(m, "2*O - O(1,0)"), line_ch(m, {0, 0}) * Rational(2) - line_ch(m, {1, 0}));
    // Relative cotangent of P^1 x P^1 -> P^1 is O(-2,0).
    EXPECT_EQ(m.normal_form(parse_bundle(m, "Omega")), m.normal_form(line_ch(m, {-2, 0})));
    EXPECT_EQ(m.normal_form(parse_bundle(m, "Sym(2,Omega)")), m.normal_form(line_ch(m, {-4, 0})));
    EXPECT_THROW(parse_bundle(m, "O(1)"), DomainError);
    EXPECT_THROW(parse_bundle(m, "O(1,1"), ParseError);
    EXPECT_THROW(parse_bundle(m, "Frob"), ParseError);
}
