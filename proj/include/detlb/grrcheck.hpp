#pragma once

// Degree-level checks of the determinant identities.
//
// Universally the carrier is Q[l, a_1..a_d] truncated at degree d+1, with
// l = c_1(L) and a_i the Chern roots of the relative cotangent sheaf.  On a
// Chow model, c_1 of lambda(F) is the base degree of the pushforward of the
// degree (rel_dim + 1) part of ch(F) Td(T_f).

#include <algorithm>
#include <string>
#include <vector>

#include "detlb/bundle_expr.hpp"
#include "detlb/charclass.hpp"
#include "detlb/chowmodel.hpp"
#include "detlb/combinat.hpp"
#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

struct ComboTerm {
    Integer coeff;
    Integer twist;   // power of L
    unsigned sym = 0; // Sym^sym of Omega (or of its dual)
    bool dual = false;
};

using VirtualCombo = std::vector<ComboTerm>;

// 2^{2d+2} L - sum_j c_j(d) L^2 Sym^j Omega.  d = 0 is only reachable with
// allow_degenerate, where the single entry c_0 = 1 is used.
inline VirtualCombo main_combo(unsigned d, bool allow_degenerate = false)
{
    VirtualCombo combo;
    combo.push_back({pow2(2 * d + 2), 1, 0, false});
    if (d == 0) {
        if (!allow_degenerate) {
            throw DomainError("the main identity is stated for d >= 1");
        }
        combo.push_back({-1, 2, 0, false});
        return combo;
    }
    CoeffTable t = coeff_table(d);
    for (unsigned j = 0; j < t.entries.size(); ++j) {
        combo.push_back({-t.entries[j], 2, j, false});
    }
    return combo;
}

// 18 L - 18 O - 6 L^2 Omega^v + 6 L Omega^v
inline VirtualCombo deligne_combo_d1()
{
    return {{18, 1, 0, false}, {-18, 0, 0, false}, {-6, 2, 1, true}, {6, 1, 1, true}};
}

inline TruncatedSeries universal_carrier(unsigned d)
{
    std::vector<std::string> names{"l"};
    for (unsigned i = 1; i <= d; ++i) {
        names.push_back("a" + std::to_string(i));
    }
    return TruncatedSeries(VarTable::uniform(names), static_cast<int>(d) + 1);
}

// D * Td(T_f) in Q[l, a_1..a_d] / (degree > d+1).
inline CharClass universal_defect(unsigned d, const VirtualCombo& combo)
{
    const TruncatedSeries zero = universal_carrier(d);
    const TruncatedSeries l = zero.variable_like("l");

    CharClass ch_omega = zero.zero_like();
    TruncatedSeries c_tangent = zero.constant_like(1);
    for (unsigned i = 1; i <= d; ++i) {
        TruncatedSeries a = zero.variable_like("a" + std::to_string(i));
        ch_omega += series_exp(a);
        c_tangent = c_tangent * (zero.constant_like(1) - a);
    }

    unsigned jmax = 0;
    for (const auto& t : combo) {
        jmax = std::max(jmax, t.sym);
    }
    if (d == 0 && jmax > 0) {
        throw DomainError("symmetric powers of Omega need d >= 1");
    }
    auto sym = sym_ch_table(ch_omega, jmax);

    CharClass D = zero.zero_like();
    for (const auto& t : combo) {
        CharClass s = t.dual ? dual_ch(sym[t.sym]) : sym[t.sym];
        D += series_exp(l * Rational(t.twist)) * s * Rational(t.coeff);
    }
    return D * todd_from_chern(c_tangent);
}

inline bool main_theorem_defect_vanishes(unsigned d, bool allow_degenerate = false)
{
    return universal_defect(d, main_combo(d, allow_degenerate)).component(static_cast<int>(d) + 1).is_zero();
}

// prod_i (1 - e^{l_i}) truncated at degree d+1, for any number of factors.
inline CharClass ducrot_product(unsigned d, const std::vector<std::string>& lines)
{
    if (lines.empty()) {
        throw DomainError("need at least one line factor");
    }
    std::vector<std::string> names;
    for (const auto& n : lines) {
        if (std::find(names.begin(), names.end(), n) == names.end()) {
            names.push_back(n);
        }
    }
    TruncatedSeries zero(VarTable::uniform(names), static_cast<int>(d) + 1);
    CharClass prod = zero.constant_like(1);
    for (const auto& n : lines) {
        prod = prod * (zero.constant_like(1) - series_exp(zero.variable_like(n)));
    }
    return prod;
}

inline CharClass ducrot_defect(unsigned d, const std::vector<std::string>& lines)
{
    if (lines.size() != d + 2) {
        throw DomainError("the pairing takes exactly d+2 = " + std::to_string(d + 2) + " line factors, got "
                          + std::to_string(lines.size()));
    }
    return ducrot_product(d, lines);
}

inline std::vector<std::string> default_line_names(std::size_t n)
{
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= n; ++i) {
        out.push_back("l" + std::to_string(i));
    }
    return out;
}

inline void require_curve_base(const ChowModel& model)
{
    if (!model.has_base()) {
        throw UnsupportedModel(model.name() + ": determinant degrees need a family over a base");
    }
    if (model.base_dim() != 1) {
        throw UnsupportedModel(model.name() + ": base must be one-dimensional, got dimension "
                               + std::to_string(model.base_dim()));
    }
}

inline Rational c1_lambda(const ChowModel& model, const CharClass& ch_f)
{
    require_curve_base(model);
    CharClass integrand = ch_f * todd_from_chern(model.tangent_chern());
    TruncatedSeries top = integrand.component(model.rel_dim() + 1);
    return model.integrate_base(model.fiber_pushforward(top));
}

inline Rational c1_lambda(const ChowModel& model, std::string_view bundle)
{
    return c1_lambda(model, parse_bundle(model, bundle));
}

struct MainTermValue {
    unsigned j = 0;
    Integer coeff;
    Rational degree;
};

struct MainReport {
    unsigned dim = 0;
    Rational lambda_l;
    Rational lhs;
    Rational rhs;
    std::vector<MainTermValue> terms;
    bool pass = false;
};

// 2^{2d+2} deg lambda(L) against sum_j c_j(d) deg lambda(L^2 Sym^j Omega_f).
inline MainReport verify_main_on_model(const ChowModel& model, const CharClass& line)
{
    require_curve_base(model);
    if (model.rel_dim() < 1) {
        throw UnsupportedModel(model.name() + ": relative dimension must be at least 1");
    }
    if (line.constant_term() != 1) {
        throw DomainError("verify-main needs a line bundle (rank 1)");
    }
    const unsigned d = static_cast<unsigned>(model.rel_dim());
    MainReport r;
    r.dim = d;
    r.lambda_l = c1_lambda(model, line);
    r.lhs = r.lambda_l * Rational(pow2(2 * d + 2));
    CoeffTable t = coeff_table(d);
    auto sym = sym_ch_table(cotangent_ch(model), 2 * d);
    CharClass l2 = line * line;
    r.rhs = 0;
    for (unsigned j = 0; j <= 2 * d; ++j) {
        Rational deg = c1_lambda(model, l2 * sym[j]);
        r.terms.push_back({j, t.entries[j], deg});
        r.rhs += Rational(t.entries[j]) * deg;
    }
    r.pass = r.lhs == r.rhs;
    return r;
}

inline Rational euler_char(const ChowModel& model, const CharClass& ch_f)
{
    if (model.has_base() || model.rel_dim() != model.total_dim()) {
        throw UnsupportedModel(model.name() + ": Euler characteristics need a model over a point");
    }
    return model.integrate(ch_f * todd_from_chern(model.tangent_chern()));
}

} // namespace detlb
