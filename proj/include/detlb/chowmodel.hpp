#pragma once

// Presented Chow rings of smooth projective families.
//
// A model is a polynomial ring on weighted generators modulo triangular
// rewrite rules x_i^{p_i} -> (homogeneous polynomial below x_i^{p_i} in
// graded-lex order).  Leads are powers of distinct generators, so they are
// pairwise coprime and the rules form a Groebner basis: normal forms are
// unique whatever the reduction order.  Every generator must carry a rule,
// which makes the standard monomials a finite box; the box may not reach
// above total_dim, so the ring vanishes there and truncating products at
// total_dim loses nothing.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

struct ChowRule {
    std::size_t generator = 0;
    int power = 1;
    TruncatedSeries replacement;
};

struct ChowModelSpec {
    std::string name;
    std::vector<VarTable::Var> generators;
    // (lead exponents, replacement terms)
    std::vector<std::pair<Exponents, std::vector<std::pair<Exponents, Rational>>>> relations;
    int rel_dim = 0;
    int total_dim = 0;
    std::vector<std::string> base_generators;
    std::vector<std::pair<Exponents, Rational>> tangent_chern;
    Exponents point_class;
};

// Graded-lex: weighted degree first, then lexicographic with the first
// generator largest.
inline bool monomial_less(const VarTable& vars, const Exponents& a, const Exponents& b)
{
    int da = vars.degree(a);
    int db = vars.degree(b);
    if (da != db) {
        return da < db;
    }
    return a < b;
}

class ChowModel {
public:
    explicit ChowModel(const ChowModelSpec& spec)
        : name_(spec.name), rel_dim_(spec.rel_dim), total_dim_(spec.total_dim)
    {
        if (spec.generators.empty()) {
            throw ModelError(spec.name + ": a model needs at least one generator");
        }
        if (spec.rel_dim < 0 || spec.total_dim < spec.rel_dim) {
            throw ModelError(spec.name + ": need 0 <= rel_dim <= total_dim");
        }
        zero_ = TruncatedSeries(VarTable(spec.generators), total_dim_);
        const VarTable& vars = zero_.vars();
        const std::size_t n = vars.size();

        std::vector<bool> has_rule(n, false);
        for (const auto& [lead, repl] : spec.relations) {
            if (lead.size() != n) {
                throw ModelError(name_ + ": relation lead has the wrong length");
            }
            std::optional<std::size_t> gen;
            for (std::size_t i = 0; i < n; ++i) {
                if (lead[i] < 0) {
                    throw ModelError(name_ + ": negative exponent in relation lead");
                }
                if (lead[i] > 0) {
                    if (gen) {
                        throw ModelError(name_ + ": relation leads must be powers of a single generator");
                    }
                    gen = i;
                }
            }
            if (!gen) {
                throw ModelError(name_ + ": relation lead is the unit monomial");
            }
            if (has_rule[*gen]) {
                throw ModelError(name_ + ": two relations lead with generator '" + vars.name(*gen) + "'");
            }
            has_rule[*gen] = true;
            ChowRule rule;
            rule.generator = *gen;
            rule.power = lead[*gen];
            // The replacement is stored without truncation so that the
            // termination check sees every term.
            rule.replacement = TruncatedSeries(zero_.vars_ptr(), vars.degree(lead));
            for (const auto& [e, c] : repl) {
                if (e.size() != n) {
                    throw ModelError(name_ + ": replacement monomial has the wrong length");
                }
                if (vars.degree(e) != vars.degree(lead)) {
                    throw ModelError(name_ + ": relation for '" + vars.name(*gen) + "' is not homogeneous");
                }
                if (!monomial_less(vars, e, lead)) {
                    throw ModelError(name_ + ": relation for '" + vars.name(*gen)
                                     + "' does not decrease the monomial order (non-terminating)");
                }
                rule.replacement.add_term(e, c);
            }
            rules_.push_back(std::move(rule));
        }
        int top = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!has_rule[i]) {
                throw ModelError(name_ + ": generator '" + vars.name(i) + "' has no relation");
            }
        }
        for (const auto& r : rules_) {
            top += (r.power - 1) * vars.weight(r.generator);
        }
        if (top > total_dim_) {
            throw ModelError(name_ + ": standard monomials reach degree " + std::to_string(top)
                             + " above total_dim " + std::to_string(total_dim_));
        }

        for (const auto& b : spec.base_generators) {
            auto idx = vars.index_of(b);
            if (!idx) {
                throw ModelError(name_ + ": unknown base generator '" + b + "'");
            }
            if (std::find(base_.begin(), base_.end(), *idx) != base_.end()) {
                throw ModelError(name_ + ": base generator '" + b + "' listed twice");
            }
            base_.push_back(*idx);
        }
        std::sort(base_.begin(), base_.end());

        tangent_ = zero_;
        for (const auto& [e, c] : spec.tangent_chern) {
            if (e.size() != n) {
                throw ModelError(name_ + ": tangent class monomial has the wrong length");
            }
            tangent_.add_term(e, c);
        }
        if (tangent_.constant_term() != 1) {
            throw ModelError(name_ + ": tangent Chern class must have constant term 1");
        }

        point_ = spec.point_class;
        if (point_.size() != n) {
            throw ModelError(name_ + ": point class has the wrong length");
        }
        if (vars.degree(point_) != total_dim_) {
            throw ModelError(name_ + ": point class is not in degree total_dim");
        }
        if (!is_standard(point_)) {
            throw ModelError(name_ + ": point class is not a normal-form monomial");
        }
        for (const auto& e : standard_monomials(total_dim_)) {
            if (e != point_) {
                throw ModelError(name_ + ": top degree has a second standard monomial, the degree map is not determined");
            }
        }
        if (standard_monomials(total_dim_).empty()) {
            throw ModelError(name_ + ": point class is not reachable");
        }

        if (!base_.empty()) {
            int fiber_deg = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!is_base(i)) {
                    fiber_deg += point_[i] * vars.weight(i);
                }
            }
            if (fiber_deg != rel_dim_) {
                throw ModelError(name_ + ": fiber part of the point class does not have degree rel_dim");
            }
            std::vector<VarTable::Var> bvars;
            for (std::size_t i : base_) {
                bvars.push_back(vars.vars()[i]);
            }
            base_zero_ = TruncatedSeries(VarTable(bvars), total_dim_ - rel_dim_);
        } else if (rel_dim_ != total_dim_) {
            throw ModelError(name_ + ": rel_dim differs from total_dim but no base generators are declared");
        }
    }

    const std::string& name() const { return name_; }
    const VarTable& generators() const { return zero_.vars(); }
    int rel_dim() const { return rel_dim_; }
    int total_dim() const { return total_dim_; }
    int base_dim() const { return total_dim_ - rel_dim_; }
    bool has_base() const { return !base_.empty(); }
    const std::vector<std::size_t>& base_indices() const { return base_; }
    const std::vector<ChowRule>& rules() const { return rules_; }
    const TruncatedSeries& tangent_chern() const { return tangent_; }
    const Exponents& point_class() const { return point_; }

    bool is_base(std::size_t i) const { return std::binary_search(base_.begin(), base_.end(), i); }

    // Carriers for classes on the total space and on the base.
    TruncatedSeries zero() const { return zero_; }
    TruncatedSeries one() const { return zero_.constant_like(1); }
    TruncatedSeries gen(std::string_view name) const { return zero_.variable_like(name); }
    const TruncatedSeries& base_zero() const
    {
        require_base("base carrier");
        return base_zero_;
    }

    bool is_standard(const Exponents& e) const
    {
        for (const auto& r : rules_) {
            if (e[r.generator] >= r.power) {
                return false;
            }
        }
        return true;
    }

    std::vector<Exponents> standard_monomials(int degree) const
    {
        std::vector<Exponents> out;
        Exponents e(generators().size(), 0);
        collect_standard(0, e, degree, out);
        return out;
    }

    TruncatedSeries normal_form(const TruncatedSeries& c) const
    {
        if (!(c.vars() == generators())) {
            throw StructuralError(name_ + ": class uses variables outside the model");
        }
        TruncatedSeries out = zero_;
        for (const auto& [e, coeff] : c.terms()) {
            reduce_into(e, coeff, out);
        }
        return out;
    }

    Rational integrate(const TruncatedSeries& c) const
    {
        TruncatedSeries nf = normal_form(c);
        Rational result = 0;
        for (const auto& [e, coeff] : nf.terms()) {
            if (generators().degree(e) != total_dim_) {
                continue;
            }
            if (e != point_) {
                throw ModelError(name_ + ": top-degree monomial is not a multiple of the point class");
            }
            result += coeff;
        }
        return result;
    }

    // Class on the base: coefficient of the relative point class.
    TruncatedSeries fiber_pushforward(const TruncatedSeries& c) const
    {
        require_base("fiber pushforward");
        const VarTable& vars = generators();
        TruncatedSeries nf = normal_form(c);
        TruncatedSeries out = base_zero_;
        Exponents be(base_.size());
        for (const auto& [e, coeff] : nf.terms()) {
            int fdeg = 0;
            bool at_point = true;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (!is_base(i)) {
                    fdeg += e[i] * vars.weight(i);
                    at_point = at_point && e[i] == point_[i];
                }
            }
            if (fdeg < rel_dim_) {
                continue;
            }
            if (!at_point) {
                throw ModelError(name_ + ": normal form has a fiber monomial other than the relative point");
            }
            for (std::size_t k = 0; k < base_.size(); ++k) {
                be[k] = e[base_[k]];
            }
            out.add_term(be, coeff);
        }
        return out;
    }

    Rational integrate_base(const TruncatedSeries& b) const
    {
        require_base("base integration");
        if (!b.same_carrier(base_zero_)) {
            throw StructuralError(name_ + ": class does not live on the base");
        }
        Exponents bp(base_.size());
        for (std::size_t k = 0; k < base_.size(); ++k) {
            bp[k] = point_[base_[k]];
        }
        Rational result = 0;
        for (const auto& [e, coeff] : b.terms()) {
            if (b.degree_of(e) != base_dim()) {
                continue;
            }
            if (e != bp) {
                throw ModelError(name_ + ": top-degree base monomial is not the base point class");
            }
            result += coeff;
        }
        return result;
    }

private:
    void require_base(const char* what) const
    {
        if (base_.empty()) {
            throw UnsupportedModel(name_ + ": " + what + " needs declared base generators");
        }
    }

    void collect_standard(std::size_t i, Exponents& e, int degree, std::vector<Exponents>& out) const
    {
        const VarTable& vars = generators();
        if (i == e.size()) {
            if (vars.degree(e) == degree) {
                out.push_back(e);
            }
            return;
        }
        int cap = 0;
        for (const auto& r : rules_) {
            if (r.generator == i) {
                cap = r.power - 1;
            }
        }
        for (int k = 0; k <= cap; ++k) {
            e[i] = k;
            collect_standard(i + 1, e, degree, out);
        }
        e[i] = 0;
    }

    void reduce_into(const Exponents& e, const Rational& coeff, TruncatedSeries& out) const
    {
        if (generators().degree(e) > total_dim_) {
            return;
        }
        for (const auto& r : rules_) {
            if (e[r.generator] < r.power) {
                continue;
            }
            Exponents rest = e;
            rest[r.generator] -= r.power;
            for (const auto& [re, rc] : r.replacement.terms()) {
                Exponents next = rest;
                for (std::size_t i = 0; i < next.size(); ++i) {
                    next[i] += re[i];
                }
                reduce_into(next, coeff * rc, out);
            }
            return;
        }
        out.add_term(e, coeff);
    }

    std::string name_;
    int rel_dim_ = 0;
    int total_dim_ = 0;
    TruncatedSeries zero_;
    TruncatedSeries base_zero_;
    std::vector<ChowRule> rules_;
    std::vector<std::size_t> base_;
    TruncatedSeries tangent_;
    Exponents point_;
};

namespace builtin {

// Binomial expansion of (1 + g)^{n+1} for a single weight-one generator.
inline std::vector<std::pair<Exponents, Rational>> projective_tangent(std::size_t ngens, std::size_t g, int n)
{
    std::vector<std::pair<Exponents, Rational>> out;
    for (int k = 0; k <= n + 1; ++k) {
        Exponents e(ngens, 0);
        e[g] = k;
        out.emplace_back(e, Rational(binomial(static_cast<unsigned>(n + 1), static_cast<unsigned>(k))));
    }
    return out;
}

inline ChowModel projective_space(int n)
{
    if (n < 0) {
        throw ModelError("Pn: n must be non-negative");
    }
    ChowModelSpec s;
    s.name = "P" + std::to_string(n);
    s.generators = {{"h", 1}};
    s.relations.push_back({{n + 1}, {}});
    s.rel_dim = n;
    s.total_dim = n;
    s.tangent_chern = projective_tangent(1, 0, n);
    s.point_class = {n};
    return ChowModel(s);
}

// P^n x P^m viewed as the trivial P^n-family over P^m; h is the fiber
// hyperplane class, s the base hyperplane class.
inline ChowModel product(int n, int m)
{
    if (n < 0 || m < 1) {
        throw ModelError("PnxPm: need n >= 0 and m >= 1");
    }
    ChowModelSpec s;
    s.name = "P" + std::to_string(n) + "xP" + std::to_string(m);
    s.generators = {{"h", 1}, {"s", 1}};
    s.relations.push_back({{n + 1, 0}, {}});
    s.relations.push_back({{0, m + 1}, {}});
    s.rel_dim = n;
    s.total_dim = n + m;
    s.base_generators = {"s"};
    s.tangent_chern = projective_tangent(2, 0, n);
    s.point_class = {n, m};
    return ChowModel(s);
}

// Ruled surface F_e -> P^1.  z is the section with z^2 = -e, f a fiber;
// the relative tangent bundle has c_1 = 2z + e f.
inline ChowModel hirzebruch(int e)
{
    if (e < 0) {
        throw ModelError("Hirzebruch: e must be non-negative");
    }
    ChowModelSpec s;
    s.name = "Hirzebruch" + std::to_string(e);
    s.generators = {{"z", 1}, {"f", 1}};
    std::vector<std::pair<Exponents, Rational>> zz;
    if (e != 0) {
        zz.emplace_back(Exponents{1, 1}, Rational(-e));
    }
    s.relations.push_back({{2, 0}, zz});
    s.relations.push_back({{0, 2}, {}});
    s.rel_dim = 1;
    s.total_dim = 2;
    s.base_generators = {"f"};
    s.tangent_chern = {{{0, 0}, 1}, {{1, 0}, 2}};
    if (e != 0) {
        s.tangent_chern.push_back({{0, 1}, Rational(e)});
    }
    s.point_class = {1, 1};
    return ChowModel(s);
}

} // namespace builtin

inline Rational rational_from_json(const nlohmann::json& j)
{
    if (j.is_number_integer()) {
        return Rational(Integer(std::to_string(j.get<long long>())));
    }
    if (j.is_string()) {
        Rational q;
        try {
            q = Rational(j.get<std::string>());
        } catch (const std::invalid_argument&) {
            throw ParseError("not a rational number: " + j.get<std::string>());
        }
        if (q.get_den() == 0) {
            throw ParseError("zero denominator");
        }
        q.canonicalize();
        return q;
    }
    throw ParseError("coefficient must be an integer or a string like \"-3/2\"");
}

inline ChowModel load_model(const nlohmann::json& j)
{
    ChowModelSpec s;
    try {
        s.name = j.value("name", std::string("model"));
        for (const auto& g : j.at("generators")) {
            s.generators.push_back({g.at("name").get<std::string>(), g.value("weight", 1)});
        }
        for (const auto& r : j.at("relations")) {
            std::vector<std::pair<Exponents, Rational>> repl;
            for (const auto& t : r.value("replace", nlohmann::json::array())) {
                repl.emplace_back(t.at("exponents").get<Exponents>(), rational_from_json(t.at("coeff")));
            }
            s.relations.emplace_back(r.at("lead").get<Exponents>(), std::move(repl));
        }
        s.rel_dim = j.at("rel_dim").get<int>();
        s.total_dim = j.at("total_dim").get<int>();
        s.base_generators = j.value("base_generators", std::vector<std::string>{});
        for (const auto& t : j.at("tangent_chern")) {
            s.tangent_chern.emplace_back(t.at("exponents").get<Exponents>(), rational_from_json(t.at("coeff")));
        }
        s.point_class = j.at("point_class").get<Exponents>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    try {
        return ChowModel(s);
    } catch (const StructuralError& e) {
        throw ModelError(e.what());
    }
}

inline ChowModel load_model_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    return load_model(j);
}

inline ChowModel load_model_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open model file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_model_text(ss.str());
}

struct ModelParams {
    int n = 1;
    int m = 1;
    int e = 0;
};

// Built-ins by name: Pn, PnxPm, Hirzebruch.
inline ChowModel builtin_model(const std::string& name, const ModelParams& p)
{
    if (name == "Pn") {
        return builtin::projective_space(p.n);
    }
    if (name == "PnxPm") {
        return builtin::product(p.n, p.m);
    }
    if (name == "Hirzebruch") {
        return builtin::hirzebruch(p.e);
    }
    throw ParseError("unknown built-in model '" + name + "' (expected Pn, PnxPm or Hirzebruch)");
}

} // namespace detlb
