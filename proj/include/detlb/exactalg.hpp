#pragma once

// Exact rational scalars and truncated multivariate power series over Q.
//
// A TruncatedSeries lives on a VarTable (named generators with positive
// weights) and carries a bound on the weighted total degree; every product
// silently discards terms above the bound.  Terms are kept sparse in a
// std::map keyed by exponent vectors, and ordered_terms() gives the stable
// (degree, lex) order used for serialization.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "detlb/errors.hpp"

namespace detlb {

using Integer = mpz_class;
using Rational = mpq_class;
using Exponents = std::vector<int>;

inline std::string to_string(const Integer& z) { return z.get_str(); }

inline std::string to_string(Rational q)
{
    q.canonicalize();
    if (q.get_den() == 1) {
        return q.get_num().get_str();
    }
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Integer factorial(unsigned n)
{
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

inline Integer binomial(unsigned n, unsigned k)
{
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline Integer pow2(unsigned n)
{
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, n);
    return r;
}

inline Rational rational_pow(const Rational& base, unsigned n)
{
    Rational r = 1;
    for (unsigned i = 0; i < n; ++i) {
        r *= base;
    }
    return r;
}

class VarTable {
public:
    struct Var {
        std::string name;
        int weight = 1;
        bool operator==(const Var&) const = default;
    };

    VarTable() = default;

    explicit VarTable(std::vector<Var> vars) : vars_(std::move(vars))
    {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].name.empty()) {
                throw StructuralError("variable names must be non-empty");
            }
            if (vars_[i].weight < 1) {
                throw StructuralError("variable '" + vars_[i].name + "' has weight < 1");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (vars_[j].name == vars_[i].name) {
                    throw StructuralError("duplicate variable name '" + vars_[i].name + "'");
                }
            }
        }
    }

    // All generators of weight one.
    static VarTable uniform(const std::vector<std::string>& names)
    {
        std::vector<Var> vars;
        vars.reserve(names.size());
        for (const auto& n : names) {
            vars.push_back({n, 1});
        }
        return VarTable(std::move(vars));
    }

    std::size_t size() const { return vars_.size(); }
    const std::vector<Var>& vars() const { return vars_; }
    const std::string& name(std::size_t i) const { return vars_.at(i).name; }
    int weight(std::size_t i) const { return vars_.at(i).weight; }

    std::optional<std::size_t> index_of(std::string_view name) const
    {
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].name == name) {
                return i;
            }
        }
        return std::nullopt;
    }

    int degree(const Exponents& e) const
    {
        int d = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            d += e[i] * vars_[i].weight;
        }
        return d;
    }

    bool operator==(const VarTable&) const = default;

private:
    std::vector<Var> vars_;
};

class TruncatedSeries {
public:
    using TermMap = std::map<Exponents, Rational>;

    TruncatedSeries() : TruncatedSeries(VarTable{}, 0) {}

    TruncatedSeries(VarTable vars, int bound)
        : TruncatedSeries(std::make_shared<const VarTable>(std::move(vars)), bound)
    {
    }

    TruncatedSeries(std::shared_ptr<const VarTable> vars, int bound)
        : vars_(std::move(vars)), bound_(bound)
    {
        if (bound_ < 0) {
            throw StructuralError("truncation bound must be non-negative");
        }
    }

    static TruncatedSeries constant(const TruncatedSeries& like, const Rational& c)
    {
        TruncatedSeries s(like.vars_, like.bound_);
        s.add_term(Exponents(like.vars().size(), 0), c);
        return s;
    }

    static TruncatedSeries constant(VarTable vars, int bound, const Rational& c)
    {
        TruncatedSeries s(std::move(vars), bound);
        s.add_term(Exponents(s.vars().size(), 0), c);
        return s;
    }

    TruncatedSeries zero_like() const { return TruncatedSeries(vars_, bound_); }

    TruncatedSeries constant_like(const Rational& c) const { return constant(*this, c); }

    TruncatedSeries monomial_like(const Exponents& e, const Rational& c = 1) const
    {
        TruncatedSeries s(vars_, bound_);
        s.add_term(e, c);
        return s;
    }

    TruncatedSeries variable_like(std::string_view name, const Rational& c = 1) const
    {
        auto idx = vars().index_of(name);
        if (!idx) {
            throw StructuralError("unknown variable '" + std::string(name) + "'");
        }
        Exponents e(vars().size(), 0);
        e[*idx] = 1;
        return monomial_like(e, c);
    }

    const VarTable& vars() const { return *vars_; }
    const std::shared_ptr<const VarTable>& vars_ptr() const { return vars_; }
    int bound() const { return bound_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree_of(const Exponents& e) const { return vars_->degree(e); }

    // Accumulates c * x^e; monomials above the bound are dropped.
    void add_term(const Exponents& e, Rational c)
    {
        // mpq_class(a, b) is not reduced on construction.
        c.canonicalize();
        if (e.size() != vars_->size()) {
            throw StructuralError("exponent vector length does not match the variable table");
        }
        for (int x : e) {
            if (x < 0) {
                throw StructuralError("negative exponent in a polynomial term");
            }
        }
        if (c == 0 || degree_of(e) > bound_) {
            return;
        }
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) {
                terms_.erase(it);
            }
        }
    }

    Rational coefficient(const Exponents& e) const
    {
        auto it = terms_.find(e);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    Rational constant_term() const { return coefficient(Exponents(vars_->size(), 0)); }

    // Homogeneous part of weighted degree k.
    TruncatedSeries component(int k) const
    {
        TruncatedSeries out(vars_, bound_);
        for (const auto& [e, c] : terms_) {
            if (degree_of(e) == k) {
                out.terms_.emplace(e, c);
            }
        }
        return out;
    }

    // Same terms, new bound; terms above it are discarded.
    TruncatedSeries with_bound(int bound) const
    {
        TruncatedSeries out(vars_, bound);
        for (const auto& [e, c] : terms_) {
            out.add_term(e, c);
        }
        return out;
    }

    // Multiplies the degree-k component by m^k.
    TruncatedSeries scaled_by_degree(const Rational& m) const
    {
        TruncatedSeries out(vars_, bound_);
        for (const auto& [e, c] : terms_) {
            out.add_term(e, c * rational_pow(m, static_cast<unsigned>(degree_of(e))));
        }
        return out;
    }

    std::vector<std::pair<Exponents, Rational>> ordered_terms() const
    {
        std::vector<std::pair<Exponents, Rational>> out(terms_.begin(), terms_.end());
        std::stable_sort(out.begin(), out.end(), [this](const auto& a, const auto& b) {
            int da = degree_of(a.first);
            int db = degree_of(b.first);
            if (da != db) {
                return da < db;
            }
            return a.first > b.first;
        });
        return out;
    }

    bool same_carrier(const TruncatedSeries& o) const
    {
        return bound_ == o.bound_ && (vars_ == o.vars_ || *vars_ == *o.vars_);
    }

    void require_same_carrier(const TruncatedSeries& o, const char* op) const
    {
        if (!(vars_ == o.vars_ || *vars_ == *o.vars_)) {
            throw StructuralError(std::string(op) + ": mismatched variable tables");
        }
        if (bound_ != o.bound_) {
            throw StructuralError(std::string(op) + ": mismatched truncation bounds");
        }
    }

    TruncatedSeries& operator+=(const TruncatedSeries& o)
    {
        require_same_carrier(o, "add");
        for (const auto& [e, c] : o.terms_) {
            add_term(e, c);
        }
        return *this;
    }

    TruncatedSeries& operator-=(const TruncatedSeries& o)
    {
        require_same_carrier(o, "subtract");
        for (const auto& [e, c] : o.terms_) {
            add_term(e, -c);
        }
        return *this;
    }

    TruncatedSeries& operator*=(Rational k)
    {
        k.canonicalize();
        if (k == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) {
            c *= k;
        }
        return *this;
    }

    TruncatedSeries operator-() const
    {
        TruncatedSeries out = *this;
        out *= Rational(-1);
        return out;
    }

    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
    friend TruncatedSeries operator*(TruncatedSeries a, Rational k) { return a *= k; }
    friend TruncatedSeries operator*(Rational k, TruncatedSeries a) { return a *= k; }

    bool operator==(const TruncatedSeries& o) const
    {
        return same_carrier(o) && terms_ == o.terms_;
    }

private:
    std::shared_ptr<const VarTable> vars_;
    int bound_ = 0;
    TermMap terms_;
};

inline TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b)
{
    a.require_same_carrier(b, "series_mul");
    TruncatedSeries out = a.zero_like();
    const int bound = a.bound();
    const std::size_t n = a.vars().size();
    std::vector<std::pair<const Exponents*, int>> bt;
    bt.reserve(b.terms().size());
    for (const auto& [e, c] : b.terms()) {
        bt.emplace_back(&e, b.degree_of(e));
    }
    Exponents prod(n);
    for (const auto& [ea, ca] : a.terms()) {
        const int da = a.degree_of(ea);
        for (const auto& [ebp, db] : bt) {
            if (da + db > bound) {
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                prod[i] = ea[i] + (*ebp)[i];
            }
            out.add_term(prod, ca * b.terms().at(*ebp));
        }
    }
    return out;
}

inline TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b)
{
    return series_mul(a, b);
}

inline TruncatedSeries series_pow(const TruncatedSeries& a, unsigned n)
{
    TruncatedSeries r = a.constant_like(1);
    TruncatedSeries base = a;
    while (n > 0) {
        if (n & 1U) {
            r = r * base;
        }
        n >>= 1U;
        if (n > 0) {
            base = base * base;
        }
    }
    return r;
}

// Sum over k <= bound of a^k / k!; a must have zero constant term.
inline TruncatedSeries series_exp(const TruncatedSeries& a)
{
    if (a.constant_term() != 0) {
        throw DomainError("series_exp: argument has a nonzero constant term");
    }
    TruncatedSeries result = a.constant_like(1);
    TruncatedSeries power = a.constant_like(1);
    for (int k = 1; k <= a.bound(); ++k) {
        power = power * a;
        if (power.is_zero()) {
            break;
        }
        result += power * Rational(1, factorial(static_cast<unsigned>(k)));
    }
    return result;
}

// b with a*b = 1 up to the bound; a must have a nonzero constant term.
inline TruncatedSeries series_inverse(const TruncatedSeries& a)
{
    const Rational c0 = a.constant_term();
    if (c0 == 0) {
        throw DomainError("series_inverse: zero constant term");
    }
    const Rational inv0 = 1 / c0;
    // a = c0 (1 + u)  =>  1/a = inv0 * sum (-u)^k
    TruncatedSeries neg_u = a * (-inv0);
    neg_u += a.constant_like(1);
    TruncatedSeries result = a.constant_like(1);
    TruncatedSeries power = a.constant_like(1);
    for (int k = 1; k <= a.bound(); ++k) {
        power = power * neg_u;
        if (power.is_zero()) {
            break;
        }
        result += power;
    }
    return result * inv0;
}

// log(a) for constant term 1.
inline TruncatedSeries series_log(const TruncatedSeries& a)
{
    if (a.constant_term() != 1) {
        throw DomainError("series_log: constant term must be 1");
    }
    TruncatedSeries u = a - a.constant_like(1);
    TruncatedSeries result = a.zero_like();
    TruncatedSeries power = a.constant_like(1);
    for (int k = 1; k <= a.bound(); ++k) {
        power = power * u;
        if (power.is_zero()) {
            break;
        }
        result += power * Rational((k % 2 == 1) ? 1 : -1, k);
    }
    return result;
}

// Re-embeds a series into a larger variable table by variable name.
inline TruncatedSeries embed(const TruncatedSeries& s, const TruncatedSeries& target_like)
{
    const VarTable& from = s.vars();
    const VarTable& to = target_like.vars();
    std::vector<std::size_t> map(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        auto j = to.index_of(from.name(i));
        if (!j) {
            throw StructuralError("embed: variable '" + from.name(i) + "' missing from target table");
        }
        if (to.weight(*j) != from.weight(i)) {
            throw StructuralError("embed: weight mismatch for '" + from.name(i) + "'");
        }
        map[i] = *j;
    }
    TruncatedSeries out = target_like.zero_like();
    Exponents e(to.size());
    for (const auto& [ef, c] : s.terms()) {
        std::fill(e.begin(), e.end(), 0);
        for (std::size_t i = 0; i < ef.size(); ++i) {
            e[map[i]] = ef[i];
        }
        out.add_term(e, c);
    }
    return out;
}

inline nlohmann::ordered_json to_json(const TruncatedSeries& s)
{
    auto terms = nlohmann::ordered_json::array();
    for (const auto& [e, c] : s.ordered_terms()) {
        nlohmann::ordered_json t;
        t["exponents"] = e;
        t["num"] = c.get_num().get_str();
        t["den"] = c.get_den().get_str();
        terms.push_back(std::move(t));
    }
    return terms;
}

inline TruncatedSeries series_from_json(const nlohmann::json& j, const TruncatedSeries& like)
{
    TruncatedSeries out = like.zero_like();
    if (!j.is_array()) {
        throw ParseError("series: expected an array of terms");
    }
    for (const auto& t : j) {
        Exponents e = t.at("exponents").get<Exponents>();
        Rational c;
        if (t.contains("coeff")) {
            const auto& cj = t.at("coeff");
            c = cj.is_string() ? Rational(cj.get<std::string>()) : Rational(cj.get<long>());
        } else {
            c = Rational(Integer(t.at("num").get<std::string>()), Integer(t.value("den", std::string("1"))));
        }
        c.canonicalize();
        out.add_term(e, c);
    }
    return out;
}

// Human-readable rendering, e.g. "1 + 2*x - 1/3*x^2*y".
inline std::string to_string(const TruncatedSeries& s)
{
    if (s.is_zero()) {
        return "0";
    }
    std::string out;
    bool first = true;
    for (const auto& [e, c] : s.ordered_terms()) {
        Rational mag = abs(c);
        if (first) {
            if (c < 0) {
                out += "-";
            }
        } else {
            out += c < 0 ? " - " : " + ";
        }
        first = false;
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) {
                continue;
            }
            if (!mono.empty()) {
                mono += "*";
            }
            mono += s.vars().name(i);
            if (e[i] > 1) {
                mono += "^" + std::to_string(e[i]);
            }
        }
        if (mono.empty()) {
            out += to_string(mag);
        } else if (mag == 1) {
            out += mono;
        } else {
            out += to_string(mag) + "*" + mono;
        }
    }
    return out;
}

} // namespace detlb
