#pragma once

// Two normalisations of formal expressions.
//
// canon() is structural: it flattens and merges sums and tensors, folds
// integer scalars, collapses dual/twist involutions and, at the level of
// determinant lines, turns duals and powers into integer exponents.  It never
// distributes, so it identifies displays that differ by bookkeeping only.
// Proof-step checks compare canon() forms.
//
// normalize() is the full normal form.  Below lambda it is a Z-linear
// combination of tensor monomials: distributivity is applied, P[k] is
// expanded, pullbacks are ring maps pushed down to atoms, pushforwards and
// isotypic parts are additive, and Sym[j] stays opaque except where it is
// determined (j <= 1, or a line argument).  Determinant lines are additive
// in their argument and lambda(F{-1}) = lambda(F)^v, so above lambda the
// normal form is a product of lambda(monomial)^n.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"
#include "detlb/kexpr.hpp"

namespace detlb::k {

// ---------------------------------------------------------------- canon

namespace detail {

inline Expr canon_k(const Expr& e);

inline std::pair<Integer, Expr> split_scalar(const Expr& e)
{
    if (e->kind == Kind::Sum && e->kids.size() == 1) {
        return {e->coeffs[0], e->kids[0]};
    }
    return {1, e};
}

inline Expr make_sum_canon(std::vector<Term> terms)
{
    std::map<std::string, Term> merged;
    for (auto& t : terms) {
        if (t.coeff == 0) {
            continue;
        }
        std::string key = print(t.expr);
        auto [it, inserted] = merged.try_emplace(key, t);
        if (!inserted) {
            it->second.coeff += t.coeff;
        }
    }
    std::vector<Term> out;
    for (auto& [key, t] : merged) {
        if (t.coeff != 0) {
            out.push_back(t);
        }
    }
    if (out.size() == 1 && out[0].coeff == 1) {
        return out[0].expr;
    }
    return sum(out);
}

inline Expr canon_power(const Expr& base, const Integer& n)
{
    if (n == 0 || base->kind == Kind::Unit) {
        return unit();
    }
    if (n == 1) {
        return base;
    }
    if (base->kind == Kind::Power && base->nvar.empty()) {
        return canon_power(base->kids[0], base->n * n);
    }
    if (base->kind == Kind::Twist) {
        Expr inner = canon_power(base->kids[0], n);
        return (n % 2 != 0) ? twist(inner) : inner;
    }
    if (base->kind == Kind::Sum && base->kids.size() == 1 && n > 0) {
        Integer c;
        mpz_pow_ui(c.get_mpz_t(), base->coeffs[0].get_mpz_t(), n.get_ui());
        return make_sum_canon({{c, canon_power(base->kids[0], n)}});
    }
    if (is_zero_sum(base) && n > 0) {
        return zero();
    }
    return power(base, n);
}

inline Expr canon_tensor(const std::vector<Expr>& raw)
{
    Integer scalar = 1;
    std::vector<Expr> flat;
    std::vector<Expr> work(raw.rbegin(), raw.rend());
    while (!work.empty()) {
        Expr f = work.back();
        work.pop_back();
        if (f->kind == Kind::Tensor) {
            for (auto it = f->kids.rbegin(); it != f->kids.rend(); ++it) {
                work.push_back(*it);
            }
            continue;
        }
        if (f->kind == Kind::Unit) {
            continue;
        }
        if (is_zero_sum(f)) {
            return zero();
        }
        auto [c, g] = split_scalar(f);
        if (c != 1) {
            scalar *= c;
            work.push_back(g);
            continue;
        }
        flat.push_back(f);
    }
    // Merge identical bases into powers.
    std::map<std::string, std::pair<Expr, Integer>> bases;
    std::vector<Expr> others;
    for (const auto& f : flat) {
        Expr b = f;
        Integer n = 1;
        if (f->kind == Kind::Power && f->nvar.empty()) {
            b = f->kids[0];
            n = f->n;
        }
        auto [it, inserted] = bases.try_emplace(print(b), b, n);
        if (!inserted) {
            it->second.second += n;
        }
    }
    std::vector<Expr> factors;
    for (auto& [key, bn] : bases) {
        Expr p = canon_power(bn.first, bn.second);
        if (p->kind == Kind::Unit) {
            continue;
        }
        auto [c, g] = split_scalar(p);
        if (c != 1) {
            scalar *= c;
            p = g;
        }
        if (p->kind == Kind::Tensor) {
            for (const auto& k : p->kids) {
                factors.push_back(k);
            }
        } else if (p->kind != Kind::Unit) {
            factors.push_back(p);
        }
    }
    std::sort(factors.begin(), factors.end(), [](const Expr& a, const Expr& b) { return print(a) < print(b); });
    Expr body = factors.empty() ? unit() : (factors.size() == 1 ? factors[0] : tensor(factors));
    if (scalar == 0) {
        return zero();
    }
    return scalar == 1 ? body : make_sum_canon({{scalar, body}});
}

inline Expr canon_k(const Expr& e)
{
    switch (e->kind) {
    case Kind::Unit:
    case Kind::Atom:
    case Kind::Var:
        return e;
    case Kind::Sum: {
        std::vector<Term> terms;
        std::vector<std::pair<Integer, Expr>> work;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            work.emplace_back(e->coeffs[i], canon_k(e->kids[i]));
        }
        while (!work.empty()) {
            auto [c, t] = work.back();
            work.pop_back();
            if (t->kind == Kind::Sum) {
                for (std::size_t i = 0; i < t->kids.size(); ++i) {
                    work.emplace_back(c * t->coeffs[i], t->kids[i]);
                }
                continue;
            }
            terms.push_back({c, t});
        }
        return make_sum_canon(std::move(terms));
    }
    case Kind::Tensor: {
        std::vector<Expr> kids;
        for (const auto& k : e->kids) {
            kids.push_back(canon_k(k));
        }
        return canon_tensor(kids);
    }
    case Kind::Power: {
        Expr b = canon_k(e->kids[0]);
        if (!e->nvar.empty()) {
            return power_var(b, e->nvar);
        }
        return canon_power(b, e->n);
    }
    case Kind::Dual: {
        Expr b = canon_k(e->kids[0]);
        if (b->kind == Kind::Dual) {
            return b->kids[0];
        }
        if (b->kind == Kind::Unit) {
            return b;
        }
        return dual(b);
    }
    case Kind::Twist: {
        Expr b = canon_k(e->kids[0]);
        if (b->kind == Kind::Twist) {
            return b->kids[0];
        }
        return twist(b);
    }
    case Kind::Apply: {
        Expr b = canon_k(e->kids[0]);
        if (is_pull(e->name) && b->kind == Kind::Unit) {
            return b;
        }
        if ((is_push(e->name) || is_isotypic(e->name) || is_pull(e->name)) && is_zero_sum(b)) {
            return b;
        }
        return apply(e->name, b);
    }
    case Kind::Sym: {
        Expr b = canon_k(e->kids[0]);
        if (e->nvar.empty() && e->n == 0) {
            return unit();
        }
        if (e->nvar.empty() && e->n == 1) {
            return b;
        }
        return with_kids(e, {b});
    }
    case Kind::Pk: {
        Expr b = canon_k(e->kids[0]);
        if (e->nvar.empty() && e->n == 0) {
            return unit();
        }
        return with_kids(e, {b});
    }
    case Kind::Lambda:
        throw DomainError("lambda(...) cannot appear inside a sheaf expression");
    }
    return e;
}

inline void collect_lambda(const Expr& e, const Integer& mult, std::map<std::string, std::pair<Expr, Integer>>& acc)
{
    switch (e->kind) {
    case Kind::Unit:
        return;
    case Kind::Lambda: {
        Expr arg = canon_k(e->kids[0]);
        if (is_zero_sum(arg)) {
            return;
        }
        Expr l = lambda(arg);
        auto [it, inserted] = acc.try_emplace(print(l), l, mult);
        if (!inserted) {
            it->second.second += mult;
        }
        return;
    }
    case Kind::Tensor:
        for (const auto& k : e->kids) {
            collect_lambda(k, mult, acc);
        }
        return;
    case Kind::Power:
        if (!e->nvar.empty()) {
            throw DomainError("symbolic exponent on a determinant line");
        }
        collect_lambda(e->kids[0], mult * e->n, acc);
        return;
    case Kind::Dual:
        collect_lambda(e->kids[0], -mult, acc);
        return;
    case Kind::Sum:
        if (e->kids.empty()) {
            throw DomainError("0 is not a determinant line; write lambda(0) for the trivial one");
        }
        [[fallthrough]];
    default:
        throw DomainError("'" + print(e) + "' is not a product of determinant lines");
    }
}

} // namespace detail

inline Expr canon(const Expr& e)
{
    if (!contains_lambda(e)) {
        return detail::canon_k(e);
    }
    std::map<std::string, std::pair<Expr, Integer>> acc;
    detail::collect_lambda(e, 1, acc);
    std::vector<Expr> factors;
    for (auto& [key, le] : acc) {
        if (le.second == 0) {
            continue;
        }
        factors.push_back(le.second == 1 ? le.first : power(le.first, le.second));
    }
    if (factors.empty()) {
        return unit();
    }
    return factors.size() == 1 ? factors[0] : tensor(factors);
}

inline bool canon_equal(const Expr& a, const Expr& b) { return print(canon(a)) == print(canon(b)); }

// ---------------------------------------------------------------- full NF

struct Context {
    // Atoms of higher rank; every other atom is a line bundle.
    std::set<std::string> bundles;
};

struct Factor {
    Expr base;
    Integer exp;
    bool line = false;
};

struct Monomial {
    std::map<std::string, Factor> factors;
    bool twist = false;
};

struct PolyTerm {
    Monomial mono;
    Integer coeff;
};

// Keyed by the printed monomial without coefficient.
using KPoly = std::map<std::string, PolyTerm>;
// Determinant lines: printed monomial -> (monomial, exponent).
using LPoly = std::map<std::string, std::pair<Monomial, Integer>>;

namespace detail {

inline Expr render_monomial(const Monomial& m)
{
    std::vector<Expr> fs;
    for (const auto& [key, f] : m.factors) {
        fs.push_back(f.exp == 1 ? f.base : power(f.base, f.exp));
    }
    Expr body = fs.empty() ? unit() : (fs.size() == 1 ? fs[0] : tensor(fs));
    return m.twist ? twist(body) : body;
}

inline std::string mono_key(const Monomial& m) { return print(render_monomial(m)); }

inline void add_term(KPoly& p, const Monomial& m, const Integer& c)
{
    if (c == 0) {
        return;
    }
    std::string key = mono_key(m);
    auto [it, inserted] = p.try_emplace(key, PolyTerm{m, c});
    if (!inserted) {
        it->second.coeff += c;
        if (it->second.coeff == 0) {
            p.erase(it);
        }
    }
}

inline KPoly constant_poly(const Integer& c)
{
    KPoly p;
    add_term(p, Monomial{}, c);
    return p;
}

inline Monomial mono_mul(const Monomial& a, const Monomial& b)
{
    Monomial r = a;
    r.twist = a.twist != b.twist;
    for (const auto& [key, f] : b.factors) {
        auto [it, inserted] = r.factors.try_emplace(key, f);
        if (!inserted) {
            it->second.exp += f.exp;
            if (it->second.exp == 0) {
                r.factors.erase(it);
            }
        }
    }
    return r;
}

inline KPoly poly_add(KPoly a, const KPoly& b, const Integer& scale = 1)
{
    for (const auto& [key, t] : b) {
        add_term(a, t.mono, t.coeff * scale);
    }
    return a;
}

inline KPoly poly_mul(const KPoly& a, const KPoly& b)
{
    KPoly r;
    for (const auto& [ka, ta] : a) {
        for (const auto& [kb, tb] : b) {
            add_term(r, mono_mul(ta.mono, tb.mono), ta.coeff * tb.coeff);
        }
    }
    return r;
}

constexpr unsigned kMaxPower = 64;

inline KPoly poly_pow(const KPoly& a, const Integer& n)
{
    if (n > kMaxPower) {
        throw DomainError("tensor power above " + std::to_string(kMaxPower) + " is not expanded");
    }
    KPoly r = constant_poly(1);
    for (Integer i = 0; i < n; ++i) {
        r = poly_mul(r, a);
    }
    return r;
}

inline Expr dual_base(const Expr& b) { return b->kind == Kind::Dual ? b->kids[0] : dual(b); }

inline Monomial mono_dual(const Monomial& m)
{
    Monomial r;
    r.twist = m.twist;
    for (const auto& [key, f] : m.factors) {
        if (f.line) {
            Factor g = f;
            g.exp = -f.exp;
            r.factors.emplace(key, g);
        } else {
            Factor g{dual_base(f.base), f.exp, false};
            r.factors.emplace(print(g.base), g);
        }
    }
    return r;
}

inline Monomial single_factor(const Expr& base, bool line)
{
    Monomial m;
    m.factors.emplace(print(base), Factor{base, 1, line});
    return m;
}

inline KPoly factor_poly(const Expr& base, bool line)
{
    KPoly p;
    add_term(p, single_factor(base, line), 1);
    return p;
}

inline KPoly nf_k(const Expr& e, const Context& ctx);

inline Expr render_poly(const KPoly& p)
{
    std::vector<Term> terms;
    for (const auto& [key, t] : p) {
        terms.push_back({t.coeff, render_monomial(t.mono)});
    }
    if (terms.size() == 1 && terms[0].coeff == 1) {
        return terms[0].expr;
    }
    return sum(terms);
}

inline Monomial strip_twist(Monomial m)
{
    m.twist = false;
    return m;
}

inline KPoly nf_apply(const std::string& f, const KPoly& arg)
{
    KPoly out;
    if (is_pull(f)) {
        for (const auto& [key, t] : arg) {
            Monomial m;
            m.twist = t.mono.twist;
            for (const auto& [fk, fac] : t.mono.factors) {
                Expr b = fac.base->kind == Kind::Dual ? dual(apply(f, fac.base->kids[0])) : apply(f, fac.base);
                m.factors.emplace(print(b), Factor{b, fac.exp, fac.line});
            }
            add_term(out, m, t.coeff);
        }
        return out;
    }
    if (is_push(f)) {
        for (const auto& [key, t] : arg) {
            Monomial m = single_factor(apply(f, render_monomial(strip_twist(t.mono))), false);
            m.twist = t.mono.twist;
            add_term(out, m, t.coeff);
        }
        return out;
    }
    if (is_isotypic(f)) {
        const std::string other = f == "plus" ? "minus" : "plus";
        for (const auto& [key, t] : arg) {
            const std::string& g = t.mono.twist ? other : f;
            add_term(out, single_factor(apply(g, render_monomial(strip_twist(t.mono))), false), t.coeff);
        }
        return out;
    }
    return factor_poly(apply(f, render_poly(arg)), false);
}

inline KPoly nf_sym(const Integer& j, const KPoly& arg)
{
    if (j == 0) {
        return constant_poly(1);
    }
    if (j == 1) {
        return arg;
    }
    if (arg.size() == 1 && arg.begin()->second.coeff == 1) {
        const Monomial& m = arg.begin()->second.mono;
        Monomial lines;
        Monomial rest;
        lines.twist = m.twist;
        for (const auto& [key, f] : m.factors) {
            (f.line ? lines : rest).factors.emplace(key, f);
        }
        KPoly out;
        Monomial lj;
        for (Integer i = 0; i < j; ++i) {
            lj = mono_mul(lj, lines);
        }
        if (rest.factors.empty()) {
            add_term(out, lj, 1);
            return out;
        }
        add_term(out, mono_mul(lj, single_factor(sym(j, render_monomial(rest)), false)), 1);
        return out;
    }
    return factor_poly(sym(j, render_poly(arg)), false);
}

inline KPoly nf_k(const Expr& e, const Context& ctx)
{
    switch (e->kind) {
    case Kind::Unit:
        return constant_poly(1);
    case Kind::Atom:
        return factor_poly(e, ctx.bundles.count(e->name) == 0);
    case Kind::Sum: {
        KPoly p;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            p = poly_add(p, nf_k(e->kids[i], ctx), e->coeffs[i]);
        }
        return p;
    }
    case Kind::Tensor: {
        KPoly p = constant_poly(1);
        for (const auto& k : e->kids) {
            p = poly_mul(p, nf_k(k, ctx));
            if (p.empty()) {
                break;
            }
        }
        return p;
    }
    case Kind::Power: {
        if (!e->nvar.empty()) {
            throw DomainError("cannot normalise a pattern exponent");
        }
        KPoly b = nf_k(e->kids[0], ctx);
        if (e->n >= 0) {
            return poly_pow(b, e->n);
        }
        if (b.size() != 1 || b.begin()->second.coeff != 1) {
            throw DomainError("negative power of a class that is not a line: " + print(e));
        }
        const Monomial& m = b.begin()->second.mono;
        for (const auto& [key, f] : m.factors) {
            if (!f.line) {
                throw DomainError("negative power of a class that is not a line: " + print(e));
            }
        }
        KPoly inv;
        add_term(inv, mono_dual(m), 1);
        return poly_pow(inv, -e->n);
    }
    case Kind::Dual: {
        KPoly out;
        for (const auto& [key, t] : nf_k(e->kids[0], ctx)) {
            add_term(out, mono_dual(t.mono), t.coeff);
        }
        return out;
    }
    case Kind::Twist: {
        KPoly out;
        for (const auto& [key, t] : nf_k(e->kids[0], ctx)) {
            Monomial m = t.mono;
            m.twist = !m.twist;
            add_term(out, m, t.coeff);
        }
        return out;
    }
    case Kind::Apply:
        return nf_apply(e->name, nf_k(e->kids[0], ctx));
    case Kind::Sym:
        if (!e->nvar.empty()) {
            throw DomainError("cannot normalise a pattern index");
        }
        return nf_sym(e->n, nf_k(e->kids[0], ctx));
    case Kind::Pk: {
        if (!e->nvar.empty()) {
            throw DomainError("cannot normalise a pattern index");
        }
        if (e->n > kMaxPower) {
            throw DomainError("P[k] with k above " + std::to_string(kMaxPower) + " is not expanded");
        }
        // sum_{i=0}^{k} 2^{k-i} (2 - T)^i
        const unsigned k = static_cast<unsigned>(e->n.get_ui());
        KPoly two_minus = poly_add(constant_poly(2), nf_k(e->kids[0], ctx), -1);
        KPoly out;
        KPoly pw = constant_poly(1);
        for (unsigned i = 0; i <= k; ++i) {
            out = poly_add(out, pw, pow2(k - i));
            pw = poly_mul(pw, two_minus);
        }
        return out;
    }
    case Kind::Lambda:
        throw DomainError("lambda(...) cannot appear inside a sheaf expression");
    case Kind::Var:
        throw DomainError("cannot normalise pattern variable ?" + e->name);
    }
    return {};
}

inline void nf_l(const Expr& e, const Integer& mult, const Context& ctx, LPoly& acc)
{
    switch (e->kind) {
    case Kind::Unit:
        return;
    case Kind::Lambda:
        for (const auto& [key, t] : nf_k(e->kids[0], ctx)) {
            Monomial m = strip_twist(t.mono);
            Integer c = t.mono.twist ? Integer(-t.coeff) : t.coeff;
            std::string mk = mono_key(m);
            auto [it, inserted] = acc.try_emplace(mk, m, c * mult);
            if (!inserted) {
                it->second.second += c * mult;
                if (it->second.second == 0) {
                    acc.erase(it);
                }
            }
        }
        return;
    case Kind::Tensor:
        for (const auto& k : e->kids) {
            nf_l(k, mult, ctx, acc);
        }
        return;
    case Kind::Power:
        if (!e->nvar.empty()) {
            throw DomainError("symbolic exponent on a determinant line");
        }
        nf_l(e->kids[0], mult * e->n, ctx, acc);
        return;
    case Kind::Dual:
        nf_l(e->kids[0], -mult, ctx, acc);
        return;
    default:
        throw DomainError("'" + print(e) + "' is not a product of determinant lines");
    }
}

} // namespace detail

inline KPoly normal_poly(const Expr& e, const Context& ctx = {}) { return detail::nf_k(e, ctx); }

inline LPoly normal_lines(const Expr& e, const Context& ctx = {})
{
    LPoly acc;
    detail::nf_l(e, 1, ctx, acc);
    return acc;
}

inline Expr normalize(const Expr& e, const Context& ctx = {})
{
    if (!contains_lambda(e)) {
        return detail::render_poly(detail::nf_k(e, ctx));
    }
    std::vector<Expr> factors;
    for (const auto& [key, me] : normal_lines(e, ctx)) {
        Expr l = lambda(detail::render_monomial(me.first));
        factors.push_back(me.second == 1 ? l : power(l, me.second));
    }
    if (factors.empty()) {
        return unit();
    }
    return factors.size() == 1 ? factors[0] : tensor(factors);
}

inline bool nf_equal(const Expr& a, const Expr& b, const Context& ctx = {})
{
    return print(normalize(a, ctx)) == print(normalize(b, ctx));
}

} // namespace detlb::k
