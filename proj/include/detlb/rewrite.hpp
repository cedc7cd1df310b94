#pragma once

// Named rewrite axioms over formal expressions and the proof-chain checker.
//
// An axiom is tried at every node in pre-order; a step names the axiom and
// the 1-based index of the site to rewrite ("*" rewrites every outermost
// site).  Each step's result must agree with the step's expected display up
// to canon(); the chain then continues from that display, so positions in
// a script always refer to displays a reader can see.  Axioms marked formal
// are identities of the normal form and must also preserve normalize();
// the others carry geometric input (adjunction, projection formula, ...).

#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"
#include "detlb/kexpr.hpp"
#include "detlb/knormal.hpp"

namespace detlb::k {

struct Site {
    // Inside a lambda argument.
    bool in_lambda = false;
    // Every functor between here and the enclosing lambda commutes with
    // the sign twist, so -F and F{-1} give the same determinant.
    bool sign_safe = false;
};

class Axiom {
public:
    Axiom(std::string name, std::string anchor, bool formal)
        : name_(std::move(name)), anchor_(std::move(anchor)), formal_(formal)
    {
    }
    virtual ~Axiom() = default;

    const std::string& name() const { return name_; }
    const std::string& anchor() const { return anchor_; }
    bool formal() const { return formal_; }
    virtual bool reversible() const { return false; }
    virtual bool root_only() const { return false; }

    virtual std::optional<Expr> rewrite(const Expr& node, const Site& site, bool rtl) const = 0;

private:
    std::string name_;
    std::string anchor_;
    bool formal_;
};

namespace detail {

inline Expr tensor_or_single(std::vector<Expr> fs)
{
    if (fs.empty()) {
        return unit();
    }
    return fs.size() == 1 ? fs[0] : tensor(std::move(fs));
}

inline Expr lambda_pow(const Expr& arg, const Integer& n)
{
    Expr l = lambda(arg);
    if (n == 1) {
        return l;
    }
    if (n == -1) {
        return dual(l);
    }
    return power(l, n);
}

inline std::vector<Term> terms_of(const Expr& e)
{
    if (e->kind == Kind::Sum) {
        std::vector<Term> out;
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            out.push_back({e->coeffs[i], e->kids[i]});
        }
        return out;
    }
    return {{1, e}};
}

inline Expr tensor_drop_units(std::vector<Expr> fs)
{
    std::vector<Expr> kept;
    for (auto& f : fs) {
        if (f->kind == Kind::Unit) {
            continue;
        }
        if (f->kind == Kind::Tensor) {
            kept.insert(kept.end(), f->kids.begin(), f->kids.end());
        } else {
            kept.push_back(f);
        }
    }
    return tensor_or_single(std::move(kept));
}

// O - Y with unit coefficients, in either order; returns Y.
inline std::optional<Expr> one_minus(const Expr& e)
{
    if (e->kind != Kind::Sum || e->kids.size() != 2) {
        return std::nullopt;
    }
    for (int i = 0; i < 2; ++i) {
        int j = 1 - i;
        if (e->coeffs[i] == 1 && e->kids[i]->kind == Kind::Unit && e->coeffs[j] == -1) {
            return e->kids[j];
        }
    }
    return std::nullopt;
}

// Counts the (O - Y) factors of a lambda argument, powers included; nullopt
// if some factor has another shape.
inline std::optional<Integer> count_one_minus(const Expr& arg)
{
    std::vector<Expr> fs = arg->kind == Kind::Tensor ? arg->kids : std::vector<Expr>{arg};
    Integer n = 0;
    for (const auto& f : fs) {
        if (one_minus(f)) {
            n += 1;
        } else if (f->kind == Kind::Power && f->nvar.empty() && f->n > 0 && one_minus(f->kids[0])) {
            n += f->n;
        } else {
            return std::nullopt;
        }
    }
    return n;
}

inline Expr strip_pull(const Expr& e, const std::string& f)
{
    if (e->kind == Kind::Apply && e->name == f) {
        return e->kids[0];
    }
    std::vector<Expr> kids;
    for (const auto& k : e->kids) {
        kids.push_back(strip_pull(k, f));
    }
    return e->kids.empty() ? e : with_kids(e, std::move(kids));
}

// All leaves are f(...) for one pullback f, or O.
inline bool pull_leaves(const Expr& e, std::string& f)
{
    switch (e->kind) {
    case Kind::Unit:
        return true;
    case Kind::Apply:
        if (!is_pull(e->name)) {
            return false;
        }
        if (f.empty()) {
            f = e->name;
        }
        return f == e->name;
    case Kind::Atom:
    case Kind::Var:
    case Kind::Lambda:
        return false;
    default:
        for (const auto& k : e->kids) {
            if (!pull_leaves(k, f)) {
                return false;
            }
        }
        return true;
    }
}

} // namespace detail

namespace axioms {

using detail::lambda_pow;
using detail::tensor_or_single;

// lambda(F{-1}) = lambda(F)^v; inside a determinant, -F and F{-1} agree.
class Veeq : public Axiom {
public:
    Veeq() : Axiom("veeq", "lambda-of-twist-is-dual", true) {}
    bool reversible() const override { return true; }

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool rtl) const override
    {
        if (e->kind == Kind::Sum && s.in_lambda && s.sign_safe) {
            std::vector<Term> out;
            bool changed = false;
            for (std::size_t i = 0; i < e->kids.size(); ++i) {
                const Integer& c = e->coeffs[i];
                const Expr& t = e->kids[i];
                if (!rtl && c < 0) {
                    out.push_back({-c, t->kind == Kind::Twist ? t->kids[0] : twist(t)});
                    changed = true;
                } else if (rtl && t->kind == Kind::Twist) {
                    out.push_back({-c, t->kids[0]});
                    changed = true;
                } else {
                    out.push_back({c, t});
                }
            }
            if (changed) {
                return sum(out);
            }
            return std::nullopt;
        }
        if (!s.in_lambda) {
            if (!rtl && e->kind == Kind::Lambda && e->kids[0]->kind == Kind::Twist) {
                return dual(lambda(e->kids[0]->kids[0]));
            }
            if (rtl && e->kind == Kind::Dual && e->kids[0]->kind == Kind::Lambda) {
                return lambda(twist(e->kids[0]->kids[0]));
            }
        }
        return std::nullopt;
    }
};

// lambda(sum n_i F_i (x) R) = prod lambda(F_i (x) R)^{n_i}
class Additivity : public Axiom {
public:
    Additivity() : Axiom("additivity", "lambda-additive-on-exact-sequences", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool) const override
    {
        if (s.in_lambda || e->kind != Kind::Lambda) {
            return std::nullopt;
        }
        const Expr& arg = e->kids[0];
        std::vector<Expr> fs;
        std::size_t slot = 0;
        if (arg->kind == Kind::Sum) {
            fs = {arg};
        } else if (arg->kind == Kind::Tensor) {
            fs = arg->kids;
            slot = fs.size();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                if (fs[i]->kind == Kind::Sum) {
                    slot = i;
                    break;
                }
            }
            if (slot == fs.size()) {
                return std::nullopt;
            }
        } else {
            return std::nullopt;
        }
        const Expr s_node = fs[slot];
        std::vector<Expr> out;
        for (std::size_t i = 0; i < s_node->kids.size(); ++i) {
            if (s_node->coeffs[i] == 0) {
                continue;
            }
            std::vector<Expr> g = fs;
            g[slot] = s_node->kids[i];
            out.push_back(lambda_pow(detail::tensor_drop_units(g), s_node->coeffs[i]));
        }
        if (out.empty()) {
            return lambda(zero());
        }
        return tensor_or_single(std::move(out));
    }
};

// Bookkeeping step: the display is rewritten by hand and checked by canon().
class Cancel : public Axiom {
public:
    Cancel() : Axiom("cancel", "cancellation", true) {}
    bool root_only() const override { return true; }
    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override { return e; }
};

// X (x) P_k(X) = 2^{k+1} O - (2 O - X)^{k+1}
class PkIdentity : public Axiom {
public:
    PkIdentity() : Axiom("pk-identity", "t-times-Pk", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override
    {
        if (e->kind != Kind::Tensor) {
            return std::nullopt;
        }
        const auto& fs = e->kids;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (fs[i]->kind != Kind::Pk || !fs[i]->nvar.empty()) {
                continue;
            }
            const Expr& x = fs[i]->kids[0];
            for (std::size_t j = 0; j < fs.size(); ++j) {
                if (j == i || !canon_equal(fs[j], x)) {
                    continue;
                }
                const Integer k = fs[i]->n;
                Expr inner = sum({{2, unit()}, {-1, x}});
                Expr rep = sum({{pow2(static_cast<unsigned>(k.get_ui()) + 1), unit()}, {-1, power(inner, k + 1)}});
                std::vector<Expr> out;
                for (std::size_t m = 0; m < fs.size(); ++m) {
                    if (m == j) {
                        out.push_back(rep);
                    } else if (m != i) {
                        out.push_back(fs[m]);
                    }
                }
                return tensor_or_single(std::move(out));
            }
        }
        return std::nullopt;
    }
};

// P_k(T) = sum_{i=0}^{k} 2^{k-i} (2 O - T)^i
class PkDef : public Axiom {
public:
    PkDef() : Axiom("pk-def", "Pk-definition", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override
    {
        if (e->kind != Kind::Pk || !e->nvar.empty()) {
            return std::nullopt;
        }
        const unsigned k = static_cast<unsigned>(e->n.get_ui());
        Expr base = sum({{2, unit()}, {-1, e->kids[0]}});
        std::vector<Term> terms;
        for (unsigned i = 0; i <= k; ++i) {
            Expr t = i == 0 ? unit() : (i == 1 ? base : power(base, i));
            terms.push_back({pow2(k - i), t});
        }
        return sum(terms);
    }
};

// (O - X)^i = sum_j (-1)^j C(i, j) X^j
class Binomial : public Axiom {
public:
    Binomial() : Axiom("binomial", "binomial-formula", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override
    {
        if (e->kind != Kind::Power || !e->nvar.empty() || e->n < 0) {
            return std::nullopt;
        }
        auto x = detail::one_minus(e->kids[0]);
        if (!x) {
            return std::nullopt;
        }
        const unsigned i = static_cast<unsigned>(e->n.get_ui());
        std::vector<Term> terms;
        for (unsigned j = 0; j <= i; ++j) {
            Integer c = binomial(i, j);
            Expr t = j == 0 ? unit() : (j == 1 ? *x : power(*x, j));
            terms.push_back({j % 2 == 0 ? c : Integer(-c), t});
        }
        return sum(terms);
    }
};

// f^* is a ring map: an expression built from f^*(...) and O is f^* of the
// same expression.
class PullbackHom : public Axiom {
public:
    PullbackHom() : Axiom("pullback-hom", "pullback-ring-hom", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool) const override
    {
        if (!s.in_lambda || e->kind == Kind::Apply || e->kind == Kind::Unit) {
            return std::nullopt;
        }
        std::string f;
        if (!detail::pull_leaves(e, f) || f.empty()) {
            return std::nullopt;
        }
        return k::apply(f, detail::strip_pull(e, f));
    }
};

// lambda(f^*A (x) B) = lambda(A (x) f_*B)
class Projection : public Axiom {
public:
    Projection() : Axiom("projection", "projection-formula", false) {}

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool) const override
    {
        if (s.in_lambda || e->kind != Kind::Lambda) {
            return std::nullopt;
        }
        const Expr& arg = e->kids[0];
        std::vector<Expr> fs = arg->kind == Kind::Tensor ? arg->kids : std::vector<Expr>{arg};
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (fs[i]->kind == Kind::Apply && is_pull(fs[i]->name)) {
                std::string push = "push_" + fs[i]->name.substr(5);
                std::vector<Expr> rest;
                for (std::size_t j = 0; j < fs.size(); ++j) {
                    if (j != i) {
                        rest.push_back(fs[j]);
                    }
                }
                return lambda(tensor({fs[i]->kids[0], k::apply(push, tensor_or_single(rest))}));
            }
        }
        return std::nullopt;
    }
};

// On a quotient with trivial action f_*X splits into its +/- parts.
class Isotypic : public Axiom {
public:
    Isotypic() : Axiom("isotypic", "isotypic-decomposition", false) {}

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool) const override
    {
        if (!s.in_lambda || e->kind != Kind::Apply || !is_push(e->name)) {
            return std::nullopt;
        }
        return sum({Term{1, k::apply("plus", e)}, Term{1, twist(k::apply("minus", e))}});
    }
};

// Sym^j(X{-1}) = Sym^j(X){-1}^j
class SymTwist : public Axiom {
public:
    SymTwist() : Axiom("sym-twist", "sym-of-twist", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override
    {
        if (e->kind != Kind::Sym || !e->nvar.empty() || e->kids[0]->kind != Kind::Twist) {
            return std::nullopt;
        }
        Expr s = sym(e->n, e->kids[0]->kids[0]);
        return (e->n % 2 != 0) ? twist(s) : s;
    }
};

class PushAdditive : public Axiom {
public:
    PushAdditive() : Axiom("push-additive", "pushforward-additive", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override
    {
        if (e->kind != Kind::Apply || !(is_push(e->name) || is_isotypic(e->name))
            || e->kids[0]->kind != Kind::Sum) {
            return std::nullopt;
        }
        const Expr& s = e->kids[0];
        std::vector<Term> terms;
        for (std::size_t i = 0; i < s->kids.size(); ++i) {
            terms.push_back({s->coeffs[i], k::apply(e->name, s->kids[i])});
        }
        return sum(terms);
    }
};

// Multiplies out the first two tensor factors.
class Distribute : public Axiom {
public:
    Distribute() : Axiom("distribute", "distributivity", true) {}

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool) const override
    {
        if (e->kind != Kind::Tensor || e->kids.size() < 2) {
            return std::nullopt;
        }
        const Expr& a = e->kids[0];
        const Expr& b = e->kids[1];
        if (a->kind != Kind::Sum && b->kind != Kind::Sum) {
            return std::nullopt;
        }
        std::vector<Term> terms;
        for (const auto& ta : detail::terms_of(a)) {
            for (const auto& tb : detail::terms_of(b)) {
                terms.push_back({ta.coeff * tb.coeff, detail::tensor_drop_units({ta.expr, tb.expr})});
            }
        }
        Expr prod = sum(terms);
        if (e->kids.size() == 2) {
            return prod;
        }
        std::vector<Expr> fs{prod};
        fs.insert(fs.end(), e->kids.begin() + 2, e->kids.end());
        return tensor(fs);
    }
};

// In relative dimension d, lambda((O - A B) (x) R) = lambda((O - A) R) lambda((O - B) R)
// when R is a product of d factors (O - L_i).
class Multadd : public Axiom {
public:
    explicit Multadd(unsigned d) : Axiom("multadd", "multiadditivity", false), d_(d) {}

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool) const override
    {
        if (s.in_lambda || e->kind != Kind::Lambda) {
            return std::nullopt;
        }
        const Expr& arg = e->kids[0];
        auto count = detail::count_one_minus(arg);
        if (!count || *count != d_ + 1) {
            return std::nullopt;
        }
        std::vector<Expr> fs = arg->kind == Kind::Tensor ? arg->kids : std::vector<Expr>{arg};
        for (std::size_t i = 0; i < fs.size(); ++i) {
            auto y = detail::one_minus(fs[i]);
            if (!y || (*y)->kind != Kind::Tensor || (*y)->kids.size() < 2) {
                continue;
            }
            Expr a = (*y)->kids[0];
            Expr b = tensor_or_single(std::vector<Expr>((*y)->kids.begin() + 1, (*y)->kids.end()));
            auto with = [&](const Expr& z) {
                std::vector<Expr> g = fs;
                g[i] = sum({{1, unit()}, {-1, z}});
                return lambda(tensor_or_single(g));
            };
            return tensor({with(a), with(b)});
        }
        return std::nullopt;
    }

private:
    unsigned d_;
};

// In relative dimension d, lambda of a product of d+2 factors (O - L_i) is trivial.
class Ducrot : public Axiom {
public:
    explicit Ducrot(unsigned d) : Axiom("ducrot", "ducrot-triviality", false), d_(d) {}

    std::optional<Expr> rewrite(const Expr& e, const Site& s, bool) const override
    {
        if (s.in_lambda || e->kind != Kind::Lambda) {
            return std::nullopt;
        }
        auto count = detail::count_one_minus(e->kids[0]);
        if (!count || *count != d_ + 2) {
            return std::nullopt;
        }
        return lambda(zero());
    }

private:
    unsigned d_;
};

} // namespace axioms

// ---------------------------------------------------------------- patterns

struct Bindings {
    std::map<std::string, Expr> exprs;
    std::map<std::string, Integer> ints;
};

namespace detail {

inline bool match(const Expr& p, const Expr& s, Bindings& b);

inline bool bind_int(const std::string& v, const Integer& n, Bindings& b)
{
    auto it = b.ints.find(v);
    if (it != b.ints.end()) {
        return it->second == n;
    }
    b.ints.emplace(v, n);
    return true;
}

inline bool match_index(const Node& p, const Node& s, Bindings& b)
{
    if (!s.nvar.empty()) {
        return p.nvar == s.nvar;
    }
    if (p.nvar.empty()) {
        return p.n == s.n;
    }
    return bind_int(p.nvar, s.n, b);
}

// Commutative matching of pattern children against subject children.
inline bool match_perm(const Expr& p, const Expr& s, std::size_t i, std::vector<bool>& used, Bindings& b)
{
    if (i == p->kids.size()) {
        return true;
    }
    for (std::size_t j = 0; j < s->kids.size(); ++j) {
        if (used[j]) {
            continue;
        }
        if (p->kind == Kind::Sum && p->coeffs[i] != s->coeffs[j]) {
            continue;
        }
        Bindings trial = b;
        if (!match(p->kids[i], s->kids[j], trial)) {
            continue;
        }
        used[j] = true;
        if (match_perm(p, s, i + 1, used, trial)) {
            b = std::move(trial);
            return true;
        }
        used[j] = false;
    }
    return false;
}

inline bool match(const Expr& p, const Expr& s, Bindings& b)
{
    if (p->kind == Kind::Var) {
        auto it = b.exprs.find(p->name);
        if (it != b.exprs.end()) {
            return equal(it->second, s);
        }
        b.exprs.emplace(p->name, s);
        return true;
    }
    if (p->kind == Kind::Power && !p->nvar.empty() && b.ints.count(p->nvar) == 0) {
        // X^?j also matches X (j = 1) and O (j = 0).
        if (s->kind == Kind::Power && s->nvar.empty()) {
            Bindings trial = b;
            if (match(p->kids[0], s->kids[0], trial) && bind_int(p->nvar, s->n, trial)) {
                b = std::move(trial);
                return true;
            }
        }
        {
            Bindings trial = b;
            if (match(p->kids[0], s, trial) && bind_int(p->nvar, 1, trial)) {
                b = std::move(trial);
                return true;
            }
        }
        if (s->kind == Kind::Unit) {
            return bind_int(p->nvar, 0, b);
        }
        return false;
    }
    if (p->kind != s->kind || p->name != s->name || p->kids.size() != s->kids.size()) {
        return false;
    }
    if (has_n(*p) && !match_index(*p, *s, b)) {
        return false;
    }
    if (p->kind == Kind::Sum || p->kind == Kind::Tensor) {
        if (p->kids.size() > 8) {
            return equal(p, s);
        }
        std::vector<bool> used(s->kids.size(), false);
        return match_perm(p, s, 0, used, b);
    }
    for (std::size_t i = 0; i < p->kids.size(); ++i) {
        if (!match(p->kids[i], s->kids[i], b)) {
            return false;
        }
    }
    return true;
}

inline Expr instantiate(const Expr& p, const Bindings& b)
{
    if (p->kind == Kind::Var) {
        auto it = b.exprs.find(p->name);
        if (it == b.exprs.end()) {
            throw DomainError("pattern variable ?" + p->name + " is unbound");
        }
        return it->second;
    }
    Node n = *p;
    if (!n.nvar.empty()) {
        auto it = b.ints.find(n.nvar);
        if (it == b.ints.end()) {
            throw DomainError("index variable ?" + n.nvar + " is unbound");
        }
        n.n = it->second;
        n.nvar.clear();
    }
    n.kids.clear();
    for (const auto& k : p->kids) {
        Expr c = instantiate(k, b);
        if (p->kind == Kind::Tensor && c->kind == Kind::Tensor) {
            n.kids.insert(n.kids.end(), c->kids.begin(), c->kids.end());
        } else {
            n.kids.push_back(c);
        }
    }
    return make(std::move(n));
}

} // namespace detail

// An instance declared by a script: lhs -> rhs with ?F / ?j variables.
class PatternAxiom : public Axiom {
public:
    PatternAxiom(std::string name, std::string anchor, Expr lhs, Expr rhs, bool formal)
        : Axiom(std::move(name), std::move(anchor), formal), lhs_(std::move(lhs)), rhs_(std::move(rhs))
    {
    }
    bool reversible() const override { return true; }

    const Expr& lhs() const { return lhs_; }
    const Expr& rhs() const { return rhs_; }

    std::optional<Expr> rewrite(const Expr& e, const Site&, bool rtl) const override
    {
        const Expr& from = rtl ? rhs_ : lhs_;
        const Expr& to = rtl ? lhs_ : rhs_;
        Bindings b;
        if (!detail::match(from, e, b)) {
            return std::nullopt;
        }
        return detail::instantiate(to, b);
    }

private:
    Expr lhs_;
    Expr rhs_;
};

class AxiomRegistry {
public:
    void add(std::shared_ptr<const Axiom> a)
    {
        if (by_name_.count(a->name()) != 0) {
            throw DomainError("axiom '" + a->name() + "' registered twice");
        }
        by_name_.emplace(a->name(), a);
        order_.push_back(a->name());
    }

    const Axiom* find(const std::string& name) const
    {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : it->second.get();
    }

    const std::vector<std::string>& names() const { return order_; }

private:
    std::map<std::string, std::shared_ptr<const Axiom>> by_name_;
    std::vector<std::string> order_;
};

inline AxiomRegistry native_axioms(unsigned dim)
{
    AxiomRegistry r;
    r.add(std::make_shared<axioms::Veeq>());
    r.add(std::make_shared<axioms::Additivity>());
    r.add(std::make_shared<axioms::Cancel>());
    r.add(std::make_shared<axioms::PkIdentity>());
    r.add(std::make_shared<axioms::PkDef>());
    r.add(std::make_shared<axioms::Binomial>());
    r.add(std::make_shared<axioms::PullbackHom>());
    r.add(std::make_shared<axioms::Projection>());
    r.add(std::make_shared<axioms::Isotypic>());
    r.add(std::make_shared<axioms::SymTwist>());
    r.add(std::make_shared<axioms::PushAdditive>());
    r.add(std::make_shared<axioms::Distribute>());
    r.add(std::make_shared<axioms::Multadd>(dim));
    r.add(std::make_shared<axioms::Ducrot>(dim));
    return r;
}

// ---------------------------------------------------------------- driver

struct Rewritten {
    Expr result;
    std::size_t sites = 0;
};

namespace detail {

struct Found {
    std::vector<std::size_t> path;
    Expr replacement;
};

inline Site child_site(const Expr& parent, const Site& s)
{
    Site c = s;
    if (parent->kind == Kind::Lambda) {
        c.in_lambda = true;
        c.sign_safe = true;
    } else if (parent->kind == Kind::Sym) {
        c.sign_safe = false;
    } else if (parent->kind == Kind::Apply && !is_pull(parent->name) && !is_push(parent->name)) {
        c.sign_safe = false;
    }
    return c;
}

inline void find_sites(const Expr& e, const Site& s, const Axiom& ax, bool rtl, bool outermost,
                       std::vector<std::size_t>& path, std::vector<Found>& out)
{
    if (auto r = ax.rewrite(e, s, rtl)) {
        out.push_back({path, *r});
        if (outermost) {
            return;
        }
    }
    Site c = child_site(e, s);
    for (std::size_t i = 0; i < e->kids.size(); ++i) {
        path.push_back(i);
        find_sites(e->kids[i], c, ax, rtl, outermost, path, out);
        path.pop_back();
    }
}

inline Expr replace_at(const Expr& e, const std::vector<std::size_t>& path, std::size_t depth, const Expr& rep)
{
    if (depth == path.size()) {
        return rep;
    }
    std::vector<Expr> kids = e->kids;
    kids[path[depth]] = replace_at(kids[path[depth]], path, depth + 1, rep);
    return with_kids(e, std::move(kids));
}

} // namespace detail

// position 0 means every outermost site.
inline std::optional<Rewritten> apply_axiom(const Expr& e, const Axiom& ax, std::size_t position, bool rtl)
{
    if (rtl && !ax.reversible()) {
        throw DomainError("axiom '" + ax.name() + "' has no right-to-left form");
    }
    if (ax.root_only()) {
        return Rewritten{*ax.rewrite(e, Site{}, rtl), 1};
    }
    std::vector<detail::Found> found;
    std::vector<std::size_t> path;
    detail::find_sites(e, Site{}, ax, rtl, position == 0, path, found);
    if (found.empty() || position > found.size()) {
        return std::nullopt;
    }
    if (position > 0) {
        const auto& f = found[position - 1];
        return Rewritten{detail::replace_at(e, f.path, 0, f.replacement), found.size()};
    }
    Expr r = e;
    for (const auto& f : found) {
        r = detail::replace_at(r, f.path, 0, f.replacement);
    }
    return Rewritten{r, found.size()};
}

inline std::size_t count_sites(const Expr& e, const Axiom& ax, bool rtl)
{
    std::vector<detail::Found> found;
    std::vector<std::size_t> path;
    detail::find_sites(e, Site{}, ax, rtl, false, path, found);
    return found.size();
}

// ---------------------------------------------------------------- scripts

struct DeclaredAxiom {
    std::string name;
    std::string lhs;
    std::string rhs;
    std::string anchor;
    bool formal = false;
};

struct ChainStep {
    std::string axiom;
    std::size_t position = 1; // 0 = "*"
    std::string note;
    std::optional<std::string> expect;
    std::optional<std::size_t> from; // display index, 0 = start
    bool rtl = false;
};

struct Script {
    std::string name;
    std::string anchor;
    std::set<std::string> bundles;
    unsigned dim = 1;
    std::string start;
    std::string end;
    std::vector<DeclaredAxiom> axioms;
    std::vector<ChainStep> steps;
};

inline std::string position_text(std::size_t p) { return p == 0 ? "*" : std::to_string(p); }

inline ChainStep step_from_json(const nlohmann::json& j)
{
    ChainStep s;
    s.axiom = j.at("axiom").get<std::string>();
    if (j.contains("position")) {
        const auto& p = j.at("position");
        if (p.is_string()) {
            if (p.get<std::string>() != "*") {
                throw ParseError("position must be a positive integer or \"*\"");
            }
            s.position = 0;
        } else {
            long v = p.get<long>();
            if (v < 1) {
                throw ParseError("position must be a positive integer or \"*\"");
            }
            s.position = static_cast<std::size_t>(v);
        }
    }
    s.note = j.value("note", std::string());
    if (j.contains("expect")) {
        s.expect = j.at("expect").get<std::string>();
    }
    if (j.contains("from")) {
        long f = j.at("from").get<long>();
        if (f < 0) {
            throw ParseError("from must be a display index >= 0");
        }
        s.from = static_cast<std::size_t>(f);
    }
    std::string dir = j.value("dir", std::string("ltr"));
    if (dir != "ltr" && dir != "rtl") {
        throw ParseError("dir must be ltr or rtl");
    }
    s.rtl = dir == "rtl";
    return s;
}

inline Script script_from_json(const nlohmann::json& j)
{
    Script s;
    try {
        const nlohmann::json* steps = &j;
        if (j.is_object()) {
            s.name = j.value("name", std::string("script"));
            s.anchor = j.value("anchor", std::string());
            for (const auto& b : j.value("bundles", nlohmann::json::array())) {
                s.bundles.insert(b.get<std::string>());
            }
            s.dim = j.value("dim", 1U);
            s.start = j.value("start", std::string());
            s.end = j.value("end", std::string());
            for (const auto& a : j.value("axioms", nlohmann::json::array())) {
                s.axioms.push_back({a.at("name").get<std::string>(), a.at("lhs").get<std::string>(),
                                    a.at("rhs").get<std::string>(), a.value("anchor", std::string()),
                                    a.value("formal", false)});
            }
            steps = &j.at("steps");
        } else if (!j.is_array()) {
            throw ParseError("script must be an object or a list of steps");
        }
        for (const auto& st : *steps) {
            s.steps.push_back(step_from_json(st));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("script: ") + e.what());
    }
    return s;
}

inline Script load_script_text(const std::string& text)
{
    try {
        return script_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("script: ") + e.what());
    }
}

inline Script load_script_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open script '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_script_text(ss.str());
}

inline AxiomRegistry registry_for(const Script& s)
{
    AxiomRegistry r = native_axioms(s.dim);
    for (const auto& a : s.axioms) {
        r.add(std::make_shared<PatternAxiom>(a.name, a.anchor, parse(a.lhs), parse(a.rhs), a.formal));
    }
    return r;
}

// Swaps the operations (axiom, position, direction, source) of steps i and
// i+1 (or i-1 for the last step) and leaves the expected displays in place.
inline Script corrupt_script(Script s, std::size_t index)
{
    if (s.steps.size() < 2 || index >= s.steps.size()) {
        throw DomainError("cannot corrupt step " + std::to_string(index + 1));
    }
    std::size_t other = index + 1 < s.steps.size() ? index + 1 : index - 1;
    auto& a = s.steps[index];
    auto& b = s.steps[other];
    std::swap(a.axiom, b.axiom);
    std::swap(a.position, b.position);
    std::swap(a.rtl, b.rtl);
    std::swap(a.from, b.from);
    return s;
}

struct StepReport {
    std::size_t index = 0; // 1-based
    std::string note;
    std::string axiom;
    std::string anchor;
    std::string position;
    bool rtl = false;
    std::size_t input_display = 0;
    std::size_t sites = 0;
    std::string result;
    std::string expected;
    std::optional<bool> nf_preserved;
    bool pass = false;
    std::string error;
};

struct ChainReport {
    std::string name;
    std::string start;
    std::string end;
    std::vector<std::string> displays;
    std::vector<StepReport> steps;
    std::string final_normal_form;
    std::string end_normal_form;
    bool end_matches = false;
    std::size_t first_failure = 0; // 1-based step, 0 if none
    bool pass = false;
};

inline ChainReport chain_verify(const Script& script, const std::string& start, const std::string& end)
{
    ChainReport rep;
    rep.name = script.name;
    rep.start = start;
    rep.end = end;
    Context ctx{script.bundles};
    AxiomRegistry reg = registry_for(script);

    std::vector<Expr> displays{parse(start)};
    rep.displays.push_back(print(displays[0]));
    std::size_t current = 0;

    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        const ChainStep& st = script.steps[i];
        StepReport sr;
        sr.index = i + 1;
        sr.note = st.note;
        sr.axiom = st.axiom;
        sr.position = position_text(st.position);
        sr.rtl = st.rtl;
        sr.input_display = st.from.value_or(current);
        if (st.expect) {
            sr.expected = *st.expect;
        }
        auto fail = [&](std::string why) {
            sr.error = std::move(why);
            rep.steps.push_back(sr);
            rep.first_failure = i + 1;
        };
        if (sr.input_display >= displays.size()) {
            fail("display " + std::to_string(sr.input_display) + " does not exist yet");
            break;
        }
        const Axiom* ax = reg.find(st.axiom);
        if (ax == nullptr) {
            fail("unknown axiom '" + st.axiom + "'");
            break;
        }
        sr.anchor = ax->anchor();
        const Expr& input = displays[sr.input_display];
        try {
            auto rw = apply_axiom(input, *ax, st.position, st.rtl);
            if (!rw) {
                std::size_t n = count_sites(input, *ax, st.rtl);
                fail("axiom does not apply at position " + sr.position + " (" + std::to_string(n) + " sites)");
                break;
            }
            sr.sites = rw->sites;
            sr.result = print(rw->result);
            Expr next = rw->result;
            if (st.expect) {
                Expr want = parse(*st.expect);
                if (!canon_equal(rw->result, want)) {
                    fail("result does not match the expected display");
                    break;
                }
                next = want;
            }
            if (ax->formal()) {
                sr.nf_preserved = nf_equal(input, next, ctx);
                if (!*sr.nf_preserved) {
                    fail("formal step changes the normal form");
                    break;
                }
            }
            displays.push_back(next);
            rep.displays.push_back(print(next));
            current = displays.size() - 1;
        } catch (const std::exception& e) {
            fail(e.what());
            break;
        }
        sr.pass = true;
        rep.steps.push_back(sr);
    }

    if (rep.first_failure == 0) {
        try {
            rep.final_normal_form = print(normalize(displays[current], ctx));
            rep.end_normal_form = print(normalize(parse(end), ctx));
            rep.end_matches = rep.final_normal_form == rep.end_normal_form;
        } catch (const std::exception& e) {
            rep.end_matches = false;
            rep.final_normal_form = e.what();
        }
    }
    rep.pass = rep.first_failure == 0 && rep.end_matches;
    return rep;
}

inline ChainReport chain_verify(const Script& script) { return chain_verify(script, script.start, script.end); }

// The multiadditivity computation: lambda((O - Q) (O - L_1) ... (O - L_{d+1}))
// is taken apart until I(L_1 Q, ...) meets I(L_1, ...) I(Q, ...), and what is
// left cancels.  lhs is the start, rhs the last display.
struct MultaddResult {
    std::string lhs;
    std::string rhs;
    ChainReport chain;
};

inline Script multadd_script(const std::vector<std::string>& lines, const std::string& q)
{
    if (lines.empty()) {
        throw DomainError("multiadditivity needs at least one line");
    }
    auto om = [](const std::string& x) { return "(O - " + x + ")"; };
    std::string tail; // factors for L_2 .. L_{d+1}
    for (std::size_t i = 1; i < lines.size(); ++i) {
        tail += "*" + om(lines[i]);
    }
    const std::string all = om(lines[0]) + tail;
    auto with_first = [&](const std::string& f) { return "lambda(" + f + tail + ")"; };

    Script s;
    s.name = "multadd";
    s.anchor = "multiadditivity";
    s.dim = static_cast<unsigned>(lines.size() - 1);
    s.start = "lambda(" + om(q) + "*" + all + ")";
    s.end = "lambda(0)";
    const std::string i_l = "lambda(" + all + ")";
    s.steps.push_back({"additivity", 1, "split off O - Q", i_l + " * lambda(" + q + "*" + all + ")^v", {}, false});
    // With one line the first lambda has no product to distribute over.
    const std::size_t dist_pos = lines.size() == 1 ? 1 : 2;
    s.steps.push_back({"distribute", dist_pos, "multiply out Q (O - L_1)",
                       i_l + " * " + with_first("(" + q + " - " + q + "*" + lines[0] + ")") + "^v", {}, false});
    s.steps.push_back({"cancel", 1, "regroup",
                       i_l + " * " + with_first("((O - " + lines[0] + "*" + q + ") - " + om(q) + ")") + "^v", {},
                       false});
    s.steps.push_back({"additivity", 2, "split the regrouped factor",
                       i_l + " * " + with_first("(O - " + lines[0] + "*" + q + ")") + "^v * " + with_first(om(q)), {},
                       false});
    s.steps.push_back({"multadd", 1, "multiadditivity in the first slot",
                       i_l + " * " + i_l + "^v * " + with_first(om(q)) + "^v * " + with_first(om(q)), {}, false});
    s.steps.push_back({"cancel", 1, "trivial", "lambda(0)", {}, false});
    return s;
}

inline MultaddResult multiadditivity_expand(const std::vector<std::string>& lines, const std::string& q)
{
    Script s = multadd_script(lines, q);
    MultaddResult r;
    r.lhs = s.start;
    r.chain = chain_verify(s);
    r.rhs = r.chain.displays.back();
    return r;
}

} // namespace detlb::k
