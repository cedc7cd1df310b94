#pragma once

// Formal expressions for virtual equivariant sheaves and the determinant
// lines built from them.
//
// Text syntax (round-trips through print/parse):
//
//   sum     := ['-'] prod (('+' | '-') prod)*
//   prod    := postfix ('*' postfix)*        integer factors act as scalars
//   postfix := primary ('^' int | '^-' int | '^v' | '^?j' | '{-1}')*
//   primary := int | 'O' | name | name '(' sum ')' | 'lambda' '(' sum ')'
//            | 'Sym' '[' idx ']' '(' sum ')' | 'P' '[' idx ']' '(' sum ')'
//            | '?' name | '(' sum ')'
//   idx     := int | '?' name
//
// '*' is the tensor product, '^v' the dual, '{-1}' the sign twist.  A
// parenthesised sum stays a nested Sum node; nothing is flattened here.

#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb::k {

enum class Kind { Unit, Atom, Sum, Tensor, Power, Dual, Twist, Apply, Sym, Pk, Lambda, Var };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Kind kind = Kind::Unit;
    std::string name;       // atom, functor or pattern variable
    Integer n;              // power exponent, Sym / P index
    std::string nvar;       // pattern variable standing for n
    std::vector<Expr> kids;
    std::vector<Integer> coeffs; // Sum only, parallel to kids
};

struct Term {
    Integer coeff;
    Expr expr;
};

inline Expr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

inline Expr unit() { return make(Node{Kind::Unit, {}, 0, {}, {}, {}}); }
inline Expr atom(std::string name) { return make(Node{Kind::Atom, std::move(name), 0, {}, {}, {}}); }
inline Expr var(std::string name) { return make(Node{Kind::Var, std::move(name), 0, {}, {}, {}}); }

inline Expr sum(const std::vector<Term>& terms)
{
    Node n{Kind::Sum, {}, 0, {}, {}, {}};
    for (const auto& t : terms) {
        n.coeffs.push_back(t.coeff);
        n.kids.push_back(t.expr);
    }
    return make(std::move(n));
}

inline Expr zero() { return sum({}); }

inline Expr tensor(std::vector<Expr> factors) { return make(Node{Kind::Tensor, {}, 0, {}, std::move(factors), {}}); }

inline Expr power(Expr base, const Integer& e) { return make(Node{Kind::Power, {}, e, {}, {std::move(base)}, {}}); }

inline Expr power_var(Expr base, std::string v)
{
    return make(Node{Kind::Power, {}, 0, std::move(v), {std::move(base)}, {}});
}

inline Expr dual(Expr x) { return make(Node{Kind::Dual, {}, 0, {}, {std::move(x)}, {}}); }
inline Expr twist(Expr x) { return make(Node{Kind::Twist, {}, 0, {}, {std::move(x)}, {}}); }
inline Expr apply(std::string f, Expr x) { return make(Node{Kind::Apply, std::move(f), 0, {}, {std::move(x)}, {}}); }
inline Expr sym(const Integer& j, Expr x) { return make(Node{Kind::Sym, {}, j, {}, {std::move(x)}, {}}); }
inline Expr pk(const Integer& k, Expr x) { return make(Node{Kind::Pk, {}, k, {}, {std::move(x)}, {}}); }
inline Expr lambda(Expr x) { return make(Node{Kind::Lambda, {}, 0, {}, {std::move(x)}, {}}); }

inline Expr with_kids(const Expr& e, std::vector<Expr> kids)
{
    Node n = *e;
    n.kids = std::move(kids);
    return make(std::move(n));
}

inline bool is_zero_sum(const Expr& e) { return e->kind == Kind::Sum && e->kids.empty(); }

inline bool has_n(const Node& n) { return n.kind == Kind::Power || n.kind == Kind::Sym || n.kind == Kind::Pk; }

inline bool equal(const Expr& a, const Expr& b)
{
    if (a == b) {
        return true;
    }
    if (a->kind != b->kind || a->name != b->name || a->kids.size() != b->kids.size()) {
        return false;
    }
    if (has_n(*a) && (a->n != b->n || a->nvar != b->nvar)) {
        return false;
    }
    if (a->coeffs != b->coeffs) {
        return false;
    }
    for (std::size_t i = 0; i < a->kids.size(); ++i) {
        if (!equal(a->kids[i], b->kids[i])) {
            return false;
        }
    }
    return true;
}

inline bool contains_lambda(const Expr& e)
{
    if (e->kind == Kind::Lambda) {
        return true;
    }
    for (const auto& k : e->kids) {
        if (contains_lambda(k)) {
            return true;
        }
    }
    return false;
}

inline bool is_pull(const std::string& f) { return f.rfind("pull_", 0) == 0; }
inline bool is_push(const std::string& f) { return f.rfind("push_", 0) == 0; }
inline bool is_isotypic(const std::string& f) { return f == "plus" || f == "minus"; }

namespace detail {

inline std::string index_text(const Node& n) { return n.nvar.empty() ? n.n.get_str() : "?" + n.nvar; }

// level 0: anything; 1: tensor factor or sum term (sums need parens);
// 2: postfix base (sums and tensors need parens).
inline void print_into(const Expr& e, int level, std::string& out)
{
    switch (e->kind) {
    case Kind::Unit:
        out += "O";
        return;
    case Kind::Atom:
        out += e->name;
        return;
    case Kind::Var:
        out += "?" + e->name;
        return;
    case Kind::Sum: {
        if (e->kids.empty()) {
            out += "0";
            return;
        }
        if (level > 0) {
            out += "(";
        }
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            const Integer& c = e->coeffs[i];
            if (i == 0) {
                if (c < 0) {
                    out += "-";
                }
            } else {
                out += c < 0 ? " - " : " + ";
            }
            Integer mag = abs(c);
            if (mag != 1) {
                out += mag.get_str() + "*";
            }
            print_into(e->kids[i], 1, out);
        }
        if (level > 0) {
            out += ")";
        }
        return;
    }
    case Kind::Tensor: {
        if (e->kids.empty()) {
            out += "O";
            return;
        }
        if (level > 1) {
            out += "(";
        }
        for (std::size_t i = 0; i < e->kids.size(); ++i) {
            if (i > 0) {
                out += "*";
            }
            print_into(e->kids[i], 2, out);
        }
        if (level > 1) {
            out += ")";
        }
        return;
    }
    case Kind::Power:
        print_into(e->kids[0], 2, out);
        out += "^" + index_text(*e);
        return;
    case Kind::Dual:
        print_into(e->kids[0], 2, out);
        out += "^v";
        return;
    case Kind::Twist:
        print_into(e->kids[0], 2, out);
        out += "{-1}";
        return;
    case Kind::Apply:
        out += e->name + "(";
        print_into(e->kids[0], 0, out);
        out += ")";
        return;
    case Kind::Sym:
        out += "Sym[" + index_text(*e) + "](";
        print_into(e->kids[0], 0, out);
        out += ")";
        return;
    case Kind::Pk:
        out += "P[" + index_text(*e) + "](";
        print_into(e->kids[0], 0, out);
        out += ")";
        return;
    case Kind::Lambda:
        out += "lambda(";
        print_into(e->kids[0], 0, out);
        out += ")";
        return;
    }
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    Expr parse()
    {
        Expr e = parse_sum();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected trailing input");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError("expression '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool peek(char c)
    {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    bool eat(char c)
    {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!eat(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    bool at_digit()
    {
        skip();
        return pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]));
    }

    Integer number()
    {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
        if (start == pos_) {
            fail("expected a number");
        }
        return Integer(std::string(s_.substr(start, pos_ - start)));
    }

    std::string ident()
    {
        skip();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            ++pos_;
            while (pos_ < s_.size()
                   && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
        }
        if (start == pos_) {
            fail("expected a name");
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    // (value, variable) for Sym / P indices and exponents.
    std::pair<Integer, std::string> index(bool allow_negative)
    {
        if (eat('?')) {
            return {0, ident()};
        }
        bool neg = allow_negative && eat('-');
        Integer v = number();
        return {neg ? Integer(-v) : v, {}};
    }

    Expr parse_sum()
    {
        std::vector<Term> terms;
        int sign = eat('-') ? -1 : 1;
        bool explicit_sign = sign < 0;
        for (;;) {
            auto [c, f] = parse_prod();
            terms.push_back({c * sign, f ? f : unit()});
            if (!f && c == 0 && terms.size() == 1 && !explicit_sign && !peek('+') && !peek('-')) {
                return zero();
            }
            if (eat('+')) {
                sign = 1;
            } else if (eat('-')) {
                sign = -1;
            } else {
                break;
            }
        }
        if (terms.size() == 1 && terms[0].coeff == 1) {
            return terms[0].expr;
        }
        return sum(terms);
    }

    // Scalar and tensor part; the tensor part is null for a bare integer.
    std::pair<Integer, Expr> parse_prod()
    {
        Integer scalar = 1;
        std::vector<Expr> factors;
        do {
            if (at_digit()) {
                scalar *= number();
                continue;
            }
            factors.push_back(parse_postfix());
        } while (eat('*'));
        if (factors.empty()) {
            return {scalar, nullptr};
        }
        return {scalar, factors.size() == 1 ? factors[0] : tensor(std::move(factors))};
    }

    Expr parse_postfix()
    {
        Expr e = parse_primary();
        for (;;) {
            if (eat('^')) {
                if (eat('v')) {
                    e = dual(e);
                    continue;
                }
                auto [v, name] = index(true);
                e = name.empty() ? power(e, v) : power_var(e, name);
                continue;
            }
            if (peek('{')) {
                ++pos_;
                expect('-');
                skip();
                if (pos_ >= s_.size() || s_[pos_] != '1') {
                    fail("expected {-1}");
                }
                ++pos_;
                expect('}');
                e = twist(e);
                continue;
            }
            return e;
        }
    }

    Expr parse_primary()
    {
        if (eat('(')) {
            Expr e = parse_sum();
            expect(')');
            return e;
        }
        if (eat('?')) {
            return var(ident());
        }
        std::string id = ident();
        if ((id == "Sym" || id == "P") && peek('[')) {
            ++pos_;
            auto [v, name] = index(false);
            expect(']');
            expect('(');
            Expr arg = parse_sum();
            expect(')');
            Node n{id == "Sym" ? Kind::Sym : Kind::Pk, {}, v, name, {arg}, {}};
            return make(std::move(n));
        }
        if (id == "lambda") {
            expect('(');
            Expr arg = parse_sum();
            expect(')');
            return lambda(arg);
        }
        if (peek('(')) {
            ++pos_;
            Expr arg = parse_sum();
            expect(')');
            return apply(id, arg);
        }
        if (id == "O") {
            return unit();
        }
        return atom(id);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string print(const Expr& e)
{
    std::string out;
    detail::print_into(e, 0, out);
    return out;
}

inline Expr parse(std::string_view text) { return detail::Parser(text).parse(); }

} // namespace detlb::k
