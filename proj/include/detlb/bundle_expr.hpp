#pragma once

// Bundle expressions on a Chow model, evaluated to their Chern character.
//
//   expr    := ['-'] term (('+' | '-') term)*
//   term    := factor ('*' factor)*
//   factor  := primary ('^' ['-'] int)?
//   primary := int | 'O' ['(' int (',' int)* ')'] | 'Omega' | 'T'
//            | 'Sym' '(' int ',' expr ')' | 'dual' '(' expr ')' | '(' expr ')'
//
// O(a, b, ...) is the line bundle with c_1 = a*g_1 + b*g_2 + ...; Omega and
// T are the relative cotangent and tangent sheaves; '*' is the tensor
// product and an integer n stands for O^{n}.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "detlb/charclass.hpp"
#include "detlb/chowmodel.hpp"
#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

inline CharClass line_ch(const ChowModel& model, const std::vector<Integer>& degrees)
{
    if (degrees.size() != model.generators().size()) {
        throw DomainError("O(...) needs one degree per generator of " + model.name() + " ("
                          + std::to_string(model.generators().size()) + ")");
    }
    TruncatedSeries c1 = model.zero();
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        Exponents e(degrees.size(), 0);
        e[i] = 1;
        c1.add_term(e, Rational(degrees[i]));
    }
    return series_exp(c1);
}

inline CharClass tangent_ch(const ChowModel& model)
{
    return ch_from_chern(model.rel_dim(), model.tangent_chern());
}

inline CharClass cotangent_ch(const ChowModel& model) { return dual_ch(tangent_ch(model)); }

namespace detail {

class BundleParser {
public:
    BundleParser(const ChowModel& model, std::string_view text) : model_(model), s_(text) {}

    CharClass parse()
    {
        CharClass v = expr();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected trailing input");
        }
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ParseError("bundle expression '" + std::string(s_) + "' at offset " + std::to_string(pos_)
                         + ": " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
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

    bool peek_digit()
    {
        skip();
        return pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]));
    }

    Integer integer(bool allow_sign)
    {
        skip();
        std::size_t start = pos_;
        if (allow_sign && pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            ++pos_;
        }
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
        if (pos_ == digits) {
            fail("expected an integer");
        }
        std::string tok(s_.substr(start, pos_ - start));
        if (tok[0] == '+') {
            tok.erase(0, 1);
        }
        return Integer(tok);
    }

    std::string word()
    {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
        return std::string(s_.substr(start, pos_ - start));
    }

    CharClass expr()
    {
        CharClass v = eat('-') ? -term() : term();
        for (;;) {
            if (eat('+')) {
                v += term();
            } else if (eat('-')) {
                v -= term();
            } else {
                return v;
            }
        }
    }

    CharClass term()
    {
        CharClass v = factor();
        while (eat('*')) {
            v = v * factor();
        }
        return v;
    }

    CharClass factor()
    {
        CharClass v = primary();
        if (eat('^')) {
            Integer k = integer(true);
            if (!k.fits_sint_p() || abs(k) > 4096) {
                fail("exponent out of range");
            }
            long n = k.get_si();
            if (n < 0) {
                if (v.constant_term() != 1) {
                    fail("negative powers are only defined for line bundles");
                }
                v = dual_ch(v);
                n = -n;
            }
            v = series_pow(v, static_cast<unsigned>(n));
        }
        return v;
    }

    CharClass primary()
    {
        if (peek_digit()) {
            return model_.one() * Rational(integer(false));
        }
        if (eat('(')) {
            CharClass v = expr();
            expect(')');
            return v;
        }
        std::string w = word();
        if (w == "O") {
            if (!eat('(')) {
                return model_.one();
            }
            std::vector<Integer> degs;
            degs.push_back(integer(true));
            while (eat(',')) {
                degs.push_back(integer(true));
            }
            expect(')');
            return line_ch(model_, degs);
        }
        if (w == "Omega") {
            return cotangent_ch(model_);
        }
        if (w == "T") {
            return tangent_ch(model_);
        }
        if (w == "Sym") {
            expect('(');
            Integer j = integer(false);
            if (!j.fits_uint_p() || j > 256) {
                fail("symmetric power degree out of range");
            }
            expect(',');
            CharClass inner = expr();
            expect(')');
            return sym_ch(inner, static_cast<unsigned>(j.get_ui()));
        }
        if (w == "dual") {
            expect('(');
            CharClass inner = expr();
            expect(')');
            return dual_ch(inner);
        }
        if (w.empty()) {
            fail("expected a bundle");
        }
        fail("unknown bundle '" + w + "'");
    }

    const ChowModel& model_;
    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline CharClass parse_bundle(const ChowModel& model, std::string_view text)
{
    return detail::BundleParser(model, text).parse();
}

} // namespace detlb
