#pragma once

// Integer polynomials in one variable t, the P_k family and the exponent
// tables c_j(d) attached to symmetric powers of the relative cotangent sheaf.

#include <cstddef>
#include <string>
#include <vector>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

class IntPoly {
public:
    IntPoly() = default;
    explicit IntPoly(std::vector<Integer> coeffs) : c_(std::move(coeffs)) { trim(); }

    static IntPoly constant(const Integer& c) { return IntPoly({c}); }
    static IntPoly t() { return IntPoly({0, 1}); }

    // a + b t
    static IntPoly linear(const Integer& a, const Integer& b) { return IntPoly({a, b}); }

    const std::vector<Integer>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    Integer operator[](std::size_t i) const { return i < c_.size() ? c_[i] : Integer(0); }

    IntPoly& operator+=(const IntPoly& o)
    {
        if (o.c_.size() > c_.size()) {
            c_.resize(o.c_.size());
        }
        for (std::size_t i = 0; i < o.c_.size(); ++i) {
            c_[i] += o.c_[i];
        }
        trim();
        return *this;
    }

    IntPoly& operator-=(const IntPoly& o)
    {
        if (o.c_.size() > c_.size()) {
            c_.resize(o.c_.size());
        }
        for (std::size_t i = 0; i < o.c_.size(); ++i) {
            c_[i] -= o.c_[i];
        }
        trim();
        return *this;
    }

    IntPoly& operator*=(const Integer& k)
    {
        for (auto& x : c_) {
            x *= k;
        }
        trim();
        return *this;
    }

    friend IntPoly operator+(IntPoly a, const IntPoly& b) { return a += b; }
    friend IntPoly operator-(IntPoly a, const IntPoly& b) { return a -= b; }
    friend IntPoly operator*(IntPoly a, const Integer& k) { return a *= k; }
    friend IntPoly operator*(const Integer& k, IntPoly a) { return a *= k; }

    friend IntPoly operator*(const IntPoly& a, const IntPoly& b)
    {
        if (a.is_zero() || b.is_zero()) {
            return {};
        }
        std::vector<Integer> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            for (std::size_t j = 0; j < b.c_.size(); ++j) {
                r[i + j] += a.c_[i] * b.c_[j];
            }
        }
        return IntPoly(std::move(r));
    }

    IntPoly pow(unsigned n) const
    {
        IntPoly r = constant(1);
        for (unsigned i = 0; i < n; ++i) {
            r = r * *this;
        }
        return r;
    }

    // p(q(t))
    IntPoly compose(const IntPoly& q) const
    {
        IntPoly r;
        for (std::size_t i = c_.size(); i-- > 0;) {
            r = r * q + constant(c_[i]);
        }
        return r;
    }

    bool operator==(const IntPoly&) const = default;

private:
    void trim()
    {
        while (!c_.empty() && c_.back() == 0) {
            c_.pop_back();
        }
    }

    std::vector<Integer> c_;
};

inline std::string to_string(const IntPoly& p)
{
    if (p.is_zero()) {
        return "0";
    }
    std::string out;
    for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
        const Integer& c = p.coeffs()[i];
        if (c == 0) {
            continue;
        }
        Integer mag = abs(c);
        if (out.empty()) {
            if (c < 0) {
                out += "-";
            }
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (i == 0) {
            out += mag.get_str();
            continue;
        }
        if (mag != 1) {
            out += mag.get_str() + "*";
        }
        out += "t";
        if (i > 1) {
            out += "^" + std::to_string(i);
        }
    }
    return out;
}

// P_k(t) = sum_{i=0}^{k} 2^{k-i} (2 - t)^i
inline IntPoly pk_poly(unsigned k)
{
    const IntPoly two_minus_t = IntPoly::linear(2, -1);
    IntPoly result;
    IntPoly power = IntPoly::constant(1);
    for (unsigned i = 0; i <= k; ++i) {
        result += power * pow2(k - i);
        power = power * two_minus_t;
    }
    return result;
}

inline bool pk_identity_check(unsigned k)
{
    IntPoly lhs = IntPoly::t() * pk_poly(k);
    IntPoly rhs = IntPoly::constant(pow2(k + 1)) - IntPoly::linear(2, -1).pow(k + 1);
    return lhs == rhs;
}

struct CoeffTable {
    unsigned dim = 0;
    std::vector<Integer> entries;
};

// Unfolded (i, j) matrix: m[i][j] = 2^{2d-i} (-1)^j C(i, j) for j <= i <= 2d.
inline std::vector<std::vector<Integer>> coeff_matrix(unsigned d)
{
    if (d == 0) {
        throw DomainError("coefficient tables are defined for d >= 1");
    }
    const unsigned n = 2 * d;
    std::vector<std::vector<Integer>> m(n + 1, std::vector<Integer>(n + 1));
    for (unsigned i = 0; i <= n; ++i) {
        for (unsigned j = 0; j <= i; ++j) {
            Integer v = pow2(n - i) * binomial(i, j);
            m[i][j] = (j % 2 == 0) ? v : Integer(-v);
        }
    }
    return m;
}

inline CoeffTable coeff_table(unsigned d)
{
    auto m = coeff_matrix(d);
    CoeffTable t;
    t.dim = d;
    t.entries.assign(2 * d + 1, 0);
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            t.entries[j] += row[j];
        }
    }
    return t;
}

// Writing the virtual class O - N{-1} as 2 - t with t = 1 + u, P_{2d}
// becomes a polynomial in u whose coefficients must be the table entries.
inline bool binomial_expansion_check(unsigned d)
{
    if (d == 0) {
        throw DomainError("binomial expansion check needs d >= 1");
    }
    IntPoly in_u = pk_poly(2 * d).compose(IntPoly::linear(1, 1));
    CoeffTable t = coeff_table(d);
    if (static_cast<std::size_t>(in_u.degree() + 1) != t.entries.size()) {
        return false;
    }
    for (std::size_t j = 0; j < t.entries.size(); ++j) {
        if (in_u[j] != t.entries[j]) {
            return false;
        }
    }
    return true;
}

} // namespace detlb
