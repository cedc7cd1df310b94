#pragma once

// Polynomial algebras with a diagonal Z/2 sign action: Hilbert series of
// the invariant part, the fixed ideal, and a freeness verdict for R over
// R_0 read off from truncated Hilbert series.

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

struct GradedVar {
    std::string name;
    int degree = 1;
    int parity = 0;
};

class GradedAlgebra {
public:
    explicit GradedAlgebra(std::vector<GradedVar> vars) : vars_(std::move(vars))
    {
        if (vars_.empty()) {
            throw DomainError("a graded algebra needs at least one variable");
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].degree < 1) {
                throw DomainError("variable '" + vars_[i].name + "' needs a positive degree");
            }
            if (vars_[i].parity != 0 && vars_[i].parity != 1) {
                throw DomainError("variable '" + vars_[i].name + "' has parity outside {0,1}");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (vars_[i].name == vars_[j].name) {
                    throw DomainError("duplicate variable '" + vars_[i].name + "'");
                }
            }
        }
    }

    const std::vector<GradedVar>& vars() const { return vars_; }

    std::vector<std::size_t> odd_indices() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].parity == 1) {
                out.push_back(i);
            }
        }
        return out;
    }

private:
    std::vector<GradedVar> vars_;
};

// "x:1:odd,y:2:even"; degree and parity may be omitted (defaults 1, even).
inline GradedAlgebra parse_graded_algebra(std::string_view spec)
{
    std::vector<GradedVar> vars;
    std::stringstream ss{std::string(spec)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ':')) {
            std::string t;
            for (char c : p) {
                if (!std::isspace(static_cast<unsigned char>(c))) {
                    t += c;
                }
            }
            parts.push_back(t);
        }
        if (parts.empty() || parts.size() > 3 || parts[0].empty()) {
            throw ParseError("variable spec '" + item + "' should look like name:degree:parity");
        }
        GradedVar v;
        v.name = parts[0];
        if (parts.size() >= 2) {
            try {
                std::size_t used = 0;
                v.degree = std::stoi(parts[1], &used);
                if (used != parts[1].size()) {
                    throw std::invalid_argument("junk");
                }
            } catch (const std::exception&) {
                throw ParseError("bad degree in '" + item + "'");
            }
        }
        if (parts.size() == 3) {
            if (parts[2] == "odd" || parts[2] == "1") {
                v.parity = 1;
            } else if (parts[2] == "even" || parts[2] == "0") {
                v.parity = 0;
            } else {
                throw ParseError("parity must be odd or even in '" + item + "'");
            }
        }
        vars.push_back(v);
    }
    try {
        return GradedAlgebra(std::move(vars));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

// Coefficients h_0..h_bound of a one-variable integer series.
using HilbertSeries = std::vector<Integer>;

namespace detail {

// prod_i 1/(1 - s_i t^{d_i}) with s_i = -1 for odd variables when signed.
inline HilbertSeries hilbert_product(const GradedAlgebra& a, int bound, bool signed_odd)
{
    HilbertSeries h(bound + 1);
    h[0] = 1;
    for (const auto& v : a.vars()) {
        const int s = (signed_odd && v.parity == 1) ? -1 : 1;
        for (int n = v.degree; n <= bound; ++n) {
            if (s == 1) {
                h[n] += h[n - v.degree];
            } else {
                h[n] -= h[n - v.degree];
            }
        }
    }
    return h;
}

} // namespace detail

inline HilbertSeries hilbert_series(const GradedAlgebra& a, int bound)
{
    if (bound < 0) {
        throw DomainError("series bound must be non-negative");
    }
    return detail::hilbert_product(a, bound, false);
}

inline HilbertSeries invariants_hs(const GradedAlgebra& a, int bound = 40)
{
    HilbertSeries all = hilbert_series(a, bound);
    HilbertSeries sgn = detail::hilbert_product(a, bound, true);
    HilbertSeries out(bound + 1);
    for (int n = 0; n <= bound; ++n) {
        out[n] = (all[n] + sgn[n]) / 2;
    }
    return out;
}

inline HilbertSeries anti_invariants_hs(const GradedAlgebra& a, int bound = 40)
{
    HilbertSeries all = hilbert_series(a, bound);
    HilbertSeries sgn = detail::hilbert_product(a, bound, true);
    HilbertSeries out(bound + 1);
    for (int n = 0; n <= bound; ++n) {
        out[n] = (all[n] - sgn[n]) / 2;
    }
    return out;
}

// num / den as power series; den[0] must be 1.
inline HilbertSeries series_divide(const HilbertSeries& num, const HilbertSeries& den)
{
    if (den.empty() || den[0] != 1) {
        throw DomainError("series division needs a denominator with constant term 1");
    }
    const std::size_t n = num.size();
    HilbertSeries q(n);
    for (std::size_t k = 0; k < n; ++k) {
        Integer acc = num[k];
        for (std::size_t i = 1; i <= k && i < den.size(); ++i) {
            acc -= den[i] * q[k - i];
        }
        q[k] = acc;
    }
    return q;
}

inline HilbertSeries series_multiply(const HilbertSeries& a, const HilbertSeries& b, std::size_t len)
{
    HilbertSeries out(len);
    for (std::size_t i = 0; i < a.size() && i < len; ++i) {
        if (a[i] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < b.size() && i + j < len; ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

struct FixedIdeal {
    std::vector<std::string> generators; // odd variables
    bool cartier = false;
    bool trivial_action = false; // no odd variables: the whole space is fixed
};

inline FixedIdeal fixed_ideal(const GradedAlgebra& a)
{
    FixedIdeal f;
    for (std::size_t i : a.odd_indices()) {
        f.generators.push_back(a.vars()[i].name);
    }
    f.cartier = f.generators.size() == 1;
    f.trivial_action = f.generators.empty();
    return f;
}

enum class FlatnessVerdict { Free, NotFree, Inconclusive };

inline const char* to_string(FlatnessVerdict v)
{
    switch (v) {
    case FlatnessVerdict::Free:
        return "FREE";
    case FlatnessVerdict::NotFree:
        return "NOT-FREE";
    case FlatnessVerdict::Inconclusive:
        return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

struct FlatnessReport {
    HilbertSeries hs_r;
    HilbertSeries hs_r0;
    HilbertSeries ratio;
    std::vector<std::string> basis; // squarefree monomials in the odd variables
    HilbertSeries basis_series;
    FlatnessVerdict verdict = FlatnessVerdict::Inconclusive;
    int first_negative = -1;
};

// Squarefree monomials in the odd variables, e.g. {1, x, y, x*y}.
inline std::vector<std::string> odd_basis(const GradedAlgebra& a, HilbertSeries& degrees, int bound)
{
    auto odd = a.odd_indices();
    std::vector<std::string> names;
    degrees.assign(bound + 1, 0);
    const std::size_t count = std::size_t{1} << odd.size();
    for (std::size_t mask = 0; mask < count; ++mask) {
        std::string name;
        int deg = 0;
        for (std::size_t k = 0; k < odd.size(); ++k) {
            if (mask & (std::size_t{1} << k)) {
                name += name.empty() ? "" : "*";
                name += a.vars()[odd[k]].name;
                deg += a.vars()[odd[k]].degree;
            }
        }
        names.push_back(name.empty() ? "1" : name);
        if (deg <= bound) {
            degrees[deg] += 1;
        }
    }
    return names;
}

inline FlatnessReport flatness_verdict(const GradedAlgebra& a, int bound = 40)
{
    if (a.odd_indices().size() > 20) {
        throw DomainError("too many odd variables for the candidate basis");
    }
    FlatnessReport r;
    r.hs_r = hilbert_series(a, bound);
    r.hs_r0 = invariants_hs(a, bound);
    r.ratio = series_divide(r.hs_r, r.hs_r0);
    r.basis = odd_basis(a, r.basis_series, bound);

    for (int n = 0; n <= bound; ++n) {
        if (r.ratio[n] < 0) {
            r.first_negative = n;
            break;
        }
    }
    if (r.first_negative >= 0) {
        r.verdict = FlatnessVerdict::NotFree;
        return r;
    }
    int last = -1;
    for (int n = 0; n <= bound; ++n) {
        if (r.ratio[n] != 0) {
            last = n;
        }
    }
    // A polynomial ratio must have settled well inside the window.
    const bool polynomial = last <= bound / 2;
    const bool basis_ok = series_multiply(r.hs_r0, r.basis_series, bound + 1) == r.hs_r;
    r.verdict = (polynomial && basis_ok) ? FlatnessVerdict::Free : FlatnessVerdict::Inconclusive;
    return r;
}

// True iff the parity-0 part of the conormal module (x)/(x^2) vanishes,
// x the single odd variable.  As a graded module (x)/(x^2) = x * k[rest],
// so its invariant part is x times the odd part of k[rest], which is
// checked to vanish up to the bound.
inline bool conormal_degree_zero(const GradedAlgebra& a, int bound = 40)
{
    FixedIdeal f = fixed_ideal(a);
    if (!f.cartier) {
        throw PreconditionError("the fixed locus is not cut out by a single odd variable");
    }
    const std::size_t x = a.odd_indices().front();
    if (a.vars()[x].parity != 1) {
        return false;
    }
    std::vector<GradedVar> rest;
    for (std::size_t i = 0; i < a.vars().size(); ++i) {
        if (i != x) {
            rest.push_back(a.vars()[i]);
        }
    }
    if (rest.empty()) {
        return true;
    }
    for (const auto& c : anti_invariants_hs(GradedAlgebra(rest), bound)) {
        if (c != 0) {
            return false;
        }
    }
    return true;
}

} // namespace detlb
