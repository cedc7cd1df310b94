#pragma once

// Chern character, Todd class, Adams rescaling and symmetric powers on
// truncated series.  Bundles are handled through ch alone: total Chern
// classes are converted with Newton's identities, so no Chern roots need
// to exist in the carrier ring.

#include <vector>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

using CharClass = TruncatedSeries;

// Power sums p_1..p_bound of the roots whose elementary symmetric
// functions are the graded pieces of c.
inline std::vector<TruncatedSeries> power_sums(const TruncatedSeries& c)
{
    if (c.constant_term() != 1) {
        throw DomainError("total Chern class must have constant term 1");
    }
    const int n = c.bound();
    std::vector<TruncatedSeries> e(n + 1, c.zero_like());
    for (int k = 1; k <= n; ++k) {
        e[k] = c.component(k);
    }
    std::vector<TruncatedSeries> p(n + 1, c.zero_like());
    for (int k = 1; k <= n; ++k) {
        TruncatedSeries acc = e[k] * Rational((k % 2 == 1) ? k : -k);
        for (int i = 1; i < k; ++i) {
            if (e[i].is_zero() || p[k - i].is_zero()) {
                continue;
            }
            TruncatedSeries t = e[i] * p[k - i];
            if (i % 2 == 1) {
                acc += t;
            } else {
                acc -= t;
            }
        }
        p[k] = acc;
    }
    return p;
}

inline CharClass ch_from_chern(const Integer& rank, const TruncatedSeries& c)
{
    auto p = power_sums(c);
    CharClass out = c.constant_like(Rational(rank));
    for (int k = 1; k <= c.bound(); ++k) {
        out += p[k] * Rational(1, factorial(static_cast<unsigned>(k)));
    }
    return out;
}

// Coefficients beta_k of log(x / (1 - e^{-x})) for k = 0..n.
inline std::vector<Rational> todd_log_coefficients(int n)
{
    TruncatedSeries g(VarTable::uniform({"x"}), n);
    for (int k = 0; k <= n; ++k) {
        Rational c(1, factorial(static_cast<unsigned>(k + 1)));
        g.add_term({k}, (k % 2 == 0) ? c : Rational(-c));
    }
    TruncatedSeries lg = series_log(series_inverse(g));
    std::vector<Rational> beta(n + 1);
    for (int k = 0; k <= n; ++k) {
        beta[k] = lg.coefficient({k});
    }
    return beta;
}

// Td = prod a_i / (1 - e^{-a_i}) = exp(sum_k beta_k p_k).
inline CharClass todd_from_chern(const TruncatedSeries& c)
{
    auto p = power_sums(c);
    auto beta = todd_log_coefficients(c.bound());
    TruncatedSeries lg = c.zero_like();
    for (int k = 1; k <= c.bound(); ++k) {
        if (beta[k] != 0) {
            lg += p[k] * beta[k];
        }
    }
    return series_exp(lg);
}

inline CharClass adams_rescale(const CharClass& c, const Integer& m)
{
    return c.scaled_by_degree(Rational(m));
}

// ch of the dual bundle.
inline CharClass dual_ch(const CharClass& c) { return c.scaled_by_degree(Rational(-1)); }

// ch(Sym^0 E) .. ch(Sym^jmax E) from j h_j = sum_{m=1}^{j} psi^m(ch E) h_{j-m}.
inline std::vector<CharClass> sym_ch_table(const CharClass& ch, unsigned jmax)
{
    std::vector<CharClass> psi(jmax + 1, ch.zero_like());
    for (unsigned m = 1; m <= jmax; ++m) {
        psi[m] = adams_rescale(ch, m);
    }
    std::vector<CharClass> h;
    h.reserve(jmax + 1);
    h.push_back(ch.constant_like(1));
    for (unsigned j = 1; j <= jmax; ++j) {
        CharClass acc = ch.zero_like();
        for (unsigned m = 1; m <= j; ++m) {
            acc += psi[m] * h[j - m];
        }
        h.push_back(acc * Rational(1, j));
    }
    return h;
}

inline CharClass sym_ch(const CharClass& ch, unsigned j) { return sym_ch_table(ch, j)[j]; }

} // namespace detlb
