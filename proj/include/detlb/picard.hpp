#pragma once

// Integer linear relations between named line bundles, and membership of
// a goal relation in their Z-span.  Relations are kept in Hermite normal
// form, so a goal is derivable iff it reduces to zero without division.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detlb/errors.hpp"
#include "detlb/exactalg.hpp"

namespace detlb {

using IntVector = std::vector<Integer>;

// Row-style Hermite normal form: pivots strictly increase, are positive,
// and entries above a pivot lie in [0, pivot).
inline std::vector<IntVector> hermite_rows(std::vector<IntVector> rows, std::size_t ncols)
{
    std::vector<IntVector> out;
    std::size_t r = 0;
    for (std::size_t col = 0; col < ncols && r < rows.size(); ++col) {
        // Euclid on column col among rows r..end.
        for (;;) {
            std::size_t best = rows.size();
            for (std::size_t i = r; i < rows.size(); ++i) {
                if (rows[i][col] != 0 && (best == rows.size() || abs(rows[i][col]) < abs(rows[best][col]))) {
                    best = i;
                }
            }
            if (best == rows.size()) {
                break;
            }
            std::swap(rows[r], rows[best]);
            bool done = true;
            for (std::size_t i = r + 1; i < rows.size(); ++i) {
                if (rows[i][col] == 0) {
                    continue;
                }
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), rows[i][col].get_mpz_t(), rows[r][col].get_mpz_t());
                for (std::size_t k = col; k < ncols; ++k) {
                    rows[i][k] -= q * rows[r][k];
                }
                if (rows[i][col] != 0) {
                    done = false;
                }
            }
            if (done) {
                break;
            }
        }
        if (rows[r][col] == 0) {
            continue;
        }
        if (rows[r][col] < 0) {
            for (auto& x : rows[r]) {
                x = -x;
            }
        }
        ++r;
    }
    rows.resize(r);
    // Reduce entries above each pivot.
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t pc = 0;
        while (rows[i][pc] == 0) {
            ++pc;
        }
        for (std::size_t k = 0; k < i; ++k) {
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), rows[k][pc].get_mpz_t(), rows[i][pc].get_mpz_t());
            if (q != 0) {
                for (std::size_t c = pc; c < ncols; ++c) {
                    rows[k][c] -= q * rows[i][c];
                }
            }
        }
    }
    return rows;
}

class PicardLattice {
public:
    explicit PicardLattice(std::vector<std::string> symbols) : symbols_(std::move(symbols))
    {
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (symbols_[i] == symbols_[j]) {
                    throw DomainError("duplicate lattice symbol '" + symbols_[i] + "'");
                }
            }
        }
    }

    const std::vector<std::string>& symbols() const { return symbols_; }
    const std::vector<IntVector>& relations() const { return rows_; }

    std::size_t index_of(std::string_view name) const
    {
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            if (symbols_[i] == name) {
                return i;
            }
        }
        throw DomainError("unknown lattice symbol '" + std::string(name) + "'");
    }

    void add_relation(IntVector v)
    {
        if (v.size() != symbols_.size()) {
            throw StructuralError("relation has the wrong number of entries");
        }
        rows_.push_back(std::move(v));
        rows_ = hermite_rows(std::move(rows_), symbols_.size());
    }

    // Parses "16 l0 = 7 l0 - 4 l1 + l2" or "13 l1 - l2" (meaning = 0).
    IntVector parse(std::string_view text) const;

    void add_relation(std::string_view text) { add_relation(parse(text)); }

    bool derives(IntVector goal) const
    {
        if (goal.size() != symbols_.size()) {
            throw StructuralError("goal has the wrong number of entries");
        }
        for (const auto& row : rows_) {
            std::size_t pc = 0;
            while (row[pc] == 0) {
                ++pc;
            }
            if (goal[pc] == 0) {
                continue;
            }
            if (!mpz_divisible_p(goal[pc].get_mpz_t(), row[pc].get_mpz_t())) {
                return false;
            }
            Integer q = goal[pc] / row[pc];
            for (std::size_t c = pc; c < goal.size(); ++c) {
                goal[c] -= q * row[c];
            }
        }
        for (const auto& x : goal) {
            if (x != 0) {
                return false;
            }
        }
        return true;
    }

    bool derives(std::string_view text) const { return derives(parse(text)); }

    std::string render(const IntVector& v) const
    {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == 0) {
                continue;
            }
            Integer mag = abs(v[i]);
            if (out.empty()) {
                out += v[i] < 0 ? "-" : "";
            } else {
                out += v[i] < 0 ? " - " : " + ";
            }
            if (mag != 1) {
                out += mag.get_str() + " ";
            }
            out += symbols_[i];
        }
        return out.empty() ? "0" : out + " = 0";
    }

private:
    std::vector<std::string> symbols_;
    std::vector<IntVector> rows_;
};

inline IntVector PicardLattice::parse(std::string_view text) const
{
    IntVector v(symbols_.size());
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError("relation '" + std::string(text) + "' at offset " + std::to_string(pos) + ": " + msg);
    };
    auto skip = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    };
    int side = 1;
    bool seen_eq = false;
    bool first = true;
    for (;;) {
        skip();
        if (pos == text.size()) {
            break;
        }
        if (text[pos] == '=') {
            if (seen_eq || first) {
                fail("misplaced '='");
            }
            seen_eq = true;
            side = -1;
            first = true;
            ++pos;
            continue;
        }
        int sign = 1;
        if (text[pos] == '+' || text[pos] == '-') {
            sign = text[pos] == '-' ? -1 : 1;
            ++pos;
            skip();
        } else if (!first) {
            fail("expected '+', '-' or '='");
        }
        first = false;
        Integer coeff = 1;
        bool have_num = false;
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
        if (pos > start) {
            coeff = Integer(std::string(text.substr(start, pos - start)));
            have_num = true;
            skip();
            if (pos < text.size() && text[pos] == '*') {
                ++pos;
                skip();
            }
        }
        start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            ++pos;
        }
        if (pos == start) {
            if (have_num && coeff == 0) {
                continue;
            }
            fail("expected a symbol");
        }
        std::size_t idx = index_of(text.substr(start, pos - start));
        v[idx] += coeff * sign * side;
    }
    if (first && !seen_eq) {
        fail("empty relation");
    }
    return v;
}

inline bool picard_deduce(const PicardLattice& lattice, std::string_view goal) { return lattice.derives(goal); }

inline PicardLattice load_lattice(const nlohmann::json& j)
{
    try {
        PicardLattice lat(j.at("symbols").get<std::vector<std::string>>());
        for (const auto& r : j.value("relations", nlohmann::json::array())) {
            lat.add_relation(r.get<std::string>());
        }
        return lat;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("relations file: ") + e.what());
    }
}

inline PicardLattice load_lattice_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open relations file '" + path + "'");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("relations file: ") + e.what());
    }
    return load_lattice(j);
}

} // namespace detlb
