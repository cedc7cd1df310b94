#pragma once

// Machine-readable check reports shared by the CLI and the test suites.

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace detlb {

using ojson = nlohmann::ordered_json;

struct Check {
    std::string name;
    std::string anchor;
    bool pass = false;
    ojson witness = ojson::object();
};

inline ojson to_json(const Check& c)
{
    ojson j;
    j["name"] = c.name;
    j["anchor"] = c.anchor;
    j["verdict"] = c.pass ? "pass" : "fail";
    j["witness"] = c.witness;
    return j;
}

struct Report {
    std::string command;
    ojson inputs = ojson::object();
    ojson result = ojson::object();
    std::vector<Check> checks;
    std::optional<double> wall_ms;

    bool pass() const
    {
        for (const auto& c : checks) {
            if (!c.pass) {
                return false;
            }
        }
        return true;
    }

    Check& add(std::string name, std::string anchor, bool pass, ojson witness = ojson::object())
    {
        checks.push_back({std::move(name), std::move(anchor), pass, std::move(witness)});
        return checks.back();
    }
};

inline ojson to_json(const Report& r)
{
    ojson j;
    j["command"] = r.command;
    j["inputs"] = r.inputs;
    if (!r.result.empty()) {
        j["result"] = r.result;
    }
    auto checks = ojson::array();
    for (const auto& c : r.checks) {
        checks.push_back(to_json(c));
    }
    j["checks"] = std::move(checks);
    j["pass"] = r.pass();
    if (r.wall_ms) {
        j["wall_ms"] = *r.wall_ms;
    }
    return j;
}

// Compact one-line rendering of a JSON value for the text format.
inline std::string brief(const ojson& j, std::size_t limit = 160)
{
    std::string s = j.is_string() ? j.get<std::string>() : j.dump();
    if (s.size() > limit) {
        s = s.substr(0, limit - 3) + "...";
    }
    return s;
}

inline std::string check_line(const Check& c, std::size_t name_width)
{
    std::ostringstream os;
    os << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(name_width)) << c.name << "  "
       << c.anchor;
    if (!c.witness.empty()) {
        os << "  " << brief(c.witness);
    }
    return os.str();
}

inline std::string to_text(const Report& r)
{
    std::ostringstream os;
    os << r.command << "  " << brief(r.inputs) << "\n";
    for (const auto& [k, v] : r.result.items()) {
        os << "  " << k << ": " << brief(v, 400) << "\n";
    }
    std::size_t w = 0;
    for (const auto& c : r.checks) {
        w = std::max(w, c.name.size());
    }
    for (const auto& c : r.checks) {
        os << check_line(c, w) << "\n";
    }
    os << (r.pass() ? "overall: pass" : "overall: FAIL");
    if (r.wall_ms) {
        os << "  (" << std::fixed << std::setprecision(1) << *r.wall_ms << " ms)";
    }
    os << "\n";
    return os.str();
}

} // namespace detlb
