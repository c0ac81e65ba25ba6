#pragma once

// Deterministic JSON text: every floating-point value is printed with 17 significant digits,
// objects keep nlohmann's sorted key order.

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace s3sr::tools {

using json = nlohmann::json;

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_json(std::string& out, const json& j, int indent, int depth = 0) {
    const std::string pad(std::size_t(indent * (depth + 1)), ' '), close(std::size_t(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) { out += "{}"; return; }
        out += "{";
        out += nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) { out += ","; out += nl; }
            first = false;
            out += pad + json(it.key()).dump() + (indent > 0 ? ": " : ":");
            write_json(out, it.value(), indent, depth + 1);
        }
        out += nl + close + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) { out += "[]"; return; }
        out += "[";
        out += nl;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) { out += ","; out += nl; }
            out += pad;
            write_json(out, j[i], indent, depth + 1);
        }
        out += nl + close + "]";
        return;
    }
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
    }
}

inline std::string to_text(const json& j, int indent = 2) {
    std::string s;
    write_json(s, j, indent);
    s += "\n";
    return s;
}

}  // namespace s3sr::tools
