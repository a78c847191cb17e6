#include "mpk/report.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "mpk/version.hpp"

namespace mpk {

namespace {

using nlohmann::json;

void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void write_value(std::string& out, const json& j) {
    switch (j.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case json::value_t::number_integer:
        case json::value_t::number_unsigned: out += j.dump(); break;
        case json::value_t::number_float: {
            double v = j.get<double>();
            if (std::isnan(v)) {
                out += "null";
            } else if (std::isinf(v)) {
                out += v > 0 ? "\"inf\"" : "\"-inf\"";
            } else {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out += buf;
            }
            break;
        }
        case json::value_t::string: write_escaped(out, j.get<std::string>()); break;
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                write_value(out, e);
            }
            out += ']';
            break;
        }
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann objects sort keys
                if (!first) out += ',';
                first = false;
                write_escaped(out, it.key());
                out += ':';
                write_value(out, it.value());
            }
            out += '}';
            break;
        }
        default: out += "null";
    }
}

}  // namespace

std::string dump_report(const json& j) {
    std::string out;
    write_value(out, j);
    out += '\n';
    return out;
}

json report_envelope(const std::string& command, const json& model, const json& results,
                     const json& errors) {
    json j;
    j["command"] = command;
    j["model"] = model;
    j["results"] = results;
    j["errors"] = errors;
    j["versions"] = {{"mpk", kVersion}, {"report_schema", kReportSchema}};
    return j;
}

}  // namespace mpk
