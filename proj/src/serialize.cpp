#include "sf/serialize.hpp"

#include <cmath>
#include <cstdio>

namespace sf {

std::string fmt17(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write(const nlohmann::json& j, int indent, int depth, std::string& out) {
    using T = nlohmann::json::value_t;
    auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(std::size_t(d * indent), ' ');
    };
    switch (j.type()) {
        case T::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                break;
            }
            std::string s = fmt17(v);
            // Keep the float type visible on reload.
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            out += s;
            break;
        }
        case T::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            bool flat = true;
            for (const auto& e : j) flat = flat && e.is_primitive();
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat ? ", " : ",";
                first = false;
                if (!flat) newline(depth + 1);
                write(e, indent, depth + 1, out);
            }
            if (!flat) newline(depth);
            out += ']';
            break;
        }
        case T::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += nlohmann::json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                write(it.value(), indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump17(const nlohmann::json& j, int indent) {
    std::string out;
    write(j, indent, 0, out);
    return out;
}

}  // namespace sf
