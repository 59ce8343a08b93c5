#include "kh/jsonio.hpp"

#include <cmath>
#include <cstdio>

#include "kh/errors.hpp"

namespace kh {

std::string format_double(double x) {
    if (!std::isfinite(x)) throw NonFiniteValue("refusing to serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

void emit(const nlohmann::ordered_json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                emit(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                emit(v, out, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case nlohmann::ordered_json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            // integers, booleans, strings, null: nlohmann's own dump is
            // already canonical for these.
            out += j.dump();
            return;
    }
}

} // namespace

std::string dump_deterministic(const nlohmann::ordered_json& j) {
    std::string out;
    emit(j, out, 0);
    out += "\n";
    return out;
}

} // namespace kh
