#include "reuse/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reuse/error.hpp"

namespace reuse::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void emit(std::string& out, const Json& j, int indent, int level) {
    const auto newline = [&](int lvl) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * lvl), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) out += ',';
            first = false;
            newline(level + 1);
            out += Json(k).dump();
            out += indent < 0 ? ":" : ": ";
            emit(out, v, indent, level + 1);
        }
        newline(level);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out += ',';
            first = false;
            newline(level + 1);
            emit(out, v, indent, level + 1);
        }
        newline(level);
        out += ']';
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        // JSON has no literal for non-finite values.
        out += std::isfinite(v) ? format_double(v) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

}  // namespace

std::string dump(const Json& j, int indent) {
    std::string out;
    emit(out, j, indent, 0);
    return out;
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
    os << dump(j, 2) << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
    try {
        return Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace reuse::io
