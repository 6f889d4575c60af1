// csv.hpp: deterministic CSV export (header row, 17 significant digits)

#pragma once

#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccqed/error.hpp"

namespace ccqed::io {

struct Column {
    std::string name;
    std::span<const double> values;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string quote_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

inline std::string to_csv(const std::vector<Column>& cols) {
    ccqed::detail::require(!cols.empty(), "export_csv: no columns");
    const std::size_t rows = cols.front().values.size();
    for (const auto& c : cols)
        ccqed::detail::require(c.values.size() == rows, "export_csv: column '" + c.name + "' has " +
                                                     std::to_string(c.values.size()) + " rows, expected " +
                                                     std::to_string(rows));
    std::string out;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (j) out += ',';
        out += detail::quote_field(cols[j].name);
    }
    out += '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (j) out += ',';
            out += format_double(cols[j].values[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw Error("write to '" + path + "' failed");
}

inline void export_csv(const std::string& path, const std::vector<Column>& cols) { write_text(path, to_csv(cols)); }

}  // namespace ccqed::io
