#pragma once

// RFC 4180 output: CRLF line ends, fields quoted only when needed.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace itl::csv {

inline std::string field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << field(cells[i]);
    }
    os << "\r\n";
}

/// Cell text for a JSON value: strings raw, null empty, arrays joined by ';'.
inline std::string cell(const nlohmann::ordered_json& v)
{
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
        return out;
    }
    return v.dump();
}

/// Header from the first record's keys (or `empty_header` when there are none), then one row per record.
inline void write_records(std::ostream& os, const nlohmann::ordered_json& records, std::vector<std::string> empty_header = {})
{
    std::vector<std::string> header = std::move(empty_header);
    if (!records.empty()) {
        header.clear();
        for (auto it = records[0].begin(); it != records[0].end(); ++it) header.push_back(it.key());
    }
    if (header.empty()) return;
    write_row(os, header);
    for (const auto& r : records) {
        std::vector<std::string> cells;
        for (const auto& k : header) cells.push_back(r.contains(k) ? cell(r[k]) : "");
        write_row(os, cells);
    }
}

}  // namespace itl::csv
