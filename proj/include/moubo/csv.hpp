#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace moubo {

// Shortest text form that round-trips a double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string join_csv(const std::vector<std::string>& fields) {
    std::ostringstream os;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << fields[i];
    }
    return os.str();
}

}  // namespace moubo
