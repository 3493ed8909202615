#pragma once

#include <charconv>
#include <string>
#include <vector>

namespace dcf {

/// Shortest round-trip decimal form, locale independent (always '.').
inline std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return {buf, ptr};
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

}  // namespace dcf
