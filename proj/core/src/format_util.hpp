#pragma once

#include <array>
#include <charconv>
#include <string>

namespace mixbgk::detail {

/// Locale-independent shortest round-trip formatting (CSV and reports).
inline std::string fmt_double(double x) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace mixbgk::detail
