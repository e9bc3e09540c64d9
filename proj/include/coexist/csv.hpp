#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>

namespace coexist
{

/// Shortest round-trip decimal form; locale independent so CSV output is
/// byte-stable.
inline std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    char buf[64];
    auto const res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::optional<double> x)
{
    return x ? format_number(*x) : std::string();
}

}  // namespace coexist
