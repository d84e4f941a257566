#include "trinity/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "trinity/error.hpp"

namespace trinity {

std::uint64_t gb_to_bytes(double gb) {
    return static_cast<std::uint64_t>(std::llround(gb * kBytesPerGB));
}

std::uint64_t parse_capacity_bytes(std::string_view text) {
    auto fail = [&] {
        throw Error(ErrorKind::InvalidArgument, "invalid capacity '" + std::string(text) + "'");
    };
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) fail();

    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || !std::isfinite(value) || value < 0.0) fail();

    std::string unit(ptr, text.data() + text.size());
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.front()))) unit.erase(0, 1);
    for (auto& c : unit) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

    double scale = 0.0;
    if (unit.empty() || unit == "GB" || unit == "G") scale = 1e9;
    else if (unit == "TB" || unit == "T") scale = 1e12;
    else if (unit == "MB" || unit == "M") scale = 1e6;
    else if (unit == "KB" || unit == "K") scale = 1e3;
    else if (unit == "B") scale = 1.0;
    else fail();

    return static_cast<std::uint64_t>(std::llround(value * scale));
}

}  // namespace trinity
