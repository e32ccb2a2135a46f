/**
 * @file units.hpp
 * @brief Parser for the quantity strings used in scenario configs.
 *
 * Grammar (no internal whitespace; leading/trailing ASCII spaces are trimmed):
 *
 *     quantity := [prefix] number [unit]
 *     prefix   := "2pi*" | "(2pi)^2*"
 *     number   := decimal or scientific literal accepted by std::from_chars
 *                 (no leading '+', no hex, no inf/nan)
 *     unit     := "Hz" | "kHz" | "MHz" | "GHz" | "THz"                 frequency
 *               | "Hz^2" | "kHz^2" | "MHz^2" | "GHz^2" | "THz^2"       frequency^2
 *               | "s" | "ms" | "us" | "ns" | "ps"                      time
 *               | "rad/ns"                                            frequency
 *               | "rad"                                               angle
 *
 * Evaluation order is fixed so results are bit-reproducible:
 *   1. v = number
 *   2. unit scale to ns / GHz / GHz^2: multiply by an exact power of ten for
 *      units larger than the base, divide by one for smaller units
 *      (MHz: v / 1e3, kHz: v / 1e6, Hz: v / 1e9, THz: v * 1e3, MHz^2: v / 1e6,
 *      ps: v / 1e3, us: v * 1e3, ms: v * 1e6, s: v * 1e9, ...)
 *   3. prefix: "2pi*" multiplies by kTwoPi, "(2pi)^2*" by (kTwoPi * kTwoPi).
 *
 * A bare number carries no dimension and is taken to be in base units
 * (rad/ns, ns, rad or rad/ns^2).
 */
#pragma once

#include "tlspulse/core.hpp"

#include <charconv>
#include <optional>
#include <string>
#include <string_view>

namespace tlspulse {

enum class Dimension { Plain, Time, Frequency, FrequencySquared, Angle };

inline std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::Plain: return "plain";
        case Dimension::Time: return "time";
        case Dimension::Frequency: return "frequency";
        case Dimension::FrequencySquared: return "frequency^2";
        case Dimension::Angle: return "angle";
    }
    return "?";
}

struct Quantity {
    double value = 0.0;
    Dimension dimension = Dimension::Plain;

    /// A plain number is compatible with every dimension.
    bool compatible_with(Dimension d) const { return dimension == Dimension::Plain || dimension == d; }
};

namespace detail {

struct UnitEntry {
    std::string_view name;
    Dimension dimension;
    double factor;
    bool divide;
};

inline constexpr UnitEntry kUnits[] = {
    {"rad/ns", Dimension::Frequency, 1.0, false},
    {"kHz^2", Dimension::FrequencySquared, 1e12, true},
    {"MHz^2", Dimension::FrequencySquared, 1e6, true},
    {"GHz^2", Dimension::FrequencySquared, 1.0, false},
    {"THz^2", Dimension::FrequencySquared, 1e6, false},
    {"Hz^2", Dimension::FrequencySquared, 1e18, true},
    {"kHz", Dimension::Frequency, 1e6, true},
    {"MHz", Dimension::Frequency, 1e3, true},
    {"GHz", Dimension::Frequency, 1.0, false},
    {"THz", Dimension::Frequency, 1e3, false},
    {"Hz", Dimension::Frequency, 1e9, true},
    {"rad", Dimension::Angle, 1.0, false},
    {"ms", Dimension::Time, 1e6, false},
    {"us", Dimension::Time, 1e3, false},
    {"ns", Dimension::Time, 1.0, false},
    {"ps", Dimension::Time, 1e3, true},
    {"s", Dimension::Time, 1e9, false},
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Parse a quantity string; nullopt when it does not match the grammar.
inline std::optional<Quantity> try_parse_quantity(std::string_view text) {
    std::string_view s = detail::trim(text);
    double prefix = 1.0;
    bool has_prefix = false;
    if (s.starts_with("(2pi)^2*")) {
        prefix = kTwoPi * kTwoPi;
        has_prefix = true;
        s.remove_prefix(8);
    } else if (s.starts_with("2pi*")) {
        prefix = kTwoPi;
        has_prefix = true;
        s.remove_prefix(4);
    }
    if (s.empty() || s.front() == '+') return std::nullopt;

    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
    if (ec != std::errc{} || !std::isfinite(v)) return std::nullopt;
    const std::string_view unit(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr));

    Quantity q;
    if (unit.empty()) {
        q.dimension = Dimension::Plain;
    } else {
        const detail::UnitEntry* match = nullptr;
        for (const auto& e : detail::kUnits) {
            if (unit == e.name) {
                match = &e;
                break;
            }
        }
        if (match == nullptr) return std::nullopt;
        v = match->divide ? v / match->factor : v * match->factor;
        q.dimension = match->dimension;
    }
    if (has_prefix) {
        // 2pi only makes sense in front of a frequency-like quantity.
        if (q.dimension == Dimension::Time || q.dimension == Dimension::Angle) return std::nullopt;
        if (prefix == kTwoPi * kTwoPi && q.dimension == Dimension::Frequency) return std::nullopt;
        if (prefix == kTwoPi && q.dimension == Dimension::FrequencySquared) return std::nullopt;
        v *= prefix;
    }
    q.value = v;
    return q;
}

inline Quantity parse_quantity(std::string_view text) {
    auto q = try_parse_quantity(text);
    if (!q) throw ValidationError("cannot parse quantity '" + std::string(text) + "'");
    return *q;
}

}  // namespace tlspulse
