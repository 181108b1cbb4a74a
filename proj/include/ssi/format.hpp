// Copyright 2026 The ssi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ssi/errors.hpp"

namespace ssi {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Strict double parse: the whole token must be consumed and the value finite.
/// Accepts plain and scientific notation.
inline bool parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    double v = 0.0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

inline bool parse_u64(std::string_view token, std::uint64_t& out) {
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

/// Percentage in the reporting style used throughout: value in [0,1] scaled
/// to percent, truncated (not rounded) to two decimals, trailing zeros and
/// dot removed. 12/14 -> "85.71", 10/14 -> "71.42", 1.0 -> "100".
inline std::string format_pct(double fraction) {
    double pct = fraction * 100.0;
    bool negative = pct < 0.0;
    // 1e-9 absorbs representation error of values sitting just below a
    // hundredth boundary; intended values differ by far more than that.
    long long total_cents = static_cast<long long>(std::floor(std::abs(pct) * 100.0 + 1e-9));
    long long whole = total_cents / 100;
    long long cents = total_cents % 100;
    std::string s = negative ? "-" : "";
    s += std::to_string(whole);
    if (cents != 0) {
        std::string frac = std::to_string(cents);
        if (frac.size() < 2) frac.insert(frac.begin(), '0');
        while (!frac.empty() && frac.back() == '0') frac.pop_back();
        s += '.';
        s += frac;
    }
    return s;
}

/// Splits a line on a separator without any quoting rules.
inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace ssi
