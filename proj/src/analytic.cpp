// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/analytic.hpp"

#include <cctype>
#include <stdexcept>

namespace oobt {

std::int64_t
analytic_default_ms(std::int64_t rtt_ms, std::int64_t t_proc_ms)
{
    return t_proc_ms + 2 * rtt_ms;
}

std::int64_t
analytic_proposal_ms(std::int64_t rtt_ms, std::int64_t t_proc_ms)
{
    return t_proc_ms + rtt_ms;
}

std::int64_t
parse_decimal_micro(std::string_view text)
{
    if (text.empty())
        throw std::invalid_argument("empty decimal");

    bool negative = false;
    std::size_t pos = 0;
    if (text[0] == '-' || text[0] == '+')
    {
        negative = text[0] == '-';
        pos = 1;
    }

    std::int64_t whole = 0;
    bool any_digit = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(
                                    text[pos])))
    {
        whole = whole * 10 + (text[pos] - '0');
        any_digit = true;
        ++pos;
    }

    std::int64_t frac = 0;
    if (pos < text.size() && text[pos] == '.')
    {
        ++pos;
        int digits = 0;
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
        {
            if (digits >= 6)
                throw std::invalid_argument(
                    "more than six fraction digits: " + std::string(text));
            frac = frac * 10 + (text[pos] - '0');
            ++digits;
            any_digit = true;
            ++pos;
        }
        for (; digits < 6; ++digits)
            frac *= 10;
    }

    if (!any_digit || pos != text.size())
        throw std::invalid_argument("not a decimal: " + std::string(text));

    std::int64_t micro = whole * 1000000 + frac;
    return negative ? -micro : micro;
}

std::string
format_micro(std::int64_t micro)
{
    bool negative = micro < 0;
    if (negative)
        micro = -micro;

    std::string out = std::to_string(micro / 1000000);
    std::int64_t frac = micro % 1000000;
    if (frac != 0)
    {
        std::string digits = std::to_string(frac);
        digits.insert(0, 6 - digits.size(), '0');
        while (digits.back() == '0')
            digits.pop_back();
        out += "." + digits;
    }
    return negative ? "-" + out : out;
}

std::int64_t
website_savings_micro(std::int64_t depth_micro, std::int64_t rtt_ms)
{
    return depth_micro * rtt_ms;
}

} // namespace oobt
