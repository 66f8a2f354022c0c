// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "oobt/bytes.hpp"

namespace oobt {

enum class AddressFamily : std::uint8_t
{
    v4 = 0x04,
    v6 = 0x06,
};

// A source address in the form tokens bind to: family plus raw address
// bytes, no port, no zone. The wire encoding is the family tag byte
// followed by 4 or 16 address bytes.
class CanonicalAddress
{
  public:
    CanonicalAddress() = default;

    static CanonicalAddress
    v4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
    {
        CanonicalAddress out;
        out.family_ = AddressFamily::v4;
        out.bytes_ = {a, b, c, d};
        return out;
    }

    static CanonicalAddress v6(const std::array<std::uint8_t, 16>& bytes)
    {
        CanonicalAddress out;
        out.family_ = AddressFamily::v6;
        std::copy(bytes.begin(), bytes.end(), out.bytes_.begin());
        return out;
    }

    // Accepts dotted-quad IPv4 and RFC 4291 IPv6 text forms.
    static std::optional<CanonicalAddress> parse(std::string_view text);

    AddressFamily family() const { return family_; }

    std::size_t address_size() const
    {
        return family_ == AddressFamily::v4 ? 4 : 16;
    }

    ByteView address_bytes() const
    {
        return ByteView(bytes_.data(), address_size());
    }

    Bytes encode() const;
    std::string to_string() const;

    auto operator<=>(const CanonicalAddress&) const = default;

  private:
    AddressFamily family_ = AddressFamily::v4;
    std::array<std::uint8_t, 16> bytes_{};
};

} // namespace oobt
