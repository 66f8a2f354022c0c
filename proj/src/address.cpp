// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/address.hpp"

#include <arpa/inet.h>

#include <cstring>

namespace oobt {

std::optional<CanonicalAddress>
CanonicalAddress::parse(std::string_view text)
{
    std::string str(text);

    in_addr a4{};
    if (inet_pton(AF_INET, str.c_str(), &a4) == 1)
    {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&a4);
        return CanonicalAddress::v4(p[0], p[1], p[2], p[3]);
    }

    in6_addr a6{};
    if (inet_pton(AF_INET6, str.c_str(), &a6) == 1)
    {
        std::array<std::uint8_t, 16> bytes;
        std::memcpy(bytes.data(), &a6, 16);
        return CanonicalAddress::v6(bytes);
    }

    return std::nullopt;
}

Bytes
CanonicalAddress::encode() const
{
    Bytes out;
    out.reserve(1 + address_size());
    out.push_back(static_cast<std::uint8_t>(family_));
    auto view = address_bytes();
    out.insert(out.end(), view.begin(), view.end());
    return out;
}

std::string
CanonicalAddress::to_string() const
{
    char buf[INET6_ADDRSTRLEN] = {};
    if (family_ == AddressFamily::v4)
    {
        in_addr a4{};
        std::memcpy(&a4, bytes_.data(), 4);
        inet_ntop(AF_INET, &a4, buf, sizeof(buf));
    }
    else
    {
        in6_addr a6{};
        std::memcpy(&a6, bytes_.data(), 16);
        inet_ntop(AF_INET6, &a6, buf, sizeof(buf));
    }
    return std::string(buf);
}

} // namespace oobt
