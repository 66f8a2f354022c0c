// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "oobt/bytes.hpp"
#include "oobt/token.hpp"

namespace oobt {

// Who handed the token to the client. Tokens received directly from the
// server that will consume them outrank tokens from external issuers: the
// client never checks that an external issuer was authorized, so an
// out-of-band token is only a fallback.
enum class TokenOrigin
{
    ServerIssued,
    OutOfBand,
};

std::string_view to_string(TokenOrigin origin);

struct CachedToken
{
    std::string hostname;
    Bytes token_bytes;
    TokenOrigin origin = TokenOrigin::ServerIssued;
    std::uint64_t expires_at_ms = 0;
};

struct CacheStats
{
    std::uint64_t stored = 0;
    std::uint64_t replaced = 0;
    std::uint64_t dropped_malformed = 0;
    std::uint64_t dropped_expired = 0;
    std::uint64_t selected = 0;
    std::uint64_t purged = 0;
};

// Client-side token store. One slot per (hostname, origin), newest stored
// wins. A selected token is consumed: tokens are single-use, so handing the
// same bytes to two connections would just get the second one retried.
class ClientTokenCache
{
  public:
    struct Selection
    {
        Bytes token_bytes;
        TokenOrigin origin;
    };

    // Malformed or already-expired tokens are dropped silently and counted
    // in stats().
    void store(const std::string& hostname, ByteView token_bytes,
               TokenOrigin origin, std::uint64_t now_ms);

    // Unexpired ServerIssued token if present, else unexpired OutOfBand,
    // else nothing. Removes what it returns.
    std::optional<Selection> select(const std::string& hostname,
                                    std::uint64_t now_ms);

    // Removes every entry with expires_at <= now. Returns how many.
    std::size_t purge_expired(std::uint64_t now_ms);

    std::size_t size() const;
    const CacheStats& stats() const { return stats_; }

    // One line per entry: "hostname origin expires_at token_hex".
    std::string debug_dump() const;

  private:
    struct Slots
    {
        std::optional<CachedToken> server_issued;
        std::optional<CachedToken> out_of_band;
    };

    std::optional<CachedToken>& slot(Slots& slots, TokenOrigin origin)
    {
        return origin == TokenOrigin::ServerIssued ? slots.server_issued
                                                   : slots.out_of_band;
    }

    std::map<std::string, Slots> entries_;
    CacheStats stats_;
};

} // namespace oobt
