// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/client_cache.hpp"

#include <sstream>

namespace oobt {

std::string_view
to_string(TokenOrigin origin)
{
    return origin == TokenOrigin::ServerIssued ? "ServerIssued" : "OutOfBand";
}

void
ClientTokenCache::store(const std::string& hostname, ByteView token_bytes,
                        TokenOrigin origin, std::uint64_t now_ms)
{
    auto decoded = decode_token(token_bytes);
    if (!decoded)
    {
        ++stats_.dropped_malformed;
        return;
    }
    if (now_ms >= decoded->expires_at_ms())
    {
        ++stats_.dropped_expired;
        return;
    }

    CachedToken entry;
    entry.hostname = hostname;
    entry.token_bytes.assign(token_bytes.begin(), token_bytes.end());
    entry.origin = origin;
    entry.expires_at_ms = decoded->expires_at_ms();

    auto& target = slot(entries_[hostname], origin);
    if (target)
        ++stats_.replaced;
    target = std::move(entry);
    ++stats_.stored;
}

std::optional<ClientTokenCache::Selection>
ClientTokenCache::select(const std::string& hostname, std::uint64_t now_ms)
{
    auto it = entries_.find(hostname);
    if (it == entries_.end())
        return std::nullopt;

    for (TokenOrigin origin :
         {TokenOrigin::ServerIssued, TokenOrigin::OutOfBand})
    {
        auto& candidate = slot(it->second, origin);
        if (candidate && now_ms < candidate->expires_at_ms)
        {
            Selection out{std::move(candidate->token_bytes), origin};
            candidate.reset();
            ++stats_.selected;
            return out;
        }
    }
    return std::nullopt;
}

std::size_t
ClientTokenCache::purge_expired(std::uint64_t now_ms)
{
    std::size_t removed = 0;
    for (auto it = entries_.begin(); it != entries_.end();)
    {
        for (auto* candidate : {&it->second.server_issued,
                                &it->second.out_of_band})
        {
            if (*candidate && (*candidate)->expires_at_ms <= now_ms)
            {
                candidate->reset();
                ++removed;
            }
        }
        if (!it->second.server_issued && !it->second.out_of_band)
            it = entries_.erase(it);
        else
            ++it;
    }
    stats_.purged += removed;
    return removed;
}

std::size_t
ClientTokenCache::size() const
{
    std::size_t n = 0;
    for (const auto& [hostname, slots] : entries_)
    {
        n += slots.server_issued ? 1 : 0;
        n += slots.out_of_band ? 1 : 0;
    }
    return n;
}

std::string
ClientTokenCache::debug_dump() const
{
    std::ostringstream out;
    for (const auto& [hostname, slots] : entries_)
    {
        for (const auto* entry : {&slots.server_issued, &slots.out_of_band})
        {
            if (*entry)
            {
                out << hostname << ' ' << to_string((*entry)->origin) << ' '
                    << (*entry)->expires_at_ms << ' '
                    << to_hex((*entry)->token_bytes) << '\n';
            }
        }
    }
    return out.str();
}

} // namespace oobt
