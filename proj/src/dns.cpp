// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/dns.hpp"

#include <algorithm>

namespace oobt {

std::string_view
to_string(RecordType rtype)
{
    switch (rtype)
    {
    case RecordType::A:
        return "A";
    case RecordType::AAAA:
        return "AAAA";
    case RecordType::QUICTOKEN:
        return "QUICTOKEN";
    }
    return "?";
}

DnsResponse
Resolver::resolve(const DnsQuery& query, std::uint64_t now_ms)
{
    DnsResponse response;
    response.name = query.name;

    auto zone_it = config_.zone.find(query.name);
    if (zone_it == config_.zone.end())
    {
        response.nxdomain = true;
        return response;
    }
    const ZoneEntry& entry = zone_it->second;

    for (const auto& address : entry.addresses)
    {
        bool v4 = address.family() == AddressFamily::v4;
        RecordType rtype = v4 ? RecordType::A : RecordType::AAAA;
        if (!query.types.contains(rtype))
            continue;
        DnsRecord record;
        record.rtype = rtype;
        auto bytes = address.address_bytes();
        record.value.assign(bytes.begin(), bytes.end());
        record.ttl_seconds = entry.ttl_seconds;
        response.answers.push_back(std::move(record));
    }

    if (query.types.contains(RecordType::QUICTOKEN))
    {
        auto trust_it = config_.token_trust.find(query.name);
        // No trust entry is not an error; the answer simply has no token.
        if (trust_it != config_.token_trust.end() &&
            !trust_it->second.revoked)
        {
            auto token =
                issue_token(trust_it->second, query.client_source, now_ms,
                            config_.token_lifetime_s, nonce_rng_);
            DnsRecord record;
            record.rtype = RecordType::QUICTOKEN;
            record.value = encode_token(token);
            record.ttl_seconds = 0;
            response.answers.push_back(std::move(record));
        }
    }

    return response;
}

DnsResponse
intermediate_cache_filter(const DnsResponse& response)
{
    DnsResponse filtered;
    filtered.name = response.name;
    filtered.nxdomain = response.nxdomain;
    for (const auto& record : response.answers)
    {
        if (record.ttl_seconds > 0)
            filtered.answers.push_back(record);
    }
    return filtered;
}

DnsResponse
CachingDnsProxy::resolve(const DnsQuery& query, Resolver& upstream,
                         std::uint64_t now_ms)
{
    // Cache hit only when every requested address type is either fresh in
    // the store or known to be empty. Token queries never contribute to a
    // hit decision and are never answerable from here.
    DnsResponse from_cache;
    from_cache.name = query.name;
    bool hit = !query.types.empty();
    for (RecordType rtype : query.types)
    {
        if (rtype == RecordType::QUICTOKEN)
            continue;
        bool fresh = false;
        auto it = cache_.find({query.name, rtype});
        if (it != cache_.end())
        {
            for (const auto& cached : it->second)
            {
                if (cached.expires_at_ms > now_ms)
                {
                    from_cache.answers.push_back(cached.record);
                    fresh = true;
                }
            }
        }
        if (!fresh)
        {
            auto neg = negative_.find({query.name, rtype});
            fresh = neg != negative_.end() && neg->second > now_ms;
        }
        if (!fresh)
            hit = false;
    }
    if (hit && !from_cache.answers.empty())
        return from_cache;

    DnsResponse response = upstream.resolve(query, now_ms);
    std::uint32_t negative_ttl_s = 60;
    for (const auto& record : response.answers)
        if (record.ttl_seconds > 0)
            negative_ttl_s = std::min(negative_ttl_s, record.ttl_seconds);
    for (const auto& record : response.answers)
    {
        if (record.ttl_seconds == 0)
            continue; // must not be cached except by the client
        CachedRecord cached;
        cached.record = record;
        cached.expires_at_ms =
            now_ms + static_cast<std::uint64_t>(record.ttl_seconds) * 1000;
        cache_[{query.name, record.rtype}].push_back(std::move(cached));
    }
    for (RecordType rtype : query.types)
    {
        if (rtype == RecordType::QUICTOKEN)
            continue;
        bool answered = false;
        for (const auto& record : response.answers)
            if (record.rtype == rtype)
                answered = true;
        if (!answered)
            negative_[{query.name, rtype}] =
                now_ms + static_cast<std::uint64_t>(negative_ttl_s) * 1000;
    }
    return response;
}

std::size_t
CachingDnsProxy::cached_record_count() const
{
    std::size_t n = 0;
    for (const auto& [key, records] : cache_)
        n += records.size();
    return n;
}

DnsImportResult
import_dns_response(ClientTokenCache& cache, const std::string& hostname,
                    const DnsResponse& response, std::uint64_t now_ms)
{
    DnsImportResult result;
    if (response.nxdomain)
        return result;

    for (const auto& record : response.answers)
    {
        if (record.rtype == RecordType::QUICTOKEN)
        {
            cache.store(hostname, record.value, TokenOrigin::OutOfBand,
                        now_ms);
            result.token_imported = true;
        }
        else if (!result.server_address)
        {
            if (record.rtype == RecordType::A && record.value.size() == 4)
                result.server_address = CanonicalAddress::v4(
                    record.value[0], record.value[1], record.value[2],
                    record.value[3]);
            else if (record.rtype == RecordType::AAAA &&
                     record.value.size() == 16)
            {
                std::array<std::uint8_t, 16> bytes;
                std::copy(record.value.begin(), record.value.end(),
                          bytes.begin());
                result.server_address = CanonicalAddress::v6(bytes);
            }
        }
    }
    return result;
}

ResolveAndConnectResult
resolve_and_connect(ClientEndpoint& client, Resolver& resolver,
                    std::uint64_t connection_id, const std::string& hostname,
                    std::uint64_t now_ms)
{
    ResolveAndConnectResult result;

    DnsQuery query;
    query.name = hostname;
    query.types = {RecordType::A, RecordType::AAAA, RecordType::QUICTOKEN};
    query.client_source = client.address();
    result.response = resolver.resolve(query, now_ms);

    auto imported = import_dns_response(client.cache(), hostname,
                                        result.response, now_ms);
    result.server_address = imported.server_address;
    result.token_imported = imported.token_imported;

    if (result.server_address)
        result.initial = client.start_connection(connection_id, hostname,
                                                 *result.server_address,
                                                 now_ms);
    return result;
}

} // namespace oobt
