// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oobt/address.hpp"
#include "oobt/endpoint.hpp"
#include "oobt/key_registry.hpp"
#include "oobt/token.hpp"

namespace oobt {

// Abstract DNS: no RFC 1035 wire format, just typed queries and answers.
// QUICTOKEN is the added record type carrying a freshly issued address
// validation token for the querying client.
enum class RecordType
{
    A,
    AAAA,
    QUICTOKEN,
};

std::string_view to_string(RecordType rtype);

struct DnsQuery
{
    std::string name;
    std::set<RecordType> types;
    // The source address the resolver observes for this query; tokens get
    // bound to it. Behind a NAT this may differ from what the server sees.
    CanonicalAddress client_source;
};

struct DnsRecord
{
    RecordType rtype = RecordType::A;
    Bytes value; // raw address bytes for A/AAAA, encoded token for QUICTOKEN
    std::uint32_t ttl_seconds = 0;

    bool operator==(const DnsRecord&) const = default;
};

struct DnsResponse
{
    std::string name;
    std::vector<DnsRecord> answers;
    bool nxdomain = false;
};

struct ZoneEntry
{
    std::vector<CanonicalAddress> addresses;
    std::uint32_t ttl_seconds = 300;
};

struct ResolverConfig
{
    std::map<std::string, ZoneEntry> zone;
    // Keys shared in advance by server operators. Only hostnames present
    // here ever get a QUICTOKEN answer.
    std::map<std::string, KeyRecord> token_trust;
    std::uint32_t token_lifetime_s = kDefaultTokenLifetimeS;
};

class Resolver
{
  public:
    Resolver(ResolverConfig config, std::uint64_t nonce_seed)
        : config_(std::move(config)), nonce_rng_(nonce_seed)
    {
    }

    // Address records carry the zone TTL; a QUICTOKEN answer (at most one,
    // fresh nonce every time) always carries TTL 0 so nothing but the
    // querying client may hold it.
    DnsResponse resolve(const DnsQuery& query, std::uint64_t now_ms);

    const ResolverConfig& config() const { return config_; }

  private:
    ResolverConfig config_;
    DeterministicRng nonce_rng_;
};

// Models any cache between resolver and client: records with TTL 0 are
// never stored and never served, so a QUICTOKEN can't leak past the
// original response.
DnsResponse intermediate_cache_filter(const DnsResponse& response);

// Stateful version of the same rule: a forwarding cache that answers
// address queries from its store when fresh and otherwise forwards
// upstream, storing only TTL > 0 records from what passes through. Empty
// answers are negatively cached so a hostname without AAAA records still
// hits. Nothing with TTL 0 is ever stored, so a cache hit never carries a
// QUICTOKEN.
class CachingDnsProxy
{
  public:
    DnsResponse resolve(const DnsQuery& query, Resolver& upstream,
                        std::uint64_t now_ms);

    std::size_t cached_record_count() const;

  private:
    struct CachedRecord
    {
        DnsRecord record;
        std::uint64_t expires_at_ms = 0;
    };

    std::map<std::pair<std::string, RecordType>, std::vector<CachedRecord>>
        cache_;
    // (name, type) -> expiry of the knowledge that the answer is empty.
    std::map<std::pair<std::string, RecordType>, std::uint64_t> negative_;
};

struct DnsImportResult
{
    std::optional<CanonicalAddress> server_address; // first address record
    bool token_imported = false;
};

// Client-side handling of a response: any QUICTOKEN answer goes into the
// cache as OutOfBand for the queried hostname.
DnsImportResult import_dns_response(ClientTokenCache& cache,
                                    const std::string& hostname,
                                    const DnsResponse& response,
                                    std::uint64_t now_ms);

struct ResolveAndConnectResult
{
    DnsResponse response;
    std::optional<CanonicalAddress> server_address;
    bool token_imported = false;
    // Unset when resolution failed; otherwise the Initial the client sends,
    // carrying whatever the cache preferred.
    std::optional<HandshakeMessage> initial;
};

// Query (addresses plus QUICTOKEN), import any token as OutOfBand, then
// open the connection. Untimed composition; the simulator runs the same
// steps with link latency in between.
ResolveAndConnectResult resolve_and_connect(ClientEndpoint& client,
                                            Resolver& resolver,
                                            std::uint64_t connection_id,
                                            const std::string& hostname,
                                            std::uint64_t now_ms);

} // namespace oobt
