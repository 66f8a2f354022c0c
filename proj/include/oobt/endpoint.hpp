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
#include "oobt/client_cache.hpp"
#include "oobt/key_registry.hpp"
#include "oobt/token.hpp"

namespace oobt {

// Handshake messages are abstract: one ServerFlight message stands in for
// the whole encrypted server flight (EE/CERT/CV/FIN), and no payload bytes
// are modeled. Timing lives entirely in the simulator.
enum class MessageKind
{
    Initial,
    Retry,
    ServerFlight,
    ClientFin,
    NewToken,
    ExternalToken,
    AppData,
};

std::string_view to_string(MessageKind kind);

struct HandshakeMessage
{
    MessageKind kind = MessageKind::Initial;
    std::uint64_t connection_id = 0;
    CanonicalAddress source_address;
    std::optional<Bytes> token_bytes;          // Initial (optional), Retry,
                                               // NewToken, ExternalToken
    std::optional<std::string> target_hostname; // ExternalToken only
};

enum class TokenOriginUsed
{
    None,         // no token end to end (validation disabled)
    Retry,        // no initial token; completed by echoing a retry token
    ServerIssued, // first Initial carried a NEW_TOKEN-style cached token
    OutOfBand,    // first Initial carried an externally issued token
};

std::string_view to_string(TokenOriginUsed origin);

struct TranscriptEntry
{
    std::int64_t t_us = 0;
    bool client_to_server = true;
    MessageKind kind = MessageKind::Initial;
    std::optional<Bytes> token_bytes;
};

// Per-connection record of what went over the wire. round_trips counts the
// client->server->client exchanges needed before the client FIN could be
// sent: 1 when a presented token validated, 2 when a retry happened. An
// invalid token produces the same shape as no token at all.
struct HandshakeTranscript
{
    std::uint64_t connection_id = 0;
    std::string client_hostname_target;
    std::vector<TranscriptEntry> messages;
    int round_trips = 0;
    bool retried = false;
    TokenOriginUsed token_origin_used = TokenOriginUsed::None;
    std::int64_t completion_us = -1;

    void add(std::int64_t t_us, bool client_to_server, MessageKind kind,
             const std::optional<Bytes>& token_bytes);

    // Derives round_trips from the recorded Initials.
    void finalize();

    // One line per message: "t=<ms> dir=<c2s|s2c> kind=<...> token=<hex|->".
    std::string serialize() const;

    // Message kinds and round-trip count only, no token bytes or times.
    // Two handshakes that differ only in token contents have equal shapes.
    std::string shape() const;
};

struct ClientConnectionState
{
    std::uint64_t id = 0;
    std::string hostname;
    CanonicalAddress server_address;
    bool retried = false;
    bool aborted = false;
    bool complete = false;
    TokenOriginUsed origin_used = TokenOriginUsed::None;
    std::string error;
};

// Client half of the handshake. Attaches cached tokens by the preference
// rule (ServerIssued over OutOfBand), echoes retry tokens byte for byte,
// and imports NEW_TOKEN / EXTERNAL_TOKEN frames into the cache. It never
// checks whether an external issuer was authorized; a bad out-of-band
// token just costs a retry.
class ClientEndpoint
{
  public:
    ClientEndpoint(std::string name, CanonicalAddress address)
        : name_(std::move(name)), address_(address)
    {
    }

    const std::string& name() const { return name_; }
    const CanonicalAddress& address() const { return address_; }

    // Models the client moving networks between connections.
    void set_address(const CanonicalAddress& address) { address_ = address; }

    ClientTokenCache& cache() { return cache_; }
    const ClientTokenCache& cache() const { return cache_; }

    HandshakeMessage start_connection(std::uint64_t connection_id,
                                      const std::string& hostname,
                                      const CanonicalAddress& server_address,
                                      std::uint64_t now_ms);

    std::vector<HandshakeMessage> on_message(const HandshakeMessage& msg,
                                             std::uint64_t now_ms);

    const ClientConnectionState* connection(std::uint64_t id) const;

  private:
    std::string name_;
    CanonicalAddress address_;
    ClientTokenCache cache_;
    std::map<std::uint64_t, ClientConnectionState> connections_;
};

struct ServerConfig
{
    std::string hostname;
    CanonicalAddress address;
    bool strict_validation = true;
    std::uint32_t token_lifetime_s = kDefaultTokenLifetimeS;
    std::uint32_t new_token_lifetime_s = kDefaultTokenLifetimeS;
    // Hostnames this server may issue EXTERNAL_TOKENs for. Needs a key in
    // trusted_key_shares as well; policy without key (or key without
    // policy) refuses issuance.
    std::set<std::string> external_issue_policy;
};

struct ServerConnectionState
{
    std::uint64_t id = 0;
    CanonicalAddress client_address;
    bool flight_sent = false;
    bool complete = false;
    bool new_token_sent = false;
    // Verdict for the token on the first Initial; unset if it carried none.
    std::optional<Verdict> first_initial_verdict;
    // Key that validated the accepted Initial, for unrequited-request
    // monitoring.
    std::optional<KeyId> validated_key_id;
};

// Server half. Owns the key registry it validates against: one local key
// for its own retry and NEW_TOKEN tokens (never shared, so revoking an
// external issuer's key can never break retries) plus one registered key
// per external issuer.
class ServerEndpoint
{
  public:
    ServerEndpoint(ServerConfig config, std::uint64_t seed);

    const ServerConfig& config() const { return config_; }
    KeyRegistry& registry() { return registry_; }
    const KeyRegistry& registry() const { return registry_; }
    const KeyId& local_key_id() const { return local_key_id_; }

    // Registers a fresh key for an external issuer and returns the copy to
    // hand over.
    KeyRecord share_key_with(const std::string& owner_entity,
                             std::uint64_t spoof_threshold =
                                 kDefaultSpoofThreshold);

    // Installs a key this server may use to issue EXTERNAL_TOKENs for
    // target_hostname, and allows that hostname in the issue policy.
    void add_trusted_key_share(const std::string& target_hostname,
                               KeyRecord key);

    std::vector<HandshakeMessage> on_message(const HandshakeMessage& msg,
                                             std::uint64_t now_ms);

    // NEW_TOKEN for the connection's client address under the local key.
    // Refuses (nullopt) before handshake completion or when one was
    // already issued for this connection.
    std::optional<HandshakeMessage> issue_new_token(std::uint64_t
                                                        connection_id,
                                                    std::uint64_t now_ms);

    // EXTERNAL_TOKEN for target_hostname bound to the connection's client
    // address. nullopt = not authorized (no policy entry or no shared key)
    // or handshake not complete.
    std::optional<HandshakeMessage> issue_external_token(
        std::uint64_t connection_id, const std::string& target_hostname,
        std::uint64_t now_ms);

    // Fired by the simulator once the unrequited-request timeout for a
    // token-validated connection elapses. Counts against the validating
    // key when the handshake never completed.
    std::optional<RevocationEvent> on_validation_timeout(std::uint64_t
                                                             connection_id);

    const ServerConnectionState* connection(std::uint64_t id) const;

  private:
    HandshakeMessage make_retry(const HandshakeMessage& initial,
                                std::uint64_t now_ms);

    ServerConfig config_;
    DeterministicRng rng_;
    KeyRegistry registry_;
    KeyId local_key_id_{};
    std::map<std::string, KeyRecord> trusted_key_shares_;
    std::map<std::uint64_t, ServerConnectionState> connections_;
};

} // namespace oobt
