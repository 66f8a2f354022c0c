// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oobt/address.hpp"
#include "oobt/endpoint.hpp"
#include "oobt/token.hpp"

namespace oobt {

// Which token-distribution mechanism a run exercises. None is the status
// quo (stateless retry on every first contact). DnsToken adds QUICTOKEN to
// the client's DNS queries. ExternalToken lets already-visited servers push
// tokens for configured target hostnames. NewTokenRevisit labels plain
// NEW_TOKEN reuse across two visits to one hostname.
enum class Mechanism
{
    None,
    DnsToken,
    ExternalToken,
    NewTokenRevisit,
};

std::string_view to_string(Mechanism mechanism);
std::optional<Mechanism> mechanism_from_string(std::string_view text);

struct ScenarioError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct LinkDef
{
    std::string a;
    std::string b;
    std::int64_t rtt_ms = 0;
};

// A secret key this server registers for one external issuer. The key_id
// is explicit so zone files and attack configs can reference it; the
// secret is derived from the scenario seed unless pinned here.
struct KeyShareDef
{
    std::string owner;
    std::string key_id_hex;
    std::optional<std::string> secret_hex;
    std::uint64_t spoof_threshold = kDefaultSpoofThreshold;
};

struct ExternalTargetDef
{
    std::string target;
    // Issue under a fabricated key the target does not know: models an
    // unauthorized issuer. The client should end up no worse than with no
    // token.
    bool wrong_key = false;
};

struct ServerDef
{
    std::string hostname;
    CanonicalAddress address;
    bool strict_validation = true;
    bool issue_new_token = true;
    std::vector<KeyShareDef> shared_keys;
    std::vector<ExternalTargetDef> external_token_targets;
};

struct ZoneDef
{
    std::vector<CanonicalAddress> addresses;
    std::uint32_t ttl_seconds = 300;
    // Reference into some server's shared_keys; presence makes the
    // resolver issue QUICTOKEN answers for this hostname.
    std::optional<std::string> token_key_id_hex;
};

struct ResolverDef
{
    std::string name;
    CanonicalAddress address;
    std::map<std::string, ZoneDef> zone;
    // Offset of this resolver's clock against the simulation clock; token
    // issue times (and so expiry checks at the server) shift with it.
    std::int64_t clock_skew_ms = 0;
};

struct ClientDef
{
    std::string name;
    CanonicalAddress address;
    // What the resolver sees as this client's source address, when it
    // differs (client and resolver behind the same NAT).
    std::optional<CanonicalAddress> resolver_visible_address;
    std::optional<std::string> resolver;
};

struct ConnectionDef
{
    std::uint64_t id = 0;
    std::string client;
    std::string server_hostname;
    // This connection starts once every listed connection has delivered
    // its first response data to the client.
    std::vector<std::uint64_t> depends_on;
    std::int64_t start_at_ms = 0;
};

// Compromised-key injection: `count` Initials carrying tokens the attacker
// forges under the named shared key, each with a fresh spoofed source.
struct AttackDef
{
    std::string target_hostname;
    std::string key_id_hex;
    int count = 0;
    std::int64_t start_at_ms = 0;
    std::int64_t interval_ms = 0;
};

struct ScenarioConfig
{
    std::int64_t rtt_ms = 90;
    std::int64_t t_proc_ms = 40;
    std::uint64_t seed = 1;
    Mechanism mechanism = Mechanism::None;
    // A validated Initial whose handshake has not completed after this
    // many round trips counts as an unrequited (spoofed) request.
    std::int64_t validation_timeout_rtts = 10;
    std::uint32_t token_lifetime_s = kDefaultTokenLifetimeS;
    // Hooks for later versions; the model is lossless and jitter-free, and
    // validate() rejects anything but the defaults.
    double loss_rate = 0.0;
    std::int64_t jitter_ms = 0;
    std::vector<ServerDef> servers;
    std::vector<ResolverDef> resolvers;
    std::vector<ClientDef> clients;
    std::vector<ConnectionDef> connections;
    std::optional<AttackDef> attack;
    std::vector<LinkDef> links;

    // Throws ScenarioError with a field-path diagnostic on dangling
    // references, duplicate ids/names, cyclic dependencies or negative
    // timing parameters.
    void validate() const;
};

struct ConnectionRow
{
    std::uint64_t connection_id = 0;
    Mechanism mechanism = Mechanism::None;
    std::int64_t rtt_ms = 0;
    int round_trips = 0;
    bool retried = false;
    TokenOriginUsed token_origin = TokenOriginUsed::None;
    // Handshake delay from first Initial to FIN-sendable; DNS time is
    // reported separately and never part of completion.
    std::int64_t completion_us = -1;
    std::int64_t dns_us = 0;
    // Verdict the server gave the first Initial's token, relabeled
    // AddressMismatch when the simulator's ground truth proves the tag was
    // honest but bound elsewhere. Diagnostic only, not a CSV column.
    std::optional<Verdict> first_initial_verdict;
};

struct RevocationRecord
{
    RevocationEvent event;
    std::string server_hostname;
    std::int64_t at_us = 0;
};

struct RunReport
{
    std::vector<HandshakeTranscript> transcripts;
    std::vector<ConnectionRow> rows;
    // When the last connection in the dependency graph became established
    // (client FIN sendable), i.e. the longest DAG path in time.
    std::int64_t page_establishment_us = 0;
    std::vector<RevocationRecord> revocations;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_delivered = 0;
    std::uint64_t messages_blackholed = 0;

    const ConnectionRow* row(std::uint64_t connection_id) const;
    const HandshakeTranscript* transcript(std::uint64_t connection_id) const;

    // connection_id,mechanism,rtt_ms,round_trips,retried,token_origin,
    // completion_ms,dns_ms
    std::string to_csv() const;
};

// Single-threaded deterministic event loop: messages travel one-way in
// rtt/2, the server charges t_proc once per connection when it starts the
// cryptographic flight, and equal seeds give byte-identical reports.
class Simulation
{
  public:
    explicit Simulation(ScenarioConfig config);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    RunReport run();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

RunReport run_scenario(const ScenarioConfig& config);

// Canned topologies used by the CLI, the sweep and the tests: one client,
// one resolver, and either a single server or a chain of `depth` servers
// where each established connection triggers the next.
ScenarioConfig single_connection_scenario(Mechanism mechanism,
                                          std::int64_t rtt_ms,
                                          std::int64_t t_proc_ms,
                                          std::uint64_t seed = 1);
ScenarioConfig chain_scenario(int depth, Mechanism mechanism,
                              std::int64_t rtt_ms, std::int64_t t_proc_ms,
                              std::uint64_t seed = 1);

struct SweepRow
{
    std::int64_t rtt_ms = 0;
    Mechanism mechanism = Mechanism::None;
    std::int64_t simulated_ms = 0;
    std::int64_t analytic_ms = 0;
    // Simulated completion over the None baseline at the same RTT.
    double ratio = 1.0;
};

// Runs single-connection scenarios per (rtt, mechanism). Only None and
// DnsToken are meaningful for a single first-contact connection.
std::vector<SweepRow> sweep(const std::vector<std::int64_t>& rtt_list,
                            std::int64_t t_proc_ms,
                            const std::vector<Mechanism>& mechanisms);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// Page-establishment difference between a None run and a DnsToken run of
// the same depth-connection chain.
std::int64_t paired_chain_savings_us(int depth, std::int64_t rtt_ms,
                                     std::int64_t t_proc_ms,
                                     std::uint64_t seed = 1);

} // namespace oobt
