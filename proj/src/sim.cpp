// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "oobt/analytic.hpp"
#include "oobt/dns.hpp"

namespace oobt {

namespace {

// Injected attack connections live above every configurable id.
constexpr std::uint64_t kAttackConnBase = 1ULL << 32;

KeyId
parse_key_id(const std::string& hex, const std::string& where)
{
    auto bytes = from_hex(hex);
    if (!bytes || bytes->size() != 4)
        throw ScenarioError(where + ": key id must be 8 hex digits, got '" +
                            hex + "'");
    KeyId id;
    std::copy(bytes->begin(), bytes->end(), id.begin());
    return id;
}

} // namespace

std::string_view
to_string(Mechanism mechanism)
{
    switch (mechanism)
    {
    case Mechanism::None:
        return "None";
    case Mechanism::DnsToken:
        return "DnsToken";
    case Mechanism::ExternalToken:
        return "ExternalToken";
    case Mechanism::NewTokenRevisit:
        return "NewTokenRevisit";
    }
    return "?";
}

std::optional<Mechanism>
mechanism_from_string(std::string_view text)
{
    if (text == "None" || text == "none")
        return Mechanism::None;
    if (text == "DnsToken" || text == "dns_token")
        return Mechanism::DnsToken;
    if (text == "ExternalToken" || text == "external_token")
        return Mechanism::ExternalToken;
    if (text == "NewTokenRevisit" || text == "new_token_revisit")
        return Mechanism::NewTokenRevisit;
    return std::nullopt;
}

void
ScenarioConfig::validate() const
{
    if (rtt_ms < 0)
        throw ScenarioError("scenario.rtt_ms: must be >= 0");
    if (t_proc_ms < 0)
        throw ScenarioError("scenario.t_proc_ms: must be >= 0");
    if (validation_timeout_rtts < 1)
        throw ScenarioError("scenario.validation_timeout_rtts: must be >= 1");
    if (loss_rate != 0.0)
        throw ScenarioError(
            "scenario.loss_rate: packet loss is not modeled; must be 0");
    if (jitter_ms != 0)
        throw ScenarioError(
            "scenario.jitter_ms: jitter is not modeled; must be 0");

    std::set<std::string> host_names;
    std::set<std::string> server_hostnames;
    std::set<std::string> resolver_names;
    std::map<std::string, KeyId> shared_key_ids; // hex -> id

    for (std::size_t i = 0; i < servers.size(); ++i)
    {
        const ServerDef& server = servers[i];
        std::string where = "scenario.servers[" + std::to_string(i) + "]";
        if (server.hostname.empty())
            throw ScenarioError(where + ".hostname: must not be empty");
        if (!host_names.insert(server.hostname).second)
            throw ScenarioError(where + ".hostname: '" + server.hostname +
                                "' reused");
        server_hostnames.insert(server.hostname);
        for (std::size_t k = 0; k < server.shared_keys.size(); ++k)
        {
            const KeyShareDef& share = server.shared_keys[k];
            std::string kwhere =
                where + ".shared_keys[" + std::to_string(k) + "]";
            KeyId id = parse_key_id(share.key_id_hex, kwhere + ".key_id");
            if (!shared_key_ids.emplace(share.key_id_hex, id).second)
                throw ScenarioError(kwhere + ".key_id: '" +
                                    share.key_id_hex + "' reused");
            if (share.secret_hex)
            {
                auto secret = from_hex(*share.secret_hex);
                if (!secret || secret->size() != 32)
                    throw ScenarioError(kwhere +
                                        ".secret: must be 64 hex digits");
            }
            if (share.owner.empty())
                throw ScenarioError(kwhere + ".owner: must not be empty");
        }
    }

    for (std::size_t i = 0; i < resolvers.size(); ++i)
    {
        const ResolverDef& resolver = resolvers[i];
        std::string where = "scenario.resolvers[" + std::to_string(i) + "]";
        if (resolver.name.empty())
            throw ScenarioError(where + ".name: must not be empty");
        if (!host_names.insert(resolver.name).second)
            throw ScenarioError(where + ".name: '" + resolver.name +
                                "' reused");
        resolver_names.insert(resolver.name);
        for (const auto& [hostname, zone] : resolver.zone)
        {
            std::string zwhere = where + ".zone['" + hostname + "']";
            if (zone.addresses.empty())
                throw ScenarioError(zwhere +
                                    ".addresses: must not be empty");
            if (zone.token_key_id_hex &&
                !shared_key_ids.contains(*zone.token_key_id_hex))
                throw ScenarioError(
                    zwhere + ".token_key_id: '" + *zone.token_key_id_hex +
                    "' does not match any server shared key");
        }
    }

    std::set<std::string> client_names;
    for (std::size_t i = 0; i < clients.size(); ++i)
    {
        const ClientDef& client = clients[i];
        std::string where = "scenario.clients[" + std::to_string(i) + "]";
        if (client.name.empty())
            throw ScenarioError(where + ".name: must not be empty");
        if (!host_names.insert(client.name).second)
            throw ScenarioError(where + ".name: '" + client.name +
                                "' reused");
        client_names.insert(client.name);
        if (client.resolver && !resolver_names.contains(*client.resolver))
            throw ScenarioError(where + ".resolver: unknown resolver '" +
                                *client.resolver + "'");
        if (!client.resolver && resolvers.size() > 1)
            throw ScenarioError(where +
                                ".resolver: required when several "
                                "resolvers are configured");
    }

    std::map<std::uint64_t, const ConnectionDef*> by_id;
    for (std::size_t i = 0; i < connections.size(); ++i)
    {
        const ConnectionDef& conn = connections[i];
        std::string where = "scenario.connections[" + std::to_string(i) + "]";
        if (conn.id == 0 || conn.id >= kAttackConnBase)
            throw ScenarioError(where + ".id: must be in [1, 2^32)");
        if (!by_id.emplace(conn.id, &conn).second)
            throw ScenarioError(where + ".id: duplicate id " +
                                std::to_string(conn.id));
        if (!client_names.contains(conn.client))
            throw ScenarioError(where + ".client: unknown client '" +
                                conn.client + "'");
        if (!server_hostnames.contains(conn.server_hostname))
            throw ScenarioError(where + ".server: unknown server '" +
                                conn.server_hostname + "'");
        if (conn.start_at_ms < 0)
            throw ScenarioError(where + ".start_at_ms: must be >= 0");
    }
    for (std::size_t i = 0; i < connections.size(); ++i)
    {
        const ConnectionDef& conn = connections[i];
        std::string where = "scenario.connections[" + std::to_string(i) + "]";
        std::set<std::uint64_t> seen_deps;
        for (std::uint64_t dep : conn.depends_on)
        {
            if (!by_id.contains(dep))
                throw ScenarioError(where +
                                    ".depends_on: unknown connection " +
                                    std::to_string(dep));
            if (dep == conn.id)
                throw ScenarioError(where + ".depends_on: self-dependency");
            if (!seen_deps.insert(dep).second)
                throw ScenarioError(where + ".depends_on: duplicate entry " +
                                    std::to_string(dep));
        }
    }

    // Kahn's algorithm; leftovers mean a cycle.
    {
        std::map<std::uint64_t, int> indegree;
        std::map<std::uint64_t, std::vector<std::uint64_t>> out_edges;
        for (const auto& conn : connections)
        {
            indegree[conn.id] += 0;
            for (std::uint64_t dep : conn.depends_on)
            {
                ++indegree[conn.id];
                out_edges[dep].push_back(conn.id);
            }
        }
        std::deque<std::uint64_t> ready;
        for (const auto& [id, degree] : indegree)
            if (degree == 0)
                ready.push_back(id);
        std::size_t visited = 0;
        while (!ready.empty())
        {
            std::uint64_t id = ready.front();
            ready.pop_front();
            ++visited;
            for (std::uint64_t next : out_edges[id])
                if (--indegree[next] == 0)
                    ready.push_back(next);
        }
        if (visited != connections.size())
            throw ScenarioError(
                "scenario.connections: dependency graph has a cycle");
    }

    for (std::size_t i = 0; i < servers.size(); ++i)
    {
        const ServerDef& server = servers[i];
        for (std::size_t t = 0; t < server.external_token_targets.size();
             ++t)
        {
            const ExternalTargetDef& target =
                server.external_token_targets[t];
            std::string where = "scenario.servers[" + std::to_string(i) +
                                "].external_token_targets[" +
                                std::to_string(t) + "]";
            if (!server_hostnames.contains(target.target))
                throw ScenarioError(where + ": unknown server '" +
                                    target.target + "'");
            if (!target.wrong_key)
            {
                const auto target_server = std::find_if(
                    servers.begin(), servers.end(), [&](const ServerDef& s) {
                        return s.hostname == target.target;
                    });
                bool found = std::any_of(
                    target_server->shared_keys.begin(),
                    target_server->shared_keys.end(),
                    [&](const KeyShareDef& share) {
                        return share.owner == server.hostname;
                    });
                if (!found)
                    throw ScenarioError(
                        where + ": '" + target.target +
                        "' has no shared key with owner '" +
                        server.hostname + "'");
            }
        }
    }

    if (attack)
    {
        if (!server_hostnames.contains(attack->target_hostname))
            throw ScenarioError("scenario.attack.target: unknown server '" +
                                attack->target_hostname + "'");
        parse_key_id(attack->key_id_hex, "scenario.attack.key_id");
        if (!shared_key_ids.contains(attack->key_id_hex))
            throw ScenarioError(
                "scenario.attack.key_id: '" + attack->key_id_hex +
                "' does not match any server shared key");
        if (attack->count < 0)
            throw ScenarioError("scenario.attack.count: must be >= 0");
        if (attack->start_at_ms < 0 || attack->interval_ms < 0)
            throw ScenarioError("scenario.attack: times must be >= 0");
    }

    for (std::size_t i = 0; i < links.size(); ++i)
    {
        const LinkDef& link = links[i];
        std::string where = "scenario.links[" + std::to_string(i) + "]";
        if (!host_names.contains(link.a) || !host_names.contains(link.b))
            throw ScenarioError(where + ": unknown host name");
        if (link.rtt_ms < 0)
            throw ScenarioError(where + ".rtt_ms: must be >= 0");
    }
}

const ConnectionRow*
RunReport::row(std::uint64_t connection_id) const
{
    for (const auto& r : rows)
        if (r.connection_id == connection_id)
            return &r;
    return nullptr;
}

const HandshakeTranscript*
RunReport::transcript(std::uint64_t connection_id) const
{
    for (const auto& t : transcripts)
        if (t.connection_id == connection_id)
            return &t;
    return nullptr;
}

std::string
RunReport::to_csv() const
{
    std::ostringstream out;
    out << "connection_id,mechanism,rtt_ms,round_trips,retried,"
           "token_origin,completion_ms,dns_ms\n";
    for (const auto& row : rows)
    {
        out << row.connection_id << ',' << to_string(row.mechanism) << ','
            << row.rtt_ms << ',' << row.round_trips << ','
            << (row.retried ? "true" : "false") << ','
            << to_string(row.token_origin) << ','
            << (row.completion_us < 0
                    ? std::string("-")
                    : format_micro(row.completion_us * 1000))
            << ',' << format_micro(row.dns_us * 1000) << '\n';
    }
    return out.str();
}

struct Simulation::Impl
{
    explicit Impl(ScenarioConfig config) : config(std::move(config)) {}

    // --- static wiring -----------------------------------------------

    ScenarioConfig config;
    std::map<std::string, ClientEndpoint> clients;
    std::map<std::string, ServerEndpoint> servers;
    std::map<std::string, Resolver> resolvers;
    std::map<std::string, const ClientDef*> client_defs;
    std::map<std::string, const ServerDef*> server_defs;
    std::map<std::string, const ResolverDef*> resolver_defs;
    std::map<std::pair<std::string, std::string>, std::int64_t> link_rtts;
    std::map<KeyId, KeyRecord> shared_keys;
    std::optional<KeyRecord> attack_key;

    // --- event loop ---------------------------------------------------

    struct Event
    {
        std::int64_t at_us;
        std::uint64_t seq;
        std::function<void()> fire;
    };
    struct EventAfter
    {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.at_us != b.at_us ? a.at_us > b.at_us : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::int64_t now_us = 0;
    std::uint64_t next_seq = 0;
    bool ran = false;

    // --- per-connection runtime ----------------------------------------

    struct ConnRuntime
    {
        ConnectionDef def;
        std::size_t pending_parents = 0;
        bool started = false;
        bool failed = false;
        bool appdata_seen = false;
        std::int64_t dns_start_us = -1;
        std::int64_t dns_us = 0;
        std::int64_t initial_sent_us = -1;
        std::int64_t established_at_us = -1;
        HandshakeTranscript transcript;
    };
    std::map<std::uint64_t, ConnRuntime> conns;
    std::map<std::uint64_t, std::vector<std::uint64_t>> dependents;

    RunReport report;

    // --- helpers --------------------------------------------------------

    std::uint64_t now_ms() const
    {
        return static_cast<std::uint64_t>(now_us / 1000);
    }

    std::int64_t rtt_us(const std::string& a, const std::string& b) const
    {
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = link_rtts.find(key);
        std::int64_t ms = it != link_rtts.end() ? it->second : config.rtt_ms;
        return ms * 1000;
    }

    std::int64_t one_way_us(const std::string& a, const std::string& b) const
    {
        return rtt_us(a, b) / 2;
    }

    void schedule(std::int64_t at_us, std::function<void()> fn)
    {
        queue.push(Event{at_us, next_seq++, std::move(fn)});
    }

    // A hop between two named hosts; extra_us models sender-side
    // processing before the message leaves.
    void send(const std::string& from, const std::string& to,
              std::int64_t extra_us, std::function<void()> deliver)
    {
        ++report.messages_sent;
        schedule(now_us + extra_us + one_way_us(from, to),
                 [this, deliver = std::move(deliver)] {
                     ++report.messages_delivered;
                     deliver();
                 });
    }

    // Responses toward spoofed sources go nowhere.
    void send_to_blackhole(std::int64_t extra_us)
    {
        ++report.messages_sent;
        schedule(now_us + extra_us + config.rtt_ms * 500,
                 [this] { ++report.messages_blackholed; });
    }

    bool is_attack_conn(std::uint64_t id) const
    {
        return id >= kAttackConnBase;
    }

    const std::string& resolver_name_for(const ClientDef& client) const
    {
        static const std::string kNone;
        if (client.resolver)
            return *client.resolver;
        if (resolvers.size() == 1)
            return resolvers.begin()->first;
        return kNone;
    }

    // --- setup ----------------------------------------------------------

    void setup()
    {
        config.validate();

        DeterministicRng material_rng(config.seed ^ 0x6f6f62746f6b656eULL);

        for (const auto& link : config.links)
        {
            auto key = link.a < link.b ? std::make_pair(link.a, link.b)
                                       : std::make_pair(link.b, link.a);
            link_rtts[key] = link.rtt_ms;
        }

        for (const ServerDef& def : config.servers)
        {
            ServerConfig sc;
            sc.hostname = def.hostname;
            sc.address = def.address;
            sc.strict_validation = def.strict_validation;
            sc.token_lifetime_s = config.token_lifetime_s;
            sc.new_token_lifetime_s = config.token_lifetime_s;
            auto [it, inserted] = servers.emplace(
                def.hostname,
                ServerEndpoint(std::move(sc), material_rng.next_u64()));
            server_defs[def.hostname] = &def;

            for (const KeyShareDef& share : def.shared_keys)
            {
                KeyRecord record;
                record.key_id = parse_key_id(share.key_id_hex, "shared key");
                if (share.secret_hex)
                {
                    auto secret = *from_hex(*share.secret_hex);
                    std::copy(secret.begin(), secret.end(),
                              record.secret.begin());
                }
                else
                {
                    material_rng.fill(record.secret);
                }
                record.owner_entity = share.owner;
                record.spoof_threshold = share.spoof_threshold;
                it->second.registry().insert(record);
                shared_keys.emplace(record.key_id, record);
            }
        }

        // EXTERNAL_TOKEN wiring needs every shared key registered first.
        for (const ServerDef& def : config.servers)
        {
            ServerEndpoint& issuer = servers.at(def.hostname);
            for (const ExternalTargetDef& target :
                 def.external_token_targets)
            {
                if (target.wrong_key)
                {
                    KeyRecord bogus;
                    bogus.owner_entity = def.hostname;
                    material_rng.fill(bogus.secret);
                    do
                    {
                        material_rng.fill(bogus.key_id);
                    } while (
                        shared_keys.contains(bogus.key_id) ||
                        servers.at(target.target).registry().lookup(
                            bogus.key_id) != nullptr);
                    issuer.add_trusted_key_share(target.target, bogus);
                    continue;
                }
                const ServerDef* target_def = server_defs.at(target.target);
                for (const KeyShareDef& share : target_def->shared_keys)
                {
                    if (share.owner == def.hostname)
                    {
                        issuer.add_trusted_key_share(
                            target.target,
                            shared_keys.at(
                                parse_key_id(share.key_id_hex, "share")));
                        break;
                    }
                }
            }
        }

        for (const ResolverDef& def : config.resolvers)
        {
            ResolverConfig rc;
            rc.token_lifetime_s = config.token_lifetime_s;
            for (const auto& [hostname, zone] : def.zone)
            {
                ZoneEntry entry;
                entry.addresses = zone.addresses;
                entry.ttl_seconds = zone.ttl_seconds;
                rc.zone.emplace(hostname, std::move(entry));
                if (zone.token_key_id_hex)
                {
                    KeyId id = parse_key_id(*zone.token_key_id_hex, "zone");
                    rc.token_trust.emplace(hostname, shared_keys.at(id));
                }
            }
            resolvers.emplace(def.name,
                              Resolver(std::move(rc),
                                       material_rng.next_u64()));
            resolver_defs[def.name] = &def;
        }

        for (const ClientDef& def : config.clients)
        {
            clients.emplace(def.name, ClientEndpoint(def.name, def.address));
            client_defs[def.name] = &def;
        }

        for (const ConnectionDef& def : config.connections)
        {
            ConnRuntime rt;
            rt.def = def;
            rt.pending_parents = def.depends_on.size();
            rt.transcript.connection_id = def.id;
            rt.transcript.client_hostname_target = def.server_hostname;
            conns.emplace(def.id, std::move(rt));
            for (std::uint64_t dep : def.depends_on)
                dependents[dep].push_back(def.id);
        }

        if (config.attack)
            attack_key =
                shared_keys.at(parse_key_id(config.attack->key_id_hex,
                                            "attack"));
    }

    // --- connection flow --------------------------------------------------

    void start_conn(std::uint64_t id)
    {
        ConnRuntime& rt = conns.at(id);
        if (rt.started)
            return;
        rt.started = true;

        const ClientDef& client_def = *client_defs.at(rt.def.client);
        const std::string& resolver_name = resolver_name_for(client_def);
        if (!resolver_name.empty())
        {
            rt.dns_start_us = now_us;
            DnsQuery query;
            query.name = rt.def.server_hostname;
            query.types = {RecordType::A, RecordType::AAAA};
            if (config.mechanism == Mechanism::DnsToken)
                query.types.insert(RecordType::QUICTOKEN);
            query.client_source =
                client_def.resolver_visible_address.value_or(
                    client_def.address);
            send(rt.def.client, resolver_name, 0,
                 [this, id, resolver_name, query,
                  client_name = rt.def.client] {
                     // The resolver stamps tokens with its own clock.
                     std::int64_t skewed =
                         static_cast<std::int64_t>(now_ms()) +
                         resolver_defs.at(resolver_name)->clock_skew_ms;
                     DnsResponse response =
                         resolvers.at(resolver_name)
                             .resolve(query,
                                      skewed < 0
                                          ? 0
                                          : static_cast<std::uint64_t>(
                                                skewed));
                     send(resolver_name, client_name, 0,
                          [this, id, response] {
                              on_dns_response(id, response);
                          });
                 });
        }
        else
        {
            start_handshake(id,
                            servers.at(rt.def.server_hostname)
                                .config()
                                .address);
        }
    }

    void on_dns_response(std::uint64_t id, const DnsResponse& response)
    {
        ConnRuntime& rt = conns.at(id);
        rt.dns_us = now_us - rt.dns_start_us;

        ClientEndpoint& client = clients.at(rt.def.client);
        auto imported = import_dns_response(
            client.cache(), rt.def.server_hostname, response, now_ms());
        if (!imported.server_address)
        {
            rt.failed = true;
            return;
        }
        start_handshake(id, *imported.server_address);
    }

    void start_handshake(std::uint64_t id,
                         const CanonicalAddress& server_address)
    {
        ConnRuntime& rt = conns.at(id);
        ClientEndpoint& client = clients.at(rt.def.client);

        HandshakeMessage initial = client.start_connection(
            id, rt.def.server_hostname, server_address, now_ms());
        rt.initial_sent_us = now_us;
        rt.transcript.add(now_us, true, initial.kind, initial.token_bytes);
        send(rt.def.client, rt.def.server_hostname, 0,
             [this, id, initial] { on_server_message(id, initial); });
    }

    void on_server_message(std::uint64_t id, const HandshakeMessage& msg)
    {
        const std::string& hostname = is_attack_conn(id)
                                          ? config.attack->target_hostname
                                          : conns.at(id).def.server_hostname;
        ServerEndpoint& server = servers.at(hostname);
        const std::int64_t t_proc_us = config.t_proc_ms * 1000;

        auto responses = server.on_message(msg, now_ms());

        for (const auto& response : responses)
        {
            if (response.kind == MessageKind::ServerFlight)
            {
                // The connection-establishment processing cost lands here,
                // once, when the server starts the cryptographic flight.
                record_server_send(id, response, t_proc_us);
                route_to_client(id, hostname, response, t_proc_us);

                const auto* state = server.connection(id);
                if (state && state->validated_key_id)
                    schedule_validation_timeout(id, hostname);
            }
            else
            {
                record_server_send(id, response, 0);
                route_to_client(id, hostname, response, 0);
            }
        }

        if (msg.kind == MessageKind::ClientFin && !is_attack_conn(id))
            emit_post_handshake(id, hostname, server);
    }

    void record_server_send(std::uint64_t id, const HandshakeMessage& msg,
                            std::int64_t extra_us)
    {
        if (is_attack_conn(id))
            return;
        conns.at(id).transcript.add(now_us + extra_us, false, msg.kind,
                                    msg.token_bytes);
    }

    void route_to_client(std::uint64_t id, const std::string& hostname,
                         const HandshakeMessage& msg, std::int64_t extra_us)
    {
        if (is_attack_conn(id))
        {
            send_to_blackhole(extra_us);
            return;
        }
        const std::string& client_name = conns.at(id).def.client;
        send(hostname, client_name, extra_us,
             [this, id, msg] { on_client_message(id, msg); });
    }

    void schedule_validation_timeout(std::uint64_t id,
                                     const std::string& hostname)
    {
        const std::string peer = is_attack_conn(id)
                                     ? hostname // default-rtt stand-in
                                     : conns.at(id).def.client;
        std::int64_t rtt = is_attack_conn(id) ? config.rtt_ms * 1000
                                              : rtt_us(peer, hostname);
        // Never earlier than the FIN could legitimately arrive.
        std::int64_t delay =
            std::max(config.validation_timeout_rtts * rtt,
                     config.t_proc_ms * 1000 + rtt + 1000);
        schedule(now_us + delay, [this, id, hostname] {
            auto event = servers.at(hostname).on_validation_timeout(id);
            if (event)
                report.revocations.push_back(
                    RevocationRecord{*event, hostname, now_us});
        });
    }

    void on_client_message(std::uint64_t id, const HandshakeMessage& msg)
    {
        ConnRuntime& rt = conns.at(id);
        ClientEndpoint& client = clients.at(rt.def.client);

        auto responses = client.on_message(msg, now_ms());

        if (msg.kind == MessageKind::ServerFlight)
        {
            rt.established_at_us = now_us;
        }
        else if (msg.kind == MessageKind::AppData && !rt.appdata_seen)
        {
            rt.appdata_seen = true;
            fire_dependents(id);
        }

        for (const auto& response : responses)
        {
            rt.transcript.add(now_us, true, response.kind,
                              response.token_bytes);
            send(rt.def.client, rt.def.server_hostname, 0,
                 [this, id, response] { on_server_message(id, response); });
        }
    }

    void emit_post_handshake(std::uint64_t id, const std::string& hostname,
                             ServerEndpoint& server)
    {
        ConnRuntime& rt = conns.at(id);
        const ServerDef& def = *server_defs.at(hostname);

        std::vector<HandshakeMessage> frames;
        if (def.issue_new_token)
        {
            if (auto frame = server.issue_new_token(id, now_ms()))
                frames.push_back(std::move(*frame));
        }
        for (const ExternalTargetDef& target : def.external_token_targets)
        {
            if (auto frame =
                    server.issue_external_token(id, target.target, now_ms()))
                frames.push_back(std::move(*frame));
        }
        HandshakeMessage app;
        app.kind = MessageKind::AppData;
        app.connection_id = id;
        app.source_address = server.config().address;
        frames.push_back(std::move(app));

        for (const auto& frame : frames)
        {
            rt.transcript.add(now_us, false, frame.kind, frame.token_bytes);
            route_to_client(id, hostname, frame, 0);
        }
    }

    void fire_dependents(std::uint64_t parent)
    {
        auto it = dependents.find(parent);
        if (it == dependents.end())
            return;
        for (std::uint64_t dep : it->second)
        {
            ConnRuntime& rt = conns.at(dep);
            if (rt.pending_parents == 0 || --rt.pending_parents > 0)
                continue;
            std::int64_t at =
                std::max(now_us, rt.def.start_at_ms * 1000);
            schedule(at, [this, dep] { start_conn(dep); });
        }
    }

    void inject_attack(int index)
    {
        CanonicalAddress spoofed = CanonicalAddress::v4(
            198, 18, static_cast<std::uint8_t>(index >> 8),
            static_cast<std::uint8_t>(index & 0xff));

        DeterministicRng nonce_rng(config.seed ^
                                   (0x5a5a5a5aULL + index));
        auto token = issue_token(*attack_key, spoofed, now_ms(),
                                 config.token_lifetime_s, nonce_rng);

        HandshakeMessage initial;
        initial.kind = MessageKind::Initial;
        initial.connection_id = kAttackConnBase + index;
        initial.source_address = spoofed;
        initial.token_bytes = encode_token(token);

        ++report.messages_sent;
        schedule(now_us + config.rtt_ms * 500,
                 [this, initial] {
                     ++report.messages_delivered;
                     on_server_message(initial.connection_id, initial);
                 });
    }

    // --- run -------------------------------------------------------------

    RunReport run()
    {
        setup();

        for (auto& [id, rt] : conns)
        {
            if (rt.pending_parents == 0)
            {
                schedule(rt.def.start_at_ms * 1000,
                         [this, id = id] { start_conn(id); });
            }
        }
        if (config.attack)
        {
            for (int i = 0; i < config.attack->count; ++i)
            {
                std::int64_t at = (config.attack->start_at_ms +
                                   static_cast<std::int64_t>(i) *
                                       config.attack->interval_ms) *
                                  1000;
                schedule(at, [this, i] { inject_attack(i); });
            }
        }

        while (!queue.empty())
        {
            Event event = queue.top();
            queue.pop();
            if (event.at_us < now_us)
                throw std::logic_error("simulation time went backwards");
            now_us = event.at_us;
            event.fire();
        }

        finalize();
        return std::move(report);
    }

    void finalize()
    {
        for (auto& [id, rt] : conns)
        {
            const ClientEndpoint& client = clients.at(rt.def.client);
            const ClientConnectionState* cstate = client.connection(id);
            const ServerEndpoint& server = servers.at(rt.def.server_hostname);
            const ServerConnectionState* sstate = server.connection(id);

            rt.transcript.completion_us = rt.established_at_us;
            if (cstate)
            {
                rt.transcript.retried = cstate->retried;
                rt.transcript.token_origin_used = cstate->origin_used;
            }
            rt.transcript.finalize();

            ConnectionRow row;
            row.connection_id = id;
            row.mechanism = config.mechanism;
            row.rtt_ms = rtt_us(rt.def.client, rt.def.server_hostname) / 1000;
            row.round_trips = rt.transcript.round_trips;
            row.retried = rt.transcript.retried;
            row.token_origin = rt.transcript.token_origin_used;
            row.completion_us = rt.established_at_us < 0
                                    ? -1
                                    : rt.established_at_us -
                                          rt.initial_sent_us;
            row.dns_us = rt.dns_us;
            row.first_initial_verdict = diagnose_first_verdict(rt, sstate);

            if (rt.established_at_us > report.page_establishment_us)
                report.page_establishment_us = rt.established_at_us;

            report.rows.push_back(std::move(row));
            report.transcripts.push_back(std::move(rt.transcript));
        }
    }

    std::optional<Verdict>
    diagnose_first_verdict(const ConnRuntime& rt,
                           const ServerConnectionState* sstate)
    {
        if (!sstate || !sstate->first_initial_verdict)
            return std::nullopt;
        Verdict verdict = *sstate->first_initial_verdict;
        if (verdict != Verdict::InvalidSignature)
            return verdict;

        // Ground truth the wire never carries: the address the issuer
        // actually bound the token to.
        const ClientDef& client_def = *client_defs.at(rt.def.client);
        CanonicalAddress issued_for =
            client_def.resolver_visible_address.value_or(client_def.address);

        for (const auto& entry : rt.transcript.messages)
        {
            if (entry.kind == MessageKind::Initial && entry.token_bytes)
            {
                ValidationResult result;
                result.verdict = verdict;
                result.token = decode_token(*entry.token_bytes);
                return diagnose_mismatch(
                    result,
                    servers.at(rt.def.server_hostname).registry().lookup_fn(),
                    issued_for);
            }
        }
        return verdict;
    }
};

Simulation::Simulation(ScenarioConfig config)
    : impl_(std::make_unique<Impl>(std::move(config)))
{
}

Simulation::~Simulation() = default;

RunReport
Simulation::run()
{
    if (impl_->ran)
        throw std::logic_error("Simulation::run called twice");
    impl_->ran = true;
    return impl_->run();
}

RunReport
run_scenario(const ScenarioConfig& config)
{
    Simulation sim(config);
    return sim.run();
}

namespace {

std::string
indexed_key_id(int index)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0a0000%02x", index & 0xff);
    return buf;
}

} // namespace

ScenarioConfig
single_connection_scenario(Mechanism mechanism, std::int64_t rtt_ms,
                           std::int64_t t_proc_ms, std::uint64_t seed)
{
    return chain_scenario(1, mechanism, rtt_ms, t_proc_ms, seed);
}

ScenarioConfig
chain_scenario(int depth, Mechanism mechanism, std::int64_t rtt_ms,
               std::int64_t t_proc_ms, std::uint64_t seed)
{
    if (depth < 1 || depth > 200)
        throw ScenarioError("chain_scenario: depth must be in [1, 200]");

    ScenarioConfig config;
    config.rtt_ms = rtt_ms;
    config.t_proc_ms = t_proc_ms;
    config.seed = seed;
    config.mechanism = mechanism;
    // Tokens must outlive the in-flight time or extreme-RTT sweeps would
    // measure expiry, not the mechanism.
    config.token_lifetime_s = static_cast<std::uint32_t>(
        std::max<std::int64_t>(kDefaultTokenLifetimeS,
                               (rtt_ms * (depth + 4) * 20) / 1000));

    ResolverDef resolver;
    resolver.name = "resolver0";
    resolver.address = CanonicalAddress::v4(203, 0, 113, 53);

    // NewTokenRevisit revisits one hostname; the other mechanisms walk a
    // chain of distinct hostnames, the first-contact case.
    bool revisit = mechanism == Mechanism::NewTokenRevisit;
    int server_count = revisit ? 1 : depth;

    for (int i = 0; i < server_count; ++i)
    {
        ServerDef server;
        server.hostname = "s" + std::to_string(i) + ".example";
        server.address =
            CanonicalAddress::v4(203, 0, 113,
                                 static_cast<std::uint8_t>(10 + i));
        server.shared_keys.push_back(
            KeyShareDef{"resolver0", indexed_key_id(i), std::nullopt,
                        kDefaultSpoofThreshold});

        ZoneDef zone;
        zone.addresses = {server.address};
        zone.ttl_seconds = 300;
        zone.token_key_id_hex = indexed_key_id(i);
        resolver.zone.emplace(server.hostname, std::move(zone));

        config.servers.push_back(std::move(server));
    }

    if (mechanism == Mechanism::ExternalToken)
    {
        for (int i = 0; i + 1 < server_count; ++i)
        {
            config.servers[i].external_token_targets.push_back(
                ExternalTargetDef{config.servers[i + 1].hostname, false});
            config.servers[i + 1].shared_keys.push_back(KeyShareDef{
                config.servers[i].hostname,
                "0b0000" + indexed_key_id(i + 1).substr(6), std::nullopt,
                kDefaultSpoofThreshold});
        }
    }

    config.resolvers.push_back(std::move(resolver));

    ClientDef client;
    client.name = "client0";
    client.address = CanonicalAddress::v4(198, 51, 100, 10);
    client.resolver = "resolver0";
    config.clients.push_back(std::move(client));

    for (int i = 0; i < depth; ++i)
    {
        ConnectionDef conn;
        conn.id = static_cast<std::uint64_t>(i + 1);
        conn.client = "client0";
        conn.server_hostname =
            revisit ? "s0.example"
                    : "s" + std::to_string(i) + ".example";
        if (i > 0)
            conn.depends_on = {static_cast<std::uint64_t>(i)};
        config.connections.push_back(std::move(conn));
    }

    return config;
}

std::vector<SweepRow>
sweep(const std::vector<std::int64_t>& rtt_list, std::int64_t t_proc_ms,
      const std::vector<Mechanism>& mechanisms)
{
    for (Mechanism mechanism : mechanisms)
    {
        if (mechanism != Mechanism::None && mechanism != Mechanism::DnsToken)
            throw ScenarioError(
                "sweep: only None and DnsToken apply to a single "
                "first-contact connection");
    }

    std::vector<SweepRow> rows;
    for (std::int64_t rtt : rtt_list)
    {
        auto completion_ms = [&](Mechanism mechanism) {
            RunReport report =
                run_scenario(single_connection_scenario(mechanism, rtt,
                                                        t_proc_ms));
            std::int64_t us = report.rows.at(0).completion_us;
            if (us % 1000 != 0)
                throw std::logic_error("sweep: non-integral completion");
            return us / 1000;
        };

        std::int64_t base_ms = completion_ms(Mechanism::None);
        for (Mechanism mechanism : mechanisms)
        {
            SweepRow row;
            row.rtt_ms = rtt;
            row.mechanism = mechanism;
            row.simulated_ms = mechanism == Mechanism::None
                                   ? base_ms
                                   : completion_ms(mechanism);
            row.analytic_ms = mechanism == Mechanism::None
                                  ? analytic_default_ms(rtt, t_proc_ms)
                                  : analytic_proposal_ms(rtt, t_proc_ms);
            row.ratio = base_ms == 0 ? 1.0
                                     : static_cast<double>(row.simulated_ms) /
                                           static_cast<double>(base_ms);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string
sweep_to_csv(const std::vector<SweepRow>& rows)
{
    std::ostringstream out;
    out << "rtt_ms,mechanism,simulated_ms,analytic_ms,ratio\n";
    for (const auto& row : rows)
    {
        char ratio[32];
        std::snprintf(ratio, sizeof(ratio), "%.6f", row.ratio);
        out << row.rtt_ms << ',' << to_string(row.mechanism) << ','
            << row.simulated_ms << ',' << row.analytic_ms << ',' << ratio
            << '\n';
    }
    return out.str();
}

std::int64_t
paired_chain_savings_us(int depth, std::int64_t rtt_ms,
                        std::int64_t t_proc_ms, std::uint64_t seed)
{
    RunReport baseline = run_scenario(
        chain_scenario(depth, Mechanism::None, rtt_ms, t_proc_ms, seed));
    RunReport proposal = run_scenario(
        chain_scenario(depth, Mechanism::DnsToken, rtt_ms, t_proc_ms, seed));
    return baseline.page_establishment_us - proposal.page_establishment_us;
}

} // namespace oobt
