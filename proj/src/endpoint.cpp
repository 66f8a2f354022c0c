// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/endpoint.hpp"

#include <sstream>

#include "oobt/analytic.hpp"

namespace oobt {

std::string_view
to_string(MessageKind kind)
{
    switch (kind)
    {
    case MessageKind::Initial:
        return "Initial";
    case MessageKind::Retry:
        return "Retry";
    case MessageKind::ServerFlight:
        return "ServerFlight";
    case MessageKind::ClientFin:
        return "ClientFin";
    case MessageKind::NewToken:
        return "NewToken";
    case MessageKind::ExternalToken:
        return "ExternalToken";
    case MessageKind::AppData:
        return "AppData";
    }
    return "?";
}

std::string_view
to_string(TokenOriginUsed origin)
{
    switch (origin)
    {
    case TokenOriginUsed::None:
        return "None";
    case TokenOriginUsed::Retry:
        return "Retry";
    case TokenOriginUsed::ServerIssued:
        return "ServerIssued";
    case TokenOriginUsed::OutOfBand:
        return "OutOfBand";
    }
    return "?";
}

void
HandshakeTranscript::add(std::int64_t t_us, bool client_to_server,
                         MessageKind kind,
                         const std::optional<Bytes>& token_bytes)
{
    messages.push_back(TranscriptEntry{t_us, client_to_server, kind,
                                       token_bytes});
}

void
HandshakeTranscript::finalize()
{
    round_trips = 0;
    for (const auto& entry : messages)
    {
        if (entry.client_to_server && entry.kind == MessageKind::Initial)
            ++round_trips;
    }
}

std::string
HandshakeTranscript::serialize() const
{
    std::ostringstream out;
    for (const auto& entry : messages)
    {
        out << "t=" << format_micro(entry.t_us * 1000)
            << " dir=" << (entry.client_to_server ? "c2s" : "s2c")
            << " kind=" << to_string(entry.kind) << " token="
            << (entry.token_bytes ? to_hex(*entry.token_bytes) : "-") << '\n';
    }
    return out.str();
}

std::string
HandshakeTranscript::shape() const
{
    std::ostringstream out;
    bool first = true;
    for (const auto& entry : messages)
    {
        if (!first)
            out << ',';
        first = false;
        out << (entry.client_to_server ? ">" : "<") << to_string(entry.kind);
    }
    out << " rt=" << round_trips;
    return out.str();
}

HandshakeMessage
ClientEndpoint::start_connection(std::uint64_t connection_id,
                                 const std::string& hostname,
                                 const CanonicalAddress& server_address,
                                 std::uint64_t now_ms)
{
    ClientConnectionState state;
    state.id = connection_id;
    state.hostname = hostname;
    state.server_address = server_address;

    HandshakeMessage initial;
    initial.kind = MessageKind::Initial;
    initial.connection_id = connection_id;
    initial.source_address = address_;

    if (auto selection = cache_.select(hostname, now_ms))
    {
        initial.token_bytes = std::move(selection->token_bytes);
        state.origin_used = selection->origin == TokenOrigin::ServerIssued
                                ? TokenOriginUsed::ServerIssued
                                : TokenOriginUsed::OutOfBand;
    }

    connections_[connection_id] = std::move(state);
    return initial;
}

std::vector<HandshakeMessage>
ClientEndpoint::on_message(const HandshakeMessage& msg, std::uint64_t now_ms)
{
    auto it = connections_.find(msg.connection_id);

    // Token frames can only arrive on a connection this client opened.
    if (it == connections_.end())
        return {};
    ClientConnectionState& state = it->second;
    if (state.aborted)
        return {};

    switch (msg.kind)
    {
    case MessageKind::Retry:
    {
        if (state.complete)
            return {};
        if (state.retried)
        {
            // One retry per connection. A second one is a protocol
            // violation, not a slower path.
            state.aborted = true;
            state.error = "second Retry on one connection";
            return {};
        }
        state.retried = true;
        if (state.origin_used == TokenOriginUsed::None)
            state.origin_used = TokenOriginUsed::Retry;

        HandshakeMessage echo;
        echo.kind = MessageKind::Initial;
        echo.connection_id = msg.connection_id;
        echo.source_address = address_;
        echo.token_bytes = msg.token_bytes; // byte-identical echo
        return {echo};
    }
    case MessageKind::ServerFlight:
    {
        if (state.complete)
            return {}; // duplicate flight, FIN already sent
        state.complete = true;
        HandshakeMessage fin;
        fin.kind = MessageKind::ClientFin;
        fin.connection_id = msg.connection_id;
        fin.source_address = address_;
        return {fin};
    }
    case MessageKind::NewToken:
    {
        if (msg.token_bytes)
            cache_.store(state.hostname, *msg.token_bytes,
                         TokenOrigin::ServerIssued, now_ms);
        return {};
    }
    case MessageKind::ExternalToken:
    {
        // Stored for whatever hostname the issuer names. By design there
        // is no issuer-authorization check here.
        if (msg.token_bytes && msg.target_hostname)
            cache_.store(*msg.target_hostname, *msg.token_bytes,
                         TokenOrigin::OutOfBand, now_ms);
        return {};
    }
    case MessageKind::AppData:
        return {};
    case MessageKind::Initial:
    case MessageKind::ClientFin:
        state.error = "unexpected message direction";
        return {};
    }
    return {};
}

const ClientConnectionState*
ClientEndpoint::connection(std::uint64_t id) const
{
    auto it = connections_.find(id);
    return it == connections_.end() ? nullptr : &it->second;
}

ServerEndpoint::ServerEndpoint(ServerConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed)
{
    local_key_id_ = registry_.register_key("local:" + config_.hostname, rng_)
                        .key_id;
}

KeyRecord
ServerEndpoint::share_key_with(const std::string& owner_entity,
                               std::uint64_t spoof_threshold)
{
    return registry_.register_key(owner_entity, rng_, spoof_threshold);
}

void
ServerEndpoint::add_trusted_key_share(const std::string& target_hostname,
                                      KeyRecord key)
{
    config_.external_issue_policy.insert(target_hostname);
    trusted_key_shares_[target_hostname] = std::move(key);
}

HandshakeMessage
ServerEndpoint::make_retry(const HandshakeMessage& initial,
                           std::uint64_t now_ms)
{
    const KeyRecord* local = registry_.lookup(local_key_id_);
    auto token = issue_token(*local, initial.source_address, now_ms,
                             config_.token_lifetime_s, rng_);

    HandshakeMessage retry;
    retry.kind = MessageKind::Retry;
    retry.connection_id = initial.connection_id;
    retry.source_address = config_.address;
    retry.token_bytes = encode_token(token);
    return retry;
}

std::vector<HandshakeMessage>
ServerEndpoint::on_message(const HandshakeMessage& msg, std::uint64_t now_ms)
{
    switch (msg.kind)
    {
    case MessageKind::Initial:
    {
        auto [it, fresh] =
            connections_.try_emplace(msg.connection_id,
                                     ServerConnectionState{});
        ServerConnectionState& state = it->second;
        if (fresh)
        {
            state.id = msg.connection_id;
            state.client_address = msg.source_address;
        }
        if (state.flight_sent)
            return {}; // duplicate Initial after acceptance

        std::optional<ValidationResult> result;
        if (msg.token_bytes)
        {
            result = validate_token(registry_.lookup_fn(), *msg.token_bytes,
                                    msg.source_address, now_ms);
            if (fresh)
                state.first_initial_verdict = result->verdict;
        }

        bool accepted = !config_.strict_validation || (result && result->ok());
        if (!accepted)
        {
            // Invalid token == no token: same answer either way.
            return {make_retry(msg, now_ms)};
        }

        state.flight_sent = true;
        if (result && result->ok())
            state.validated_key_id = result->token->key_id;

        HandshakeMessage flight;
        flight.kind = MessageKind::ServerFlight;
        flight.connection_id = msg.connection_id;
        flight.source_address = config_.address;
        return {flight};
    }
    case MessageKind::ClientFin:
    {
        auto it = connections_.find(msg.connection_id);
        if (it != connections_.end() && it->second.flight_sent)
            it->second.complete = true;
        return {};
    }
    default:
        return {};
    }
}

std::optional<HandshakeMessage>
ServerEndpoint::issue_new_token(std::uint64_t connection_id,
                                std::uint64_t now_ms)
{
    auto it = connections_.find(connection_id);
    if (it == connections_.end() || !it->second.complete ||
        it->second.new_token_sent)
        return std::nullopt;

    const KeyRecord* local = registry_.lookup(local_key_id_);
    auto token = issue_token(*local, it->second.client_address, now_ms,
                             config_.new_token_lifetime_s, rng_);

    HandshakeMessage out;
    out.kind = MessageKind::NewToken;
    out.connection_id = connection_id;
    out.source_address = config_.address;
    out.token_bytes = encode_token(token);
    it->second.new_token_sent = true;
    return out;
}

std::optional<HandshakeMessage>
ServerEndpoint::issue_external_token(std::uint64_t connection_id,
                                     const std::string& target_hostname,
                                     std::uint64_t now_ms)
{
    auto it = connections_.find(connection_id);
    if (it == connections_.end() || !it->second.complete)
        return std::nullopt;
    if (!config_.external_issue_policy.contains(target_hostname))
        return std::nullopt;
    auto key_it = trusted_key_shares_.find(target_hostname);
    if (key_it == trusted_key_shares_.end())
        return std::nullopt;

    auto token = issue_token(key_it->second, it->second.client_address,
                             now_ms, config_.token_lifetime_s, rng_);

    HandshakeMessage out;
    out.kind = MessageKind::ExternalToken;
    out.connection_id = connection_id;
    out.source_address = config_.address;
    out.token_bytes = encode_token(token);
    out.target_hostname = target_hostname;
    return out;
}

std::optional<RevocationEvent>
ServerEndpoint::on_validation_timeout(std::uint64_t connection_id)
{
    auto it = connections_.find(connection_id);
    if (it == connections_.end() || it->second.complete ||
        !it->second.validated_key_id)
        return std::nullopt;
    return registry_.record_unrequited(*it->second.validated_key_id);
}

const ServerConnectionState*
ServerEndpoint::connection(std::uint64_t id) const
{
    auto it = connections_.find(id);
    return it == connections_.end() ? nullptr : &it->second;
}

} // namespace oobt
