// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "oobt/endpoint.hpp"
#include "oobt/token.hpp"

namespace oobt::test {

inline Bytes
hexb(std::string_view hex)
{
    auto bytes = from_hex(hex);
    if (!bytes)
        throw std::invalid_argument("bad hex in test fixture");
    return *bytes;
}

template <std::size_t N>
std::array<std::uint8_t, N>
hexa(std::string_view hex)
{
    auto bytes = hexb(hex);
    if (bytes.size() != N)
        throw std::invalid_argument("bad fixture length");
    std::array<std::uint8_t, N> out;
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

inline KeyRecord
make_key(const std::string& owner, std::uint64_t seed,
         std::uint64_t threshold = kDefaultSpoofThreshold)
{
    DeterministicRng rng(seed);
    KeyRecord key;
    key.owner_entity = owner;
    key.spoof_threshold = threshold;
    rng.fill(key.key_id);
    rng.fill(key.secret);
    return key;
}

struct PumpResult
{
    HandshakeTranscript transcript;
    std::vector<HandshakeMessage> client_received;
};

// Runs one handshake directly between the two state machines, one fake
// millisecond per hop. No latency model; the simulator owns real timing.
inline PumpResult
pump_handshake(ClientEndpoint& client, ServerEndpoint& server,
               std::uint64_t connection_id, const std::string& hostname,
               std::uint64_t start_ms = 0, bool deliver_new_token = true)
{
    PumpResult out;
    out.transcript.connection_id = connection_id;
    out.transcript.client_hostname_target = hostname;

    std::uint64_t t = start_ms;
    std::deque<HandshakeMessage> to_server;
    to_server.push_back(client.start_connection(
        connection_id, hostname, server.config().address, t));
    out.transcript.add(static_cast<std::int64_t>(t) * 1000, true,
                       to_server.back().kind, to_server.back().token_bytes);

    int guard = 0;
    while (!to_server.empty())
    {
        if (++guard > 32)
            throw std::logic_error("pump_handshake: no convergence");

        HandshakeMessage msg = to_server.front();
        to_server.pop_front();
        ++t;
        auto responses = server.on_message(msg, t);
        for (const auto& response : responses)
        {
            out.transcript.add(static_cast<std::int64_t>(t) * 1000, false,
                               response.kind, response.token_bytes);
            ++t;
            out.client_received.push_back(response);
            for (auto& reply : client.on_message(response, t))
            {
                out.transcript.add(static_cast<std::int64_t>(t) * 1000, true,
                                   reply.kind, reply.token_bytes);
                to_server.push_back(std::move(reply));
            }
        }
    }

    const auto* server_state = server.connection(connection_id);
    if (deliver_new_token && server_state && server_state->complete)
    {
        ++t;
        if (auto frame = server.issue_new_token(connection_id, t))
        {
            out.transcript.add(static_cast<std::int64_t>(t) * 1000, false,
                               frame->kind, frame->token_bytes);
            ++t;
            out.client_received.push_back(*frame);
            client.on_message(*frame, t);
        }
    }

    const auto* client_state = client.connection(connection_id);
    if (client_state)
    {
        out.transcript.retried = client_state->retried;
        out.transcript.token_origin_used = client_state->origin_used;
        if (client_state->complete)
            out.transcript.completion_us = static_cast<std::int64_t>(t) *
                                           1000;
    }
    out.transcript.finalize();
    return out;
}

} // namespace oobt::test
