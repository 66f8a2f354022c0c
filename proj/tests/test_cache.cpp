// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <algorithm>

#include "oobt/client_cache.hpp"
#include "oobt/key_registry.hpp"

#include "support.hpp"

using namespace oobt;
using oobt::test::make_key;

namespace {

// now = 0 everywhere unless stated; expiry = lifetime seconds.
Bytes
token_bytes(std::uint32_t lifetime_s, std::uint64_t issued_at_ms = 0,
            std::uint64_t nonce_seed = 1)
{
    static const KeyRecord key = make_key("issuer", 42);
    DeterministicRng nonces(nonce_seed);
    return encode_token(issue_token(key, CanonicalAddress::v4(192, 0, 2, 1),
                                    issued_at_ms, lifetime_s, nonces));
}

} // namespace

TEST_CASE("store then select returns the token")
{
    ClientTokenCache cache;
    Bytes bytes = token_bytes(600);
    cache.store("a.example", bytes, TokenOrigin::OutOfBand, 0);

    auto selection = cache.select("a.example", 10);
    REQUIRE(selection);
    CHECK(selection->token_bytes == bytes);
    CHECK(selection->origin == TokenOrigin::OutOfBand);
    CHECK(!cache.select("other.example", 10));
}

TEST_CASE("expired and malformed stores are dropped silently")
{
    ClientTokenCache cache;
    cache.store("a.example", token_bytes(1), TokenOrigin::OutOfBand,
                5000); // expired 4 s ago
    CHECK(!cache.select("a.example", 5000));
    CHECK(cache.stats().dropped_expired == 1);

    cache.store("a.example", Bytes(10, 0xab), TokenOrigin::OutOfBand, 0);
    CHECK(!cache.select("a.example", 0));
    CHECK(cache.stats().dropped_malformed == 1);
    CHECK(cache.size() == 0);
}

TEST_CASE("newer token replaces the same (hostname, origin) slot")
{
    ClientTokenCache cache;
    Bytes older = token_bytes(600, 0, 1);
    Bytes newer = token_bytes(600, 100, 2);
    cache.store("a.example", older, TokenOrigin::ServerIssued, 0);
    cache.store("a.example", newer, TokenOrigin::ServerIssued, 200);

    auto selection = cache.select("a.example", 300);
    REQUIRE(selection);
    CHECK(selection->token_bytes == newer);
    CHECK(cache.stats().replaced == 1);
    CHECK(!cache.select("a.example", 300)); // slot consumed, nothing behind
}

TEST_CASE("selection prefers ServerIssued over OutOfBand in any order")
{
    Bytes server_token = token_bytes(600, 0, 1);
    Bytes external_token = token_bytes(600, 0, 2);

    for (bool server_first : {true, false})
    {
        ClientTokenCache cache;
        if (server_first)
        {
            cache.store("a.example", server_token,
                        TokenOrigin::ServerIssued, 0);
            cache.store("a.example", external_token, TokenOrigin::OutOfBand,
                        0);
        }
        else
        {
            cache.store("a.example", external_token, TokenOrigin::OutOfBand,
                        0);
            cache.store("a.example", server_token,
                        TokenOrigin::ServerIssued, 0);
        }

        auto first = cache.select("a.example", 1);
        REQUIRE(first);
        CHECK(first->origin == TokenOrigin::ServerIssued);
        CHECK(first->token_bytes == server_token);

        // Single-use: the second select falls back to the other origin,
        // the third finds nothing.
        auto second = cache.select("a.example", 1);
        REQUIRE(second);
        CHECK(second->origin == TokenOrigin::OutOfBand);
        CHECK(!cache.select("a.example", 1));
    }
}

TEST_CASE("only an OutOfBand token present returns it")
{
    ClientTokenCache cache;
    cache.store("a.example", token_bytes(600), TokenOrigin::OutOfBand, 0);
    auto selection = cache.select("a.example", 1);
    REQUIRE(selection);
    CHECK(selection->origin == TokenOrigin::OutOfBand);
}

TEST_CASE("selection never returns an expired token")
{
    ClientTokenCache cache;
    cache.store("a.example", token_bytes(10), TokenOrigin::ServerIssued, 0);

    CHECK(!cache.select("a.example", 10 * 1000));     // boundary: expired
    cache.store("a.example", token_bytes(10), TokenOrigin::ServerIssued, 0);
    auto selection = cache.select("a.example", 10 * 1000 - 1);
    CHECK(selection);
}

TEST_CASE("purge_expired boundary and counting")
{
    ClientTokenCache cache;
    CHECK(cache.purge_expired(0) == 0);

    cache.store("a.example", token_bytes(10), TokenOrigin::ServerIssued, 0);
    CHECK(cache.purge_expired(10 * 1000) == 1); // expires_at == now counts
    CHECK(cache.size() == 0);
}

TEST_CASE("staggered expiries purge exactly the elapsed half")
{
    ClientTokenCache cache;
    // Ten tokens expiring at 1s, 2s, ..., 10s across ten hostnames.
    for (int i = 1; i <= 10; ++i)
    {
        cache.store("host" + std::to_string(i) + ".example",
                    token_bytes(static_cast<std::uint32_t>(i), 0,
                                static_cast<std::uint64_t>(i)),
                    TokenOrigin::OutOfBand, 0);
    }
    REQUIRE(cache.size() == 10);

    // Median of the expiry times: 5.5 s. Everything at 5 s and below goes.
    CHECK(cache.purge_expired(5500) == 5);
    CHECK(cache.size() == 5);
    CHECK(cache.purge_expired(5500) == 0);
}

TEST_CASE("no resurrection after consumption or purge")
{
    ClientTokenCache cache;
    cache.store("a.example", token_bytes(600), TokenOrigin::OutOfBand, 0);
    REQUIRE(cache.select("a.example", 1));
    CHECK(!cache.select("a.example", 1));
    CHECK(cache.purge_expired(700 * 1000) == 0);

    cache.store("b.example", token_bytes(10), TokenOrigin::OutOfBand, 0);
    CHECK(cache.purge_expired(20 * 1000) == 1);
    CHECK(!cache.select("b.example", 1));
}

TEST_CASE("debug dump format")
{
    ClientTokenCache cache;
    Bytes bytes = token_bytes(600);
    cache.store("a.example", bytes, TokenOrigin::OutOfBand, 0);

    std::string dump = cache.debug_dump();
    CHECK(dump == "a.example OutOfBand 600000 " + to_hex(bytes) + "\n");
}
