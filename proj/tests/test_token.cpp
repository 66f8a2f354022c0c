// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <set>

#include "oobt/key_registry.hpp"
#include "oobt/token.hpp"

#include "support.hpp"

using namespace oobt;
using oobt::test::hexa;
using oobt::test::hexb;
using oobt::test::make_key;

namespace {

// Known-answer fixtures, tag values computed with an independent
// HMAC-SHA-256 implementation over the documented input concatenation
// (unsigned token fields in wire order, then the canonical address).
struct TagVector
{
    const char* secret_hex;
    const char* key_id_hex;
    std::uint64_t issued_at_ms;
    std::uint32_t lifetime_s;
    const char* nonce_hex;
    const char* address;
    const char* tag_hex;
};

constexpr TagVector kTagVectors[] = {
    {"000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
     "01020304", 1, 600, "000102030405060708090a0b", "192.0.2.1",
     "64e2a830d6cd50668f92b0100f7c3519"},
    {"aaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa",
     "deadbeef", 1700000000000ULL, 60, "0f0e0d0c0b0a090807060504",
     "2001:db8::1", "34f2d3ab036a149de8dc6001ba03c6d5"},
    {"ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00",
     "00000000", 0, 0, "000000000000000000000000", "10.0.0.1",
     "6fd07acdda688ab6c5de1ed7c66fafd4"},
};

// The first vector's full 45-byte encoding, assembled by hand from the
// field table: version, key_id, issued_at, lifetime, nonce, tag.
constexpr const char* kVectorZeroWire =
    "01" "01020304" "0000000000000001" "00000258"
    "000102030405060708090a0b" "64e2a830d6cd50668f92b0100f7c3519";

KeyRecord
key_from_vector(const TagVector& v)
{
    KeyRecord key;
    key.key_id = hexa<4>(v.key_id_hex);
    key.secret = hexa<32>(v.secret_hex);
    key.owner_entity = "vector";
    return key;
}

KeyLookup
single_key_lookup(const KeyRecord& key)
{
    return [&key](const KeyId& id) -> const KeyRecord* {
        return id == key.key_id ? &key : nullptr;
    };
}

ValidationToken
random_token(DeterministicRng& rng)
{
    ValidationToken token;
    rng.fill(token.key_id);
    token.issued_at_ms = rng.next_u64() >> 1;
    token.lifetime_s = static_cast<std::uint32_t>(rng.next_u64());
    rng.fill(token.nonce);
    rng.fill(token.tag);
    return token;
}

} // namespace

TEST_CASE("token tags match the independent HMAC oracle")
{
    for (const TagVector& v : kTagVectors)
    {
        KeyRecord key = key_from_vector(v);
        auto address = CanonicalAddress::parse(v.address);
        REQUIRE(address);

        auto token = issue_token_with_nonce(key, *address, v.issued_at_ms,
                                            v.lifetime_s,
                                            hexa<12>(v.nonce_hex));
        CHECK(to_hex(token.tag) == v.tag_hex);
    }
}

TEST_CASE("hand-assembled wire layout")
{
    const TagVector& v = kTagVectors[0];
    auto token = issue_token_with_nonce(key_from_vector(v),
                                        *CanonicalAddress::parse(v.address),
                                        v.issued_at_ms, v.lifetime_s,
                                        hexa<12>(v.nonce_hex));
    CHECK(to_hex(encode_token(token)) == kVectorZeroWire);
    CHECK(encode_token(token).size() == kTokenEncodedSize);
}

TEST_CASE("encode of all-zero fields is 45 zero bytes")
{
    ValidationToken token;
    token.version = 0; // nothing special about version here, pure layout
    Bytes encoded = encode_token(token);
    CHECK(encoded == Bytes(kTokenEncodedSize, 0));
}

TEST_CASE("decode rejects wrong length and unknown version")
{
    CHECK(!decode_token(Bytes(44, 0x01)));
    CHECK(!decode_token(Bytes(46, 0x01)));
    CHECK(!decode_token(Bytes{}));

    Bytes wire = hexb(kVectorZeroWire);
    wire[0] = 2;
    CHECK(!decode_token(wire));
}

TEST_CASE("encode/decode round-trip over random tokens")
{
    DeterministicRng rng(1234);
    for (int i = 0; i < 500; ++i)
    {
        ValidationToken token = random_token(rng);
        auto decoded = decode_token(encode_token(token));
        REQUIRE(decoded);
        CHECK(*decoded == token);
    }
}

TEST_CASE("issue then validate round-trips to Valid")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);

    auto token = issue_token(key, address, 1000, 600, nonces);
    CHECK(token.issued_at_ms == 1000);

    auto result = validate_token(single_key_lookup(key),
                                 encode_token(token), address, 1001);
    CHECK(result.verdict == Verdict::Valid);
    REQUIRE(result.token);
    CHECK(*result.token == token);
}

TEST_CASE("issuance under a revoked key is refused")
{
    KeyRecord key = make_key("issuer", 42);
    key.revoked = true;
    DeterministicRng nonces(5);
    CHECK_THROWS_AS(issue_token(key, CanonicalAddress::v4(10, 0, 0, 1), 0,
                                600, nonces),
                    std::invalid_argument);
}

TEST_CASE("fresh nonces give distinct encodings for identical inputs")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);

    auto first = issue_token(key, address, 1000, 600, nonces);
    auto second = issue_token(key, address, 1000, 600, nonces);
    CHECK(first.nonce != second.nonce);
    CHECK(encode_token(first) != encode_token(second));
}

TEST_CASE("issuance with fixed nonce and clock is a pure function")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    TokenNonce nonce = hexa<12>("0102030405060708090a0b0c");

    auto first = issue_token_with_nonce(key, address, 77, 600, nonce);
    auto second = issue_token_with_nonce(key, address, 77, 600, nonce);
    CHECK(first == second);
    CHECK(encode_token(first) == encode_token(second));
}

TEST_CASE("expiry boundary is inclusive-expired")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);

    const std::uint64_t t0 = 5000;
    const std::uint32_t lifetime = 600;
    Bytes wire = encode_token(issue_token(key, address, t0, lifetime, nonces));
    auto lookup = single_key_lookup(key);

    CHECK(validate_token(lookup, wire, address, t0).verdict ==
          Verdict::Valid);
    CHECK(validate_token(lookup, wire, address, t0 + lifetime * 1000 - 1)
              .verdict == Verdict::Valid);
    CHECK(validate_token(lookup, wire, address, t0 + lifetime * 1000)
              .verdict == Verdict::Expired);
    CHECK(validate_token(lookup, wire, address, t0 + lifetime * 1000 + 1)
              .verdict == Verdict::Expired);
}

TEST_CASE("every single tag-bit flip is InvalidSignature")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);

    Bytes wire = encode_token(issue_token(key, address, 1000, 600, nonces));
    auto lookup = single_key_lookup(key);
    const std::size_t tag_offset = kTokenEncodedSize - 16;

    for (std::size_t bit = 0; bit < 128; ++bit)
    {
        Bytes mutated = wire;
        mutated[tag_offset + bit / 8] ^=
            static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK(validate_token(lookup, mutated, address, 1001).verdict ==
              Verdict::InvalidSignature);
    }
}

TEST_CASE("any single-byte mutation yields a non-Valid verdict")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);

    Bytes wire = encode_token(issue_token(key, address, 1000, 600, nonces));
    auto lookup = single_key_lookup(key);

    for (std::size_t i = 0; i < wire.size(); ++i)
    {
        for (int bit = 0; bit < 8; ++bit)
        {
            Bytes mutated = wire;
            mutated[i] ^= static_cast<std::uint8_t>(1 << bit);
            auto result = validate_token(lookup, mutated, address, 1001);
            CHECK(result.verdict != Verdict::Valid);
        }
    }
}

TEST_CASE("tokens bind to the issuing address")
{
    KeyRecord key = make_key("issuer", 42);
    auto issued_for = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);
    Bytes wire = encode_token(issue_token(key, issued_for, 1000, 600,
                                          nonces));
    auto lookup = single_key_lookup(key);

    auto other_v4 = CanonicalAddress::v4(192, 0, 2, 8);
    auto other_v6 = *CanonicalAddress::parse("2001:db8::7");
    for (const auto& claimed : {other_v4, other_v6})
    {
        auto result = validate_token(lookup, wire, claimed, 1001);
        CHECK(result.verdict == Verdict::InvalidSignature);
        // The simulator, which knows the issuing address, can tell this
        // apart from a forged tag.
        CHECK(diagnose_mismatch(result, lookup, issued_for) ==
              Verdict::AddressMismatch);
    }
}

TEST_CASE("verdict order of checks")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);
    auto lookup = single_key_lookup(key);

    SUBCASE("malformed beats everything")
    {
        CHECK(validate_token(lookup, Bytes(10, 0xff), address, 0).verdict ==
              Verdict::Malformed);
    }
    SUBCASE("unknown key beats bad signature")
    {
        auto other = make_key("other", 43);
        Bytes wire =
            encode_token(issue_token(other, address, 1000, 600, nonces));
        CHECK(validate_token(lookup, wire, address, 1001).verdict ==
              Verdict::UnknownKey);
    }
    SUBCASE("revoked beats signature and expiry")
    {
        Bytes wire =
            encode_token(issue_token(key, address, 1000, 600, nonces));
        key.revoked = true;
        CHECK(validate_token(lookup, wire, address, 1001).verdict ==
              Verdict::Revoked);
        CHECK(validate_token(lookup, wire, address,
                             1000 + 600 * 1000 + 5000)
                  .verdict == Verdict::Revoked);
    }
    SUBCASE("bad signature beats expiry")
    {
        Bytes wire =
            encode_token(issue_token(key, address, 1000, 600, nonces));
        wire.back() ^= 0x01;
        CHECK(validate_token(lookup, wire, address, 1000 + 600 * 1000 + 1)
                  .verdict == Verdict::InvalidSignature);
    }
}

TEST_CASE("unlinkability surrogate: no shared nonce or tag bytes")
{
    KeyRecord key = make_key("issuer", 42);
    auto address = CanonicalAddress::v4(192, 0, 2, 7);
    DeterministicRng nonces(5);

    std::set<TokenNonce> seen_nonces;
    std::set<TokenTag> seen_tags;
    for (int i = 0; i < 1000; ++i)
    {
        auto token = issue_token(key, address, 1000, 600, nonces);
        CHECK(seen_nonces.insert(token.nonce).second);
        CHECK(seen_tags.insert(token.tag).second);
    }
}

TEST_CASE("debug rendering")
{
    const TagVector& v = kTagVectors[0];
    auto token = issue_token_with_nonce(key_from_vector(v),
                                        *CanonicalAddress::parse(v.address),
                                        v.issued_at_ms, v.lifetime_s,
                                        hexa<12>(v.nonce_hex));
    CHECK(token.debug_string() ==
          "v1 kid=01020304 iat=1 ttl=600 nonce=000102030405060708090a0b "
          "tag=64e2a830d6cd50668f92b0100f7c3519");
}

TEST_CASE("canonical address encoding")
{
    auto v4 = CanonicalAddress::v4(192, 0, 2, 1);
    CHECK(to_hex(v4.encode()) == "04c0000201");
    CHECK(v4.to_string() == "192.0.2.1");

    auto v6 = *CanonicalAddress::parse("2001:db8::1");
    CHECK(to_hex(v6.encode()) == "0620010db8000000000000000000000001");
    CHECK(v6.to_string() == "2001:db8::1");

    CHECK(!CanonicalAddress::parse("not-an-address"));
    CHECK(!CanonicalAddress::parse("300.0.0.1"));
}
