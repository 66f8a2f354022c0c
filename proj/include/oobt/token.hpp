// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "oobt/address.hpp"
#include "oobt/bytes.hpp"
#include "oobt/rng.hpp"

namespace oobt {

using KeyId = std::array<std::uint8_t, 4>;
using SecretKey = std::array<std::uint8_t, 32>;
using TokenNonce = std::array<std::uint8_t, 12>;
using TokenTag = std::array<std::uint8_t, 16>;

struct KeyRecord; // key_registry.hpp

constexpr std::uint8_t kTokenVersion = 1;
constexpr std::size_t kTokenEncodedSize = 45;
constexpr std::uint32_t kDefaultTokenLifetimeS = 600;

// Address validation token. The tag authenticates every other field plus
// the client address the token was issued for; the address itself is never
// carried on the wire.
//
// Wire layout, big-endian, 45 bytes total:
//   version(1) | key_id(4) | issued_at_ms(8) | lifetime_s(4) | nonce(12) | tag(16)
struct ValidationToken
{
    std::uint8_t version = kTokenVersion;
    KeyId key_id{};
    std::uint64_t issued_at_ms = 0;
    std::uint32_t lifetime_s = 0;
    TokenNonce nonce{};
    TokenTag tag{};

    bool operator==(const ValidationToken&) const = default;

    std::uint64_t expires_at_ms() const
    {
        return issued_at_ms + static_cast<std::uint64_t>(lifetime_s) * 1000;
    }

    // "v1 kid=<hex8> iat=<ms> ttl=<s> nonce=<hex24> tag=<hex32>"
    std::string debug_string() const;
};

Bytes encode_token(const ValidationToken& token);

// nullopt means malformed: wrong length or unknown version.
std::optional<ValidationToken> decode_token(ByteView bytes);

// The exact byte string the tag is computed over: the unsigned token fields
// in wire order followed by the canonical client address encoding.
Bytes token_mac_input(const ValidationToken& token,
                      const CanonicalAddress& client);

TokenTag compute_token_tag(const SecretKey& secret,
                           const ValidationToken& token,
                           const CanonicalAddress& client);

bool tag_matches(const ValidationToken& token, const SecretKey& secret,
                 const CanonicalAddress& client);

// Deterministic issuance core: same inputs, same token.
// Throws std::invalid_argument if the key record is revoked.
ValidationToken issue_token_with_nonce(const KeyRecord& key,
                                       const CanonicalAddress& client,
                                       std::uint64_t now_ms,
                                       std::uint32_t lifetime_s,
                                       const TokenNonce& nonce);

// Draws a fresh 12-byte nonce from nonce_source, then issues.
ValidationToken issue_token(const KeyRecord& key,
                            const CanonicalAddress& client,
                            std::uint64_t now_ms, std::uint32_t lifetime_s,
                            DeterministicRng& nonce_source);

enum class Verdict
{
    Valid,
    Malformed,
    UnknownKey,
    Revoked,
    InvalidSignature,
    Expired,
    AddressMismatch,
};

std::string_view to_string(Verdict v);

// Consumers must treat every non-Valid verdict exactly like "no token
// presented"; the distinct values exist for reporting.
struct ValidationResult
{
    Verdict verdict = Verdict::Malformed;
    std::optional<ValidationToken> token; // present when decoding succeeded

    bool ok() const { return verdict == Verdict::Valid; }
};

using KeyLookup = std::function<const KeyRecord*(const KeyId&)>;

// Check order: Malformed, UnknownKey, Revoked, InvalidSignature, Expired.
// A tag mismatch is always reported as InvalidSignature here: a validator
// only holds the claimed address, so it cannot tell a forged tag from a
// token bound to some other address. AddressMismatch is produced solely by
// diagnose_mismatch below, for callers that know the issuing address.
ValidationResult validate_token(const KeyLookup& lookup, ByteView bytes,
                                const CanonicalAddress& claimed,
                                std::uint64_t now_ms);

// Relabels InvalidSignature as AddressMismatch when the tag verifies
// against the address the token was actually issued for. Test/simulation
// aid; no production validator can perform this check.
Verdict diagnose_mismatch(const ValidationResult& result,
                          const KeyLookup& lookup,
                          const CanonicalAddress& issued_for);

} // namespace oobt
