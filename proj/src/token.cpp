// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/token.hpp"

#include <stdexcept>

#include "oobt/hmac.hpp"
#include "oobt/key_registry.hpp"

namespace oobt {

namespace {

// version | key_id | issued_at | lifetime | nonce, i.e. everything in the
// wire layout that precedes the tag.
void
append_unsigned_fields(Bytes& out, const ValidationToken& token)
{
    out.push_back(token.version);
    out.insert(out.end(), token.key_id.begin(), token.key_id.end());
    put_u64_be(out, token.issued_at_ms);
    put_u32_be(out, token.lifetime_s);
    out.insert(out.end(), token.nonce.begin(), token.nonce.end());
}

} // namespace

std::string
ValidationToken::debug_string() const
{
    std::string out = "v" + std::to_string(version);
    out += " kid=" + to_hex(key_id);
    out += " iat=" + std::to_string(issued_at_ms);
    out += " ttl=" + std::to_string(lifetime_s);
    out += " nonce=" + to_hex(nonce);
    out += " tag=" + to_hex(tag);
    return out;
}

Bytes
encode_token(const ValidationToken& token)
{
    Bytes out;
    out.reserve(kTokenEncodedSize);
    append_unsigned_fields(out, token);
    out.insert(out.end(), token.tag.begin(), token.tag.end());
    return out;
}

std::optional<ValidationToken>
decode_token(ByteView bytes)
{
    if (bytes.size() != kTokenEncodedSize)
        return std::nullopt;
    if (bytes[0] != kTokenVersion)
        return std::nullopt;

    ValidationToken token;
    token.version = bytes[0];
    std::copy(bytes.begin() + 1, bytes.begin() + 5, token.key_id.begin());
    token.issued_at_ms = get_u64_be(bytes, 5);
    token.lifetime_s = get_u32_be(bytes, 13);
    std::copy(bytes.begin() + 17, bytes.begin() + 29, token.nonce.begin());
    std::copy(bytes.begin() + 29, bytes.end(), token.tag.begin());
    return token;
}

Bytes
token_mac_input(const ValidationToken& token, const CanonicalAddress& client)
{
    Bytes input;
    input.reserve(kTokenEncodedSize - sizeof(TokenTag) + 17);
    append_unsigned_fields(input, token);
    Bytes addr = client.encode();
    input.insert(input.end(), addr.begin(), addr.end());
    return input;
}

TokenTag
compute_token_tag(const SecretKey& secret, const ValidationToken& token,
                  const CanonicalAddress& client)
{
    auto digest = hmac_sha256(secret, token_mac_input(token, client));
    TokenTag tag;
    std::copy(digest.begin(), digest.begin() + tag.size(), tag.begin());
    return tag;
}

bool
tag_matches(const ValidationToken& token, const SecretKey& secret,
            const CanonicalAddress& client)
{
    return compute_token_tag(secret, token, client) == token.tag;
}

ValidationToken
issue_token_with_nonce(const KeyRecord& key, const CanonicalAddress& client,
                       std::uint64_t now_ms, std::uint32_t lifetime_s,
                       const TokenNonce& nonce)
{
    if (key.revoked)
        throw std::invalid_argument("issue_token: key is revoked");

    ValidationToken token;
    token.version = kTokenVersion;
    token.key_id = key.key_id;
    token.issued_at_ms = now_ms;
    token.lifetime_s = lifetime_s;
    token.nonce = nonce;
    token.tag = compute_token_tag(key.secret, token, client);
    return token;
}

ValidationToken
issue_token(const KeyRecord& key, const CanonicalAddress& client,
            std::uint64_t now_ms, std::uint32_t lifetime_s,
            DeterministicRng& nonce_source)
{
    TokenNonce nonce;
    nonce_source.fill(nonce);
    return issue_token_with_nonce(key, client, now_ms, lifetime_s, nonce);
}

std::string_view
to_string(Verdict v)
{
    switch (v)
    {
    case Verdict::Valid:
        return "Valid";
    case Verdict::Malformed:
        return "Malformed";
    case Verdict::UnknownKey:
        return "UnknownKey";
    case Verdict::Revoked:
        return "Revoked";
    case Verdict::InvalidSignature:
        return "InvalidSignature";
    case Verdict::Expired:
        return "Expired";
    case Verdict::AddressMismatch:
        return "AddressMismatch";
    }
    return "?";
}

ValidationResult
validate_token(const KeyLookup& lookup, ByteView bytes,
               const CanonicalAddress& claimed, std::uint64_t now_ms)
{
    ValidationResult result;

    auto decoded = decode_token(bytes);
    if (!decoded)
    {
        result.verdict = Verdict::Malformed;
        return result;
    }
    result.token = *decoded;

    const KeyRecord* key = lookup(decoded->key_id);
    if (key == nullptr)
    {
        result.verdict = Verdict::UnknownKey;
        return result;
    }
    if (key->revoked)
    {
        result.verdict = Verdict::Revoked;
        return result;
    }
    if (!tag_matches(*decoded, key->secret, claimed))
    {
        result.verdict = Verdict::InvalidSignature;
        return result;
    }
    if (now_ms >= decoded->expires_at_ms())
    {
        result.verdict = Verdict::Expired;
        return result;
    }
    result.verdict = Verdict::Valid;
    return result;
}

Verdict
diagnose_mismatch(const ValidationResult& result, const KeyLookup& lookup,
                  const CanonicalAddress& issued_for)
{
    if (result.verdict != Verdict::InvalidSignature || !result.token)
        return result.verdict;
    const KeyRecord* key = lookup(result.token->key_id);
    if (key != nullptr && tag_matches(*result.token, key->secret, issued_for))
        return Verdict::AddressMismatch;
    return result.verdict;
}

} // namespace oobt
