// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "oobt/rng.hpp"
#include "oobt/token.hpp"

namespace oobt {

constexpr std::uint64_t kDefaultSpoofThreshold = 100;

// One secret key shared with one external issuer. Revocation is permanent
// and scoped to this key; other keys in the same registry are unaffected.
struct KeyRecord
{
    KeyId key_id{};
    SecretKey secret{};
    std::string owner_entity;
    bool revoked = false;
    std::uint64_t spoof_count = 0;
    std::uint64_t spoof_threshold = kDefaultSpoofThreshold;
};

struct RevocationEvent
{
    KeyId key_id{};
    std::string owner_entity;
    std::uint64_t spoof_count = 0;
};

// The validating side's view of every key it accepts tokens under: its own
// local keys plus each key it has shared with an external issuer. Keys are
// never deleted, so a token under a dead key gets a definite Revoked
// verdict instead of UnknownKey.
class KeyRegistry
{
  public:
    // Draws a fresh non-colliding key_id and 32 secret bytes from
    // key_source. Returns a copy of the new record; the copy is what gets
    // handed to the external issuer.
    KeyRecord register_key(const std::string& owner_entity,
                           DeterministicRng& key_source,
                           std::uint64_t spoof_threshold =
                               kDefaultSpoofThreshold);

    // Imports an existing record (e.g. from a secrets file). Throws
    // std::invalid_argument on a duplicate key_id.
    void insert(KeyRecord record);

    const KeyRecord* lookup(const KeyId& id) const;

    // Returns false when the key is unknown. Revoking twice is a no-op.
    bool revoke(const KeyId& id);

    // Counts one validated-but-never-completed connection request against
    // the key. Crossing strictly above the threshold revokes the key and
    // reports the event, exactly once. No-op on an already revoked key.
    // Throws std::out_of_range when the key is unknown.
    // Counters never reset; a windowed or decaying variant would slot in
    // here if long-lived deployments need one.
    std::optional<RevocationEvent> record_unrequited(const KeyId& id);

    std::size_t size() const { return records_.size(); }

    const std::map<KeyId, KeyRecord>& records() const { return records_; }

    // Line-oriented interchange formats used for scenario setup.
    // Records:  key_id_hex owner revoked spoof_count
    // Secrets:  key_id_hex secret_hex
    std::string export_records() const;
    std::string export_secrets() const;
    static KeyRegistry import_registry(const std::string& records_text,
                                       const std::string& secrets_text);

    KeyLookup lookup_fn() const
    {
        return [this](const KeyId& id) { return lookup(id); };
    }

  private:
    std::map<KeyId, KeyRecord> records_;
};

} // namespace oobt
