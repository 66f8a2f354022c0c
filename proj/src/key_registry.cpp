// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/key_registry.hpp"

#include <sstream>
#include <stdexcept>

namespace oobt {

KeyRecord
KeyRegistry::register_key(const std::string& owner_entity,
                          DeterministicRng& key_source,
                          std::uint64_t spoof_threshold)
{
    KeyRecord record;
    record.owner_entity = owner_entity;
    record.spoof_threshold = spoof_threshold;
    key_source.fill(record.secret);

    do
    {
        key_source.fill(record.key_id);
    } while (records_.contains(record.key_id));

    records_.emplace(record.key_id, record);
    return record;
}

void
KeyRegistry::insert(KeyRecord record)
{
    auto [it, inserted] = records_.emplace(record.key_id, std::move(record));
    if (!inserted)
        throw std::invalid_argument("KeyRegistry: duplicate key_id " +
                                    to_hex(it->first));
}

const KeyRecord*
KeyRegistry::lookup(const KeyId& id) const
{
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

bool
KeyRegistry::revoke(const KeyId& id)
{
    auto it = records_.find(id);
    if (it == records_.end())
        return false;
    it->second.revoked = true;
    return true;
}

std::optional<RevocationEvent>
KeyRegistry::record_unrequited(const KeyId& id)
{
    auto it = records_.find(id);
    if (it == records_.end())
        throw std::out_of_range("record_unrequited: unknown key " +
                                to_hex(id));

    KeyRecord& record = it->second;
    if (record.revoked)
        return std::nullopt;

    ++record.spoof_count;
    if (record.spoof_count > record.spoof_threshold)
    {
        record.revoked = true;
        return RevocationEvent{record.key_id, record.owner_entity,
                               record.spoof_count};
    }
    return std::nullopt;
}

std::string
KeyRegistry::export_records() const
{
    std::ostringstream out;
    for (const auto& [id, record] : records_)
    {
        out << to_hex(id) << ' ' << record.owner_entity << ' '
            << (record.revoked ? 1 : 0) << ' ' << record.spoof_count << '\n';
    }
    return out.str();
}

std::string
KeyRegistry::export_secrets() const
{
    std::ostringstream out;
    for (const auto& [id, record] : records_)
    {
        out << to_hex(id) << ' ' << to_hex(record.secret) << '\n';
    }
    return out.str();
}

KeyRegistry
KeyRegistry::import_registry(const std::string& records_text,
                             const std::string& secrets_text)
{
    std::map<KeyId, SecretKey> secrets;
    {
        std::istringstream in(secrets_text);
        std::string id_hex, secret_hex;
        while (in >> id_hex >> secret_hex)
        {
            auto id_bytes = from_hex(id_hex);
            auto secret_bytes = from_hex(secret_hex);
            if (!id_bytes || id_bytes->size() != 4 || !secret_bytes ||
                secret_bytes->size() != 32)
                throw std::invalid_argument(
                    "KeyRegistry: bad secrets line for id " + id_hex);
            KeyId id;
            std::copy(id_bytes->begin(), id_bytes->end(), id.begin());
            SecretKey secret;
            std::copy(secret_bytes->begin(), secret_bytes->end(),
                      secret.begin());
            secrets.emplace(id, secret);
        }
    }

    KeyRegistry registry;
    std::istringstream in(records_text);
    std::string id_hex, owner;
    int revoked = 0;
    std::uint64_t spoof_count = 0;
    while (in >> id_hex >> owner >> revoked >> spoof_count)
    {
        auto id_bytes = from_hex(id_hex);
        if (!id_bytes || id_bytes->size() != 4)
            throw std::invalid_argument("KeyRegistry: bad key id " + id_hex);
        KeyRecord record;
        std::copy(id_bytes->begin(), id_bytes->end(), record.key_id.begin());
        auto secret = secrets.find(record.key_id);
        if (secret == secrets.end())
            throw std::invalid_argument("KeyRegistry: no secret for id " +
                                        id_hex);
        record.secret = secret->second;
        record.owner_entity = owner;
        record.revoked = revoked != 0;
        record.spoof_count = spoof_count;
        registry.insert(std::move(record));
    }
    return registry;
}

} // namespace oobt
