// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/hmac.hpp"

namespace oobt {

Sha256::Digest
hmac_sha256(ByteView key, ByteView message)
{
    std::array<std::uint8_t, Sha256::kBlockSize> padded_key{};

    if (key.size() > Sha256::kBlockSize)
    {
        auto digest = Sha256::hash(key);
        std::copy(digest.begin(), digest.end(), padded_key.begin());
    }
    else
    {
        std::copy(key.begin(), key.end(), padded_key.begin());
    }

    std::array<std::uint8_t, Sha256::kBlockSize> ipad;
    std::array<std::uint8_t, Sha256::kBlockSize> opad;
    for (std::size_t i = 0; i < Sha256::kBlockSize; ++i)
    {
        ipad[i] = padded_key[i] ^ 0x36;
        opad[i] = padded_key[i] ^ 0x5c;
    }

    Sha256 inner;
    inner.update(ipad);
    inner.update(message);
    auto inner_digest = inner.finish();

    Sha256 outer;
    outer.update(opad);
    outer.update(inner_digest);
    return outer.finish();
}

} // namespace oobt
