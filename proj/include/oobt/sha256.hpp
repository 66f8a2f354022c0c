// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <cstdint>

#include "oobt/bytes.hpp"

namespace oobt {

// FIPS 180-4 SHA-256. Incremental interface so HMAC can reuse a running
// context for the inner and outer hashes.
class Sha256
{
  public:
    static constexpr std::size_t kDigestSize = 32;
    static constexpr std::size_t kBlockSize = 64;

    using Digest = std::array<std::uint8_t, kDigestSize>;

    Sha256() { reset(); }

    void reset();
    void update(ByteView data);
    Digest finish();

    static Digest hash(ByteView data)
    {
        Sha256 ctx;
        ctx.update(data);
        return ctx.finish();
    }

  private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, kBlockSize> buffer_;
    std::size_t buffered_ = 0;
    std::uint64_t total_bytes_ = 0;
};

} // namespace oobt
