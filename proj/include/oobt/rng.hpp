// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <span>

namespace oobt {

// Seedable generator (splitmix64) used for nonces, key material and any
// other randomness the library draws. Identical seeds give identical byte
// streams on every platform, which is what makes simulation runs and the
// test fixtures reproducible.
class DeterministicRng
{
  public:
    explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    void fill(std::span<std::uint8_t> out)
    {
        std::size_t i = 0;
        while (i < out.size())
        {
            std::uint64_t v = next_u64();
            for (int b = 0; b < 8 && i < out.size(); ++b, ++i)
            {
                out[i] = static_cast<std::uint8_t>(v >> (8 * b));
            }
        }
    }

  private:
    std::uint64_t state_;
};

} // namespace oobt
