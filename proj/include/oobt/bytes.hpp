// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oobt {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string to_hex(ByteView data);
std::optional<Bytes> from_hex(std::string_view hex);

// Big-endian integer packing used by all wire formats in this project.
void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
std::uint32_t get_u32_be(ByteView in, std::size_t offset);
std::uint64_t get_u64_be(ByteView in, std::size_t offset);

} // namespace oobt
