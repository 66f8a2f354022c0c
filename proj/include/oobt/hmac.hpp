// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "oobt/bytes.hpp"
#include "oobt/sha256.hpp"

namespace oobt {

// RFC 2104 HMAC over SHA-256.
Sha256::Digest hmac_sha256(ByteView key, ByteView message);

} // namespace oobt
