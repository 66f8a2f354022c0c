// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace oobt {

// Closed-form handshake delay overhead, exact integer arithmetic. The
// default path pays one round trip for the stateless retry and one for the
// cryptographic exchange; a validated token removes the retry round trip.
//   default:  t_proc + 2 * RTT
//   proposal: t_proc + RTT
std::int64_t analytic_default_ms(std::int64_t rtt_ms, std::int64_t t_proc_ms);
std::int64_t analytic_proposal_ms(std::int64_t rtt_ms,
                                  std::int64_t t_proc_ms);

// Fixed-point decimals in millionths, so quantities like a fractional
// connection-chain depth multiply without float drift.
// parse_decimal_micro("4.04") == 4040000; throws std::invalid_argument on
// anything that is not a plain decimal with at most six fraction digits.
std::int64_t parse_decimal_micro(std::string_view text);
std::string format_micro(std::int64_t micro);

// Critical-path saving for a page whose retrieval needs `depth`
// sequentially dependent connections, each saving one round trip:
// depth * rtt, in micro-ms.
std::int64_t website_savings_micro(std::int64_t depth_micro,
                                   std::int64_t rtt_ms);

} // namespace oobt
