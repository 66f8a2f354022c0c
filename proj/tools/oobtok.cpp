// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oobt/analytic.hpp"
#include "oobt/key_registry.hpp"
#include "oobt/scenario_json.hpp"
#include "oobt/sim.hpp"
#include "oobt/token.hpp"

namespace {

using namespace oobt;

// Exit codes: 0 success, 1 semantic failure (non-Valid verdict),
// 2 usage or configuration error.
constexpr int kExitOk = 0;
constexpr int kExitSemantic = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::string
read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Key files use the registry secrets format: "key_id_hex secret_hex" per
// line. An optional records file restores owner/revocation state.
KeyRegistry
load_keys(const std::string& key_file, const std::string& records_file)
{
    std::string secrets = read_file(key_file);
    std::string records;
    if (!records_file.empty())
    {
        records = read_file(records_file);
    }
    else
    {
        std::istringstream in(secrets);
        std::ostringstream out;
        std::string id_hex, secret_hex;
        while (in >> id_hex >> secret_hex)
            out << id_hex << " cli 0 0\n";
        records = out.str();
    }
    try
    {
        KeyRegistry registry = KeyRegistry::import_registry(records, secrets);
        if (registry.size() == 0)
            throw UsageError("key file '" + key_file + "' holds no keys");
        return registry;
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
}

const KeyRecord&
pick_key(const KeyRegistry& registry, const std::string& key_id_hex)
{
    if (key_id_hex.empty())
        return registry.records().begin()->second;
    auto id_bytes = from_hex(key_id_hex);
    if (!id_bytes || id_bytes->size() != 4)
        throw UsageError("--key-id must be 8 hex digits");
    KeyId id;
    std::copy(id_bytes->begin(), id_bytes->end(), id.begin());
    const KeyRecord* record = registry.lookup(id);
    if (record == nullptr)
        throw UsageError("key " + key_id_hex + " not present in key file");
    return *record;
}

CanonicalAddress
parse_ip(const std::string& text)
{
    auto address = CanonicalAddress::parse(text);
    if (!address)
        throw UsageError("'" + text + "' is not an IPv4/IPv6 literal");
    return *address;
}

void
write_output(const std::string& path, const std::string& content)
{
    if (path.empty())
    {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw UsageError("cannot write file '" + path + "'");
    out << content;
}

// ---- token subcommands -----------------------------------------------

struct TokenIssueArgs
{
    std::string key_file;
    std::string records_file;
    std::string key_id_hex;
    std::string ip;
    std::uint64_t now_ms = 0;
    std::uint32_t lifetime_s = kDefaultTokenLifetimeS;
    std::string nonce_hex;
    std::uint64_t nonce_seed = 1;
};

int
cmd_token_issue(const TokenIssueArgs& args)
{
    KeyRegistry registry = load_keys(args.key_file, args.records_file);
    const KeyRecord& key = pick_key(registry, args.key_id_hex);
    CanonicalAddress client = parse_ip(args.ip);

    ValidationToken token;
    if (!args.nonce_hex.empty())
    {
        auto nonce_bytes = from_hex(args.nonce_hex);
        if (!nonce_bytes || nonce_bytes->size() != 12)
            throw UsageError("--nonce must be 24 hex digits");
        TokenNonce nonce;
        std::copy(nonce_bytes->begin(), nonce_bytes->end(), nonce.begin());
        token = issue_token_with_nonce(key, client, args.now_ms,
                                       args.lifetime_s, nonce);
    }
    else
    {
        DeterministicRng nonce_source(args.nonce_seed);
        token = issue_token(key, client, args.now_ms, args.lifetime_s,
                            nonce_source);
    }

    std::cout << to_hex(encode_token(token)) << "\n";
    return kExitOk;
}

int
cmd_token_inspect(const std::string& token_hex)
{
    auto bytes = from_hex(token_hex);
    if (!bytes)
        throw UsageError("--token-hex is not valid hex");
    auto token = decode_token(*bytes);
    if (!token)
    {
        std::cout << "Malformed\n";
        return kExitSemantic;
    }
    std::cout << token->debug_string() << "\n";
    return kExitOk;
}

struct TokenValidateArgs
{
    std::string key_file;
    std::string records_file;
    std::string ip;
    std::uint64_t now_ms = 0;
    std::string token_hex;
};

int
cmd_token_validate(const TokenValidateArgs& args)
{
    KeyRegistry registry = load_keys(args.key_file, args.records_file);
    auto bytes = from_hex(args.token_hex);
    if (!bytes)
        throw UsageError("--token-hex is not valid hex");

    auto result = validate_token(registry.lookup_fn(), *bytes,
                                 parse_ip(args.ip), args.now_ms);
    std::cout << to_string(result.verdict) << "\n";
    return result.ok() ? kExitOk : kExitSemantic;
}

// ---- sweep -------------------------------------------------------------

struct SweepArgs
{
    std::int64_t rtt_max = 300;
    std::int64_t rtt_step = 30;
    std::int64_t t_proc = 40;
    std::string out;
};

int
cmd_sweep(const SweepArgs& args)
{
    if (args.rtt_max < 0)
        throw UsageError("--rtt-max must be >= 0");
    if (args.rtt_step <= 0)
        throw UsageError("--rtt-step must be > 0");
    if (args.t_proc < 0)
        throw UsageError("--t-proc must be >= 0");

    std::vector<std::int64_t> rtts;
    for (std::int64_t rtt = 0; rtt <= args.rtt_max; rtt += args.rtt_step)
        rtts.push_back(rtt);

    auto rows = sweep(rtts, args.t_proc,
                      {Mechanism::None, Mechanism::DnsToken});
    write_output(args.out, sweep_to_csv(rows));

    for (const auto& row : rows)
    {
        if (row.rtt_ms == 90 && row.mechanism == Mechanism::DnsToken)
        {
            std::fprintf(stderr, "rtt=90: %.1f%%\n", row.ratio * 100.0);
            break;
        }
    }
    return kExitOk;
}

// ---- website --------------------------------------------------------------

struct WebsiteArgs
{
    std::string depth = "4.04";
    std::string connections;
    std::int64_t rtt = 90;
    std::int64_t t_proc = 40;
    bool simulate = false;
};

int
cmd_website(const WebsiteArgs& args)
{
    if (args.rtt < 0)
        throw UsageError("--rtt must be >= 0");

    std::int64_t depth_micro = 0;
    try
    {
        depth_micro = parse_decimal_micro(args.depth);
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(std::string("--depth: ") + e.what());
    }
    if (depth_micro <= 0)
        throw UsageError("--depth must be > 0");

    if (args.simulate)
    {
        if (depth_micro % 1000000 != 0)
            throw UsageError("--simulate needs an integer --depth; "
                             "fractional depths exist only in analytic "
                             "mode");
        int depth = static_cast<int>(depth_micro / 1000000);
        std::int64_t savings_us =
            paired_chain_savings_us(depth, args.rtt, args.t_proc);
        std::cout << "savings: " << format_micro(savings_us * 1000)
                  << " ms\n";
    }
    else
    {
        std::cout << "savings: "
                  << format_micro(website_savings_micro(depth_micro,
                                                        args.rtt))
                  << " ms\n";
    }

    if (!args.connections.empty())
    {
        std::int64_t connections_micro = 0;
        try
        {
            connections_micro = parse_decimal_micro(args.connections);
        }
        catch (const std::invalid_argument& e)
        {
            throw UsageError(std::string("--connections: ") + e.what());
        }
        if (connections_micro <= 0)
            throw UsageError("--connections must be > 0");
        std::cout << "total_across_connections: "
                  << format_micro(website_savings_micro(connections_micro,
                                                        args.rtt))
                  << " ms\n";
    }
    return kExitOk;
}

// ---- run ---------------------------------------------------------------

int
cmd_run(const std::string& scenario_path, const std::string& out_path)
{
    ScenarioConfig config = load_scenario_file(scenario_path);
    RunReport report = run_scenario(config);
    write_output(out_path, report.to_csv());

    for (const auto& revocation : report.revocations)
    {
        std::fprintf(stderr,
                     "revocation: key=%s owner=%s count=%llu at=%sms\n",
                     to_hex(revocation.event.key_id).c_str(),
                     revocation.event.owner_entity.c_str(),
                     static_cast<unsigned long long>(
                         revocation.event.spoof_count),
                     format_micro(revocation.at_us * 1000).c_str());
    }
    std::fprintf(stderr, "page_establishment_ms: %s\n",
                 format_micro(report.page_establishment_us * 1000).c_str());
    return kExitOk;
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Out-of-band address-validation tokens: issuance tools and "
                 "a deterministic handshake simulator"};
    app.require_subcommand(1);

    auto* token = app.add_subcommand("token", "Issue, inspect and validate "
                                              "tokens");
    token->require_subcommand(1);

    TokenIssueArgs issue_args;
    auto* issue = token->add_subcommand("issue", "Issue a token; prints hex");
    issue->add_option("--key-file", issue_args.key_file,
                      "key_id_hex secret_hex per line")
        ->required();
    issue->add_option("--records", issue_args.records_file,
                      "optional registry records file");
    issue->add_option("--key-id", issue_args.key_id_hex,
                      "key to use (default: first in file)");
    issue->add_option("--ip", issue_args.ip, "client address to bind")
        ->required();
    issue->add_option("--now", issue_args.now_ms, "issue time, clock ms");
    issue->add_option("--lifetime", issue_args.lifetime_s,
                      "token lifetime, seconds");
    issue->add_option("--nonce", issue_args.nonce_hex,
                      "fixed 24-hex-digit nonce");
    issue->add_option("--nonce-seed", issue_args.nonce_seed,
                      "seed for the nonce source");

    std::string inspect_hex;
    auto* inspect = token->add_subcommand("inspect",
                                          "Decode a token; prints fields");
    inspect->add_option("--token-hex", inspect_hex, "encoded token")
        ->required();

    TokenValidateArgs validate_args;
    auto* validate = token->add_subcommand(
        "validate", "Validate a token; exit 0 iff Valid");
    validate->add_option("--key-file", validate_args.key_file,
                         "key_id_hex secret_hex per line")
        ->required();
    validate->add_option("--records", validate_args.records_file,
                         "optional registry records file");
    validate->add_option("--ip", validate_args.ip, "claimed source address")
        ->required();
    validate->add_option("--now", validate_args.now_ms,
                         "validation time, clock ms");
    validate->add_option("--token-hex", validate_args.token_hex,
                         "encoded token")
        ->required();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Handshake delay over RTT, simulated and analytic, as CSV");
    sweep_cmd->add_option("--rtt-max", sweep_args.rtt_max, "last RTT, ms");
    sweep_cmd->add_option("--rtt-step", sweep_args.rtt_step, "RTT step, ms");
    sweep_cmd->add_option("--t-proc", sweep_args.t_proc,
                          "processing time, ms");
    sweep_cmd->add_option("--out", sweep_args.out,
                          "CSV path (default stdout)");

    WebsiteArgs website_args;
    auto* website = app.add_subcommand(
        "website", "Critical-path savings for a page load");
    website->add_option("--depth", website_args.depth,
                        "sequential connection depth (may be fractional)");
    website->add_option("--connections", website_args.connections,
                        "total connections, for the aggregate line");
    website->add_option("--rtt", website_args.rtt, "round-trip time, ms");
    website->add_option("--t-proc", website_args.t_proc,
                        "processing time, ms");
    website->add_flag("--simulate", website_args.simulate,
                      "run paired integer-depth chain simulations");

    std::string scenario_path, run_out;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario file; CSV "
                                              "report");
    run_cmd->add_option("--scenario", scenario_path, "scenario JSON path")
        ->required();
    run_cmd->add_option("--out", run_out, "CSV path (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help and friends
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try
    {
        if (issue->parsed())
            return cmd_token_issue(issue_args);
        if (inspect->parsed())
            return cmd_token_inspect(inspect_hex);
        if (validate->parsed())
            return cmd_token_validate(validate_args);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_args);
        if (website->parsed())
            return cmd_website(website_args);
        if (run_cmd->parsed())
            return cmd_run(scenario_path, run_out);
    }
    catch (const UsageError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const ScenarioError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
