// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <sstream>

#include "oobt/analytic.hpp"
#include "oobt/sim.hpp"

#include "support.hpp"

using namespace oobt;

namespace {

ScenarioConfig
dos_scenario()
{
    ScenarioConfig config;
    config.rtt_ms = 90;
    config.t_proc_ms = 40;
    config.seed = 7;
    config.mechanism = Mechanism::DnsToken;

    ServerDef server;
    server.hostname = "b.example";
    server.address = CanonicalAddress::v4(203, 0, 113, 2);
    server.shared_keys.push_back(
        KeyShareDef{"resolver0", "0a000001", std::nullopt, 100});
    server.shared_keys.push_back(
        KeyShareDef{"resolver1", "0a000002", std::nullopt, 100});
    config.servers.push_back(std::move(server));

    for (int i = 0; i < 2; ++i)
    {
        ResolverDef resolver;
        resolver.name = "resolver" + std::to_string(i);
        resolver.address =
            CanonicalAddress::v4(203, 0, 113,
                                 static_cast<std::uint8_t>(53 + i));
        ZoneDef zone;
        zone.addresses = {CanonicalAddress::v4(203, 0, 113, 2)};
        zone.token_key_id_hex = i == 0 ? "0a000001" : "0a000002";
        resolver.zone.emplace("b.example", std::move(zone));
        config.resolvers.push_back(std::move(resolver));
    }

    for (int i = 0; i < 2; ++i)
    {
        ClientDef client;
        client.name = "client" + std::to_string(i);
        client.address =
            CanonicalAddress::v4(198, 51, 100,
                                 static_cast<std::uint8_t>(10 + i));
        client.resolver = "resolver" + std::to_string(i);
        config.clients.push_back(std::move(client));
    }

    for (std::uint64_t i = 0; i < 2; ++i)
    {
        ConnectionDef conn;
        conn.id = i + 1;
        conn.client = "client" + std::to_string(i);
        conn.server_hostname = "b.example";
        conn.start_at_ms = 3000; // after the attack has run its course
        config.connections.push_back(std::move(conn));
    }

    config.attack = AttackDef{"b.example", "0a000001", 101, 0, 0};
    return config;
}

} // namespace

TEST_CASE("simulated completion equals the analytic model exactly")
{
    const std::int64_t rtts[] = {0, 1, 30, 45, 90, 137, 300};
    const std::int64_t procs[] = {0, 40};

    for (std::int64_t t_proc : procs)
    {
        for (std::int64_t rtt : rtts)
        {
            auto baseline = run_scenario(
                single_connection_scenario(Mechanism::None, rtt, t_proc));
            REQUIRE(baseline.rows.size() == 1);
            CHECK(baseline.rows[0].completion_us ==
                  analytic_default_ms(rtt, t_proc) * 1000);
            CHECK(baseline.rows[0].round_trips == 2);
            CHECK(baseline.rows[0].retried);

            auto proposal = run_scenario(
                single_connection_scenario(Mechanism::DnsToken, rtt, t_proc));
            CHECK(proposal.rows[0].completion_us ==
                  analytic_proposal_ms(rtt, t_proc) * 1000);
            CHECK(proposal.rows[0].round_trips == 1);
            CHECK_FALSE(proposal.rows[0].retried);
            CHECK(proposal.rows[0].token_origin ==
                  TokenOriginUsed::OutOfBand);
        }
    }
}

TEST_CASE("DNS latency is reported separately, never in completion")
{
    auto report = run_scenario(
        single_connection_scenario(Mechanism::DnsToken, 90, 40));
    CHECK(report.rows[0].dns_us == 90 * 1000);
    CHECK(report.rows[0].completion_us == 130 * 1000);
    CHECK(report.rows[0].first_initial_verdict == Verdict::Valid);
}

TEST_CASE("equal seeds give byte-identical reports")
{
    auto config = chain_scenario(3, Mechanism::DnsToken, 90, 40, 42);
    auto first = run_scenario(config);
    auto second = run_scenario(config);

    CHECK(first.to_csv() == second.to_csv());
    REQUIRE(first.transcripts.size() == second.transcripts.size());
    for (std::size_t i = 0; i < first.transcripts.size(); ++i)
        CHECK(first.transcripts[i].serialize() ==
              second.transcripts[i].serialize());
    CHECK(first.page_establishment_us == second.page_establishment_us);
}

TEST_CASE("every message is delivered exactly once")
{
    auto report = run_scenario(chain_scenario(3, Mechanism::DnsToken, 90, 40));
    CHECK(report.messages_sent > 0);
    CHECK(report.messages_sent ==
          report.messages_delivered + report.messages_blackholed);
    CHECK(report.messages_blackholed == 0);

    // Within each transcript, send times never go backwards.
    for (const auto& transcript : report.transcripts)
    {
        std::int64_t previous = -1;
        for (const auto& entry : transcript.messages)
        {
            CHECK(entry.t_us >= previous);
            previous = entry.t_us;
        }
    }
}

TEST_CASE("chain of four saves exactly four round trips")
{
    CHECK(paired_chain_savings_us(4, 90, 40) == 360 * 1000);
    CHECK(paired_chain_savings_us(1, 90, 40) == 90 * 1000);
    CHECK(paired_chain_savings_us(4, 30, 0) == 120 * 1000);
}

TEST_CASE("page establishment time is the longest dependency path")
{
    // Diamond: 1 -> {2, 3} -> 4, uniform links, four distinct hostnames so
    // no NEW_TOKEN reuse shortens a revisit.
    auto config = chain_scenario(4, Mechanism::None, 90, 40);
    config.connections.clear();
    for (std::uint64_t id = 1; id <= 4; ++id)
    {
        ConnectionDef conn;
        conn.id = id;
        conn.client = "client0";
        conn.server_hostname = "s" + std::to_string(id - 1) + ".example";
        if (id == 2 || id == 3)
            conn.depends_on = {1};
        if (id == 4)
            conn.depends_on = {2, 3};
        config.connections.push_back(std::move(conn));
    }

    auto report = run_scenario(config);

    // Per connection: one DNS round trip plus the retry handshake. Each
    // dependency edge adds the round trip that brings the first response
    // data to the client.
    const std::int64_t per_conn = (90 + analytic_default_ms(90, 40)) * 1000;
    const std::int64_t edge_gap = 90 * 1000;
    const std::int64_t longest_path = 3 * per_conn + 2 * edge_gap;
    CHECK(report.page_establishment_us == longest_path);

    for (const auto& row : report.rows)
        CHECK(row.completion_us == analytic_default_ms(90, 40) * 1000);
}

TEST_CASE("NAT address mismatch costs exactly one retry")
{
    auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
    // The resolver sits behind the same NAT as the client and sees the
    // private address; the server sees the public one.
    config.clients[0].resolver_visible_address =
        CanonicalAddress::v4(10, 0, 0, 7);

    auto report = run_scenario(config);
    const ConnectionRow& row = report.rows.at(0);
    CHECK(row.retried);
    CHECK(row.round_trips == 2);
    CHECK(row.token_origin == TokenOriginUsed::OutOfBand);
    CHECK(row.completion_us == analytic_default_ms(90, 40) * 1000);
    // Only the simulator can prove the token was honest-but-elsewhere.
    CHECK(row.first_initial_verdict == Verdict::AddressMismatch);
}

TEST_CASE("resolver without token support degrades to plain stateless retry")
{
    auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
    config.resolvers[0].zone.at("s0.example").token_key_id_hex.reset();

    auto report = run_scenario(config);
    CHECK(report.rows[0].retried);
    CHECK(report.rows[0].completion_us == analytic_default_ms(90, 40) * 1000);
    CHECK(report.rows[0].token_origin == TokenOriginUsed::Retry);
}

TEST_CASE("NEW_TOKEN revisit completes in one round trip")
{
    auto report =
        run_scenario(chain_scenario(2, Mechanism::NewTokenRevisit, 90, 40));

    const ConnectionRow* first = report.row(1);
    const ConnectionRow* revisit = report.row(2);
    REQUIRE(first != nullptr);
    REQUIRE(revisit != nullptr);
    CHECK(first->round_trips == 2);
    CHECK(revisit->round_trips == 1);
    CHECK(revisit->token_origin == TokenOriginUsed::ServerIssued);
    CHECK(revisit->completion_us == analytic_proposal_ms(90, 40) * 1000);
}

TEST_CASE("EXTERNAL_TOKEN from the previous hop validates at the next")
{
    auto report =
        run_scenario(chain_scenario(2, Mechanism::ExternalToken, 90, 40));

    const ConnectionRow* first = report.row(1);
    const ConnectionRow* second = report.row(2);
    REQUIRE(first != nullptr);
    REQUIRE(second != nullptr);
    CHECK(first->round_trips == 2); // nothing to present on first contact
    CHECK(second->round_trips == 1);
    CHECK(second->token_origin == TokenOriginUsed::OutOfBand);
    CHECK(second->completion_us == analytic_proposal_ms(90, 40) * 1000);
}

TEST_CASE("EXTERNAL_TOKEN under a wrong key equals the no-token outcome")
{
    auto config = chain_scenario(2, Mechanism::ExternalToken, 90, 40);
    config.servers[0].external_token_targets[0].wrong_key = true;

    auto report = run_scenario(config);
    const ConnectionRow* second = report.row(2);
    REQUIRE(second != nullptr);
    CHECK(second->round_trips == 2);
    CHECK(second->token_origin == TokenOriginUsed::OutOfBand);
    CHECK(second->completion_us == analytic_default_ms(90, 40) * 1000);
    CHECK(second->first_initial_verdict == Verdict::UnknownKey);
}

TEST_CASE("compromised-key flood revokes that key and only that key")
{
    auto report = run_scenario(dos_scenario());

    REQUIRE(report.revocations.size() == 1);
    const RevocationRecord& revocation = report.revocations.front();
    CHECK(to_hex(revocation.event.key_id) == "0a000001");
    CHECK(revocation.event.owner_entity == "resolver0");
    CHECK(revocation.event.spoof_count == 101);
    CHECK(revocation.server_hostname == "b.example");

    // The legitimate client whose resolver still issues under the dead key
    // pays a retry; the other key's client is untouched.
    const ConnectionRow* hit = report.row(1);
    const ConnectionRow* unaffected = report.row(2);
    REQUIRE(hit != nullptr);
    REQUIRE(unaffected != nullptr);
    CHECK(hit->retried);
    CHECK(hit->round_trips == 2);
    CHECK(hit->first_initial_verdict == Verdict::Revoked);
    CHECK_FALSE(unaffected->retried);
    CHECK(unaffected->round_trips == 1);

    // 101 server flights went to spoofed addresses.
    CHECK(report.messages_blackholed == 101);
    CHECK(report.messages_sent ==
          report.messages_delivered + report.messages_blackholed);
}

TEST_CASE("an attack below the threshold revokes nothing")
{
    auto config = dos_scenario();
    config.attack->count = 100;
    auto report = run_scenario(config);
    CHECK(report.revocations.empty());
    CHECK_FALSE(report.row(1)->retried);
}

TEST_CASE("transcript of a token-validated connection")
{
    auto report = run_scenario(
        single_connection_scenario(Mechanism::DnsToken, 90, 40));
    const HandshakeTranscript* transcript = report.transcript(1);
    REQUIRE(transcript != nullptr);
    CHECK(transcript->shape() ==
          ">Initial,<ServerFlight,>ClientFin,<NewToken,<AppData rt=1");
    // DNS happens first, so the handshake starts at t = rtt.
    CHECK(transcript->serialize().substr(0, 4) == "t=90");
}

TEST_CASE("sweep reproduces the analytic table")
{
    std::vector<std::int64_t> rtts;
    for (std::int64_t rtt = 0; rtt <= 300; rtt += 30)
        rtts.push_back(rtt);

    auto rows = sweep(rtts, 40, {Mechanism::None, Mechanism::DnsToken});
    REQUIRE(rows.size() == 22);

    double previous_ratio = 2.0;
    for (const auto& row : rows)
    {
        CHECK(row.simulated_ms == row.analytic_ms);
        if (row.mechanism == Mechanism::DnsToken && row.rtt_ms > 0)
        {
            CHECK(row.ratio < previous_ratio);
            previous_ratio = row.ratio;
        }
        if (row.mechanism == Mechanism::DnsToken && row.rtt_ms == 90)
            CHECK(row.ratio == doctest::Approx(130.0 / 220.0).epsilon(1e-12));
    }

    CHECK_THROWS_AS(sweep({90}, 40, {Mechanism::ExternalToken}),
                    ScenarioError);
}

TEST_CASE("scenario validation rejects broken graphs and references")
{
    auto base = chain_scenario(2, Mechanism::None, 90, 40);

    SUBCASE("cycle")
    {
        auto config = base;
        config.connections[0].depends_on = {2};
        CHECK_THROWS_WITH_AS(run_scenario(config),
                             "scenario.connections: dependency graph has a "
                             "cycle",
                             ScenarioError);
    }
    SUBCASE("dangling server")
    {
        auto config = base;
        config.connections[1].server_hostname = "ghost.example";
        CHECK_THROWS_AS(run_scenario(config), ScenarioError);
    }
    SUBCASE("dangling dependency")
    {
        auto config = base;
        config.connections[1].depends_on = {99};
        CHECK_THROWS_AS(run_scenario(config), ScenarioError);
    }
    SUBCASE("unknown zone key reference")
    {
        auto config = base;
        config.resolvers[0].zone.at("s0.example").token_key_id_hex =
            "ffffffff";
        CHECK_THROWS_AS(run_scenario(config), ScenarioError);
    }
    SUBCASE("negative rtt")
    {
        auto config = base;
        config.rtt_ms = -1;
        CHECK_THROWS_AS(run_scenario(config), ScenarioError);
    }
    SUBCASE("duplicate connection id")
    {
        auto config = base;
        config.connections[1].id = config.connections[0].id;
        CHECK_THROWS_AS(run_scenario(config), ScenarioError);
    }
}

TEST_CASE("resolver clock skew shifts token expiry")
{
    SUBCASE("no skew: baseline single round trip")
    {
        auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
        CHECK(run_scenario(config).rows[0].round_trips == 1);
    }
    SUBCASE("a resolver running far behind hands out stale tokens")
    {
        // Connection starts 700 s in, lifetime 600 s, resolver 599.93 s
        // behind: the token expiry lands between the client's store check
        // (t=700090) and the server's validation (t=700135).
        auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
        config.token_lifetime_s = 600;
        config.connections[0].start_at_ms = 700000;
        config.resolvers[0].clock_skew_ms = -599930;

        auto report = run_scenario(config);
        const ConnectionRow& row = report.rows.at(0);
        CHECK(row.retried);
        CHECK(row.token_origin == TokenOriginUsed::OutOfBand);
        CHECK(row.first_initial_verdict == Verdict::Expired);
        CHECK(row.completion_us == analytic_default_ms(90, 40) * 1000);
    }
    SUBCASE("tokens already dead on arrival never leave the client")
    {
        auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
        config.token_lifetime_s = 600;
        config.connections[0].start_at_ms = 700000;
        config.resolvers[0].clock_skew_ms = -700000;

        auto report = run_scenario(config);
        const ConnectionRow& row = report.rows.at(0);
        CHECK(row.retried);
        // The cache dropped the stale token, so the Initial carried none.
        CHECK(row.token_origin == TokenOriginUsed::Retry);
        CHECK(!row.first_initial_verdict.has_value());
    }
    SUBCASE("a resolver running ahead is harmless")
    {
        auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
        config.resolvers[0].clock_skew_ms = 5000;
        auto report = run_scenario(config);
        CHECK(report.rows[0].round_trips == 1);
        CHECK(report.rows[0].first_initial_verdict == Verdict::Valid);
    }
}

TEST_CASE("loss and jitter hooks are rejected until modeled")
{
    auto config = single_connection_scenario(Mechanism::None, 90, 40);
    config.loss_rate = 0.01;
    CHECK_THROWS_AS(run_scenario(config), ScenarioError);

    config.loss_rate = 0.0;
    config.jitter_ms = 5;
    CHECK_THROWS_AS(run_scenario(config), ScenarioError);
}

TEST_CASE("per-link RTT overrides apply to the DNS leg independently")
{
    auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
    config.links.push_back(LinkDef{"client0", "resolver0", 10});

    auto report = run_scenario(config);
    CHECK(report.rows[0].dns_us == 10 * 1000);
    CHECK(report.rows[0].completion_us == 130 * 1000);
}

TEST_CASE("transcript timing skeleton of the token path")
{
    auto report = run_scenario(
        single_connection_scenario(Mechanism::DnsToken, 90, 40));
    const HandshakeTranscript* transcript = report.transcript(1);
    REQUIRE(transcript != nullptr);

    // Strip the token hex; times and kinds are fully determined.
    std::string skeleton;
    std::istringstream lines(transcript->serialize());
    std::string line;
    while (std::getline(lines, line))
        skeleton += line.substr(0, line.find(" token=")) + "\n";

    CHECK(skeleton == "t=90 dir=c2s kind=Initial\n"
                      "t=175 dir=s2c kind=ServerFlight\n"
                      "t=220 dir=c2s kind=ClientFin\n"
                      "t=265 dir=s2c kind=NewToken\n"
                      "t=265 dir=s2c kind=AppData\n");
}

TEST_CASE("failed resolution leaves the connection unestablished")
{
    auto config = single_connection_scenario(Mechanism::DnsToken, 90, 40);
    config.resolvers[0].zone.clear(); // resolver knows nothing

    auto report = run_scenario(config);
    const ConnectionRow& row = report.rows.at(0);
    CHECK(row.completion_us == -1);
    CHECK(row.round_trips == 0);
    CHECK(row.dns_us == 90 * 1000); // the lookup itself still happened
    CHECK(report.page_establishment_us == 0);

    std::string csv = report.to_csv();
    CHECK(csv.find("1,DnsToken,90,0,false,None,-,90\n") != std::string::npos);
}

TEST_CASE("sweep ratio is defined at the zero-delay degenerate point")
{
    auto rows = sweep({0}, 0, {Mechanism::None, Mechanism::DnsToken});
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows)
    {
        CHECK(row.simulated_ms == 0);
        CHECK(row.ratio == 1.0);
    }
}

TEST_CASE("CSV layout is stable")
{
    auto report = run_scenario(
        single_connection_scenario(Mechanism::DnsToken, 90, 40));
    CHECK(report.to_csv() ==
          "connection_id,mechanism,rtt_ms,round_trips,retried,token_origin,"
          "completion_ms,dns_ms\n"
          "1,DnsToken,90,1,false,OutOfBand,130,90\n");
}
