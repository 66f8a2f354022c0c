// Copyright 2026 the oobtoken developers. Licensed under the Apache License,
// Version 2.0. See the COPYING file at the root of this distribution or at
// http://www.apache.org/licenses/LICENSE-2.0

#include "oobt/scenario_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace oobt {

namespace {

using nlohmann::json;

[[noreturn]] void
fail(const std::string& path, const std::string& message)
{
    throw ScenarioError(path + ": " + message);
}

const json&
require_object(const json& value, const std::string& path)
{
    if (!value.is_object())
        fail(path, "expected an object");
    return value;
}

const json&
require_array(const json& value, const std::string& path)
{
    if (!value.is_array())
        fail(path, "expected an array");
    return value;
}

std::string
require_string(const json& value, const std::string& path)
{
    if (!value.is_string())
        fail(path, "expected a string");
    return value.get<std::string>();
}

std::int64_t
require_int(const json& value, const std::string& path)
{
    if (!value.is_number_integer())
        fail(path, "expected an integer");
    return value.get<std::int64_t>();
}

bool
require_bool(const json& value, const std::string& path)
{
    if (!value.is_boolean())
        fail(path, "expected a boolean");
    return value.get<bool>();
}

CanonicalAddress
require_address(const json& value, const std::string& path)
{
    auto parsed = CanonicalAddress::parse(require_string(value, path));
    if (!parsed)
        fail(path, "expected an IPv4/IPv6 literal");
    return *parsed;
}

void
reject_unknown_fields(const json& object, const std::string& path,
                      std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : object.items())
    {
        bool ok = false;
        for (const char* name : known)
            if (key == name)
                ok = true;
        if (!ok)
            fail(path + "." + key, "unknown field");
    }
}

ServerDef
parse_server(const json& value, const std::string& path)
{
    require_object(value, path);
    reject_unknown_fields(value, path,
                          {"hostname", "address", "strict_validation",
                           "issue_new_token", "shared_keys",
                           "external_token_targets"});

    ServerDef server;
    if (!value.contains("hostname"))
        fail(path + ".hostname", "required");
    server.hostname = require_string(value["hostname"], path + ".hostname");
    if (!value.contains("address"))
        fail(path + ".address", "required");
    server.address = require_address(value["address"], path + ".address");
    if (value.contains("strict_validation"))
        server.strict_validation = require_bool(
            value["strict_validation"], path + ".strict_validation");
    if (value.contains("issue_new_token"))
        server.issue_new_token =
            require_bool(value["issue_new_token"], path + ".issue_new_token");

    if (value.contains("shared_keys"))
    {
        const json& keys = require_array(value["shared_keys"],
                                         path + ".shared_keys");
        for (std::size_t i = 0; i < keys.size(); ++i)
        {
            std::string kpath =
                path + ".shared_keys[" + std::to_string(i) + "]";
            require_object(keys[i], kpath);
            reject_unknown_fields(keys[i], kpath,
                                  {"owner", "key_id", "secret",
                                   "spoof_threshold"});
            KeyShareDef share;
            if (!keys[i].contains("owner"))
                fail(kpath + ".owner", "required");
            share.owner = require_string(keys[i]["owner"], kpath + ".owner");
            if (!keys[i].contains("key_id"))
                fail(kpath + ".key_id", "required");
            share.key_id_hex =
                require_string(keys[i]["key_id"], kpath + ".key_id");
            if (keys[i].contains("secret"))
                share.secret_hex =
                    require_string(keys[i]["secret"], kpath + ".secret");
            if (keys[i].contains("spoof_threshold"))
            {
                std::int64_t threshold = require_int(
                    keys[i]["spoof_threshold"], kpath + ".spoof_threshold");
                if (threshold < 0)
                    fail(kpath + ".spoof_threshold", "must be >= 0");
                share.spoof_threshold =
                    static_cast<std::uint64_t>(threshold);
            }
            server.shared_keys.push_back(std::move(share));
        }
    }

    if (value.contains("external_token_targets"))
    {
        const json& targets = require_array(
            value["external_token_targets"],
            path + ".external_token_targets");
        for (std::size_t i = 0; i < targets.size(); ++i)
        {
            std::string tpath = path + ".external_token_targets[" +
                                std::to_string(i) + "]";
            ExternalTargetDef target;
            if (targets[i].is_string())
            {
                target.target = targets[i].get<std::string>();
            }
            else
            {
                require_object(targets[i], tpath);
                reject_unknown_fields(targets[i], tpath,
                                      {"target", "wrong_key"});
                if (!targets[i].contains("target"))
                    fail(tpath + ".target", "required");
                target.target = require_string(targets[i]["target"],
                                               tpath + ".target");
                if (targets[i].contains("wrong_key"))
                    target.wrong_key = require_bool(targets[i]["wrong_key"],
                                                    tpath + ".wrong_key");
            }
            server.external_token_targets.push_back(std::move(target));
        }
    }

    return server;
}

ResolverDef
parse_resolver(const json& value, const std::string& path)
{
    require_object(value, path);
    reject_unknown_fields(value, path,
                          {"name", "address", "zone", "clock_skew_ms"});

    ResolverDef resolver;
    if (!value.contains("name"))
        fail(path + ".name", "required");
    resolver.name = require_string(value["name"], path + ".name");
    if (!value.contains("address"))
        fail(path + ".address", "required");
    resolver.address = require_address(value["address"], path + ".address");
    if (value.contains("clock_skew_ms"))
        resolver.clock_skew_ms =
            require_int(value["clock_skew_ms"], path + ".clock_skew_ms");

    if (value.contains("zone"))
    {
        const json& zone = require_object(value["zone"], path + ".zone");
        for (const auto& [hostname, entry] : zone.items())
        {
            std::string zpath = path + ".zone['" + hostname + "']";
            require_object(entry, zpath);
            reject_unknown_fields(entry, zpath,
                                  {"addresses", "ttl", "token_key_id"});
            ZoneDef def;
            if (!entry.contains("addresses"))
                fail(zpath + ".addresses", "required");
            const json& addrs =
                require_array(entry["addresses"], zpath + ".addresses");
            for (std::size_t i = 0; i < addrs.size(); ++i)
                def.addresses.push_back(require_address(
                    addrs[i],
                    zpath + ".addresses[" + std::to_string(i) + "]"));
            if (entry.contains("ttl"))
            {
                std::int64_t ttl = require_int(entry["ttl"], zpath + ".ttl");
                if (ttl < 0)
                    fail(zpath + ".ttl", "must be >= 0");
                def.ttl_seconds = static_cast<std::uint32_t>(ttl);
            }
            if (entry.contains("token_key_id"))
                def.token_key_id_hex = require_string(
                    entry["token_key_id"], zpath + ".token_key_id");
            resolver.zone.emplace(hostname, std::move(def));
        }
    }

    return resolver;
}

ClientDef
parse_client(const json& value, const std::string& path)
{
    require_object(value, path);
    reject_unknown_fields(value, path,
                          {"name", "address", "resolver_visible_address",
                           "resolver"});

    ClientDef client;
    if (!value.contains("name"))
        fail(path + ".name", "required");
    client.name = require_string(value["name"], path + ".name");
    if (!value.contains("address"))
        fail(path + ".address", "required");
    client.address = require_address(value["address"], path + ".address");
    if (value.contains("resolver_visible_address"))
        client.resolver_visible_address =
            require_address(value["resolver_visible_address"],
                            path + ".resolver_visible_address");
    if (value.contains("resolver"))
        client.resolver =
            require_string(value["resolver"], path + ".resolver");
    return client;
}

ConnectionDef
parse_connection(const json& value, const std::string& path)
{
    require_object(value, path);
    reject_unknown_fields(value, path,
                          {"id", "client", "server", "depends_on",
                           "start_at_ms"});

    ConnectionDef conn;
    if (!value.contains("id"))
        fail(path + ".id", "required");
    std::int64_t id = require_int(value["id"], path + ".id");
    if (id <= 0)
        fail(path + ".id", "must be positive");
    conn.id = static_cast<std::uint64_t>(id);
    if (!value.contains("client"))
        fail(path + ".client", "required");
    conn.client = require_string(value["client"], path + ".client");
    if (!value.contains("server"))
        fail(path + ".server", "required");
    conn.server_hostname = require_string(value["server"], path + ".server");
    if (value.contains("depends_on"))
    {
        const json& deps =
            require_array(value["depends_on"], path + ".depends_on");
        for (std::size_t i = 0; i < deps.size(); ++i)
        {
            std::int64_t dep = require_int(
                deps[i], path + ".depends_on[" + std::to_string(i) + "]");
            conn.depends_on.push_back(static_cast<std::uint64_t>(dep));
        }
    }
    if (value.contains("start_at_ms"))
        conn.start_at_ms =
            require_int(value["start_at_ms"], path + ".start_at_ms");
    return conn;
}

} // namespace

ScenarioConfig
load_scenario_json(const std::string& json_text)
{
    json root;
    try
    {
        root = json::parse(json_text);
    }
    catch (const json::parse_error& e)
    {
        throw ScenarioError(std::string("scenario: JSON parse error: ") +
                            e.what());
    }

    require_object(root, "scenario");
    reject_unknown_fields(root, "scenario",
                          {"rtt_ms", "t_proc_ms", "seed", "mechanism",
                           "validation_timeout_rtts", "token_lifetime_s",
                           "loss_rate", "jitter_ms", "servers", "resolvers",
                           "clients", "connections", "attack", "links"});

    ScenarioConfig config;
    if (root.contains("rtt_ms"))
        config.rtt_ms = require_int(root["rtt_ms"], "scenario.rtt_ms");
    if (root.contains("t_proc_ms"))
        config.t_proc_ms =
            require_int(root["t_proc_ms"], "scenario.t_proc_ms");
    if (root.contains("seed"))
        config.seed = static_cast<std::uint64_t>(
            require_int(root["seed"], "scenario.seed"));
    if (root.contains("mechanism"))
    {
        std::string text =
            require_string(root["mechanism"], "scenario.mechanism");
        auto mechanism = mechanism_from_string(text);
        if (!mechanism)
            fail("scenario.mechanism",
                 "expected one of none, dns_token, external_token, "
                 "new_token_revisit");
        config.mechanism = *mechanism;
    }
    if (root.contains("validation_timeout_rtts"))
        config.validation_timeout_rtts =
            require_int(root["validation_timeout_rtts"],
                        "scenario.validation_timeout_rtts");
    if (root.contains("token_lifetime_s"))
    {
        std::int64_t lifetime = require_int(root["token_lifetime_s"],
                                            "scenario.token_lifetime_s");
        if (lifetime < 0)
            fail("scenario.token_lifetime_s", "must be >= 0");
        config.token_lifetime_s = static_cast<std::uint32_t>(lifetime);
    }
    if (root.contains("loss_rate"))
    {
        if (!root["loss_rate"].is_number())
            fail("scenario.loss_rate", "expected a number");
        config.loss_rate = root["loss_rate"].get<double>();
    }
    if (root.contains("jitter_ms"))
        config.jitter_ms =
            require_int(root["jitter_ms"], "scenario.jitter_ms");

    if (root.contains("servers"))
    {
        const json& servers =
            require_array(root["servers"], "scenario.servers");
        for (std::size_t i = 0; i < servers.size(); ++i)
            config.servers.push_back(parse_server(
                servers[i], "scenario.servers[" + std::to_string(i) + "]"));
    }
    if (root.contains("resolvers"))
    {
        const json& resolvers =
            require_array(root["resolvers"], "scenario.resolvers");
        for (std::size_t i = 0; i < resolvers.size(); ++i)
            config.resolvers.push_back(
                parse_resolver(resolvers[i], "scenario.resolvers[" +
                                                 std::to_string(i) + "]"));
    }
    if (root.contains("clients"))
    {
        const json& clients =
            require_array(root["clients"], "scenario.clients");
        for (std::size_t i = 0; i < clients.size(); ++i)
            config.clients.push_back(parse_client(
                clients[i], "scenario.clients[" + std::to_string(i) + "]"));
    }
    if (root.contains("connections"))
    {
        const json& connections =
            require_array(root["connections"], "scenario.connections");
        for (std::size_t i = 0; i < connections.size(); ++i)
            config.connections.push_back(
                parse_connection(connections[i],
                                 "scenario.connections[" +
                                     std::to_string(i) + "]"));
    }
    if (root.contains("attack"))
    {
        const json& attack = require_object(root["attack"], "scenario.attack");
        reject_unknown_fields(attack, "scenario.attack",
                              {"target", "key_id", "count", "start_at_ms",
                               "interval_ms"});
        AttackDef def;
        if (!attack.contains("target"))
            fail("scenario.attack.target", "required");
        def.target_hostname =
            require_string(attack["target"], "scenario.attack.target");
        if (!attack.contains("key_id"))
            fail("scenario.attack.key_id", "required");
        def.key_id_hex =
            require_string(attack["key_id"], "scenario.attack.key_id");
        if (attack.contains("count"))
            def.count = static_cast<int>(
                require_int(attack["count"], "scenario.attack.count"));
        if (attack.contains("start_at_ms"))
            def.start_at_ms = require_int(attack["start_at_ms"],
                                          "scenario.attack.start_at_ms");
        if (attack.contains("interval_ms"))
            def.interval_ms = require_int(attack["interval_ms"],
                                          "scenario.attack.interval_ms");
        config.attack = std::move(def);
    }
    if (root.contains("links"))
    {
        const json& links = require_array(root["links"], "scenario.links");
        for (std::size_t i = 0; i < links.size(); ++i)
        {
            std::string lpath = "scenario.links[" + std::to_string(i) + "]";
            require_object(links[i], lpath);
            reject_unknown_fields(links[i], lpath, {"a", "b", "rtt_ms"});
            LinkDef link;
            if (!links[i].contains("a") || !links[i].contains("b") ||
                !links[i].contains("rtt_ms"))
                fail(lpath, "requires a, b and rtt_ms");
            link.a = require_string(links[i]["a"], lpath + ".a");
            link.b = require_string(links[i]["b"], lpath + ".b");
            link.rtt_ms = require_int(links[i]["rtt_ms"], lpath + ".rtt_ms");
            config.links.push_back(std::move(link));
        }
    }

    config.validate();
    return config;
}

ScenarioConfig
load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("scenario: cannot open file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_scenario_json(buffer.str());
}

} // namespace oobt
