#include "squelchsim/config.hpp"

#include <doctest.h>

using namespace squelchsim;
using nlohmann::json;

TEST_SUITE("config") {

TEST_CASE("defaults survive a JSON round trip") {
    ScenarioConfig cfg;
    cfg.tx_plan.push_back({1000.0, {1, 2}, 50, 25.0});
    cfg.disconnects.push_back({5000.0, 0, 3});
    cfg.topology.seed = 77;
    auto back = scenario_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("every field is read") {
    json doc = {
        {"topology", {{"node_count", 20}, {"avg_degree", 4.5}, {"validator_fraction", 0.25}, {"seed", 3}}},
        {"scenario",
         {{"duration_ms", 50000},
          {"relay_policy", "squelch"},
          {"ledger_round_ms", 2000},
          {"proposals_per_round", 2},
          {"validations_per_round", 0},
          {"seed", 9},
          {"size_control", 40},
          {"tx_plan", {{{"start_ms", 100}, {"nodes", {1, 2}}, {"count", 10}, {"rate_per_s", 5}}}},
          {"disconnects", {{{"at_ms", 10}, {"a", 1}, {"b", 2}}}}}},
        {"protocol", {{"count_threshold", 4}, {"max_selected", 2}, {"squelch_kinds", {"validation"}}}},
        {"metrics", {{"warmup_ms", 2000}, {"include_control", false}}},
        {"output", {{"dir", "out"}}},
    };
    auto loaded = load_config(doc);
    const auto& s = loaded.scenario;
    CHECK(s.topology.generator.node_count == 20);
    CHECK(s.topology.generator.target_avg_degree == 4.5);
    CHECK(s.topology.seed == 3);
    CHECK(s.relay_policy == RelayPolicy::Squelch);
    CHECK(s.ledger_round_ms == 2000.0);
    CHECK(s.proposals_per_round == 2);
    CHECK(s.validations_per_round == 0);
    CHECK(s.seed == 9);
    CHECK(s.sizes.control == 40);
    REQUIRE(s.tx_plan.size() == 1);
    CHECK(s.tx_plan[0].nodes == std::vector<NodeId>{1, 2});
    REQUIRE(s.disconnects.size() == 1);
    CHECK(s.disconnects[0].b == 2);
    CHECK(s.protocol.count_threshold == 4);
    CHECK(s.protocol.squelch_kinds == KindSet{MessageKind::Validation});
    CHECK(s.warmup_ms == 2000.0);
    CHECK_FALSE(s.include_control_in_total);
    CHECK(loaded.output_dir == "out");
}

TEST_CASE("unknown keys are named in the error") {
    auto message = [](const json& doc) {
        try {
            load_config(doc);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message({{"scenario", {{"spelch", 1}}}}).find("spelch") != std::string::npos);
    CHECK(message({{"spelch", {{"x", 1}}}}).find("spelch") != std::string::npos);
    CHECK(message({{"scenario", {{"relay_policy", "gossip"}}}}).find("gossip") != std::string::npos);
    CHECK(message({{"scenario", {{"duration_ms", "long"}}}}).find("duration_ms") != std::string::npos);
}

TEST_CASE("overrides") {
    json doc = {{"scenario", {{"seed", 1}}}};
    apply_override(doc, "scenario.seed=5");
    apply_override(doc, "scenario.relay_policy=squelch");
    apply_override(doc, "protocol.squelch_kinds=[\"proposal\"]");
    CHECK(doc["scenario"]["seed"] == 5);
    CHECK(doc["scenario"]["relay_policy"] == "squelch");
    auto s = scenario_from_json(doc);
    CHECK(s.protocol.squelch_kinds == KindSet{MessageKind::Proposal});
    CHECK_THROWS_AS(apply_override(doc, "seed=5"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "scenario.seed"), ConfigError);
}

TEST_CASE("the hash follows the scenario and ignores the output section") {
    json doc = {{"scenario", {{"seed", 1}}}};
    auto a = load_config(doc);
    auto b = load_config(doc, {"output.dir=/tmp/x"});
    auto c = load_config(doc, {"scenario.seed=2"});
    CHECK(a.config_hash == b.config_hash);
    CHECK(a.config_hash != c.config_hash);
    CHECK(a.config_hash.size() == 64);
}

TEST_CASE("SHA-256 test vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

}  // TEST_SUITE
