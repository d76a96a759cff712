#include "squelchsim/config.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace squelchsim {

using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"topology",
         {"edge_list", "validators", "default_latency_ms", "node_count", "avg_degree", "validator_fraction",
          "latency_min_ms", "latency_max_ms", "seed"}},
        {"scenario",
         {"duration_ms", "relay_policy", "ledger_round_ms", "proposals_per_round", "validations_per_round", "tx_plan",
          "seed", "size_transaction", "size_proposal", "size_validation", "size_control", "disconnects"}},
        {"protocol", {"count_threshold", "max_selected", "squelch_base_ms", "squelch_jitter_ms", "squelch_kinds"}},
        {"metrics", {"warmup_ms", "include_control"}},
        {"output", {"dir"}},
    };
    return keys;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
    }
}

json kinds_to_json(KindSet kinds) {
    json arr = json::array();
    for (int k = 0; k < kMessageKindCount; ++k) {
        if (kinds.contains(static_cast<MessageKind>(k))) arr.push_back(to_string(static_cast<MessageKind>(k)));
    }
    return arr;
}

}  // namespace

json to_json(const ScenarioConfig& cfg) {
    json topo = {
        {"edge_list", cfg.topology.edge_list_path},
        {"validators", cfg.topology.validators},
        {"default_latency_ms", cfg.topology.default_latency_ms},
        {"node_count", cfg.topology.generator.node_count},
        {"avg_degree", cfg.topology.generator.target_avg_degree},
        {"validator_fraction", cfg.topology.generator.validator_fraction},
        {"latency_min_ms", cfg.topology.generator.latency_low_ms},
        {"latency_max_ms", cfg.topology.generator.latency_high_ms},
    };
    topo["seed"] = cfg.topology.seed ? json(*cfg.topology.seed) : json(nullptr);

    json plan = json::array();
    for (const auto& b : cfg.tx_plan) {
        plan.push_back({{"start_ms", b.start_ms}, {"nodes", b.nodes}, {"count", b.count}, {"rate_per_s", b.rate_per_s}});
    }
    json disc = json::array();
    for (const auto& d : cfg.disconnects) disc.push_back({{"at_ms", d.at_ms}, {"a", d.a}, {"b", d.b}});

    return {
        {"topology", topo},
        {"scenario",
         {
             {"duration_ms", cfg.duration_ms},
             {"relay_policy", to_string(cfg.relay_policy)},
             {"ledger_round_ms", cfg.ledger_round_ms},
             {"proposals_per_round", cfg.proposals_per_round},
             {"validations_per_round", cfg.validations_per_round},
             {"tx_plan", plan},
             {"seed", cfg.seed},
             {"size_transaction", cfg.sizes.transaction},
             {"size_proposal", cfg.sizes.proposal},
             {"size_validation", cfg.sizes.validation},
             {"size_control", cfg.sizes.control},
             {"disconnects", disc},
         }},
        {"protocol",
         {
             {"count_threshold", cfg.protocol.count_threshold},
             {"max_selected", cfg.protocol.max_selected},
             {"squelch_base_ms", cfg.protocol.squelch_base_ms},
             {"squelch_jitter_ms", cfg.protocol.squelch_jitter_ms},
             {"squelch_kinds", kinds_to_json(cfg.protocol.squelch_kinds)},
         }},
        {"metrics", {{"warmup_ms", cfg.warmup_ms}, {"include_control", cfg.include_control_in_total}}},
    };
}

ScenarioConfig scenario_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
        check_keys(value, known_keys().at(key), key);
    }
    ScenarioConfig cfg;
    const json empty = json::object();
    auto section = [&](const char* name) -> const json& {
        auto it = doc.find(name);
        return it == doc.end() ? empty : *it;
    };

    const auto& topo = section("topology");
    read(topo, "edge_list", cfg.topology.edge_list_path, "topology");
    read(topo, "validators", cfg.topology.validators, "topology");
    read(topo, "default_latency_ms", cfg.topology.default_latency_ms, "topology");
    read(topo, "node_count", cfg.topology.generator.node_count, "topology");
    read(topo, "avg_degree", cfg.topology.generator.target_avg_degree, "topology");
    read(topo, "validator_fraction", cfg.topology.generator.validator_fraction, "topology");
    read(topo, "latency_min_ms", cfg.topology.generator.latency_low_ms, "topology");
    read(topo, "latency_max_ms", cfg.topology.generator.latency_high_ms, "topology");
    if (auto it = topo.find("seed"); it != topo.end() && !it->is_null()) {
        std::uint64_t s = 0;
        read(topo, "seed", s, "topology");
        cfg.topology.seed = s;
    }

    const auto& sc = section("scenario");
    read(sc, "duration_ms", cfg.duration_ms, "scenario");
    if (auto it = sc.find("relay_policy"); it != sc.end()) {
        std::string p;
        read(sc, "relay_policy", p, "scenario");
        try {
            cfg.relay_policy = relay_policy_from_string(p);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("scenario.relay_policy: ") + e.what());
        }
    }
    read(sc, "ledger_round_ms", cfg.ledger_round_ms, "scenario");
    read(sc, "proposals_per_round", cfg.proposals_per_round, "scenario");
    read(sc, "validations_per_round", cfg.validations_per_round, "scenario");
    read(sc, "seed", cfg.seed, "scenario");
    read(sc, "size_transaction", cfg.sizes.transaction, "scenario");
    read(sc, "size_proposal", cfg.sizes.proposal, "scenario");
    read(sc, "size_validation", cfg.sizes.validation, "scenario");
    read(sc, "size_control", cfg.sizes.control, "scenario");
    if (auto it = sc.find("tx_plan"); it != sc.end()) {
        if (!it->is_array()) throw ConfigError("'scenario.tx_plan' must be an array");
        for (const auto& item : *it) {
            check_keys(item, {"start_ms", "nodes", "count", "rate_per_s"}, "scenario.tx_plan[]");
            TxBurst b;
            read(item, "start_ms", b.start_ms, "scenario.tx_plan[]");
            read(item, "nodes", b.nodes, "scenario.tx_plan[]");
            read(item, "count", b.count, "scenario.tx_plan[]");
            read(item, "rate_per_s", b.rate_per_s, "scenario.tx_plan[]");
            cfg.tx_plan.push_back(std::move(b));
        }
    }
    if (auto it = sc.find("disconnects"); it != sc.end()) {
        if (!it->is_array()) throw ConfigError("'scenario.disconnects' must be an array");
        for (const auto& item : *it) {
            check_keys(item, {"at_ms", "a", "b"}, "scenario.disconnects[]");
            Disconnect d;
            read(item, "at_ms", d.at_ms, "scenario.disconnects[]");
            read(item, "a", d.a, "scenario.disconnects[]");
            read(item, "b", d.b, "scenario.disconnects[]");
            cfg.disconnects.push_back(d);
        }
    }

    const auto& pr = section("protocol");
    read(pr, "count_threshold", cfg.protocol.count_threshold, "protocol");
    read(pr, "max_selected", cfg.protocol.max_selected, "protocol");
    read(pr, "squelch_base_ms", cfg.protocol.squelch_base_ms, "protocol");
    read(pr, "squelch_jitter_ms", cfg.protocol.squelch_jitter_ms, "protocol");
    if (auto it = pr.find("squelch_kinds"); it != pr.end()) {
        std::vector<std::string> names;
        read(pr, "squelch_kinds", names, "protocol");
        KindSet kinds;
        for (const auto& n : names) {
            MessageKind k;
            try {
                k = message_kind_from_string(n);
            } catch (const ParameterError& e) {
                throw ConfigError(std::string("protocol.squelch_kinds: ") + e.what());
            }
            if (!is_application(k)) throw ConfigError("protocol.squelch_kinds: '" + n + "' is not an application kind");
            kinds.bits |= static_cast<std::uint8_t>(1u << static_cast<int>(k));
        }
        cfg.protocol.squelch_kinds = kinds;
    }

    const auto& me = section("metrics");
    read(me, "warmup_ms", cfg.warmup_ms, "metrics");
    read(me, "include_control", cfg.include_control_in_total, "metrics");

    try {
        validate(cfg);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
        throw ConfigError("override must look like section.key=value, got '" + std::string(assignment) + "'");
    }
    const std::string section(assignment.substr(0, dot));
    const std::string key(assignment.substr(dot + 1, eq - dot - 1));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    if (!doc.is_object()) doc = json::object();
    doc[section][key] = std::move(value);
}

LoadedConfig load_config(const json& doc, const std::vector<std::string>& overrides) {
    json d = doc;
    for (const auto& o : overrides) apply_override(d, o);
    LoadedConfig out;
    out.scenario = scenario_from_json(d);
    if (auto it = d.find("output"); it != d.end()) read(*it, "dir", out.output_dir, "output");
    out.config_hash = config_hash(out.scenario);
    return out;
}

LoadedConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json doc = json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
    auto loaded = load_config(doc, overrides);
    // Edge-list paths are relative to the config file.
    auto& edge_list = loaded.scenario.topology.edge_list_path;
    if (!edge_list.empty() && std::filesystem::path(edge_list).is_relative()) {
        edge_list = (std::filesystem::path(path).parent_path() / edge_list).lexically_normal().string();
    }
    return loaded;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string config_hash(const ScenarioConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

}  // namespace squelchsim
