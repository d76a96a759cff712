#include "squelchsim/cli.hpp"

#include "squelchsim/config.hpp"
#include "squelchsim/engine.hpp"
#include "squelchsim/metrics.hpp"
#include "squelchsim/regression.hpp"
#include "squelchsim/topology.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace squelchsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DegenerateFitError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnknownNodeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

LoadedConfig load(const GlobalOptions& opts) {
    if (opts.config_path.empty()) throw ConfigError("--config is required");
    auto overrides = opts.overrides;
    if (opts.seed) overrides.push_back("scenario.seed=" + std::to_string(*opts.seed));
    return load_config_file(opts.config_path, overrides);
}

fs::path output_dir(const GlobalOptions& opts, const LoadedConfig& cfg) {
    fs::path dir = ".";
    if (!opts.out_dir.empty()) dir = opts.out_dir;
    else if (!cfg.output_dir.empty()) dir = cfg.output_dir;
    else if (const char* env = std::getenv("SQUELCHSIM_OUT"); env && *env) dir = env;
    fs::create_directories(dir);
    return dir;
}

json provenance(const std::string& config_hash, std::uint64_t seed) {
    return {{"config_hash", config_hash}, {"seed", seed}, {"tool_version", kToolVersion}};
}

}  // namespace

int cmd_simulate(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load(opts);
        const auto dir = output_dir(opts, cfg);
        const auto graph = build_topology(cfg.scenario);
        auto result = simulate(cfg.scenario, graph, cfg.config_hash);
        for (const auto& w : result.warnings) err << "warning: " << w << "\n";

        SummaryOptions sopts;
        sopts.include_control = cfg.scenario.include_control_in_total;
        json summary = provenance(cfg.config_hash, cfg.scenario.seed);
        summary["policy"] = to_string(cfg.scenario.relay_policy);
        summary["warmup_ms"] = result.log.metadata().warmup_ms;
        summary["summary"] = to_json(summarize(result.log, sopts));
        summary["topology"] = to_json(graph_stats(graph));
        summary["warnings"] = result.warnings;

        write_file(dir / "metrics.csv", export_csv(result.log));
        write_file(dir / "summary.json", summary.dump(2) + "\n");
        out << "wrote " << (dir / "metrics.csv").string() << " and " << (dir / "summary.json").string() << "\n";
        return kExitOk;
    });
}

int cmd_compare(const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load(opts);
        const auto dir = output_dir(opts, cfg);
        const auto graph = build_topology(cfg.scenario);

        auto flood_cfg = cfg.scenario;
        flood_cfg.relay_policy = RelayPolicy::Flood;
        auto squelch_cfg = cfg.scenario;
        squelch_cfg.relay_policy = RelayPolicy::Squelch;

        auto flood_future = std::async(std::launch::async, [&] { return simulate(flood_cfg, graph, cfg.config_hash); });
        auto squelch = simulate(squelch_cfg, graph, cfg.config_hash);
        auto flood = flood_future.get();
        for (const auto& w : flood.warnings) err << "warning (flood): " << w << "\n";
        for (const auto& w : squelch.warnings) err << "warning (squelch): " << w << "\n";

        SummaryOptions sopts;
        sopts.include_control = cfg.scenario.include_control_in_total;
        const auto fs_ = summarize(flood.log, sopts);
        const auto ss_ = summarize(squelch.log, sopts);

        json report = provenance(cfg.config_hash, cfg.scenario.seed);
        report["flood"] = to_json(fs_);
        report["squelch"] = to_json(ss_);
        auto saved = to_json(savings(fs_, ss_));
        report["savings"] = saved;
        report["saved_percent"] = saved["saved_percent"];
        report["app_only_savings"] = to_json(savings(fs_.avg_app_msgs_per_sec, ss_.avg_app_msgs_per_sec));
        report["control_overhead_msgs"] = ss_.control_overhead_msgs;
        report["topology"] = to_json(graph_stats(graph));

        const auto ft = per_second_totals(flood.log, cfg.scenario.include_control_in_total);
        const auto st = per_second_totals(squelch.log, cfg.scenario.include_control_in_total);
        std::ostringstream csv;
        csv << "# tool_version=" << kToolVersion << "\n# config_hash=" << cfg.config_hash << "\n# seed="
            << cfg.scenario.seed << "\n";
        csv << "second,flood_in,flood_out,squelch_in,squelch_out,"
               "flood_cum_in,flood_cum_out,squelch_cum_in,squelch_cum_out\n";
        std::uint64_t fci = 0, fco = 0, sci = 0, sco = 0;
        for (std::size_t s = 0; s < ft.size(); ++s) {
            fci += ft[s].in;
            fco += ft[s].out;
            sci += st[s].in;
            sco += st[s].out;
            csv << s << "," << ft[s].in << "," << ft[s].out << "," << st[s].in << "," << st[s].out << "," << fci << ","
                << fco << "," << sci << "," << sco << "\n";
        }

        write_file(dir / "compare.json", report.dump(2) + "\n");
        write_file(dir / "cumulative.csv", csv.str());
        out << "flood " << fs_.avg_total_msgs_per_sec << " msg/s, squelch " << ss_.avg_total_msgs_per_sec
            << " msg/s, saved " << saved["saved_percent"].get<double>() << "%\n";
        return kExitOk;
    });
}

int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto text = read_file(opts.points_csv);
        std::string xn, yn;
        const auto points = parse_points_csv(text, &xn, &yn);
        const auto model = fit_linear(points, xn, yn);

        json doc = provenance(sha256_hex(text), 0);
        doc["model"] = to_json(model);
        if (opts.invert) doc["inverse"] = to_json(invert(model));
        if (!opts.predict_at.empty()) {
            json preds = json::array();
            for (double x : opts.predict_at) {
                preds.push_back({{"x", x}, {"y", predict(model, x)}, {"extrapolated", extrapolates(model, x)}});
            }
            doc["predictions"] = preds;
        }
        if (opts.gain_peers) {
            if (opts.cpu_csv.empty()) throw ConfigError("--gain needs --cpu-csv with the CPU-versus-peers points");
            const auto cpu_text = read_file(opts.cpu_csv);
            std::string cx, cy;
            const auto cpu_points = parse_points_csv(cpu_text, &cx, &cy);
            const auto cpu_model = fit_linear(cpu_points, cx, cy);
            doc["cpu_model"] = to_json(cpu_model);
            doc["gain"] = to_json(compute_gain(cpu_model, model, *opts.gain_peers, opts.gain_saved_fraction));
        }
        out << doc.dump(2) << "\n";
        return kExitOk;
    });
}

int cmd_topo_stats(const std::string& edge_list_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto text = read_file(edge_list_path);
        const auto graph = load_topology(text, {});
        json doc = to_json(graph_stats(graph));
        doc["node_count"] = graph.node_count();
        doc["edge_count"] = graph.edge_count();
        doc["input_sha256"] = sha256_hex(text);
        doc["tool_version"] = kToolVersion;
        out << doc.dump(2) << "\n";
        return kExitOk;
    });
}

int cmd_topo_gen(const TopoGenOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        GeneratorParams p;
        p.node_count = opts.nodes;
        p.target_avg_degree = opts.degree;
        p.validator_fraction = opts.validator_fraction;
        p.latency_low_ms = opts.latency_low_ms;
        p.latency_high_ms = opts.latency_high_ms;
        p.seed = opts.seed;
        const auto text = "# seed " + std::to_string(opts.seed) + " tool_version " + kToolVersion + "\n" +
                          to_edge_list(generate_topology(p));
        if (opts.out_path.empty()) out << text;
        else write_file(opts.out_path, text);
        return kExitOk;
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Flooding versus squelching message dissemination simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    GlobalOptions global;
    auto add_global = [&](CLI::App* sub) {
        sub->add_option("--config", global.config_path, "Scenario config file (JSON)")->required();
        sub->add_option("--seed", global.seed, "Override scenario.seed");
        sub->add_option("--out", global.out_dir, "Output directory (default: output.dir, $SQUELCHSIM_OUT, .)");
        sub->add_option("--set", global.overrides, "Override a config value: section.key=value");
    };
    auto* simulate_cmd = app.add_subcommand("simulate", "Run one scenario; writes metrics.csv and summary.json");
    add_global(simulate_cmd);
    auto* compare_cmd = app.add_subcommand("compare", "Run flood and squelch arms; writes compare.json and cumulative.csv");
    add_global(compare_cmd);

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Least-squares fit of x,y points; prints JSON");
    fit_cmd->add_option("points", fit.points_csv, "CSV with header and x,y rows")->required();
    fit_cmd->add_flag("--invert", fit.invert, "Also print the inverse model");
    fit_cmd->add_option("--predict", fit.predict_at, "Evaluate the model at x (repeatable)");
    std::vector<double> gain_args;
    fit_cmd->add_option("--gain", gain_args, "BASELINE_PEERS SAVED_FRACTION")->expected(2);
    fit_cmd->add_option("--cpu-csv", fit.cpu_csv, "CPU-versus-peers points for --gain");

    std::string edge_list;
    auto* topo_cmd = app.add_subcommand("topo-stats", "Hop-distance statistics of an edge list; prints JSON");
    topo_cmd->add_option("edge_list", edge_list, "Edge list file")->required();

    TopoGenOptions gen;
    auto* gen_cmd = app.add_subcommand("topo-gen", "Generate a random connected topology as an edge list");
    gen_cmd->add_option("--nodes", gen.nodes);
    gen_cmd->add_option("--degree", gen.degree);
    gen_cmd->add_option("--validator-fraction", gen.validator_fraction);
    gen_cmd->add_option("--latency-min", gen.latency_low_ms);
    gen_cmd->add_option("--latency-max", gen.latency_high_ms);
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--out", gen.out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    if (*simulate_cmd) return cmd_simulate(global, out, err);
    if (*compare_cmd) return cmd_compare(global, out, err);
    if (*fit_cmd) {
        if (!gain_args.empty()) {
            const double peers = gain_args[0];
            if (peers != std::floor(peers)) {
                err << "usage error: --gain baseline peers must be a whole number\n";
                return kExitUsage;
            }
            fit.gain_peers = static_cast<long long>(peers);
            fit.gain_saved_fraction = gain_args[1];
        }
        return cmd_fit(fit, out, err);
    }
    if (*topo_cmd) return cmd_topo_stats(edge_list, out, err);
    return cmd_topo_gen(gen, out, err);
}

}  // namespace squelchsim::cli
