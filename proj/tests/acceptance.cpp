// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "checks.hpp"

#include "squelchsim/cli.hpp"
#include "squelchsim/config.hpp"
#include "squelchsim/engine.hpp"
#include "squelchsim/metrics.hpp"
#include "squelchsim/regression.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace squelchsim;
namespace fs = std::filesystem;

namespace {

const fs::path kSourceDir = SQUELCHSIM_SOURCE_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

LinearModel fit_file(const char* name) {
    std::string x, y;
    auto pts = parse_points_csv(read_file(kSourceDir / "data" / name), &x, &y);
    return fit_linear(pts, x, y);
}

Outcome regression_reproduction() {
    const auto cpu = fit_file("table1_cpu.csv");
    const auto msgs = fit_file("table4_messages.csv");
    const bool ok = within(cpu.intercept, 15.8754, 0.001) && within(cpu.slope, 0.1177, 0.0001) &&
                    within(msgs.intercept, -75.0943, 0.05) && within(msgs.slope, 123.6365, 0.005) &&
                    cpu.r_squared > 0.96 && msgs.r_squared > 0.96;
    return {ok, "cpu = " + fmt(cpu.intercept) + " + " + fmt(cpu.slope, 5) + "*peers (R2 " + fmt(cpu.r_squared) +
                    "); msgs = " + fmt(msgs.intercept) + " + " + fmt(msgs.slope) + "*peers (R2 " +
                    fmt(msgs.r_squared) + ")"};
}

Outcome extrapolation_reproduction() {
    const auto points = (kSourceDir / "data" / "table4_messages.csv").string();
    const auto cpu = (kSourceDir / "data" / "table1_cpu.csv").string();
    const char* argv[] = {"squelchsim", "fit", points.c_str(), "--gain", "200", "0.28905", "--cpu-csv", cpu.c_str()};
    std::ostringstream out, err;
    if (cli::run(8, argv, out, err) != cli::kExitOk) return {false, "fit exited with an error: " + err.str()};
    const auto gain = nlohmann::json::parse(out.str()).at("gain");
    const auto& base = gain.at("baseline");
    const auto& sq = gain.at("squelched");
    const double b_msgs = base.at("messages_per_s"), b_cpu = base.at("cpu_percent");
    const double s_peers = sq.at("peers"), s_msgs = sq.at("messages_per_s"), s_cpu = sq.at("cpu_percent");
    const long long freed = gain.at("freed_slots");
    const double conn = gain.at("connectivity_gain_percent");
    const bool ok = within(b_msgs, 24652, 1) && within(b_cpu, 39.41, 0.05) && within(s_peers, 142, 1) &&
                    within(s_msgs, 17527, 15) && s_cpu >= 32.55 && s_cpu <= 32.66 && std::llabs(freed - 58) <= 1 &&
                    within(conn, 29.0, 0.5);
    return {ok, "200 peers: " + fmt(b_msgs, 1) + " msgs, CPU " + fmt(b_cpu, 3) + "; squelched: " + fmt(s_peers, 0) +
                    " peers, " + fmt(s_msgs, 1) + " msgs, CPU " + fmt(s_cpu, 3) + "; freed " + std::to_string(freed) +
                    " slots, connectivity +" + fmt(conn, 2) + "%"};
}

Outcome savings_arithmetic() {
    const auto s = savings(297.633, 211.602);
    return {within(s.saved_percent, 28.905, 0.001),
            "saved " + fmt(s.saved_percent, 4) + "%, ratio " + fmt(s.ratio_percent, 4) + "%"};
}

Outcome flood_oracle() {
    const auto r = checks::flood_transmissions(100, 50);
    return {r.ok, r.detail};
}

Outcome delivery_completeness() {
    const auto r = checks::delivery_completeness(100);
    return {r.ok, r.detail};
}

Outcome squelch_benefit() {
    const auto config = (kSourceDir / "configs" / "reference_shape.json").string();
    struct Arm {
        double saved = 0.0;
        double flood_app = 0.0, squelch_app = 0.0;
        std::uint64_t flood_tx = 0, squelch_tx = 0;
    };
    std::vector<std::future<Arm>> runs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        runs.push_back(std::async(std::launch::async, [&config, seed] {
            auto loaded = load_config_file(config, {"scenario.seed=" + std::to_string(seed)});
            const auto graph = build_topology(loaded.scenario);
            auto cfg = loaded.scenario;
            cfg.relay_policy = RelayPolicy::Flood;
            auto flood = simulate(cfg, graph, loaded.config_hash);
            cfg.relay_policy = RelayPolicy::Squelch;
            auto squelch = simulate(cfg, graph, loaded.config_hash);
            SummaryOptions opts{cfg.include_control_in_total};
            const auto fs_ = summarize(flood.log, opts), ss_ = summarize(squelch.log, opts);
            return Arm{savings(fs_, ss_).saved_percent, fs_.avg_app_msgs_per_sec, ss_.avg_app_msgs_per_sec,
                       flood.transmissions, squelch.transmissions};
        }));
    }
    bool ok = true;
    double lo = 1e9, hi = -1e9, sum = 0.0;
    for (auto& f : runs) {
        const auto a = f.get();
        ok = ok && a.squelch_app < a.flood_app && a.squelch_tx <= a.flood_tx && a.saved >= 15.0 && a.saved <= 45.0;
        lo = std::min(lo, a.saved);
        hi = std::max(hi, a.saved);
        sum += a.saved;
    }
    return {ok, "10 seeds: saved_percent in [" + fmt(lo, 2) + ", " + fmt(hi, 2) + "], mean " + fmt(sum / 10, 2) +
                    " (band [15, 45]); squelch app msgs/s below flood on every seed"};
}

Outcome protocol_state_machine() {
    const auto enumeration = checks::enumerate_all_arrivals();
    const auto reselect = checks::reselection_after_expiry();
    const auto uplink = checks::uplink_loss_unsquelches();
    std::string detail = enumeration.detail + "; " + reselect.detail + "; " + uplink.detail;
    return {enumeration.ok && reselect.ok && uplink.ok, detail};
}

Outcome determinism() {
    const auto config = (kSourceDir / "configs" / "reference_shape.json").string();
    const auto dir = fs::temp_directory_path() / "squelchsim_acceptance_determinism";
    fs::remove_all(dir);
    std::string detail;
    bool ok = true;
    for (const char* policy : {"flood", "squelch"}) {
        std::string texts[2];
        for (int run = 0; run < 2; ++run) {
            const auto out = (dir / (std::string(policy) + std::to_string(run))).string();
            const std::string set = std::string("scenario.relay_policy=") + policy;
            const char* argv[] = {"squelchsim", "simulate", "--config", config.c_str(), "--set", set.c_str(),
                                  "--out", out.c_str()};
            std::ostringstream o, e;
            if (cli::run(8, argv, o, e) != cli::kExitOk) return {false, "simulate failed: " + e.str()};
            texts[run] = read_file(fs::path(out) / "metrics.csv");
        }
        const bool same = texts[0] == texts[1] && !texts[0].empty();
        ok = ok && same;
        detail += std::string(policy) + (same ? " identical (" : " DIFFERENT (") + std::to_string(texts[0].size()) +
                  " bytes); ";
    }
    fs::remove_all(dir);
    return {ok, detail.substr(0, detail.size() - 2)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "regression reproduction", 1.0, regression_reproduction},
        {2, "extrapolation reproduction", 1.0, extrapolation_reproduction},
        {3, "savings arithmetic", 1.0, savings_arithmetic},
        {4, "flood oracle", 10.0, flood_oracle},
        {5, "delivery completeness", 60.0, delivery_completeness},
        {6, "squelch benefit", 30.0, squelch_benefit},
        {7, "protocol state machine", 10.0, protocol_state_machine},
        {8, "determinism", 60.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs < c.budget_s;
        const bool pass = o.pass && in_budget;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
                  << fmt(secs, 2) << " s, budget " << fmt(c.budget_s, 0) << " s" << (in_budget ? "" : ", EXCEEDED")
                  << ")" << std::endl;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
