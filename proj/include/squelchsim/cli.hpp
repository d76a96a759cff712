#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace squelchsim::cli {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::string config_path;
    std::optional<unsigned long long> seed;
    std::string out_dir;
    std::vector<std::string> overrides;
};

struct FitOptions {
    std::string points_csv;
    bool invert = false;
    std::vector<double> predict_at;
    std::optional<long long> gain_peers;
    double gain_saved_fraction = 0.0;
    std::string cpu_csv;
};

struct TopoGenOptions {
    std::size_t nodes = 892;
    double degree = 20.62;
    double validator_fraction = 0.17;
    double latency_low_ms = 5.0;
    double latency_high_ms = 100.0;
    unsigned long long seed = 0;
    std::string out_path;  // stdout when empty
};

int cmd_simulate(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err);
int cmd_topo_stats(const std::string& edge_list_path, std::ostream& out, std::ostream& err);
int cmd_topo_gen(const TopoGenOptions& opts, std::ostream& out, std::ostream& err);

// Parses argv and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace squelchsim::cli
