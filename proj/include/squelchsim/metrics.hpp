#pragma once

#include "squelchsim/squelch.hpp"
#include "squelchsim/types.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace squelchsim {

enum class Direction : std::uint8_t { In = 0, Out = 1 };

const char* to_string(Direction d) noexcept;

struct Counter {
    std::uint64_t messages = 0;
    std::uint64_t bytes = 0;

    friend bool operator==(const Counter&, const Counter&) = default;
};

struct RunMetadata {
    std::string policy;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::int64_t warmup_ms = 0;
    std::string tool_version = kToolVersion;

    friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

class EmptyWindowError : public Error {
public:
    using Error::Error;
};

/// Per-node, per-second message and byte counters, split by kind and direction.
///
/// Buckets are one simulated second wide. A bucket whose start lies before
/// warmup_ms is kept but flagged excluded; summaries skip it.
class MetricsLog {
public:
    MetricsLog() = default;
    MetricsLog(std::size_t node_count, std::size_t bucket_count, RunMetadata meta);

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t bucket_count() const noexcept { return bucket_count_; }
    const RunMetadata& metadata() const noexcept { return meta_; }
    RunMetadata& metadata() noexcept { return meta_; }

    bool excluded(std::size_t second) const noexcept {
        return static_cast<std::int64_t>(second) * 1000 < meta_.warmup_ms;
    }

    // Count one message at simulated time `at` (ms).
    void record(NodeId node, SimTime at, MessageKind kind, Direction dir, std::uint64_t bytes);
    void add(NodeId node, std::size_t second, MessageKind kind, Direction dir, Counter c);
    const Counter& at(NodeId node, std::size_t second, MessageKind kind, Direction dir) const;

    void record_duplicate(NodeId node, MessageKind kind, std::uint64_t n = 1);
    std::uint64_t duplicates(NodeId node, MessageKind kind) const;

    // Transmissions still on the wire when the run stopped.
    void record_undelivered(MessageKind kind, std::uint64_t n = 1) { undelivered_[static_cast<int>(kind)] += n; }
    std::uint64_t undelivered(MessageKind kind) const { return undelivered_[static_cast<int>(kind)]; }

    friend bool operator==(const MetricsLog&, const MetricsLog&) = default;

private:
    std::size_t index(NodeId node, std::size_t second, MessageKind kind, Direction dir) const;

    std::size_t node_count_ = 0;
    std::size_t bucket_count_ = 0;
    RunMetadata meta_;
    std::vector<Counter> counters_;
    std::vector<std::uint64_t> duplicates_;  // node * kinds + kind
    std::array<std::uint64_t, kMessageKindCount> undelivered_{};
};

struct SummaryOptions {
    bool include_control = true;
};

struct RunSummary {
    std::uint64_t window_seconds = 0;
    // Message counts over the included window, [kind][direction].
    std::array<std::array<std::uint64_t, 2>, kMessageKindCount> counts{};
    std::array<std::array<double, 2>, kMessageKindCount> avg_per_kind{};

    std::uint64_t app_messages = 0;
    std::uint64_t control_messages = 0;
    double avg_app_msgs_per_sec = 0.0;
    double avg_control_msgs_per_sec = 0.0;
    double avg_combined_msgs_per_sec = 0.0;

    // The headline figure savings are computed from: combined, or application-only.
    double avg_total_msgs_per_sec = 0.0;
    bool total_includes_control = true;

    std::uint64_t total_duplicates = 0;
    std::uint64_t control_overhead_msgs = 0;  // control messages sent in the window

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

RunSummary summarize(const MetricsLog& log, const SummaryOptions& options = {});

struct SavingsReport {
    double ratio_percent = 0.0;
    double saved_percent = 0.0;
};

SavingsReport savings(double flood_avg, double squelch_avg);
SavingsReport savings(const RunSummary& flood, const RunSummary& squelch);

// Network-wide messages per second bucket, every bucket (excluded ones too).
struct SecondTotals {
    std::uint64_t in = 0;
    std::uint64_t out = 0;
};
std::vector<SecondTotals> per_second_totals(const MetricsLog& log, bool include_control = true);

std::string export_csv(const MetricsLog& log);
MetricsLog import_csv(std::string_view text);

nlohmann::json to_json(const RunSummary& s);
nlohmann::json to_json(const SavingsReport& s);
nlohmann::json to_json(const RunMetadata& m);

}  // namespace squelchsim
