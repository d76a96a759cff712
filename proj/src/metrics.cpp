#include "squelchsim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

namespace squelchsim {

namespace {

constexpr const char* kCsvHeader = "node,second,kind,direction,messages,bytes,excluded";

template <typename T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
    }
    return v;
}

MessageKind parse_kind(std::string_view s, std::size_t line) {
    try {
        return message_kind_from_string(std::string(s));
    } catch (const Error&) {
        throw ParseError(line, "bad kind '" + std::string(s) + "'");
    }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace

const char* to_string(Direction d) noexcept { return d == Direction::In ? "in" : "out"; }

MetricsLog::MetricsLog(std::size_t node_count, std::size_t bucket_count, RunMetadata meta)
    : node_count_(node_count),
      bucket_count_(bucket_count),
      meta_(std::move(meta)),
      counters_(node_count * bucket_count * kMessageKindCount * 2),
      duplicates_(node_count * kMessageKindCount, 0) {}

std::size_t MetricsLog::index(NodeId node, std::size_t second, MessageKind kind, Direction dir) const {
    if (node >= node_count_ || second >= bucket_count_) {
        throw ContractViolation("metrics bucket (" + std::to_string(node) + ", " + std::to_string(second) +
                                ") out of range");
    }
    return ((node * bucket_count_ + second) * kMessageKindCount + static_cast<std::size_t>(kind)) * 2 +
           static_cast<std::size_t>(dir);
}

void MetricsLog::record(NodeId node, SimTime at, MessageKind kind, Direction dir, std::uint64_t bytes) {
    const auto second = static_cast<std::size_t>(std::floor(at / 1000.0));
    auto& c = counters_[index(node, second, kind, dir)];
    ++c.messages;
    c.bytes += bytes;
}

void MetricsLog::add(NodeId node, std::size_t second, MessageKind kind, Direction dir, Counter c) {
    auto& dst = counters_[index(node, second, kind, dir)];
    dst.messages += c.messages;
    dst.bytes += c.bytes;
}

const Counter& MetricsLog::at(NodeId node, std::size_t second, MessageKind kind, Direction dir) const {
    return counters_[index(node, second, kind, dir)];
}

void MetricsLog::record_duplicate(NodeId node, MessageKind kind, std::uint64_t n) {
    if (node >= node_count_) throw ContractViolation("duplicate count for unknown node");
    duplicates_[node * kMessageKindCount + static_cast<std::size_t>(kind)] += n;
}

std::uint64_t MetricsLog::duplicates(NodeId node, MessageKind kind) const {
    return duplicates_.at(node * kMessageKindCount + static_cast<std::size_t>(kind));
}

RunSummary summarize(const MetricsLog& log, const SummaryOptions& options) {
    RunSummary s;
    for (std::size_t sec = 0; sec < log.bucket_count(); ++sec) {
        if (!log.excluded(sec)) ++s.window_seconds;
    }
    if (s.window_seconds == 0) throw EmptyWindowError("every metrics bucket falls inside the warmup window");

    for (NodeId n = 0; n < log.node_count(); ++n) {
        for (int k = 0; k < kMessageKindCount; ++k) {
            const auto kind = static_cast<MessageKind>(k);
            s.total_duplicates += log.duplicates(n, kind);
            for (std::size_t sec = 0; sec < log.bucket_count(); ++sec) {
                if (log.excluded(sec)) continue;
                s.counts[k][0] += log.at(n, sec, kind, Direction::In).messages;
                s.counts[k][1] += log.at(n, sec, kind, Direction::Out).messages;
            }
        }
    }

    const auto window = static_cast<double>(s.window_seconds);
    for (int k = 0; k < kMessageKindCount; ++k) {
        const auto both = s.counts[k][0] + s.counts[k][1];
        if (is_application(static_cast<MessageKind>(k))) {
            s.app_messages += both;
        } else {
            s.control_messages += both;
            s.control_overhead_msgs += s.counts[k][1];
        }
        for (int d = 0; d < 2; ++d) s.avg_per_kind[k][d] = static_cast<double>(s.counts[k][d]) / window;
    }
    s.avg_app_msgs_per_sec = static_cast<double>(s.app_messages) / window;
    s.avg_control_msgs_per_sec = static_cast<double>(s.control_messages) / window;
    s.avg_combined_msgs_per_sec = static_cast<double>(s.app_messages + s.control_messages) / window;
    s.total_includes_control = options.include_control;
    s.avg_total_msgs_per_sec = options.include_control ? s.avg_combined_msgs_per_sec : s.avg_app_msgs_per_sec;
    return s;
}

SavingsReport savings(double flood_avg, double squelch_avg) {
    if (!(flood_avg > 0.0)) throw ParameterError("flood average must be positive to compute savings");
    SavingsReport r;
    r.ratio_percent = 100.0 * squelch_avg / flood_avg;
    r.saved_percent = 100.0 - r.ratio_percent;
    return r;
}

SavingsReport savings(const RunSummary& flood, const RunSummary& squelch) {
    return savings(flood.avg_total_msgs_per_sec, squelch.avg_total_msgs_per_sec);
}

std::vector<SecondTotals> per_second_totals(const MetricsLog& log, bool include_control) {
    std::vector<SecondTotals> out(log.bucket_count());
    for (NodeId n = 0; n < log.node_count(); ++n) {
        for (std::size_t sec = 0; sec < log.bucket_count(); ++sec) {
            for (int k = 0; k < kMessageKindCount; ++k) {
                const auto kind = static_cast<MessageKind>(k);
                if (!include_control && !is_application(kind)) continue;
                out[sec].in += log.at(n, sec, kind, Direction::In).messages;
                out[sec].out += log.at(n, sec, kind, Direction::Out).messages;
            }
        }
    }
    return out;
}

std::string export_csv(const MetricsLog& log) {
    std::ostringstream os;
    const auto& m = log.metadata();
    os << "# tool_version=" << m.tool_version << "\n";
    os << "# policy=" << m.policy << "\n";
    os << "# seed=" << m.seed << "\n";
    os << "# config_hash=" << m.config_hash << "\n";
    os << "# warmup_ms=" << m.warmup_ms << "\n";
    os << "# nodes=" << log.node_count() << "\n";
    os << "# seconds=" << log.bucket_count() << "\n";
    for (int k = 0; k < kMessageKindCount; ++k) {
        const auto kind = static_cast<MessageKind>(k);
        if (auto u = log.undelivered(kind)) os << "# undelivered," << to_string(kind) << "," << u << "\n";
    }
    for (NodeId n = 0; n < log.node_count(); ++n) {
        for (int k = 0; k < kMessageKindCount; ++k) {
            const auto kind = static_cast<MessageKind>(k);
            if (auto d = log.duplicates(n, kind)) os << "# duplicates," << n << "," << to_string(kind) << "," << d << "\n";
        }
    }
    os << kCsvHeader << "\n";
    for (NodeId n = 0; n < log.node_count(); ++n) {
        for (std::size_t sec = 0; sec < log.bucket_count(); ++sec) {
            for (int k = 0; k < kMessageKindCount; ++k) {
                const auto kind = static_cast<MessageKind>(k);
                const auto& in = log.at(n, sec, kind, Direction::In);
                const auto& out = log.at(n, sec, kind, Direction::Out);
                if (in.messages == 0 && out.messages == 0 && in.bytes == 0 && out.bytes == 0) continue;
                for (const auto* dir : {&in, &out}) {
                    os << n << "," << sec << "," << to_string(kind) << ","
                       << (dir == &in ? "in" : "out") << "," << dir->messages << "," << dir->bytes << ","
                       << (log.excluded(sec) ? 1 : 0) << "\n";
                }
            }
        }
    }
    return os.str();
}

MetricsLog import_csv(std::string_view text) {
    RunMetadata meta;
    meta.tool_version.clear();
    std::size_t nodes = 0, seconds = 0;
    struct Dup {
        NodeId node;
        MessageKind kind;
        std::uint64_t n;
    };
    std::vector<Dup> dups;
    std::vector<std::pair<MessageKind, std::uint64_t>> undelivered;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    std::optional<MetricsLog> log;

    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;

        if (line.front() == '#') {
            if (header_seen) throw ParseError(line_no, "metadata after header");
            line.remove_prefix(std::min<std::size_t>(2, line.size()));
            if (auto eq = line.find('='); eq != std::string_view::npos) {
                auto key = line.substr(0, eq);
                auto value = line.substr(eq + 1);
                if (key == "tool_version") meta.tool_version = value;
                else if (key == "policy") meta.policy = value;
                else if (key == "seed") meta.seed = parse_number<std::uint64_t>(value, line_no, "seed");
                else if (key == "config_hash") meta.config_hash = value;
                else if (key == "warmup_ms") meta.warmup_ms = parse_number<std::int64_t>(value, line_no, "warmup_ms");
                else if (key == "nodes") nodes = parse_number<std::size_t>(value, line_no, "nodes");
                else if (key == "seconds") seconds = parse_number<std::size_t>(value, line_no, "seconds");
                else throw ParseError(line_no, "unknown metadata key '" + std::string(key) + "'");
                continue;
            }
            auto f = split(line, ',');
            if (f[0] == "duplicates" && f.size() == 4) {
                dups.push_back({parse_number<NodeId>(f[1], line_no, "node"), parse_kind(f[2], line_no),
                                parse_number<std::uint64_t>(f[3], line_no, "count")});
            } else if (f[0] == "undelivered" && f.size() == 3) {
                undelivered.emplace_back(parse_kind(f[1], line_no),
                                         parse_number<std::uint64_t>(f[2], line_no, "count"));
            } else {
                throw ParseError(line_no, "unrecognised metadata line");
            }
            continue;
        }

        if (!header_seen) {
            if (line != kCsvHeader) throw ParseError(line_no, "expected header '" + std::string(kCsvHeader) + "'");
            header_seen = true;
            log.emplace(nodes, seconds, meta);
            continue;
        }

        auto f = split(line, ',');
        if (f.size() != 7) throw ParseError(line_no, "expected 7 columns");
        const auto node = parse_number<NodeId>(f[0], line_no, "node");
        const auto sec = parse_number<std::size_t>(f[1], line_no, "second");
        const auto kind = parse_kind(f[2], line_no);
        Direction dir;
        if (f[3] == "in") dir = Direction::In;
        else if (f[3] == "out") dir = Direction::Out;
        else throw ParseError(line_no, "bad direction");
        Counter c{parse_number<std::uint64_t>(f[4], line_no, "messages"), parse_number<std::uint64_t>(f[5], line_no, "bytes")};
        const auto excluded = parse_number<int>(f[6], line_no, "excluded");
        if (node >= nodes || sec >= seconds) throw ParseError(line_no, "bucket outside declared dimensions");
        if ((excluded != 0) != log->excluded(sec)) throw ParseError(line_no, "excluded flag disagrees with warmup_ms");
        log->add(node, sec, kind, dir, c);
    }
    if (!header_seen) throw ParseError(line_no, "missing header");
    for (const auto& d : dups) {
        if (d.node >= nodes) throw ParseError(0, "duplicate count for unknown node");
        log->record_duplicate(d.node, d.kind, d.n);
    }
    for (auto [k, n] : undelivered) log->record_undelivered(k, n);
    return std::move(*log);
}

nlohmann::json to_json(const RunSummary& s) {
    nlohmann::json per_kind = nlohmann::json::object();
    for (int k = 0; k < kMessageKindCount; ++k) {
        per_kind[to_string(static_cast<MessageKind>(k))] = {
            {"in_per_sec", s.avg_per_kind[k][0]},
            {"out_per_sec", s.avg_per_kind[k][1]},
            {"in_messages", s.counts[k][0]},
            {"out_messages", s.counts[k][1]},
        };
    }
    return {
        {"window_seconds", s.window_seconds},
        {"avg_total_msgs_per_sec", s.avg_total_msgs_per_sec},
        {"total_includes_control", s.total_includes_control},
        {"avg_app_msgs_per_sec", s.avg_app_msgs_per_sec},
        {"avg_control_msgs_per_sec", s.avg_control_msgs_per_sec},
        {"avg_combined_msgs_per_sec", s.avg_combined_msgs_per_sec},
        {"app_messages", s.app_messages},
        {"control_messages", s.control_messages},
        {"total_duplicates", s.total_duplicates},
        {"control_overhead_msgs", s.control_overhead_msgs},
        {"per_kind", per_kind},
    };
}

nlohmann::json to_json(const SavingsReport& s) {
    return {{"ratio_percent", s.ratio_percent}, {"saved_percent", s.saved_percent}};
}

nlohmann::json to_json(const RunMetadata& m) {
    return {{"policy", m.policy},
            {"seed", m.seed},
            {"config_hash", m.config_hash},
            {"warmup_ms", m.warmup_ms},
            {"tool_version", m.tool_version}};
}

}  // namespace squelchsim
