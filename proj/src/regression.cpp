#include "squelchsim/regression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace squelchsim {

LinearModel fit_linear(std::span<const Point> points, std::string x_name, std::string y_name) {
    if (points.size() < 2) throw DegenerateFitError("need at least two points to fit a line");
    const auto n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= n;
    my /= n;

    // Centered sums keep the normal equations well conditioned.
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = p.x - mx, dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateFitError("all x values are identical");

    LinearModel m;
    m.slope = sxy / sxx;
    m.intercept = my - m.slope * mx;
    m.n_points = points.size();
    m.x_name = std::move(x_name);
    m.y_name = std::move(y_name);
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    m.x_min = lo->x;
    m.x_max = hi->x;

    if (syy == 0.0) {
        m.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (const auto& p : points) {
            const double r = p.y - (m.intercept + m.slope * p.x);
            ss_res += r * r;
        }
        m.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return m;
}

double predict(const LinearModel& model, double x) { return model.intercept + model.slope * x; }

bool extrapolates(const LinearModel& model, double x) { return x < model.x_min || x > model.x_max; }

LinearModel invert(const LinearModel& model) {
    if (model.slope == 0.0) throw DegenerateFitError("a zero-slope model cannot be inverted");
    LinearModel inv = model;
    inv.slope = 1.0 / model.slope;
    inv.intercept = -model.intercept / model.slope;
    std::swap(inv.x_name, inv.y_name);
    const double a = predict(model, model.x_min), b = predict(model, model.x_max);
    inv.x_min = std::min(a, b);
    inv.x_max = std::max(a, b);
    return inv;
}

GainReport compute_gain(const LinearModel& cpu_model, const LinearModel& msgs_model, long long baseline_peers,
                        double saved_fraction) {
    if (baseline_peers <= 0) throw ParameterError("baseline_peers must be positive");
    if (!(saved_fraction > 0.0 && saved_fraction < 1.0)) throw ParameterError("saved_fraction must lie in (0, 1)");

    GainReport g;
    const auto peers = static_cast<double>(baseline_peers);
    g.baseline = {peers, predict(msgs_model, peers), predict(cpu_model, peers)};

    const double squelched_msgs = (1.0 - saved_fraction) * g.baseline.messages_per_s;
    g.squelched_peers_exact = predict(invert(msgs_model), squelched_msgs);
    // A fractional peer slot cannot be used. Values within 1e-6 (relative) of the
    // next integer snap up so that a vanishing saving frees no slot.
    const double snap = 1e-6 * std::max(1.0, std::abs(g.squelched_peers_exact));
    const double whole_peers = std::floor(g.squelched_peers_exact + snap);
    g.squelched = {whole_peers, squelched_msgs, predict(cpu_model, whole_peers)};

    g.freed_slots = baseline_peers - static_cast<long long>(whole_peers);
    g.connectivity_gain_percent = 100.0 * static_cast<double>(g.freed_slots) / peers;
    g.cpu_saved_percent = 100.0 * (g.baseline.cpu_percent - g.squelched.cpu_percent) / g.baseline.cpu_percent;
    return g;
}

std::vector<Point> parse_points_csv(std::string_view text, std::string* x_name, std::string* y_name) {
    std::vector<Point> points;
    std::size_t pos = 0, line_no = 0;
    bool header = false;
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
        return s;
    };
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected two comma-separated columns");
        }
        auto a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
        if (!header) {
            header = true;
            if (x_name) *x_name = a;
            if (y_name) *y_name = b;
            continue;
        }
        Point p{};
        auto [pa, ea] = std::from_chars(a.data(), a.data() + a.size(), p.x);
        auto [pb, eb] = std::from_chars(b.data(), b.data() + b.size(), p.y);
        if (ea != std::errc{} || pa != a.data() + a.size() || eb != std::errc{} || pb != b.data() + b.size()) {
            throw ParseError(line_no, "non-numeric value");
        }
        points.push_back(p);
    }
    if (!header) throw ParseError(line_no, "missing header line");
    return points;
}

nlohmann::json to_json(const LinearModel& m) {
    return {
        {"intercept", m.intercept},
        {"slope", m.slope},
        {"r_squared", m.r_squared},
        {"n_points", m.n_points},
        {"x_name", m.x_name},
        {"y_name", m.y_name},
        {"x_min", m.x_min},
        {"x_max", m.x_max},
    };
}

nlohmann::json to_json(const GainReport& g) {
    auto op = [](const OperatingPoint& p) {
        return nlohmann::json{{"peers", p.peers}, {"messages_per_s", p.messages_per_s}, {"cpu_percent", p.cpu_percent}};
    };
    auto squelched = op(g.squelched);
    squelched["peers_exact"] = g.squelched_peers_exact;
    return {
        {"baseline", op(g.baseline)},
        {"squelched", squelched},
        {"cpu_saved_percent", g.cpu_saved_percent},
        {"freed_slots", g.freed_slots},
        {"connectivity_gain_percent", g.connectivity_gain_percent},
    };
}

}  // namespace squelchsim
