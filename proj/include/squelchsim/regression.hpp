#pragma once

#include "squelchsim/types.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace squelchsim {

struct Point {
    double x;
    double y;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

/// y = intercept + slope * x, with the goodness of fit it was obtained with.
struct LinearModel {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 1.0;
    std::size_t n_points = 0;
    std::string x_name = "x";
    std::string y_name = "y";
    // Range of x the model was fitted on; predictions outside are extrapolations.
    double x_min = 0.0;
    double x_max = 0.0;
};

// Ordinary least squares. Throws DegenerateFitError for fewer than two points
// or when every x is the same.
LinearModel fit_linear(std::span<const Point> points, std::string x_name = "x", std::string y_name = "y");

double predict(const LinearModel& model, double x);
bool extrapolates(const LinearModel& model, double x);

// x as a function of y. Throws DegenerateFitError for a zero slope.
LinearModel invert(const LinearModel& model);

struct OperatingPoint {
    double peers = 0.0;
    double messages_per_s = 0.0;
    double cpu_percent = 0.0;
};

struct GainReport {
    OperatingPoint baseline;
    OperatingPoint squelched;    // peers is the whole number of slots actually needed
    double squelched_peers_exact = 0.0;
    double cpu_saved_percent = 0.0;
    long long freed_slots = 0;
    double connectivity_gain_percent = 0.0;
};

// Extrapolate what a node with `baseline_peers` gains when squelching removes
// `saved_fraction` of its messages: fewer messages map back to fewer peers
// (rounded down), and both peer counts map to CPU.
GainReport compute_gain(const LinearModel& cpu_model, const LinearModel& msgs_model, long long baseline_peers,
                        double saved_fraction);

// "x,y" with one header line.
std::vector<Point> parse_points_csv(std::string_view text, std::string* x_name = nullptr, std::string* y_name = nullptr);

nlohmann::json to_json(const LinearModel& m);
nlohmann::json to_json(const GainReport& g);

}  // namespace squelchsim
