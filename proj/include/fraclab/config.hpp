#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/forms.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

struct BumpSpec {
    std::array<double, 2> center{0.0, 0.0};
    double radius = 1.0;
    double amplitude = 0.0;
};

/// constant + sum of mother bumps; the constant is also the value outside the box.
struct ConductivitySpec {
    double constant = 1.0;
    std::vector<BumpSpec> bumps;
};

struct ExperimentConfig {
    std::string experiment; // verify|solve|reconstruct|stability|scaling|invariance|poincare
    int n = 1;
    double L = 8.0;
    int m = 256;
    double s = 0.25;
    std::optional<Box> omega;
    std::optional<Box> window;
    std::optional<Box> window2;
    double window_min_dist = -1.0; // default: one node layer
    ConductivitySpec conductivity;
    std::optional<ConductivitySpec> conductivity2;
    std::array<double, 2> x0{0.0, 0.0};
    int moments = 3;
    std::vector<int> n_schedule{2, 4, 8, 16};
    std::vector<double> t_list;
    std::string estimate_rule = "calibrated";
    std::string method = "cg";
    std::string kernel_mode = "pair";
    double tol = 1e-10;
    int samples = 40;
    unsigned long seed = 0;
    bool deterministic = true;
    std::string outdir = "out";
    bool plot = false;
    std::string level = "fast";
};

/// Parses and validates the flat JSON config; unknown keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

GridFunction realize_conductivity(const GridPtr& grid, const ConductivitySpec& spec);
Conductivity make_conductivity(const GridPtr& grid, const ConductivitySpec& spec);

} // namespace fraclab
