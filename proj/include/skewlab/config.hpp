#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "skewlab/orbit.hpp"

namespace skewlab {

/// Flat sectioned key=value configuration. Values are kept as the exact
/// strings given (high-precision constants never round at parse time);
/// unknown sections or keys are rejected with field-level diagnostics.
struct RunConfig {
    // [system]
    std::string driver = "rotation"; // rotation | sturmian
    std::string alpha = "golden";
    std::string omega0 = "0";                  // decimal angle, or base index for sturmian
    std::string matrix = "2,1,1,1";            // affine T, row major
    std::string h = "zero";                    // zero | omega | table:<path>
    std::string matrices = "2,1,1,1;1,1,1,2";  // cocycle family
    // [numerics]
    std::string mode = "double"; // double | bigfloat
    long mantissa_bits = 320;
    unsigned long seed = 1;
    // per-command parameters, kept verbatim under their section
    std::map<std::string, std::map<std::string, std::string>> command;

    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);
    std::string emit() const;

    /// Flattened section.key = value view for report echoes.
    std::map<std::string, std::string> flatten() const;

    DriverPtr make_driver() const;
    SkewSystem make_system() const;          // affine by default
    SkewSystem make_cocycle_system() const;  // for lyapunov runs
    NumericsContext make_context() const;

    std::string command_param(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
};

Mat2i parse_matrix(const std::string& csv);
std::vector<Mat2i> parse_matrix_list(const std::string& text);

} // namespace skewlab
