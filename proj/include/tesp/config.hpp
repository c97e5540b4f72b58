#pragma once

#include <cstdint>
#include <string>

#include "tesp/esprit.hpp"

namespace tesp {

enum class OutputKind { empirical, semi_analytical, analytical, crb, efficiency };

std::string kind_name(OutputKind k);
OutputKind parse_kind(const std::string& name);

enum class SweepMode { snr, geometry };

struct SweepConfig {
    Scenario scenario;
    // White noise; a nonzero circularity c sets the pseudo-covariance to c * sigma^2 * I.
    double circularity = 0.0;
    std::vector<double> snr_db;
    std::vector<Variant> variants;
    std::vector<OutputKind> outputs;
    Index trials = 1000;
    std::uint64_t seed = 1;
    bool symbols_per_trial = true;
    bool normalize_power = false;  // rescale each symbol draw to ||S||_F^2 = N d P_T
    SweepMode mode = SweepMode::snr;
    std::vector<Index> geometry_sensors;  // sensors per dimension, geometry mode
    double geometry_snr_db = 0.0;

    void validate() const;
};

SweepConfig load_config(const std::string& path);
SweepConfig parse_config(const std::string& text);

}  // namespace tesp
