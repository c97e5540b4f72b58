#pragma once

#include <string>

#include "tesp/config.hpp"

namespace tesp {

struct SweepRecord {
    Variant variant = Variant::standard;
    double x = 0.0;  // snr in dB, or sensors per dimension in geometry mode
    OutputKind kind = OutputKind::empirical;
    double mse_total = 0.0;
    Index trials_used = 0;
    double fail_frac = 0.0;
    double wall_seconds = 0.0;
};

struct SweepOptions {
    unsigned threads = 0;  // 0: hardware concurrency
    bool timing = true;    // false writes wall_s = 0 for byte-identical output
};

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const SweepOptions& opt = {});

// Sum over sources and modes of the squared wrapped error, minimised over source permutations.
double matched_squared_error(const rmat& mu_hat, const rmat& mu);

void sort_records(std::vector<SweepRecord>& records);
std::string format_csv(std::vector<SweepRecord> records, SweepMode mode);
void emit_csv(const std::vector<SweepRecord>& records, const std::string& path, SweepMode mode = SweepMode::snr);

}  // namespace tesp
