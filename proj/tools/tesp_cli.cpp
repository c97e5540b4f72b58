#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "tesp/errors.hpp"
#include "tesp/mse.hpp"
#include "tesp/sweep.hpp"

using namespace tesp;

namespace {

void print_value(const char* name, double v) { std::printf("%s = %.17g\n", name, v); }

int run_closed_form(Index m, bool sls, const std::vector<Index>& two_d, double snr_eff) {
    if (!two_d.empty()) {
        const Index m1 = two_d[0], m2 = two_d[1], mt = m1 * m2;
        if (m1 < 2 || m2 < 2) throw ConfigError("--two-d: sizes must be at least 2");
        if (sls) throw UnsupportedError("structured least squares is only defined for 1-D arrays");
        const double mse = closed_form_ls(m1, mt, snr_eff) + closed_form_ls(m2, mt, snr_eff);
        const double crb = closed_form_crb(m1, mt, snr_eff) + closed_form_crb(m2, mt, snr_eff);
        std::printf("array = %lldx%lld\n", static_cast<long long>(m1), static_cast<long long>(m2));
        print_value("effective_snr", snr_eff);
        print_value("mse_mode1", closed_form_ls(m1, mt, snr_eff));
        print_value("mse_mode2", closed_form_ls(m2, mt, snr_eff));
        print_value("mse_total", mse);
        print_value("crb_total", crb);
        print_value("efficiency", crb / mse);
        return 0;
    }
    if (m < 2) throw ConfigError("--m: at least 2 sensors required");
    const double mse = sls ? closed_form_sls(m, snr_eff) : closed_form_ls(m, m, snr_eff);
    const double crb = closed_form_crb(m, m, snr_eff);
    std::printf("sensors = %lld\n", static_cast<long long>(m));
    std::printf("estimator = %s\n", sls ? "sls" : "ls");
    print_value("effective_snr", snr_eff);
    print_value("mse", mse);
    print_value("crb", crb);
    print_value("efficiency", crb / mse);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analytical and Monte-Carlo performance of ESPRIT-type estimators"};
    app.require_subcommand(1);

    auto* sweep = app.add_subcommand("sweep", "run a sweep from a config file and write CSV");
    std::string config_path, out_path;
    std::optional<long long> trials, seed;
    std::string mode;
    bool no_timing = false;
    unsigned threads = 0;
    sweep->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--output", out_path, "CSV output path")->required();
    sweep->add_option("--trials", trials, "override sweep.trials");
    sweep->add_option("--seed", seed, "override sweep.seed");
    sweep->add_option("--mode", mode, "override sweep.mode")->check(CLI::IsMember({"snr", "geometry"}));
    sweep->add_flag("--no-timing", no_timing, "write wall_s = 0 so output is byte-reproducible");
    sweep->add_option("--threads", threads, "worker threads (0: all cores)");

    auto* cf = app.add_subcommand("closed-form", "single-source closed-form MSE, CRB and efficiency");
    Index m = 0;
    bool sls = false;
    std::vector<Index> two_d;
    double snr_eff = 1.0;
    cf->add_option("--m", m, "sensors of a linear array");
    cf->add_flag("--sls", sls, "structured least squares instead of least squares");
    cf->add_option("--two-d", two_d, "rectangular array M1 M2")->expected(2);
    cf->add_option("--snr-eff", snr_eff, "effective SNR N P / sigma^2 (linear)")->check(CLI::PositiveNumber);
    cf->callback([&] {
        if (two_d.empty() && cf->count("--m") == 0) throw CLI::ValidationError("closed-form", "--m or --two-d required");
    });

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            SweepConfig cfg = load_config(config_path);
            if (trials) cfg.trials = static_cast<Index>(*trials);
            if (seed) {
                if (*seed < 0) throw ConfigError("--seed: must be nonnegative");
                cfg.seed = static_cast<std::uint64_t>(*seed);
            }
            if (mode == "snr") cfg.mode = SweepMode::snr;
            if (mode == "geometry") cfg.mode = SweepMode::geometry;
            cfg.validate();
            SweepOptions opt;
            opt.threads = threads;
            opt.timing = !no_timing;
            auto records = run_sweep(cfg, opt);
            emit_csv(records, out_path, cfg.mode);
            std::cerr << "wrote " << records.size() << " rows to " << out_path << "\n";
            return 0;
        }
        return run_closed_form(m, sls, two_d, snr_eff);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
