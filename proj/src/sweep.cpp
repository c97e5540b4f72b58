#include "tesp/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "tesp/errors.hpp"
#include "tesp/mse.hpp"

namespace tesp {

double matched_squared_error(const rmat& mu_hat, const rmat& mu) {
    if (mu_hat.rows() != mu.rows() || mu_hat.cols() != mu.cols()) throw DimensionError("matched error: shape mismatch");
    std::vector<Index> perm(mu.rows());
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double e = 0.0;
        for (Index k = 0; k < mu.rows(); ++k)
            for (Index r = 0; r < mu.cols(); ++r) {
                double diff = std::remainder(mu_hat(perm[k], r) - mu(k, r), 2.0 * std::numbers::pi);
                e += diff * diff;
            }
        best = std::min(best, e);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Point {
    double x;
    double sigma2;
};

struct Group {
    Scenario scenario;
    std::vector<Point> points;
};

struct TrialResult {
    bool exact_ok = false;
    double semi_unit = 0, ana_unit = 0, crb_unit = 0;
    double t_semi = 0, t_ana = 0, t_crb = 0;
    std::vector<double> emp;
    std::vector<char> emp_ok;
    std::vector<double> t_emp;
};

constexpr std::uint64_t kFixedSymbolStream = std::numeric_limits<std::uint64_t>::max();

std::uint64_t trial_stream(Index t, int slot) { return static_cast<std::uint64_t>(t) * 4u + static_cast<std::uint64_t>(slot); }

cmat draw_symbols(const SweepConfig& cfg, const Scenario& s, std::uint64_t stream) {
    Rng rng = make_rng(cfg.seed, stream);
    cmat sym = generate_symbols(s, rng);
    if (cfg.normalize_power) {
        const double target = static_cast<double>(s.snapshots * s.sources()) * s.power;
        sym *= std::sqrt(target / sym.squaredNorm());
    }
    return sym;
}

NoiseSpec unit_noise(const SweepConfig& cfg) { return NoiseSpec::improper(1.0, cfg.circularity); }

bool wants(const SweepConfig& cfg, OutputKind k) {
    return std::find(cfg.outputs.begin(), cfg.outputs.end(), k) != cfg.outputs.end();
}

std::vector<Group> make_groups(const SweepConfig& cfg) {
    std::vector<Group> groups;
    if (cfg.mode == SweepMode::snr) {
        Group g{cfg.scenario, {}};
        for (double snr : cfg.snr_db) g.points.push_back({snr, std::pow(10.0, -snr / 10.0)});
        groups.push_back(std::move(g));
    } else {
        for (Index m : cfg.geometry_sensors) {
            Scenario s = cfg.scenario;
            for (auto& v : s.sensors) v = m;
            groups.push_back({s, {{static_cast<double>(m), std::pow(10.0, -cfg.geometry_snr_db / 10.0)}}});
        }
    }
    return groups;
}

void run_trial(const SweepConfig& cfg, const Group& g, Variant v, Index t, const ExactModel* fixed_exact,
               const cmat* fixed_symbols, const NoiseSampler& sampler, const NoiseSpec& unit, TrialResult& out) {
    const Scenario& s = g.scenario;
    const std::size_t np = g.points.size();
    out.emp.assign(np, 0.0);
    out.emp_ok.assign(np, 0);
    out.t_emp.assign(np, 0.0);

    cmat symbols = fixed_symbols ? *fixed_symbols : draw_symbols(cfg, s, trial_stream(t, 0));
    Rng nrng = make_rng(cfg.seed, trial_stream(t, 1));
    const cmat unit_noise_draw = sampler.draw(nrng);

    const bool need_exact = wants(cfg, OutputKind::semi_analytical) || wants(cfg, OutputKind::analytical) ||
                            wants(cfg, OutputKind::efficiency);
    std::optional<ExactModel> own;
    const ExactModel* ex = fixed_exact;
    if (need_exact && !ex) {
        try {
            own = build_exact(s, symbols, v);
            ex = &*own;
        } catch (const std::exception&) {
            ex = nullptr;
        }
    }
    out.exact_ok = ex != nullptr;
    if (ex && wants(cfg, OutputKind::semi_analytical)) {
        auto t0 = Clock::now();
        out.semi_unit = dmu_first_order(unit_noise_draw, *ex).delta_mu.squaredNorm();
        out.t_semi = seconds_since(t0);
    }
    if (ex && (wants(cfg, OutputKind::analytical) || wants(cfg, OutputKind::efficiency))) {
        auto t0 = Clock::now();
        out.ana_unit = analytical_mse(*ex, unit).mse_total();
        out.t_ana = seconds_since(t0);
    }
    if (wants(cfg, OutputKind::crb) || wants(cfg, OutputKind::efficiency)) {
        auto t0 = Clock::now();
        try {
            out.crb_unit = crb_deterministic(s, symbols, 1.0).crb_total();
        } catch (const std::exception&) {
            out.crb_unit = std::numeric_limits<double>::quiet_NaN();
        }
        out.t_crb = seconds_since(t0);
    }
    if (wants(cfg, OutputKind::empirical)) {
        for (std::size_t p = 0; p < np; ++p) {
            auto t0 = Clock::now();
            try {
                ObservationSet obs = observe(s, symbols, std::sqrt(g.points[p].sigma2) * unit_noise_draw);
                EstimateReport est = estimate(obs, s, v);
                if (est.mu_hat.allFinite()) {
                    out.emp[p] = matched_squared_error(est.mu_hat, s.mu);
                    out.emp_ok[p] = 1;
                }
            } catch (const std::exception&) {
            }
            out.t_emp[p] = seconds_since(t0);
        }
    }
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const SweepOptions& opt) {
    cfg.validate();
    std::vector<SweepRecord> records;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<Index>(opt.threads ? opt.threads : hw, cfg.trials));
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (const Group& g : make_groups(cfg)) {
        const Scenario& s = g.scenario;
        s.validate();
        NoiseSpec unit = unit_noise(cfg);
        NoiseSampler sampler(unit, s.total_sensors(), s.snapshots);
        std::optional<cmat> fixed_symbols;
        if (!cfg.symbols_per_trial) fixed_symbols = draw_symbols(cfg, s, kFixedSymbolStream);

        for (Variant v : cfg.variants) {
            std::optional<ExactModel> fixed_exact;
            bool fixed_failed = false;
            if (fixed_symbols) {
                try {
                    fixed_exact = build_exact(s, *fixed_symbols, v);
                } catch (const std::exception&) {
                    fixed_failed = true;
                }
            }
            std::vector<TrialResult> res(static_cast<std::size_t>(cfg.trials));
            auto work = [&](unsigned w) {
                for (Index t = w; t < cfg.trials; t += workers) {
                    const ExactModel* fe = fixed_exact ? &*fixed_exact : nullptr;
                    TrialResult& r = res[static_cast<std::size_t>(t)];
                    if (fixed_failed) {
                        // exact quantities unavailable for every trial; empirical still runs
                        SweepConfig only_emp = cfg;
                        only_emp.outputs = {OutputKind::empirical};
                        run_trial(only_emp, g, v, t, nullptr, &*fixed_symbols, sampler, unit, r);
                        r.exact_ok = false;
                    } else {
                        run_trial(cfg, g, v, t, fe, fixed_symbols ? &*fixed_symbols : nullptr, sampler, unit, r);
                    }
                }
            };
            if (workers <= 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
                for (auto& th : pool) th.join();
            }

            // ordered reduction keeps results independent of the worker count
            Index exact_ok = 0, crb_ok = 0;
            double semi = 0, ana = 0, crb = 0, t_semi = 0, t_ana = 0, t_crb = 0;
            for (const auto& r : res) {
                if (r.exact_ok) {
                    ++exact_ok;
                    semi += r.semi_unit;
                    ana += r.ana_unit;
                }
                if (std::isfinite(r.crb_unit)) {
                    ++crb_ok;
                    crb += r.crb_unit;
                }
                t_semi += r.t_semi;
                t_ana += r.t_ana;
                t_crb += r.t_crb;
            }
            const double trials = static_cast<double>(cfg.trials);
            auto mean = [&](double sum, Index n) { return n ? sum / static_cast<double>(n) : nan; };
            for (std::size_t p = 0; p < g.points.size(); ++p) {
                const double s2 = g.points[p].sigma2;
                auto push = [&](OutputKind k, double value, Index used, double wall) {
                    SweepRecord rec;
                    rec.variant = v;
                    rec.x = g.points[p].x;
                    rec.kind = k;
                    rec.trials_used = used;
                    rec.fail_frac = 1.0 - static_cast<double>(used) / trials;
                    rec.mse_total = used ? value : nan;
                    rec.wall_seconds = opt.timing ? wall : 0.0;
                    records.push_back(rec);
                };
                if (wants(cfg, OutputKind::empirical)) {
                    Index ok = 0;
                    double sum = 0, wall = 0;
                    for (const auto& r : res) {
                        wall += r.t_emp[p];
                        if (r.emp_ok[p]) {
                            ++ok;
                            sum += r.emp[p];
                        }
                    }
                    push(OutputKind::empirical, mean(sum, ok), ok, wall);
                }
                if (wants(cfg, OutputKind::semi_analytical))
                    push(OutputKind::semi_analytical, s2 * mean(semi, exact_ok), exact_ok, t_semi);
                if (wants(cfg, OutputKind::analytical))
                    push(OutputKind::analytical, s2 * mean(ana, exact_ok), exact_ok, t_ana);
                if (wants(cfg, OutputKind::crb)) push(OutputKind::crb, s2 * mean(crb, crb_ok), crb_ok, t_crb);
                if (wants(cfg, OutputKind::efficiency))
                    push(OutputKind::efficiency, mean(crb, crb_ok) / mean(ana, exact_ok), std::min(exact_ok, crb_ok),
                         t_ana + t_crb);
            }
        }
    }
    sort_records(records);
    return records;
}

void sort_records(std::vector<SweepRecord>& records) {
    std::stable_sort(records.begin(), records.end(), [](const SweepRecord& a, const SweepRecord& b) {
        const std::string va = variant_name(a.variant), vb = variant_name(b.variant);
        if (va != vb) return va < vb;
        if (a.x != b.x) return a.x < b.x;
        return kind_name(a.kind) < kind_name(b.kind);
    });
}

std::string format_csv(std::vector<SweepRecord> records, SweepMode mode) {
    sort_records(records);
    std::ostringstream out;
    out << "variant," << (mode == SweepMode::geometry ? "m_sensors" : "snr_db")
        << ",kind,mse_total,trials,fail_frac,wall_s\n";
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << variant_name(r.variant) << ',';
        if (mode == SweepMode::geometry) out << static_cast<long long>(r.x);
        else out << r.x;
        out << ',' << kind_name(r.kind) << ',' << r.mse_total << ',' << r.trials_used << ',' << r.fail_frac << ','
            << r.wall_seconds << '\n';
    }
    return out.str();
}

void emit_csv(const std::vector<SweepRecord>& records, const std::string& path, SweepMode mode) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write CSV '" + path + "'");
    out << format_csv(records, mode);
    if (!out) throw std::runtime_error("error writing CSV '" + path + "'");
}

}  // namespace tesp
