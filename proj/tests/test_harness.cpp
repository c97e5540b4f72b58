#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tesp/errors.hpp"
#include "tesp/mse.hpp"
#include "tesp/sweep.hpp"

using namespace tesp;
namespace fs = std::filesystem;

namespace {

std::string config_dir() {
    const char* dir = std::getenv("TESP_CONFIG_DIR");
    return dir ? dir : "configs";
}

const char* kMinimal = R"(
[scenario]
sensors = 4
snapshots = 10
mu = 0.5

[sweep]
snr_db = 10 20
)";

struct Row {
    std::string variant, kind;
    double x, mse, fail;
    long long trials;
};

std::vector<Row> parse_csv(const std::string& text, std::string* header = nullptr) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string f[7];
        for (auto& s : f) std::getline(ls, s, ',');
        rows.push_back({f[0], f[2], std::stod(f[1]), std::stod(f[3]), std::stod(f[5]), std::stoll(f[4])});
    }
    return rows;
}

const SweepRecord& find(const std::vector<SweepRecord>& recs, Variant v, double x, OutputKind k) {
    for (const auto& r : recs)
        if (r.variant == v && r.x == x && r.kind == k) return r;
    FAIL("record not found");
    return recs.front();
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    SweepConfig c = parse_config(kMinimal);
    CHECK(c.trials == 1000);
    CHECK(c.seed == 1);
    CHECK(c.symbols_per_trial);
    CHECK(c.mode == SweepMode::snr);
    CHECK(c.variants == std::vector<Variant>{Variant::standard});
    CHECK(c.outputs.size() == 3);
    CHECK(c.scenario.rho == 0.0);
    CHECK(c.scenario.power == 1.0);
    CHECK(c.circularity == 0.0);
}

TEST_CASE("shipped correlated 8x8 config") {
    SweepConfig c = load_config(config_dir() + "/corr3_8x8.ini");
    CHECK(c.scenario.sources() == 3);
    CHECK(c.scenario.rho == doctest::Approx(0.97));
    CHECK(c.scenario.sensors == Dims{8, 8});
    CHECK(c.scenario.snapshots == 20);
    CHECK(c.scenario.mu(2, 1) == doctest::Approx(-0.5));
}

TEST_CASE("every shipped config loads") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(config_dir())) {
        if (entry.path().extension() != ".ini") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path().string()));
        ++count;
    }
    CHECK(count >= 8);
}

TEST_CASE("invalid configs are rejected") {
    auto with = [](const std::string& extra) { return std::string(kMinimal) + extra; };
    CHECK_THROWS_AS(parse_config(with("trials = -5\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("trials = 0\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("colour = blue\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("[extra]\nx = 1\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("variants = tls\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("outputs = magic\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(with("symbols = sometimes\n")), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[noise]\nkind = improper\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[noise]\nkind = improper\ncircularity = 2\n"), ConfigError);
    std::string decreasing = kMinimal;
    decreasing.replace(decreasing.find("10 20"), 5, "20 10");
    CHECK_THROWS_AS(parse_config(decreasing), ConfigError);
    std::string two_d = kMinimal;
    two_d.replace(two_d.find("sensors = 4"), 11, "sensors = 4 4");
    two_d.replace(two_d.find("mu = 0.5"), 8, "mu = 0.5 0.1");
    CHECK_NOTHROW(parse_config(two_d));
    CHECK_THROWS_AS(parse_config(two_d + "variants = sls\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), ConfigError);
}

TEST_CASE("validation errors name the field") {
    try {
        parse_config(std::string(kMinimal) + "trials = -5\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("sweep.trials") != std::string::npos);
    }
}

TEST_CASE("parse errors report the line") {
    try {
        parse_config("[scenario]\nsensors = 4\nthis line is broken\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("empty record list gives a header-only CSV") {
    CHECK(format_csv({}, SweepMode::snr) == "variant,snr_db,kind,mse_total,trials,fail_frac,wall_s\n");
    CHECK(format_csv({}, SweepMode::geometry) == "variant,m_sensors,kind,mse_total,trials,fail_frac,wall_s\n");
}

TEST_CASE("CSV round trip") {
    std::vector<SweepRecord> recs;
    recs.push_back({Variant::unitary, 20.0, OutputKind::analytical, 1.234567890123456e-7, 100, 0.0, 0.5});
    recs.push_back({Variant::standard, 10.0, OutputKind::empirical, 3.0 / 7.0, 97, 0.03, 0.25});
    recs.push_back({Variant::standard, -5.5, OutputKind::crb, 2.0 / 3.0, 100, 0.0, 0.0});
    const fs::path path = fs::temp_directory_path() / "tesp_roundtrip.csv";
    emit_csv(recs, path.string());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string header;
    auto rows = parse_csv(ss.str(), &header);
    CHECK(header == "variant,snr_db,kind,mse_total,trials,fail_frac,wall_s");
    REQUIRE(rows.size() == 3);
    // sorted by variant, then x, then kind
    CHECK(rows[0].variant == "standard");
    CHECK(rows[0].x == -5.5);
    CHECK(rows[1].mse == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
    CHECK(std::abs(rows[1].mse - 3.0 / 7.0) < 1e-12 * 3.0 / 7.0);
    CHECK(std::abs(rows[1].fail - 0.03) < 1e-15);
    CHECK(rows[1].trials == 97);
    CHECK(std::abs(rows[2].mse - 1.234567890123456e-7) < 1e-12 * 1.234567890123456e-7);
    CHECK(rows[2].kind == "analytical");
    fs::remove(path);
}

TEST_CASE("CSV write errors name the path") {
    try {
        emit_csv({}, "/nonexistent-dir/out.csv");
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("/nonexistent-dir/out.csv") != std::string::npos);
    }
}

TEST_CASE("single source analytical rows equal the closed form") {
    SweepConfig c = parse_config(std::string(kMinimal) + "trials = 20\nnormalize_power = true\n"
                                                         "outputs = empirical semi_analytical analytical crb\n");
    auto recs = run_sweep(c, {1, false});
    REQUIRE(recs.size() == 8);
    for (double snr : {10.0, 20.0}) {
        const double snr_eff = 10.0 * std::pow(10.0, snr / 10.0);  // N P / sigma^2
        const auto& ana = find(recs, Variant::standard, snr, OutputKind::analytical);
        CHECK(std::abs(ana.mse_total / closed_form_ls(4, 4, snr_eff) - 1.0) < 1e-8);
        const auto& crb = find(recs, Variant::standard, snr, OutputKind::crb);
        CHECK(std::abs(crb.mse_total / closed_form_crb(4, 4, snr_eff) - 1.0) < 1e-8);
        CHECK(ana.trials_used == 20);
        CHECK(ana.fail_frac == 0.0);
        CHECK(find(recs, Variant::standard, snr, OutputKind::empirical).mse_total > 0.0);
    }
}

TEST_CASE("vanishing noise: all kinds go to zero together") {
    const char* cfg = R"(
[scenario]
sensors = 4 4
snapshots = 8
mu = 1.0 -0.5, -0.5 1.0
rho = 0.5
[sweep]
snr_db = 100 140
variants = standard unitary_tensor
trials = 200
)";
    auto recs = run_sweep(parse_config(cfg), {1, false});
    for (Variant v : {Variant::standard, Variant::unitary_tensor})
        for (double snr : {100.0, 140.0}) {
            const double emp = find(recs, v, snr, OutputKind::empirical).mse_total;
            const double semi = find(recs, v, snr, OutputKind::semi_analytical).mse_total;
            const double ana = find(recs, v, snr, OutputKind::analytical).mse_total;
            CHECK(ana < 1e-8);
            CHECK(emp / ana > 0.8);
            CHECK(emp / ana < 1.2);
            CHECK(semi / ana > 0.8);
            CHECK(semi / ana < 1.2);
        }
}

TEST_CASE("failures are counted, not fatal") {
    SweepConfig c = load_config(config_dir() + "/four_sources_m8_n3.ini");
    c.trials = 10;
    c.snr_db = {30.0};
    auto recs = run_sweep(c, {1, false});
    for (OutputKind k : {OutputKind::empirical, OutputKind::semi_analytical, OutputKind::analytical}) {
        const auto& bad = find(recs, Variant::standard, 30.0, k);
        CHECK(bad.fail_frac == 1.0);
        CHECK(bad.trials_used == 0);
        CHECK(std::isnan(bad.mse_total));
        const auto& good = find(recs, Variant::unitary, 30.0, k);
        CHECK(good.fail_frac == 0.0);
        CHECK(good.mse_total > 0.0);
    }
}

TEST_CASE("structured least squares improves on least squares for four sources") {
    SweepConfig c = load_config(config_dir() + "/four_sources_m8_n3_sls.ini");
    c.trials = 500;
    c.outputs = {OutputKind::empirical};
    auto recs = run_sweep(c, {1, false});
    for (double snr : {50.0, 60.0})
        CHECK(find(recs, Variant::unitary_sls, snr, OutputKind::empirical).mse_total <=
              find(recs, Variant::unitary, snr, OutputKind::empirical).mse_total);
}

TEST_CASE("identical config and seed give byte-identical CSV for any thread count") {
    SweepConfig c = load_config(config_dir() + "/corr2_5x6.ini");
    c.trials = 12;
    c.snr_db = {20.0, 40.0};
    c.variants = {Variant::standard, Variant::unitary_tensor};
    c.outputs = {OutputKind::empirical, OutputKind::semi_analytical, OutputKind::analytical, OutputKind::crb};
    const std::string a = format_csv(run_sweep(c, {1, false}), c.mode);
    const std::string b = format_csv(run_sweep(c, {1, false}), c.mode);
    const std::string t = format_csv(run_sweep(c, {3, false}), c.mode);
    CHECK(a == b);
    CHECK(a == t);
    c.seed = 2;
    CHECK(format_csv(run_sweep(c, {1, false}), c.mode) != a);
    c.symbols_per_trial = false;
    c.seed = 1;
    CHECK(format_csv(run_sweep(c, {1, false}), c.mode) == format_csv(run_sweep(c, {2, false}), c.mode));
}

TEST_CASE("geometry mode sweeps the array size") {
    SweepConfig c = load_config(config_dir() + "/efficiency_ula.ini");
    c.trials = 5;
    c.geometry_sensors = {2, 3, 5, 8};
    auto recs = run_sweep(c, {1, false});
    const std::string csv = format_csv(recs, c.mode);
    CHECK(csv.rfind("variant,m_sensors,", 0) == 0);
    const double snr_eff = 10.0 / 0.032;
    for (Index m : {2, 3, 5, 8}) {
        const double x = static_cast<double>(m);
        const double eta = find(recs, Variant::standard, x, OutputKind::efficiency).mse_total;
        CHECK(std::abs(eta - efficiency_ls(m)) < 1e-6);
        const double ana = find(recs, Variant::standard, x, OutputKind::analytical).mse_total;
        CHECK(std::abs(ana / closed_form_ls(m, m, snr_eff) - 1.0) < 1e-6);
        const double sls = find(recs, Variant::sls, x, OutputKind::efficiency).mse_total;
        CHECK(std::abs(sls - efficiency_sls(m)) < 1e-6);
    }
}

TEST_CASE("matched error uses the best permutation and wraps") {
    rmat mu(2, 1), est(2, 1);
    mu << 0.1, 3.1;
    est << -3.1, 0.12;
    const double two_pi = 2.0 * 3.14159265358979323846;
    const double expected = std::pow(0.02, 2) + std::pow(-3.1 + two_pi - 3.1, 2);
    CHECK(std::abs(matched_squared_error(est, mu) - expected) < 1e-12);
}
