#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tesp/errors.hpp"
#include "tesp/mse.hpp"
#include "tesp/sweep.hpp"

namespace py = pybind11;
using namespace tesp;

namespace {

Scenario make_scenario(const std::vector<Index>& sensors, Index snapshots, const rmat& mu, double rho, double power) {
    Scenario s;
    s.sensors = sensors;
    s.snapshots = snapshots;
    s.mu = mu;
    s.rho = rho;
    s.power = power;
    s.validate();
    return s;
}

py::dict record_dict(const SweepRecord& r) {
    py::dict d;
    d["variant"] = variant_name(r.variant);
    d["x"] = r.x;
    d["kind"] = kind_name(r.kind);
    d["mse_total"] = r.mse_total;
    d["trials"] = r.trials_used;
    d["fail_frac"] = r.fail_frac;
    d["wall_s"] = r.wall_seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tesp, m) {
    m.doc() = "ESPRIT-type estimators with first-order performance analysis";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
    py::register_exception<IllPosedError>(m, "IllPosedError", PyExc_ArithmeticError);

    py::class_<Scenario>(m, "Scenario")
        .def(py::init(&make_scenario), py::arg("sensors"), py::arg("snapshots"), py::arg("mu"), py::arg("rho") = 0.0,
             py::arg("power") = 1.0)
        .def_readonly("sensors", &Scenario::sensors)
        .def_readonly("snapshots", &Scenario::snapshots)
        .def_readonly("mu", &Scenario::mu)
        .def_readonly("rho", &Scenario::rho)
        .def_readonly("power", &Scenario::power)
        .def_property_readonly("sources", &Scenario::sources);

    m.def("variants", [] {
        return std::vector<std::string>{"standard", "unitary", "standard_tensor", "unitary_tensor", "sls", "unitary_sls"};
    });

    m.def("steering_matrix", &steering_matrix, py::arg("scenario"));
    m.def(
        "generate_symbols", [](const Scenario& s, std::uint64_t seed) { return generate_symbols(s, seed); },
        py::arg("scenario"), py::arg("seed"));
    m.def(
        "synthesize",
        [](const Scenario& s, double sigma2, std::uint64_t seed) {
            ObservationSet o = synthesize(s, NoiseSpec::white(sigma2), seed);
            py::dict d;
            d["x"] = o.x;
            d["x0"] = o.x0;
            d["noise"] = o.noise;
            d["symbols"] = o.symbols;
            return d;
        },
        py::arg("scenario"), py::arg("sigma2"), py::arg("seed"), "Noisy observation matrix (rows: sensors, first mode slowest).");
    m.def(
        "estimate",
        [](const cmat& x, const Scenario& s, const std::string& variant) {
            return estimate(observe(s, cmat::Zero(s.sources(), x.cols()), x), s, parse_variant(variant)).mu_hat;
        },
        py::arg("x"), py::arg("scenario"), py::arg("variant") = "standard", "Spatial frequency estimates, d x R.");
    m.def(
        "unfold", [](const cmat& x, const std::vector<Index>& spatial, int mode) {
            return unfold(tensor_from_matrix(x, spatial), mode);
        },
        py::arg("x"), py::arg("sensors"), py::arg("mode"), "Mode unfolding of the tensor view of an observation matrix.");
    m.def(
        "analytical_mse",
        [](const Scenario& s, const cmat& symbols, const std::string& variant, double sigma2) {
            return analytical_mse(build_exact(s, symbols, parse_variant(variant)), NoiseSpec::white(sigma2)).mse;
        },
        py::arg("scenario"), py::arg("symbols"), py::arg("variant"), py::arg("sigma2"));
    m.def(
        "first_order_error",
        [](const Scenario& s, const cmat& symbols, const std::string& variant, const cmat& noise) {
            return dmu_first_order(noise, build_exact(s, symbols, parse_variant(variant))).delta_mu;
        },
        py::arg("scenario"), py::arg("symbols"), py::arg("variant"), py::arg("noise"));
    m.def(
        "crb", [](const Scenario& s, const cmat& symbols, double sigma2) { return crb_deterministic(s, symbols, sigma2).crb; },
        py::arg("scenario"), py::arg("symbols"), py::arg("sigma2"));
    m.def("closed_form_ls", &closed_form_ls, py::arg("m_r"), py::arg("m_total"), py::arg("snr_eff"));
    m.def("closed_form_sls", &closed_form_sls, py::arg("m"), py::arg("snr_eff"));
    m.def("closed_form_crb", &closed_form_crb, py::arg("m_r"), py::arg("m_total"), py::arg("snr_eff"));
    m.def("efficiency_ls", &efficiency_ls, py::arg("m"));
    m.def("efficiency_sls", &efficiency_sls, py::arg("m"));
    m.def(
        "run_sweep",
        [](const std::string& config_text, unsigned threads) {
            SweepConfig cfg = parse_config(config_text);
            SweepOptions opt;
            opt.threads = threads;
            opt.timing = false;
            std::vector<SweepRecord> recs;
            {
                py::gil_scoped_release release;
                recs = run_sweep(cfg, opt);
            }
            py::list out;
            for (const auto& r : recs) out.append(record_dict(r));
            return out;
        },
        py::arg("config_text"), py::arg("threads") = 1, "Run a sweep from config text; returns a list of records.");
    m.def(
        "sweep_csv",
        [](const std::string& config_text, unsigned threads) {
            SweepConfig cfg = parse_config(config_text);
            SweepOptions opt;
            opt.threads = threads;
            opt.timing = false;
            py::gil_scoped_release release;
            return format_csv(run_sweep(cfg, opt), cfg.mode);
        },
        py::arg("config_text"), py::arg("threads") = 1);
}
