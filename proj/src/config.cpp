#include "tesp/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tesp/errors.hpp"

namespace tesp {

namespace pt = boost::property_tree;

std::string kind_name(OutputKind k) {
    switch (k) {
        case OutputKind::empirical: return "empirical";
        case OutputKind::semi_analytical: return "semi_analytical";
        case OutputKind::analytical: return "analytical";
        case OutputKind::crb: return "crb";
        case OutputKind::efficiency: return "efficiency";
    }
    return "unknown";
}

OutputKind parse_kind(const std::string& name) {
    for (OutputKind k : {OutputKind::empirical, OutputKind::semi_analytical, OutputKind::analytical, OutputKind::crb,
                         OutputKind::efficiency})
        if (kind_name(k) == name) return k;
    throw ConfigError("unknown output kind '" + name + "'");
}

void SweepConfig::validate() const {
    scenario.validate();
    if (trials < 1) throw ConfigError("sweep.trials: must be at least 1");
    if (variants.empty()) throw ConfigError("sweep.variants: at least one variant required");
    if (outputs.empty()) throw ConfigError("sweep.outputs: at least one output required");
    if (std::abs(circularity) > 1.0) throw ConfigError("noise.circularity: must lie in [-1, 1]");
    if (mode == SweepMode::snr) {
        if (snr_db.empty()) throw ConfigError("sweep.snr_db: at least one grid point required");
        for (std::size_t i = 1; i < snr_db.size(); ++i)
            if (!(snr_db[i] > snr_db[i - 1])) throw ConfigError("sweep.snr_db: grid must be strictly increasing");
    } else {
        if (geometry_sensors.empty()) throw ConfigError("geometry.sensors: at least one array size required");
        for (std::size_t i = 0; i < geometry_sensors.size(); ++i) {
            if (geometry_sensors[i] < 2) throw ConfigError("geometry.sensors: sizes must be at least 2");
            if (i > 0 && geometry_sensors[i] <= geometry_sensors[i - 1])
                throw ConfigError("geometry.sensors: sizes must be strictly increasing");
        }
    }
    for (Variant v : variants)
        if (uses_sls(v) && scenario.dims() != 1) throw ConfigError("sweep.variants: " + variant_name(v) + " needs a 1-D array");
}

namespace {

const std::map<std::string, std::set<std::string>> kAllowed = {
    {"scenario", {"sensors", "snapshots", "mu", "rho", "power"}},
    {"noise", {"kind", "circularity"}},
    {"sweep", {"mode", "snr_db", "variants", "outputs", "trials", "seed", "symbols", "normalize_power"}},
    {"geometry", {"sensors", "snr_db"}},
};

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

double to_double(const std::string& field, const std::string& w) {
    try {
        std::size_t pos = 0;
        double v = std::stod(w, &pos);
        if (pos != w.size()) throw std::invalid_argument(w);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": '" + w + "' is not a number");
    }
}

long long to_int(const std::string& field, const std::string& w) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(w, &pos);
        if (pos != w.size()) throw std::invalid_argument(w);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field + ": '" + w + "' is not an integer");
    }
}

std::vector<double> doubles(const std::string& field, const std::string& s) {
    std::vector<double> out;
    for (auto& w : words(s)) out.push_back(to_double(field, w));
    return out;
}

std::vector<Index> ints(const std::string& field, const std::string& s) {
    std::vector<Index> out;
    for (auto& w : words(s)) out.push_back(static_cast<Index>(to_int(field, w)));
    return out;
}

// "a b, c d" -> rows separated by commas
rmat matrix_rows(const std::string& field, const std::string& s) {
    std::vector<std::vector<double>> rows;
    std::stringstream in(s);
    for (std::string row; std::getline(in, row, ',');) rows.push_back(doubles(field, row));
    if (rows.empty() || rows.front().empty()) throw ConfigError(field + ": empty");
    rmat m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) throw ConfigError(field + ": rows differ in length");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

bool to_bool(const std::string& field, const std::string& w) {
    if (w == "true" || w == "yes" || w == "1") return true;
    if (w == "false" || w == "no" || w == "0") return false;
    throw ConfigError(field + ": expected true or false");
}

SweepConfig from_tree(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        auto it = kAllowed.find(section);
        if (it == kAllowed.end()) {
            if (body.empty()) throw ConfigError("key '" + section + "' outside of a section");
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
        return std::nullopt;
    };
    auto require = [&](const std::string& path) {
        auto v = get(path);
        if (!v) throw ConfigError(path + ": missing");
        return *v;
    };

    SweepConfig cfg;
    Scenario& s = cfg.scenario;
    s.sensors = ints("scenario.sensors", require("scenario.sensors"));
    s.snapshots = static_cast<Index>(to_int("scenario.snapshots", require("scenario.snapshots")));
    s.mu = matrix_rows("scenario.mu", require("scenario.mu"));
    if (auto v = get("scenario.rho")) s.rho = to_double("scenario.rho", *v);
    if (auto v = get("scenario.power")) s.power = to_double("scenario.power", *v);

    std::string kind = get("noise.kind").value_or("white");
    if (kind == "white") {
        if (get("noise.circularity")) throw ConfigError("noise.circularity: only valid with kind = improper");
    } else if (kind == "improper") {
        cfg.circularity = to_double("noise.circularity", require("noise.circularity"));
    } else {
        throw ConfigError("noise.kind: expected white or improper");
    }

    std::string mode = get("sweep.mode").value_or("snr");
    if (mode == "snr") cfg.mode = SweepMode::snr;
    else if (mode == "geometry") cfg.mode = SweepMode::geometry;
    else throw ConfigError("sweep.mode: expected snr or geometry");
    if (auto v = get("sweep.snr_db")) cfg.snr_db = doubles("sweep.snr_db", *v);
    for (auto& w : words(get("sweep.variants").value_or("standard"))) {
        try {
            cfg.variants.push_back(parse_variant(w));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("sweep.variants: ") + e.what());
        }
    }
    for (auto& w : words(get("sweep.outputs").value_or("empirical semi_analytical analytical"))) {
        try {
            cfg.outputs.push_back(parse_kind(w));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("sweep.outputs: ") + e.what());
        }
    }
    if (auto v = get("sweep.trials")) cfg.trials = static_cast<Index>(to_int("sweep.trials", *v));
    if (auto v = get("sweep.seed")) {
        long long seed = to_int("sweep.seed", *v);
        if (seed < 0) throw ConfigError("sweep.seed: must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(seed);
    }
    std::string symbols = get("sweep.symbols").value_or("per_trial");
    if (symbols == "per_trial") cfg.symbols_per_trial = true;
    else if (symbols == "fixed") cfg.symbols_per_trial = false;
    else throw ConfigError("sweep.symbols: expected per_trial or fixed");
    if (auto v = get("sweep.normalize_power")) cfg.normalize_power = to_bool("sweep.normalize_power", *v);

    if (auto v = get("geometry.sensors")) cfg.geometry_sensors = ints("geometry.sensors", *v);
    if (auto v = get("geometry.snr_db")) cfg.geometry_snr_db = to_double("geometry.snr_db", *v);
    if (cfg.mode == SweepMode::geometry && !get("geometry.snr_db")) throw ConfigError("geometry.snr_db: missing");
    return cfg;
}

}  // namespace

SweepConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("parse error at line " + std::to_string(e.line()) + ": " + e.message());
    }
    SweepConfig cfg = from_tree(tree);
    cfg.validate();
    return cfg;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace tesp
