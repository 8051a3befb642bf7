#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bbw/broken_basis.hpp"
#include "bbw/errors.hpp"
#include "bbw/knots.hpp"
#include "bbw/lifting.hpp"
#include "bbw/refinement.hpp"
#include "bbw/smooth_family.hpp"
#include "bbw/transform.hpp"

// Serialization of the library's objects and the experiment configuration
// format. All numeric text is written with 17 significant digits so outputs
// are deterministic and round-trip exactly.

namespace bbw {

using nlohmann::json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---- family descriptors ----

inline json family_to_json(const SmoothFamily& family) {
    json arr = json::array();
    for (const SmoothFunction& f : family.members()) {
        json d;
        switch (f.kind()) {
        case FuncKind::Power:
            d = {{"kind", "power"}, {"degree", f.degree()}};
            break;
        case FuncKind::CenteredPower:
            d = {{"kind", "centered_power"}, {"degree", f.degree()}, {"center", f.center()}};
            break;
        case FuncKind::Sine:
            d = {{"kind", "sin"}, {"freq", f.freq()}};
            break;
        case FuncKind::Cosine:
            d = {{"kind", "cos"}, {"freq", f.freq()}};
            break;
        case FuncKind::Exponential:
            d = {{"kind", "exp"}, {"rate", f.rate()}};
            break;
        case FuncKind::Tabulated:
            throw DomainError("tabulated members have no descriptor form");
        }
        arr.push_back(std::move(d));
    }
    return arr;
}

inline SmoothFunction function_from_json(const json& d) {
    if (!d.is_object() || !d.contains("kind") || !d["kind"].is_string())
        throw DomainError("family member descriptor needs a \"kind\" string");
    const std::string kind = d["kind"].get<std::string>();
    const auto need = [&](const char* field) -> double {
        if (!d.contains(field) || !d[field].is_number())
            throw DomainError("descriptor \"" + kind + "\" needs numeric \"" + field + "\"");
        return d[field].get<double>();
    };
    if (kind == "power") return SmoothFunction::power(static_cast<int>(need("degree")));
    if (kind == "centered_power")
        return SmoothFunction::centered_power(static_cast<int>(need("degree")), need("center"));
    if (kind == "sin") return SmoothFunction::sine(need("freq"));
    if (kind == "cos") return SmoothFunction::cosine(need("freq"));
    if (kind == "exp") return SmoothFunction::exponential(need("rate"));
    throw DomainError("unknown family member kind \"" + kind + "\"");
}

inline SmoothFamily family_from_json(const json& arr) {
    if (!arr.is_array() || arr.size() < 2)
        throw DomainError("family must be an array of at least 2 descriptors");
    std::vector<SmoothFunction> members;
    for (const json& d : arr) members.push_back(function_from_json(d));
    return SmoothFamily(std::move(members));
}

// ---- basis, band matrix, scheme ----

inline json basis_to_json(const BrokenBasis& basis) {
    json coeffs = json::object();
    for (std::size_t k = 0; k < basis.count(); ++k) {
        json per_interval = json::object();
        for (std::size_t i = basis.first_interval(k); i <= basis.last_interval(k); ++i)
            per_interval[std::to_string(i)] = basis.segment(k, i);
        coeffs[std::to_string(k)] = std::move(per_interval);
    }
    return json{{"order", basis.order()},
                {"knots", basis.grid().data()},
                {"coeffs", std::move(coeffs)}};
}

inline json band_to_json(const BandMatrix& m) {
    json cols = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) {
        const BandMatrix::Column& col = m.column(k);
        cols.push_back(json{{"start", col.start}, {"values", col.values}});
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"columns", std::move(cols)}};
}

inline json scheme_to_json(const LiftingScheme& scheme) {
    json steps = json::array();
    const auto taps_to_json = [](const std::vector<Tap>& taps) {
        json band = json::array();
        for (const Tap& t : taps) band.push_back(json::array({t.row, t.col, t.value}));
        return band;
    };
    for (const LiftStep& step : scheme.steps) {
        const char* type = step.kind == LiftStep::Kind::Update
                               ? "U"
                               : (step.kind == LiftStep::Kind::InitialPredict ? "P0" : "P");
        steps.push_back(json{{"type", type}, {"band", taps_to_json(step.taps)}});
    }
    json dband = json::array();
    for (std::size_t m = 0; m < scheme.scale.size(); ++m)
        dband.push_back(json::array({m, m, scheme.scale[m]}));
    steps.push_back(json{{"type", "D"}, {"band", std::move(dband)}});
    steps.push_back(json{{"type", "U"}, {"band", taps_to_json(scheme.update)}});
    return json{{"fine", scheme.fine_count},
                {"coarse", scheme.coarse_count},
                {"details", scheme.detail_count},
                {"steps", std::move(steps)}};
}

// ---- pyramids and coefficient files ----

inline json pyramid_to_json(const CoefficientPyramid& pyr) {
    return json{{"coarse", pyr.coarse}, {"details", pyr.details}};
}

inline CoefficientPyramid pyramid_from_json(const json& j) {
    if (!j.is_object() || !j.contains("coarse") || !j.contains("details"))
        throw DomainError("pyramid needs \"coarse\" and \"details\"");
    CoefficientPyramid pyr;
    pyr.coarse = j["coarse"].get<Vector>();
    pyr.details = j["details"].get<std::vector<Vector>>();
    return pyr;
}

// Flat form: one "level,index,value" row per coefficient; level 0 is the
// coarse band, level j >= 1 the details entering between grids j-1 and j.
inline std::string pyramid_to_csv(const CoefficientPyramid& pyr) {
    std::string out = "level,index,value\n";
    for (std::size_t i = 0; i < pyr.coarse.size(); ++i)
        out += "0," + std::to_string(i) + "," + fmt17(pyr.coarse[i]) + "\n";
    for (std::size_t j = 0; j < pyr.details.size(); ++j)
        for (std::size_t i = 0; i < pyr.details[j].size(); ++i)
            out += std::to_string(j + 1) + "," + std::to_string(i) + "," +
                   fmt17(pyr.details[j][i]) + "\n";
    return out;
}

inline CoefficientPyramid pyramid_from_csv(std::istream& in) {
    CoefficientPyramid pyr;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("level", 0) == 0) continue;
        }
        std::istringstream ls(line);
        std::string cell;
        long level, index;
        double value;
        try {
            std::getline(ls, cell, ',');
            level = std::stol(cell);
            std::getline(ls, cell, ',');
            index = std::stol(cell);
            std::getline(ls, cell, ',');
            value = std::stod(cell);
        } catch (const std::exception&) {
            throw IoError("malformed pyramid row: " + line);
        }
        if (level < 0 || index < 0) throw IoError("negative level or index: " + line);
        if (level == 0) {
            if (static_cast<std::size_t>(index) != pyr.coarse.size())
                throw IoError("coarse rows out of order at: " + line);
            pyr.coarse.push_back(value);
        } else {
            const std::size_t band = static_cast<std::size_t>(level) - 1;
            if (band >= pyr.details.size()) pyr.details.resize(band + 1);
            if (static_cast<std::size_t>(index) != pyr.details[band].size())
                throw IoError("detail rows out of order at: " + line);
            pyr.details[band].push_back(value);
        }
    }
    if (pyr.coarse.empty()) throw IoError("pyramid file has no coarse band");
    return pyr;
}

// One value per line.
inline Vector read_coefficients(std::istream& in) {
    Vector out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw IoError("expected one number per line, got: " + line);
        }
    }
    if (out.empty()) throw IoError("coefficient file is empty");
    return out;
}

inline std::string write_coefficients(const Vector& v) {
    std::string out;
    for (double x : v) out += fmt17(x) + "\n";
    return out;
}

// ---- experiment configuration ----

struct ExperimentConfig {
    SmoothFamily family;
    KnotHierarchy hierarchy;
    std::size_t vanishing_moments = 2;
    std::size_t sample_count = 1000;
    std::optional<SmoothFunction> project_target;
};

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    if (!j.contains("order") || !j["order"].is_number_integer())
        throw DomainError("config needs an integer \"order\"");
    const int order = j["order"].get<int>();
    if (!j.contains("family")) throw DomainError("config needs a \"family\" array");
    SmoothFamily family = family_from_json(j["family"]);
    if (family.order() != order)
        throw DomainError("family has " + std::to_string(family.order()) +
                          " members but order is " + std::to_string(order));
    if (!(family.member(0) == SmoothFunction::power(0)) ||
        !(family.member(1) == SmoothFunction::power(1)))
        throw DomainError("family must start with the constant and linear members");

    if (!j.contains("knots")) throw DomainError("config needs \"knots\"");
    const json& kn = j["knots"];
    std::vector<KnotGrid> grids;
    if (kn.is_array()) {
        if (kn.empty() || !kn[0].is_array())
            throw DomainError("\"knots\" must be a list of per-level knot lists");
        for (const json& level : kn) grids.emplace_back(level.get<std::vector<double>>());
    } else if (kn.is_object()) {
        if (!kn.contains("coarse") || !kn["coarse"].is_array())
            throw DomainError("\"knots\" object needs a \"coarse\" list");
        if (!kn.contains("levels") || !kn["levels"].is_number_integer() ||
            kn["levels"].get<long>() < 0)
            throw DomainError("\"knots\" object needs a nonnegative integer \"levels\"");
        const std::string insertion =
            kn.contains("insertion") ? kn["insertion"].get<std::string>() : "midpoint";
        if (insertion != "midpoint")
            throw DomainError("unsupported insertion rule \"" + insertion + "\"");
        grids.emplace_back(kn["coarse"].get<std::vector<double>>());
        const long levels = kn["levels"].get<long>();
        for (long l = 0; l < levels; ++l) grids.push_back(refine_midpoint(grids.back()));
    } else {
        throw DomainError("\"knots\" must be a list of levels or a refinement recipe");
    }

    ExperimentConfig cfg{std::move(family), KnotHierarchy(std::move(grids)), 2, 1000,
                         std::nullopt};
    if (j.contains("vanishing_moments")) {
        if (!j["vanishing_moments"].is_number_integer() || j["vanishing_moments"].get<long>() < 1)
            throw DomainError("\"vanishing_moments\" must be a positive integer");
        cfg.vanishing_moments = j["vanishing_moments"].get<std::size_t>();
    }
    if (j.contains("sample_count")) {
        if (!j["sample_count"].is_number_integer() || j["sample_count"].get<long>() < 2)
            throw DomainError("\"sample_count\" must be an integer of at least 2");
        cfg.sample_count = j["sample_count"].get<std::size_t>();
    }
    if (j.contains("project_target")) cfg.project_target = function_from_json(j["project_target"]);
    return cfg;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
    return j;
}

} // namespace bbw
