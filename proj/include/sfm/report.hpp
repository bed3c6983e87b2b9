#pragma once

// JSON documents and fixed-width tables for every pipeline stage.
// JSON output uses stable key order and 17 significant digits, so
// parse -> re-emit reproduces the same bytes.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfm/classify.hpp"
#include "sfm/mc.hpp"
#include "sfm/moments.hpp"
#include "sfm/solver.hpp"

namespace sfm {

using Json = nlohmann::ordered_json;

inline std::string format_real(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void dump_json(const Json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += inner + Json(it.key()).dump() + ": ";
                dump_json(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ", ";
                first = false;
                dump_json(v, out, indent + 1);
            }
            out += "]";
            return;
        }
        case Json::value_t::number_float:
            out += format_real(j.get<double>());
            return;
        default:
            out += j.dump();
    }
}

}  // namespace detail

inline std::string dump_json(const Json& j) {
    std::string out;
    detail::dump_json(j, out, 0);
    out += "\n";
    return out;
}

inline Json to_json(const MomentSet& m) {
    Json j;
    j["mu_x"] = m.mu_x;
    j["sigma2_x"] = m.sigma2_x;
    j["mu_r"] = m.mu_r;
    j["sigma2_r"] = m.sigma2_r;
    j["rho"] = m.rho;
    j["mean_x"] = m.mean_x;
    j["mean_re"] = m.mean_re;
    j["mean_rf"] = m.mean_rf;
    j["n_obs"] = m.n_obs;
    j["convention"] = std::string(to_string(m.convention));
    j["gap"] = lognormality_gap(m);
    return j;
}

inline Json to_json(const Residuals& r) {
    Json j;
    j["r2"] = r.r2;
    j["r3"] = r.r3;
    j["r4"] = r.r4;
    j["r5"] = r.r5;
    j["norm"] = r.norm;
    return j;
}

inline Json to_json(const ModelParams& p) {
    Json j;
    j["beta"] = p.beta;
    j["omega"] = p.omega;
    j["delta"] = p.delta;
    j["tau"] = p.tau;
    return j;
}

/// `gap` is the lognormality gap in effect for the chosen lnEx mode (0 for lognormal-implied).
inline Json to_json(const Solution& s, double gap) {
    Json j;
    j["params"] = to_json(s.params);
    j["residuals"] = to_json(s.residuals);
    j["rank"] = s.numerical_rank;
    j["singular_values"] = Json::array();
    for (double v : s.jacobian_singular_values) j["singular_values"].push_back(v);
    j["gap"] = gap;
    j["converged"] = std::string(to_string(s.converged));
    j["iterations"] = s.iterations;
    return j;
}

inline Json to_json(const ManifoldPoint& p) {
    Json j;
    j["tau"] = p.tau;
    j["beta"] = p.beta;
    j["omega"] = p.omega;
    j["delta"] = p.delta;
    j["residuals"] = to_json(p.residuals);
    return j;
}

inline Json to_json(const RankReport& r) {
    Json j;
    j["singular_values"] = Json::array();
    for (double v : r.singular_values) j["singular_values"].push_back(v);
    j["rank"] = r.numerical_rank;
    j["gap"] = r.gap;
    j["residual_floor"] = r.residual_floor;
    j["euler_gap"] = r.euler_gap;
    return j;
}

inline Json to_json(const InvestorReport& r) {
    Json j;
    j["investor"] = std::string(to_string(r.investor));
    j["year"] = r.year;
    j["stdf"] = r.stdf;
    j["sfom"] = r.sfom;
    j["crra"] = r.crra;
    j["certain_utility"] = r.certain_utility;
    j["uncertain_utility"] = r.uncertain_utility;
    j["label"] = r.label;
    return j;
}

inline Json to_json(const mc::ValidationReport& rep) {
    Json j;
    j["draws"] = rep.draws;
    j["seed"] = rep.seed;
    j["band"] = mc::acceptance_band;
    j["all_pass"] = rep.all_pass();
    j["cases"] = Json::array();
    for (const auto& r : rep.results) {
        Json c;
        c["name"] = r.name;
        c["a"] = r.a;
        c["b"] = r.b;
        c["closed_form"] = r.closed_form;
        c["sample"] = r.sample;
        c["std_error"] = r.std_error;
        c["z"] = r.z;
        c["marginal_z"] = r.marginal_z;
        c["pass"] = r.pass;
        j["cases"].push_back(std::move(c));
    }
    return j;
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace detail

// Tables: parameters with 4 decimals, utilities with 8, diagnostics in %.6e.

inline std::string solution_table(const Solution& s, double gap, const RankReport& diag) {
    using detail::fmt;
    std::string t;
    t += "STDF    SFOM(risk-free)  SFOM(equity)  CRRA\n";
    t += fmt("%-8.4f", s.params.beta) + fmt("%-17.4f", s.params.omega) + fmt("%-14.4f", s.params.delta) +
         fmt("%.4f", s.params.tau) + "\n\n";
    t += "residual  value\n";
    t += "r2        " + fmt("%.6e", s.residuals.r2) + "\n";
    t += "r3        " + fmt("%.6e", s.residuals.r3) + "\n";
    t += "r4        " + fmt("%.6e", s.residuals.r4) + "\n";
    t += "r5        " + fmt("%.6e", s.residuals.r5) + "\n";
    t += "norm      " + fmt("%.6e", s.residuals.norm) + "\n\n";
    t += "gap             " + fmt("%.6e", gap) + "\n";
    t += "residual floor  " + fmt("%.6e", diag.residual_floor) + "\n";
    t += "euler gap       " + fmt("%.6e", diag.euler_gap) + "\n";
    t += "rank            " + std::to_string(s.numerical_rank) + "\n";
    t += "singular values";
    for (double v : s.jacobian_singular_values) t += " " + fmt("%.6e", v);
    t += "\n";
    t += "converged       " + std::string(to_string(s.converged)) + " after " + std::to_string(s.iterations) +
         " iterations\n";
    return t;
}

inline std::string manifold_table(const std::vector<ManifoldPoint>& pts) {
    using detail::fmt;
    std::string t = "CRRA      STDF      SFOM(risk-free)  SFOM(equity)  r5\n";
    for (const auto& p : pts)
        t += fmt("%-10.4f", p.tau) + fmt("%-10.4f", p.beta) + fmt("%-17.4f", p.omega) + fmt("%-14.4f", p.delta) +
             fmt("%.6e", p.residuals.r5) + "\n";
    return t;
}

inline std::string investor_table(const InvestorReport& r) {
    using detail::fmt;
    std::string t = r.investor == Investor::equity ? "Calculation Results for Equity Investors\n"
                                                   : "Calculation Results for Risk-free Asset Investors\n";
    t += "STDF    SFOM    CRRA    Certain Utility  Uncertain Utility  Type of investor Year " +
         std::to_string(r.year) + "\n";
    t += fmt("%-8.4f", r.stdf) + fmt("%-8.4f", r.sfom) + fmt("%-8.4f", r.crra) + fmt("%-17.8f", r.certain_utility) +
         fmt("%-19.8f", r.uncertain_utility) + capitalized(r.label) + "\n";
    return t;
}

inline std::string validation_table(const mc::ValidationReport& rep) {
    using detail::fmt;
    std::string t = "draws " + std::to_string(rep.draws) + ", seed " + std::to_string(rep.seed) + ", band " +
                    fmt("%g", mc::acceptance_band) + " s.e.\n";
    for (const auto& r : rep.results) {
        char line[256];
        std::snprintf(line, sizeof line, "%-4s %-28s closed=% .6e sample=% .6e se=%.3e z=% .3f\n",
                      r.pass ? "PASS" : "FAIL", r.name.c_str(), r.closed_form, r.sample, r.std_error, r.z);
        t += line;
    }
    return t;
}

}  // namespace sfm
