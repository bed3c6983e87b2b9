#pragma once

#include <cctype>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfm/dataset.hpp"
#include "sfm/errors.hpp"

namespace sfm {

inline constexpr double log_utility_threshold = 1e-8;

/// CRRA utility (c^(1-tau) - 1) / (1 - tau), with the ln c limit near tau = 1.
inline double crra_utility(double c, double tau) {
    if (!(c > 0.0)) throw DomainError("consumption must be positive, got " + std::to_string(c));
    const double one_m_tau = 1.0 - tau;
    if (std::abs(one_m_tau) < log_utility_threshold) return std::log(c);
    // expm1 keeps precision when (1 - tau) ln c is small.
    return std::expm1(one_m_tau * std::log(c)) / one_m_tau;
}

/// Consumption level whose CRRA utility equals `utility`.
inline double inverse_crra_utility(double utility, double tau) {
    const double one_m_tau = 1.0 - tau;
    if (std::abs(one_m_tau) < log_utility_threshold) return std::exp(utility);
    const double base = 1.0 + one_m_tau * utility;
    if (!(base > 0.0)) throw DomainError("utility outside the range of the CRRA function");
    return std::exp(std::log1p(one_m_tau * utility) / one_m_tau);
}

/// beta times the equal-weight mean of v(c_now * s) over the growth scenarios s.
inline double uncertain_utility(double c_now, std::span<const double> scenarios, double beta, double tau) {
    if (!(c_now > 0.0)) throw DomainError("consumption must be positive");
    if (scenarios.empty()) throw DomainError("scenario set is empty");
    double sum = 0.0;
    for (double s : scenarios) {
        if (!(s > 0.0)) throw DomainError("scenario growth factors must be positive");
        sum += crra_utility(c_now * s, tau);
    }
    return beta * sum / static_cast<double>(scenarios.size());
}

enum class ScenarioSource { growth, returns };

inline std::string_view to_string(ScenarioSource s) { return s == ScenarioSource::growth ? "growth" : "returns"; }

inline ScenarioSource parse_scenario_source(std::string_view s) {
    if (s == "growth") return ScenarioSource::growth;
    if (s == "returns") return ScenarioSource::returns;
    throw DomainError("unknown scenario source '" + std::string(s) + "'");
}

enum class Investor { equity, riskfree };

inline std::string_view to_string(Investor i) { return i == Investor::equity ? "equity" : "risk-free"; }

/// Empirical consumption growth factors x_t.
inline std::vector<double> growth_scenarios(const GrowthSeries& g) {
    std::vector<double> out;
    out.reserve(g.size());
    for (const auto& o : g.observations) out.push_back(o.x);
    return out;
}

/// Historical gross returns of the asset the investor holds.
inline std::vector<double> return_scenarios(const GrowthSeries& g, Investor investor) {
    std::vector<double> out;
    out.reserve(g.size());
    for (const auto& o : g.observations) out.push_back(investor == Investor::equity ? o.r_e : o.r_f);
    return out;
}

inline std::vector<double> scenarios_for(const GrowthSeries& g, ScenarioSource source, Investor investor) {
    return source == ScenarioSource::growth ? growth_scenarios(g) : return_scenarios(g, investor);
}

/// Risk-attitude family from the sufficiency factor; qualifier from uncertain vs certain utility.
/// Examples: "insufficient risk-loving", "sufficient risk-averse", "neutral".
inline std::string classify_attitude(double certain, double uncertain, double sfom) {
    if (!(sfom > 0.0)) throw DomainError("sufficiency factor must be positive");
    const std::string family = sfom > 1.0 ? "risk-loving" : sfom < 1.0 ? "risk-averse" : "neutral";
    if (uncertain < certain) return "insufficient " + family;
    if (uncertain > certain) return "sufficient " + family;
    return family;
}

/// Label with a leading capital, as printed in report tables.
inline std::string capitalized(std::string label) {
    if (!label.empty()) label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
    return label;
}

struct InvestorReport {
    Investor investor = Investor::equity;
    double stdf = 0.0;
    double sfom = 0.0;
    double crra = 0.0;
    double certain_utility = 0.0;
    double uncertain_utility = 0.0;
    std::string label;
    int year = 0;
};

struct ClassifyInputs {
    int year = 0;
    double beta = 0.0;
    double tau = 0.0;
    double sfom_equity = 0.0;
    double sfom_riskfree = 0.0;
    ScenarioSource scenarios = ScenarioSource::returns;
};

/// Equity row first, then risk-free. Certain utility is v(c_year); uncertain utility averages over scenarios.
inline std::vector<InvestorReport> investor_reports(const MarketSeries& series, const ClassifyInputs& in) {
    if (!(in.beta > 0.0)) throw DomainError("beta must be positive");
    if (!(in.sfom_equity > 0.0) || !(in.sfom_riskfree > 0.0)) throw DomainError("sufficiency factors must be positive");
    const double c = series.at_year(in.year).consumption;
    const GrowthSeries g = growth_series(series);
    const double certain = crra_utility(c, in.tau);

    std::vector<InvestorReport> rows;
    for (Investor inv : {Investor::equity, Investor::riskfree}) {
        const double sfom = inv == Investor::equity ? in.sfom_equity : in.sfom_riskfree;
        const auto sc = scenarios_for(g, in.scenarios, inv);
        InvestorReport r;
        r.investor = inv;
        r.stdf = in.beta;
        r.sfom = sfom;
        r.crra = in.tau;
        r.certain_utility = certain;
        r.uncertain_utility = uncertain_utility(c, sc, in.beta, in.tau);
        r.label = classify_attitude(certain, r.uncertain_utility, sfom);
        r.year = in.year;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace sfm
