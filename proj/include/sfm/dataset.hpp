#pragma once

// Annual consumption / return series: CSV ingestion, validation and the
// growth/return pairing used by every downstream estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sfm/errors.hpp"

namespace sfm {

/// One year of the historical series. Returns are gross real decimals (1.0698 = 6.98%).
struct AnnualRecord {
    int year = 0;
    double consumption = 0.0;
    double equity_return = 0.0;
    double riskfree_return = 0.0;

    bool operator==(const AnnualRecord&) const = default;
};

/// Validated series: consecutive years in ascending order, at least three rows.
class MarketSeries {
public:
    static constexpr std::size_t min_length = 3;

    explicit MarketSeries(std::vector<AnnualRecord> records);

    const std::vector<AnnualRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    int first_year() const { return records_.front().year; }
    int last_year() const { return records_.back().year; }

    /// Record for `year`; throws DataError when the year is outside the series.
    const AnnualRecord& at_year(int year) const;

    bool operator==(const MarketSeries&) const = default;

private:
    std::vector<AnnualRecord> records_;
};

/// Consumption growth over t-1 -> t paired with the gross returns recorded for year t.
struct GrowthObservation {
    int year = 0;
    double x = 0.0;
    double r_e = 0.0;
    double r_f = 0.0;
};

struct GrowthSeries {
    std::vector<GrowthObservation> observations;

    std::size_t size() const { return observations.size(); }
};

inline constexpr std::string_view csv_header = "year,consumption,equity_return,riskfree_return";

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::string line_error(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

// Strict full-field number parse; rejects trailing junk, thousands separators, etc.
inline double parse_real(const std::string& field, std::size_t line, const char* name) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &used);
    } catch (const std::exception&) {
        throw DataError(line_error(line, std::string("cannot parse ") + name + " '" + field + "'"));
    }
    if (used != field.size() || !std::isfinite(value))
        throw DataError(line_error(line, std::string("cannot parse ") + name + " '" + field + "'"));
    return value;
}

inline int parse_year(const std::string& field, std::size_t line) {
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(field, &used);
    } catch (const std::exception&) {
        throw DataError(line_error(line, "cannot parse year '" + field + "'"));
    }
    if (used != field.size()) throw DataError(line_error(line, "cannot parse year '" + field + "'"));
    return value;
}

}  // namespace detail

inline MarketSeries::MarketSeries(std::vector<AnnualRecord> records) : records_(std::move(records)) {
    std::stable_sort(records_.begin(), records_.end(),
                     [](const AnnualRecord& a, const AnnualRecord& b) { return a.year < b.year; });
    if (records_.size() < min_length)
        throw DataError("series needs at least " + std::to_string(min_length) + " years, got " +
                        std::to_string(records_.size()));
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!(r.consumption > 0.0) || !(r.equity_return > 0.0) || !(r.riskfree_return > 0.0))
            throw DataError("year " + std::to_string(r.year) + ": consumption and returns must be positive");
        if (i > 0) {
            const int prev = records_[i - 1].year;
            if (r.year == prev) throw DataError("duplicate year " + std::to_string(r.year));
            if (r.year != prev + 1)
                throw DataError("year gap between " + std::to_string(prev) + " and " + std::to_string(r.year));
        }
    }
}

inline const AnnualRecord& MarketSeries::at_year(int year) const {
    if (year < first_year() || year > last_year())
        throw DataError("year " + std::to_string(year) + " outside series " + std::to_string(first_year()) + "-" +
                        std::to_string(last_year()));
    return records_[static_cast<std::size_t>(year - first_year())];
}

/// Parse the canonical CSV. Errors name the offending line (1-based, header = line 1).
inline MarketSeries parse_series(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!detail::trim(line).empty()) break;
    }
    if (detail::trim(line) != csv_header)
        throw DataError(detail::line_error(line_no, "expected header '" + std::string(csv_header) + "'"));

    std::vector<AnnualRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(detail::trim(field));
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 4)
            throw DataError(detail::line_error(line_no, "expected 4 fields, got " + std::to_string(fields.size())));

        AnnualRecord rec;
        rec.year = detail::parse_year(fields[0], line_no);
        rec.consumption = detail::parse_real(fields[1], line_no, "consumption");
        rec.equity_return = detail::parse_real(fields[2], line_no, "equity_return");
        rec.riskfree_return = detail::parse_real(fields[3], line_no, "riskfree_return");
        if (!(rec.consumption > 0.0))
            throw DataError(detail::line_error(line_no, "consumption must be positive"));
        if (!(rec.equity_return > 0.0) || !(rec.riskfree_return > 0.0))
            throw DataError(detail::line_error(line_no, "gross returns must be positive"));
        records.push_back(rec);
    }
    return MarketSeries(std::move(records));
}

inline MarketSeries load_series(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open data file '" + path + "'");
    return parse_series(in);
}

inline GrowthSeries growth_series(const MarketSeries& series) {
    const auto& recs = series.records();
    GrowthSeries out;
    out.observations.reserve(recs.size() - 1);
    for (std::size_t i = 1; i < recs.size(); ++i) {
        out.observations.push_back(
            {recs[i].year, recs[i].consumption / recs[i - 1].consumption, recs[i].equity_return,
             recs[i].riskfree_return});
    }
    return out;
}

}  // namespace sfm
