#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aatr/dataset.hpp"
#include "aatr/grid.hpp"

namespace aatr {

struct RawSeries {
    std::string unit_id;
    std::vector<double> times;   // mapped into [a, b], strictly increasing
    std::vector<double> values;
};

enum class ResponseTransform { identity, log, mean };

inline ResponseTransform parse_response_transform(const std::string& s) {
    if (s == "identity") return ResponseTransform::identity;
    if (s == "log") return ResponseTransform::log;
    if (s == "mean") return ResponseTransform::mean;
    throw std::invalid_argument("unknown response transform: " + s);
}

struct LoadReport {
    int units_in = 0;
    std::vector<std::string> excluded;  // units dropped for too few points
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& s, const std::string& what, int lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": cannot parse " +
                                 what + " value '" + s + "'");
    }
}

}  // namespace detail

// Long CSV with header `unit,time,value`. Clock times are mapped linearly
// from [time_lo, time_hi) onto [a, b]; units with too few points are
// dropped and reported. Units come back sorted by id.
inline std::vector<RawSeries> load_long_csv(const std::string& path, const Grid& grid,
                                            int min_points_per_unit, LoadReport* report,
                                            double time_lo = 0.0, double time_hi = 24.0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "unit" || header[1] != "time" ||
        header[2] != "value")
        throw std::runtime_error(path + ": expected header unit,time,value");

    std::map<std::string, std::vector<std::pair<double, double>>> by_unit;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 3)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected 3 fields, got " + std::to_string(f.size()));
        double t = detail::parse_double(f[1], "time", lineno);
        double v = detail::parse_double(f[2], "value", lineno);
        by_unit[f[0]].emplace_back(t, v);
    }

    std::vector<RawSeries> out;
    LoadReport rep;
    rep.units_in = int(by_unit.size());
    const double scale = (grid.b() - grid.a()) / (time_hi - time_lo);
    for (auto& [unit, rows] : by_unit) {
        std::sort(rows.begin(), rows.end());
        for (size_t i = 1; i < rows.size(); ++i)
            if (rows[i].first == rows[i - 1].first)
                throw std::runtime_error("duplicate timestamp " +
                                         std::to_string(rows[i].first) + " in unit " + unit);
        if (int(rows.size()) < min_points_per_unit) {
            rep.excluded.push_back(unit);
            continue;
        }
        RawSeries s;
        s.unit_id = unit;
        for (auto& [t, v] : rows) {
            s.times.push_back(grid.a() + (t - time_lo) * scale);
            s.values.push_back(v);
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) throw std::runtime_error(path + ": no units retained");
    if (report) *report = std::move(rep);
    return out;
}

// Natural cubic spline interpolation through the observations, evaluated at
// the grid midpoints, constant beyond the first/last observation.
inline Vector resample_to_grid(const RawSeries& series, const Grid& grid) {
    const int n = int(series.times.size());
    if (n < 4)
        throw std::runtime_error("unit " + series.unit_id +
                                 ": need at least 4 points for cubic interpolation");
    const double span = series.times.back() - series.times.front();
    if (span < 0.6 * grid.length())
        throw std::runtime_error("unit " + series.unit_id +
                                 ": observations span less than 60% of the domain");

    const auto& t = series.times;
    const auto& v = series.values;

    // Second derivatives from the natural-spline tridiagonal system.
    std::vector<double> m(n, 0.0), diag(n, 0.0), rhs(n, 0.0), off(n, 0.0);
    for (int i = 1; i < n - 1; ++i) {
        double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
        diag[i] = 2.0 * (h0 + h1);
        rhs[i] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
        off[i] = h1;
    }
    for (int i = 2; i < n - 1; ++i) {
        double h0 = t[i] - t[i - 1];
        double w = h0 / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (int i = n - 2; i >= 1; --i)
        m[i] = (rhs[i] - off[i] * m[i + 1]) / diag[i];

    Vector out(grid.size());
    int seg = 0;
    for (int j = 0; j < grid.size(); ++j) {
        double x = grid.point(j);
        if (x <= t.front()) { out[j] = v.front(); continue; }
        if (x >= t.back()) { out[j] = v.back(); continue; }
        while (seg < n - 2 && t[seg + 1] < x) ++seg;
        double h = t[seg + 1] - t[seg];
        double a = (t[seg + 1] - x) / h, b = (x - t[seg]) / h;
        out[j] = a * v[seg] + b * v[seg + 1] +
                 ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
    }
    return out;
}

// Stack resampled units (lexicographic unit order) against their responses.
// Responses may have several values per unit when the transform is `mean`.
inline FunctionalDataset build_dataset(
    const std::vector<RawSeries>& series,
    const std::map<std::string, std::vector<double>>& responses, const Grid& grid,
    ResponseTransform transform = ResponseTransform::identity) {
    Matrix x(series.size(), grid.size());
    Vector y(series.size());
    for (size_t i = 0; i < series.size(); ++i) {
        auto it = responses.find(series[i].unit_id);
        if (it == responses.end() || it->second.empty())
            throw std::runtime_error("no response for unit " + series[i].unit_id);
        double r;
        switch (transform) {
            case ResponseTransform::mean: {
                double s = 0.0;
                for (double v : it->second) s += v;
                r = s / double(it->second.size());
                break;
            }
            case ResponseTransform::log: {
                if (it->second.size() != 1)
                    throw std::runtime_error("unit " + series[i].unit_id +
                                             ": multiple responses without mean transform");
                if (!(it->second[0] > 0.0))
                    throw std::runtime_error("unit " + series[i].unit_id +
                                             ": non-positive response under log transform");
                r = std::log(it->second[0]);
                break;
            }
            default:
                if (it->second.size() != 1)
                    throw std::runtime_error("unit " + series[i].unit_id +
                                             ": multiple responses without mean transform");
                r = it->second[0];
        }
        x.row(i) = resample_to_grid(series[i], grid).transpose();
        y[i] = r;
    }
    return FunctionalDataset(grid, std::move(x), std::move(y));
}

// `unit,response` CSV.
inline std::map<std::string, std::vector<double>> load_response_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open response file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "unit" || header[1] != "response")
        throw std::runtime_error(path + ": expected header unit,response");
    std::map<std::string, std::vector<double>> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 2)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": expected 2 fields");
        out[f[0]].push_back(detail::parse_double(f[1], "response", lineno));
    }
    return out;
}

// Wide CSV with header `y,x_1,...,x_p` for pre-gridded data.
inline FunctionalDataset load_wide_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    auto header = detail::split_csv_line(line);
    if (int(header.size()) != grid.size() + 1 || header[0] != "y")
        throw std::runtime_error(path + ": expected header y,x_1,...,x_" +
                                 std::to_string(grid.size()) + " but found " +
                                 std::to_string(header.size()) + " columns");
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (int(f.size()) != grid.size() + 1)
            throw std::runtime_error("line " + std::to_string(lineno) +
                                     ": wrong field count");
        std::vector<double> r(f.size());
        for (size_t j = 0; j < f.size(); ++j)
            r[j] = detail::parse_double(f[j], "data", lineno);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    Matrix x(rows.size(), grid.size());
    Vector y(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        y[i] = rows[i][0];
        for (int j = 0; j < grid.size(); ++j) x(i, j) = rows[i][j + 1];
    }
    return FunctionalDataset(grid, std::move(x), std::move(y));
}

}  // namespace aatr
