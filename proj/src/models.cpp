/*
 * Copyright (C) 2026 The geoflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "geoflow/models.hpp"
#include "geoflow/csv.hpp"
#include "geoflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace geoflow
{

double r_squared(double ss_res, double ss_tot)
{
    if (ss_tot == 0.0)
        return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

namespace
{

struct OlsResult {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    double r2 = 0.0;
};

// Residual sums below (1e-12)^2 of the response energy are round-off.
double clean_ss(double ss, const Eigen::VectorXd& y)
{
    return ss <= 1e-24 * std::max(1.0, y.squaredNorm()) ? 0.0 : ss;
}

OlsResult ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
{
    const auto n = x.rows();
    const auto p = x.cols();
    if (n < p)
        throw DataError("degenerate design: fewer observations than parameters");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < p)
        throw DataError("degenerate design: regressors are collinear");
    OlsResult r;
    r.coef = qr.solve(y);
    const Eigen::VectorXd resid = y - x * r.coef;
    const double ss_res = clean_ss(resid.squaredNorm(), y);
    double ss_tot = 0.0;
    if ((y.array() != y(0)).any())
        ss_tot = (y.array() - y.mean()).square().sum();
    r.r2 = r_squared(ss_res, ss_tot);
    const double sigma2 = n > p ? ss_res / static_cast<double>(n - p) : 0.0;
    const Eigen::MatrixXd cov = sigma2 * (x.transpose() * x).inverse();
    r.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return r;
}

std::vector<double> tail(std::span<const double> samples, double lo, double hi)
{
    std::vector<double> out;
    for (double x : samples)
        if (x >= lo && x <= hi)
            out.push_back(x);
    return out;
}

} // namespace

PowerLawFit fit_power_law(std::span<const double> samples, double xmin)
{
    if (!(xmin > 0.0))
        throw DataError("fit_power_law: xmin must be positive");
    const auto t = tail(samples, xmin, std::numeric_limits<double>::infinity());
    if (t.size() < 2)
        throw DataError("fit_power_law: need at least two samples >= xmin");
    std::vector<double> logs;
    logs.reserve(t.size());
    for (double x : t)
        logs.push_back(std::log(x / xmin));
    const double sum = exact_sum(logs);
    if (!(sum > 0.0))
        throw DataError("fit_power_law: degenerate tail");
    PowerLawFit fit;
    fit.xmin = xmin;
    fit.n_tail = t.size();
    fit.exponent = 1.0 + static_cast<double>(t.size()) / sum;
    fit.std_error = (fit.exponent - 1.0) / std::sqrt(static_cast<double>(t.size()));
    return fit;
}

PowerLawFit fit_truncated_power_law(std::span<const double> samples, double xmin, double xmax)
{
    if (!(xmin > 0.0) || !(xmax > xmin))
        throw DataError("fit_truncated_power_law: need 0 < xmin < xmax");
    const auto t = tail(samples, xmin, xmax);
    if (t.size() < 2)
        throw DataError("fit_truncated_power_law: need at least two samples in [xmin, xmax]");
    std::vector<double> logs;
    for (double x : t)
        logs.push_back(std::log(x / xmin));
    const double n = static_cast<double>(t.size());
    const double mean = exact_sum(logs) / n;
    const double span_log = std::log(xmax / xmin);
    if (!(mean > 0.0))
        throw DataError("fit_truncated_power_law: degenerate tail");
    if (!(mean < span_log / 2.0))
        throw DataError("fit_truncated_power_law: sample mean implies an exponent <= 1");

    // mean log-excess under a truncated power law with s = exponent - 1
    auto model_mean = [span_log](double s) {
        const double sl = s * span_log;
        if (sl < 1e-6)
            return span_log / 2.0 - s * span_log * span_log / 12.0;
        return 1.0 / s - span_log / std::expm1(sl);
    };
    double lo = 1e-12, hi = 1.0;
    while (model_mean(hi) > mean)
        hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (model_mean(mid) > mean ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    const double e = std::exp(s * span_log);
    const double var = 1.0 / (s * s) - span_log * span_log * e / ((e - 1.0) * (e - 1.0));

    PowerLawFit fit;
    fit.exponent = 1.0 + s;
    fit.xmin = xmin;
    fit.xmax = xmax;
    fit.n_tail = t.size();
    fit.std_error = var > 0.0 ? 1.0 / std::sqrt(n * var) : 0.0;
    return fit;
}

std::vector<LogBin> log_binned_density(std::span<const double> samples, double xmin, double base)
{
    if (!(xmin > 0.0) || !(base > 1.0))
        throw DataError("log_binned_density: need xmin > 0 and base > 1");
    const auto t = tail(samples, xmin, std::numeric_limits<double>::infinity());
    if (t.empty())
        return {};
    const double max = *std::max_element(t.begin(), t.end());
    const auto nbins = static_cast<std::size_t>(std::floor(std::log(max / xmin) / std::log(base))) + 1;
    std::vector<LogBin> bins(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        bins[k].lo = xmin * std::pow(base, static_cast<double>(k));
        bins[k].hi = xmin * std::pow(base, static_cast<double>(k + 1));
        bins[k].center = std::sqrt(bins[k].lo * bins[k].hi);
    }
    for (double x : t) {
        auto k = static_cast<std::size_t>(std::floor(std::log(x / xmin) / std::log(base)));
        k = std::min(k, nbins - 1);
        // guard the floor() against rounding at bin edges
        while (k > 0 && x < bins[k].lo)
            --k;
        while (k + 1 < nbins && x >= bins[k].hi)
            ++k;
        ++bins[k].count;
    }
    for (auto& b : bins)
        b.density = static_cast<double>(b.count) / (static_cast<double>(t.size()) * (b.hi - b.lo));
    return bins;
}

LogLogFit loglog_regression(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw DataError("loglog_regression: x and y differ in length");
    if (x.size() < 3)
        throw DataError("loglog_regression: need at least 3 points");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd response(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw DataError("loglog_regression: values must be positive");
        design(i, 0) = 1.0;
        design(i, 1) = std::log(x[i]);
        response(i) = std::log(y[i]);
    }
    const auto r = ols(design, response);
    return {r.coef(1), r.coef(0), r.r2, x.size()};
}

LogLogFit binned_power_law(std::span<const double> samples, double xmin, double base)
{
    std::vector<double> cx, cy;
    for (const auto& b : log_binned_density(samples, xmin, base))
        if (b.count > 0) {
            cx.push_back(b.center);
            cy.push_back(b.density);
        }
    auto fit = loglog_regression(cx, cy);
    fit.exponent = -fit.exponent;
    return fit;
}

DistanceMatrix::DistanceMatrix(const std::map<std::string, LatLon>& capitals)
{
    for (const auto& [code, _] : capitals)
        codes_.push_back(code);
    const std::size_t n = codes_.size();
    km_.assign(n * n, 0.0);
    std::size_t i = 0;
    for (auto a = capitals.begin(); a != capitals.end(); ++a, ++i) {
        std::size_t j = i + 1;
        for (auto b = std::next(a); b != capitals.end(); ++b, ++j) {
            const double d = haversine_km(a->second, b->second);
            km_[i * n + j] = d;
            km_[j * n + i] = d;
        }
    }
}

std::optional<std::size_t> DistanceMatrix::index(const std::string& code) const
{
    auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
    if (it == codes_.end() || *it != code)
        return std::nullopt;
    return static_cast<std::size_t>(it - codes_.begin());
}

std::optional<double> DistanceMatrix::at(const std::string& a, const std::string& b) const
{
    auto i = index(a);
    auto j = index(b);
    if (!i || !j)
        return std::nullopt;
    return km_[*i * codes_.size() + *j];
}

DistanceMatrix capital_distances(const std::map<std::string, LatLon>& capitals)
{
    return DistanceMatrix(capitals);
}

std::map<std::string, LatLon> read_capitals(const std::filesystem::path& path)
{
    const auto table = read_csv_table(path);
    const auto c_code = table.column("code");
    const auto c_lat = table.column("lat");
    const auto c_lon = table.column("lon");
    std::map<std::string, LatLon> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto lat = parse_double(row[c_lat]);
        auto lon = parse_double(row[c_lon]);
        if (!lat || !lon || *lat < -90 || *lat > 90 || *lon < -180 || *lon > 180)
            throw DataError(fmt::format("{}: row {}: bad coordinates", path.string(), r + 2));
        if (!out.emplace(row[c_code], LatLon{*lat, normalize_lon(*lon)}).second)
            throw DataError(fmt::format("{}: duplicate code '{}'", path.string(), row[c_code]));
    }
    return out;
}

double GravityFit::predict(double pop_origin, double pop_destination, double distance_km) const
{
    return std::exp(log_a) * std::pow(pop_origin, alpha) * std::pow(pop_destination, beta) /
           std::pow(distance_km, gamma);
}

GravityFit fit_gravity(std::span<const GravityObservation> observations, double min_distance_km)
{
    GravityFit fit;
    std::vector<const GravityObservation*> used;
    for (const auto& o : observations) {
        if (!(o.flow > 0.0)) {
            ++fit.excluded_zero;
            continue;
        }
        if (!(o.pop_origin > 0.0) || !(o.pop_destination > 0.0) || !(o.distance_km > 0.0)) {
            ++fit.excluded_missing;
            continue;
        }
        if (o.distance_km < min_distance_km) {
            ++fit.excluded_near;
            continue;
        }
        used.push_back(&o);
    }
    if (used.size() < 5)
        throw DataError(fmt::format("degenerate design: {} usable pairs, need at least 5", used.size()));

    const auto n = static_cast<Eigen::Index>(used.size());
    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = *used[i];
        x(i, 0) = 1.0;
        x(i, 1) = std::log(o.pop_origin);
        x(i, 2) = std::log(o.pop_destination);
        x(i, 3) = -std::log(o.distance_km);
        y(i) = std::log(o.flow);
    }
    const auto r = ols(x, y);
    fit.log_a = r.coef(0);
    fit.alpha = r.coef(1);
    fit.beta = r.coef(2);
    fit.gamma = r.coef(3);
    fit.se_log_a = r.se(0);
    fit.se_alpha = r.se(1);
    fit.se_beta = r.se(2);
    fit.se_gamma = r.se(3);
    fit.r2 = r.r2;
    fit.n_pairs = used.size();
    return fit;
}

GravityFit fit_gravity(const FlowNetwork& network, WeightKind kind, const std::map<std::string, double>& populations,
                       const DistanceMatrix& distances, double min_distance_km)
{
    std::map<std::pair<std::string, std::string>, double> flows;
    for (const auto& e : network.edges)
        flows[{e.origin, e.destination}] = e.weight(kind);
    auto pop = [&](const std::string& c) {
        auto it = populations.find(c);
        return it == populations.end() ? 0.0 : it->second;
    };
    std::vector<GravityObservation> obs;
    for (const auto& a : network.nodes) {
        for (const auto& b : network.nodes) {
            if (a.code == b.code)
                continue;
            GravityObservation o;
            o.origin = a.code;
            o.destination = b.code;
            auto f = flows.find({a.code, b.code});
            o.flow = f == flows.end() ? 0.0 : f->second;
            o.pop_origin = pop(a.code);
            o.pop_destination = pop(b.code);
            o.distance_km = distances.at(a.code, b.code).value_or(0.0);
            obs.push_back(std::move(o));
        }
    }
    return fit_gravity(obs, min_distance_km);
}

ExternalValidation validate_external(const std::map<std::string, double>& estimates,
                                     const std::map<std::string, double>& reference)
{
    ExternalValidation v;
    std::vector<double> xs, ys;
    for (const auto& [code, x] : estimates) {
        auto it = reference.find(code);
        if (it == reference.end()) {
            v.only_estimates.push_back(code);
            continue;
        }
        xs.push_back(x);
        ys.push_back(it->second);
    }
    for (const auto& [code, _] : reference)
        if (!estimates.count(code))
            v.only_reference.push_back(code);
    v.matched = xs.size();
    if (v.matched < 3)
        throw DataError(fmt::format("validate_external: {} matched countries, need at least 3", v.matched));

    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    const bool x_const = std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs[0]; });
    const bool y_const = std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys[0]; });
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (x_const || y_const || sxx == 0.0 || syy == 0.0) {
        v.slope = 0.0;
        v.intercept = my;
        v.r2 = 0.0;
        return v;
    }
    v.slope = sxy / sxx;
    v.intercept = my - v.slope * mx;
    v.r2 = std::min(1.0, sxy * sxy / (sxx * syy));
    return v;
}

ReferenceStats read_reference_stats(const std::filesystem::path& path)
{
    const auto table = read_csv_table(path);
    const auto c_code = table.column("code");
    const auto c_arr = table.column("arrivals_thousands");
    const auto c_rec = table.column("receipts_musd");
    ReferenceStats out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto read = [&](std::size_t col, std::map<std::string, double>& dst) {
            if (row[col].empty())
                return;
            auto v = parse_double(row[col]);
            if (!v)
                throw DataError(fmt::format("{}: row {}: bad number '{}'", path.string(), r + 2, row[col]));
            dst[row[c_code]] = *v;
        };
        read(c_arr, out.arrivals_thousands);
        read(c_rec, out.receipts_musd);
    }
    return out;
}

} // namespace geoflow
