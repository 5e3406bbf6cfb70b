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
#ifndef GEOFLOW_MODELS_HPP
#define GEOFLOW_MODELS_HPP

#include "geoflow/geo.hpp"
#include "geoflow/network.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geoflow
{

/// Coefficient of determination; when ss_tot == 0 it is 1 for a perfect fit
/// and 0 otherwise.
double r_squared(double ss_res, double ss_tot);

// -- power laws ---------------------------------------------------------------

struct PowerLawFit {
    double exponent = 0.0;
    double xmin = 0.0;
    std::optional<double> xmax; ///< set for the truncated estimator
    std::size_t n_tail = 0;
    double std_error = 0.0;
};

/// Continuous maximum-likelihood exponent of the tail x >= xmin:
///   beta = 1 + n / sum ln(x_i / xmin),  std_error = (beta - 1) / sqrt(n).
/// Throws DataError for fewer than two tail samples or a degenerate tail.
PowerLawFit fit_power_law(std::span<const double> samples, double xmin);

/// Maximum-likelihood exponent of a power law truncated to [xmin, xmax];
/// samples outside the window are ignored. Solved by bisection on the score
/// equation; std_error from the Fisher information.
PowerLawFit fit_truncated_power_law(std::span<const double> samples, double xmin, double xmax);

struct LogBin {
    double lo = 0.0;
    double hi = 0.0;
    double center = 0.0; ///< geometric centre
    std::size_t count = 0;
    double density = 0.0; ///< count / (n_tail * width)
};

/// Logarithmic histogram of the samples >= xmin with bin edges xmin * base^k.
std::vector<LogBin> log_binned_density(std::span<const double> samples, double xmin, double base = 2.0);

struct LogLogFit {
    double exponent = 0.0; ///< slope of ln y on ln x
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// OLS of ln y on ln x. Needs n >= 3 and strictly positive values.
LogLogFit loglog_regression(std::span<const double> x, std::span<const double> y);

/// Exponent estimate from a straight-line fit to the non-empty log bins
/// (returned as -slope, so comparable to fit_power_law).
LogLogFit binned_power_law(std::span<const double> samples, double xmin, double base = 2.0);

// -- gravity model ------------------------------------------------------------

/// Symmetric matrix of great-circle distances between capitals.
class DistanceMatrix
{
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(const std::map<std::string, LatLon>& capitals);

    /// Distance in km, nullopt if either country has no capital.
    std::optional<double> at(const std::string& a, const std::string& b) const;
    const std::vector<std::string>& codes() const { return codes_; }

private:
    std::vector<std::string> codes_;
    std::vector<double> km_;
    std::optional<std::size_t> index(const std::string& code) const;
};

DistanceMatrix capital_distances(const std::map<std::string, LatLon>& capitals);

/// Reads `code,lat,lon` with a header row.
std::map<std::string, LatLon> read_capitals(const std::filesystem::path& path);

struct GravityObservation {
    std::string origin;
    std::string destination;
    double flow = 0.0;
    double pop_origin = 0.0;
    double pop_destination = 0.0;
    double distance_km = 0.0;
};

struct GravityFit {
    double log_a = 0.0;
    double alpha = 0.0; ///< origin population exponent
    double beta = 0.0;  ///< destination population exponent
    double gamma = 0.0; ///< distance decay exponent
    double se_log_a = 0.0, se_alpha = 0.0, se_beta = 0.0, se_gamma = 0.0;
    double r2 = 0.0; ///< in log space
    std::size_t n_pairs = 0;
    std::size_t excluded_zero = 0;    ///< flow <= 0
    std::size_t excluded_near = 0;    ///< closer than the minimum distance
    std::size_t excluded_missing = 0; ///< no population or distance

    /// Forward model A * p_i^alpha * p_j^beta / r^gamma.
    double predict(double pop_origin, double pop_destination, double distance_km) const;
};

/// OLS on ln F = ln A + alpha ln p_i + beta ln p_j - gamma ln r over pairs
/// with F > 0 and r >= min_distance_km. Throws DataError("degenerate design")
/// when the regressors are rank deficient or fewer than 5 pairs remain.
GravityFit fit_gravity(std::span<const GravityObservation> observations, double min_distance_km = 100.0);

/// Gravity fit on a flow network. Every ordered node pair without an edge is
/// counted as an excluded zero flow.
GravityFit fit_gravity(const FlowNetwork& network, WeightKind kind, const std::map<std::string, double>& populations,
                       const DistanceMatrix& distances, double min_distance_km = 100.0);

// -- external statistics ------------------------------------------------------

struct ExternalValidation {
    double r2 = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t matched = 0;
    std::vector<std::string> only_estimates;
    std::vector<std::string> only_reference;
};

/// Linear OLS of reference values on estimated values over the countries in
/// both maps. When either side has no variance there is nothing to explain
/// and r2 is 0. Throws DataError for fewer than 3 matches.
ExternalValidation validate_external(const std::map<std::string, double>& estimates,
                                     const std::map<std::string, double>& reference);

struct ReferenceStats {
    std::map<std::string, double> arrivals_thousands;
    std::map<std::string, double> receipts_musd;
};

/// Reads `code,arrivals_thousands,receipts_musd`; empty cells are skipped.
ReferenceStats read_reference_stats(const std::filesystem::path& path);

} // namespace geoflow

#endif
