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
#ifndef GEOFLOW_NETWORK_HPP
#define GEOFLOW_NETWORK_HPP

#include "geoflow/residence.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geoflow
{

enum class WeightKind { Raw, Est };

struct FlowNode {
    std::string code;
    std::int64_t residents = 0;
    std::int64_t mobile_residents = 0; ///< distinct residents seen abroad
    std::optional<double> penetration;

    friend bool operator==(const FlowNode&, const FlowNode&) = default;
};

struct FlowEdge {
    std::string origin;
    std::string destination;
    std::int64_t raw_weight = 0; ///< distinct users of `origin` seen in `destination`
    double est_weight = 0.0;     ///< raw / penetration(origin) once normalised

    double weight(WeightKind kind) const { return kind == WeightKind::Raw ? double(raw_weight) : est_weight; }

    friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

/// Directed country-to-country flow graph. Nodes are sorted by code, edges
/// by (origin, destination); there are no self-loops.
struct FlowNetwork {
    std::vector<FlowNode> nodes;
    std::vector<FlowEdge> edges;
    bool normalized = false;

    const FlowNode* find_node(const std::string& code) const;
};

/// Edge (i, j) counts users resident in i with at least one event in j != i.
/// Before normalisation est_weight mirrors raw_weight.
FlowNetwork build_flow_network(const ProfileMap& profiles);

struct NetworkFilter {
    /// Minimum distinct mobile residents ("outgoing population") of a node.
    std::int64_t min_outgoing = 500;
    double min_penetration = 0.0005;
    std::int64_t min_residents = 0;
};

/// Drops nodes failing any threshold (or lacking a census penetration) with
/// all incident edges, then sets est_weight = raw_weight / penetration(origin).
FlowNetwork normalize_and_filter(const FlowNetwork& network, const CountryStatsMap& stats,
                                 const NetworkFilter& filter = {});

struct Balance {
    std::string country;
    double inflow = 0.0;
    double outflow = 0.0;
    double balance = 0.0; ///< inflow - outflow, correctly rounded
};

/// Per-node inflow, outflow and balance, in node order.
std::vector<Balance> inflow_outflow_balance(const FlowNetwork& network, WeightKind kind = WeightKind::Est);

/// Sum of all node balances evaluated exactly; zero up to representation for
/// any network since every edge enters once with each sign.
double total_balance(const FlowNetwork& network, WeightKind kind = WeightKind::Est);

/// The k heaviest edges, ties by (origin, destination) ascending.
std::vector<FlowEdge> top_k_flows(const FlowNetwork& network, std::size_t k = 30,
                                  WeightKind kind = WeightKind::Est);

} // namespace geoflow

#endif
