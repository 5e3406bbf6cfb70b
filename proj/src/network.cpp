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
#include "geoflow/network.hpp"
#include "geoflow/error.hpp"
#include "geoflow/geo.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace geoflow
{

const FlowNode* FlowNetwork::find_node(const std::string& code) const
{
    auto it = std::lower_bound(nodes.begin(), nodes.end(), code,
                               [](const FlowNode& n, const std::string& c) { return n.code < c; });
    return it != nodes.end() && it->code == code ? &*it : nullptr;
}

FlowNetwork build_flow_network(const ProfileMap& profiles)
{
    std::map<std::string, FlowNode> nodes;
    std::map<std::pair<std::string, std::string>, std::int64_t> edges;
    for (const auto& [_, p] : profiles) {
        auto& home = nodes[p.residence];
        home.code = p.residence;
        ++home.residents;
        bool abroad = false;
        for (const auto& [c, _n] : p.counts) {
            if (c == p.residence)
                continue;
            nodes[c].code = c;
            ++edges[{p.residence, c}];
            abroad = true;
        }
        if (abroad)
            ++home.mobile_residents;
    }
    FlowNetwork net;
    for (auto& [_, n] : nodes)
        net.nodes.push_back(std::move(n));
    for (const auto& [key, w] : edges)
        net.edges.push_back({key.first, key.second, w, static_cast<double>(w)});
    return net;
}

FlowNetwork normalize_and_filter(const FlowNetwork& network, const CountryStatsMap& stats,
                                 const NetworkFilter& filter)
{
    FlowNetwork out;
    out.normalized = true;
    std::set<std::string> keep;
    for (const auto& node : network.nodes) {
        auto it = stats.find(node.code);
        if (it == stats.end() || !it->second.population || *it->second.population <= 0)
            continue;
        const double pen = it->second.penetration;
        if (pen <= 0.0 || pen < filter.min_penetration || node.mobile_residents < filter.min_outgoing ||
            node.residents < filter.min_residents)
            continue;
        FlowNode n = node;
        n.penetration = pen;
        out.nodes.push_back(std::move(n));
        keep.insert(node.code);
    }
    for (const auto& e : network.edges) {
        if (!keep.count(e.origin) || !keep.count(e.destination))
            continue;
        const double pen = *out.find_node(e.origin)->penetration;
        if (!(pen > 0.0))
            throw DataError("surviving node " + e.origin + " has zero penetration");
        FlowEdge f = e;
        f.est_weight = static_cast<double>(e.raw_weight) / pen;
        out.edges.push_back(std::move(f));
    }
    return out;
}

std::vector<Balance> inflow_outflow_balance(const FlowNetwork& network, WeightKind kind)
{
    std::map<std::string, std::vector<double>> in, out;
    for (const auto& e : network.edges) {
        in[e.destination].push_back(e.weight(kind));
        out[e.origin].push_back(e.weight(kind));
    }
    std::vector<Balance> rows;
    for (const auto& node : network.nodes) {
        Balance b;
        b.country = node.code;
        const auto& ins = in[node.code];
        const auto& outs = out[node.code];
        b.inflow = exact_sum(ins);
        b.outflow = exact_sum(outs);
        std::vector<double> signed_terms(ins.begin(), ins.end());
        for (double w : outs)
            signed_terms.push_back(-w);
        b.balance = exact_sum(signed_terms);
        rows.push_back(std::move(b));
    }
    return rows;
}

double total_balance(const FlowNetwork& network, WeightKind kind)
{
    // the pooled signed terms of all node balances: each edge once as inflow, once as outflow
    std::vector<double> terms;
    terms.reserve(2 * network.edges.size());
    for (const auto& e : network.edges) {
        terms.push_back(e.weight(kind));
        terms.push_back(-e.weight(kind));
    }
    return exact_sum(terms);
}

std::vector<FlowEdge> top_k_flows(const FlowNetwork& network, std::size_t k, WeightKind kind)
{
    std::vector<FlowEdge> edges = network.edges;
    std::sort(edges.begin(), edges.end(), [kind](const FlowEdge& a, const FlowEdge& b) {
        if (a.weight(kind) != b.weight(kind))
            return a.weight(kind) > b.weight(kind);
        if (a.origin != b.origin)
            return a.origin < b.origin;
        return a.destination < b.destination;
    });
    if (edges.size() > k)
        edges.resize(k);
    return edges;
}

} // namespace geoflow
