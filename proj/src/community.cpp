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
#include "geoflow/community.hpp"
#include "geoflow/error.hpp"
#include "geoflow/geo.hpp"
#include "geoflow/random.hpp"

#include <algorithm>
#include <map>
#include <limits>
#include <numeric>

namespace geoflow
{

Digraph::Digraph(std::vector<std::string> labels)
    : labels_(std::move(labels)), w_(labels_.size() * labels_.size(), 0.0)
{
}

Digraph Digraph::from_network(const FlowNetwork& network, WeightKind kind, bool symmetrize)
{
    std::vector<std::string> labels;
    std::map<std::string, std::size_t> index;
    for (const auto& n : network.nodes) {
        index.emplace(n.code, labels.size());
        labels.push_back(n.code);
    }
    Digraph g(std::move(labels));
    for (const auto& e : network.edges) {
        auto a = index.find(e.origin);
        auto b = index.find(e.destination);
        if (a == index.end() || b == index.end())
            throw DataError("edge " + e.origin + "->" + e.destination + " references an unknown node");
        g.add_edge(a->second, b->second, e.weight(kind));
        if (symmetrize)
            g.add_edge(b->second, a->second, e.weight(kind));
    }
    return g;
}

void Digraph::add_edge(std::size_t from, std::size_t to, double weight)
{
    if (from >= size() || to >= size())
        throw DataError("Digraph::add_edge: node index out of range");
    if (!(weight >= 0.0))
        throw DataError("Digraph::add_edge: weights must be non-negative");
    w_[from * size() + to] += weight;
}

double Digraph::total_weight() const
{
    return exact_sum(w_);
}

Digraph Digraph::induced(std::span<const std::size_t> nodes) const
{
    std::vector<std::string> labels;
    for (auto n : nodes)
        labels.push_back(labels_.at(n));
    Digraph sub(std::move(labels));
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = 0; b < nodes.size(); ++b)
            sub.w_[a * nodes.size() + b] = weight(nodes[a], nodes[b]);
    return sub;
}

Digraph Digraph::scaled(double factor) const
{
    Digraph g = *this;
    for (auto& w : g.w_)
        w *= factor;
    return g;
}

int Partition::communities() const
{
    return assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
}

std::vector<int> canonical_labels(std::span<const int> assignment)
{
    std::map<int, int> relabel;
    std::vector<int> out(assignment.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        auto [it, _] = relabel.emplace(assignment[i], static_cast<int>(relabel.size()));
        out[i] = it->second;
    }
    return out;
}

double modularity(const Digraph& graph, std::span<const int> assignment)
{
    const std::size_t n = graph.size();
    if (assignment.size() != n)
        throw DataError("modularity: assignment size does not match the graph");
    const auto labels = canonical_labels(assignment);
    const std::size_t k = n ? static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1 : 0;

    // Every aggregate is an exactly rounded sum of raw weights, so that for
    // the all-in-one partition internal == s_out == s_in == W bit for bit.
    std::vector<double> all;
    std::vector<std::vector<double>> internal(k), out(k), in(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double w = graph.weight(i, j);
            if (w == 0.0)
                continue;
            all.push_back(w);
            out[labels[i]].push_back(w);
            in[labels[j]].push_back(w);
            if (labels[i] == labels[j])
                internal[labels[i]].push_back(w);
        }
    }
    const double total = exact_sum(all);
    if (!(total > 0.0))
        throw DataError("modularity: network has zero total weight");
    std::vector<double> terms;
    for (std::size_t c = 0; c < k; ++c) {
        terms.push_back(exact_sum(internal[c]) / total);
        terms.push_back(-(exact_sum(out[c]) / total) * (exact_sum(in[c]) / total));
    }
    return exact_sum(terms);
}

namespace
{

/// Weights divided by the total so that W == 1 and gains are dimensionless.
struct NormalizedGraph {
    std::size_t n = 0;
    std::vector<double> w;
    std::vector<double> out, in;

    double at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

NormalizedGraph normalize(const Digraph& g, double total)
{
    NormalizedGraph ng;
    ng.n = g.size();
    ng.w.resize(ng.n * ng.n);
    ng.out.assign(ng.n, 0.0);
    ng.in.assign(ng.n, 0.0);
    for (std::size_t i = 0; i < ng.n; ++i)
        for (std::size_t j = 0; j < ng.n; ++j) {
            const double w = g.weight(i, j) / total;
            ng.w[i * ng.n + j] = w;
            ng.out[i] += w;
            ng.in[j] += w;
        }
    return ng;
}

NormalizedGraph aggregate(const NormalizedGraph& g, const std::vector<int>& comm, std::size_t k)
{
    NormalizedGraph a;
    a.n = k;
    a.w.assign(k * k, 0.0);
    a.out.assign(k, 0.0);
    a.in.assign(k, 0.0);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j)
            a.w[comm[i] * k + comm[j]] += g.at(i, j);
    for (std::size_t i = 0; i < g.n; ++i) {
        a.out[comm[i]] += g.out[i];
        a.in[comm[i]] += g.in[i];
    }
    return a;
}

/// One Louvain level: greedy moves of single nodes until a sweep makes none.
/// Returns dense community ids (first-appearance order).
std::vector<int> local_moves(const NormalizedGraph& g, Rng& rng, double tol)
{
    const std::size_t n = g.n;
    std::vector<int> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> s_out = g.out, s_in = g.in;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<double> link(n, 0.0);
    std::vector<int> touched;
    for (int sweep = 0; sweep < 1000; ++sweep) {
        bool moved = false;
        for (std::size_t i : order) {
            const int old = comm[i];
            s_out[old] -= g.out[i];
            s_in[old] -= g.in[i];

            touched.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i)
                    continue;
                const double w = g.at(i, j) + g.at(j, i);
                if (w == 0.0)
                    continue;
                if (link[comm[j]] == 0.0)
                    touched.push_back(comm[j]);
                link[comm[j]] += w;
            }
            auto gain = [&](int c) { return link[c] - (g.out[i] * s_in[c] + g.in[i] * s_out[c]); };
            const double stay = gain(old);
            double best_gain = stay;
            for (int c : touched)
                best_gain = std::max(best_gain, gain(c));
            int target = old;
            if (best_gain > stay + tol) {
                target = std::numeric_limits<int>::max();
                for (int c : touched)
                    if (c != old && gain(c) >= best_gain - tol)
                        target = std::min(target, c);
            }
            for (int c : touched)
                link[c] = 0.0;

            comm[i] = target;
            s_out[target] += g.out[i];
            s_in[target] += g.in[i];
            moved = moved || target != old;
        }
        if (!moved)
            break;
    }
    return canonical_labels(comm);
}

std::vector<int> louvain(const NormalizedGraph& graph, Rng& rng, double tol)
{
    std::vector<int> membership(graph.n);
    std::iota(membership.begin(), membership.end(), 0);
    NormalizedGraph level = graph;
    while (true) {
        const auto comm = local_moves(level, rng, tol);
        const std::size_t k = static_cast<std::size_t>(*std::max_element(comm.begin(), comm.end())) + 1;
        for (auto& m : membership)
            m = comm[m];
        if (k == level.n)
            break;
        level = aggregate(level, comm, k);
    }
    return membership;
}

/// Node relocation / merge refinement over a fixed graph.
class Refiner
{
public:
    Refiner(const NormalizedGraph& g, std::vector<int> comm, double tol)
        : g_(g), n_(g.n), comm_(std::move(comm)), tol_(tol)
    {
        rebuild();
    }

    const std::vector<int>& assignment() const { return comm_; }

    void run()
    {
        for (int iter = 0; iter < 200; ++iter) {
            const bool moved = kl_pass();
            const bool merged = merge_pass();
            if (!moved && !merged)
                break;
        }
    }

private:
    void rebuild()
    {
        s_out_.assign(n_, 0.0);
        s_in_.assign(n_, 0.0);
        size_.assign(n_, 0);
        link_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            s_out_[comm_[i]] += g_.out[i];
            s_in_[comm_[i]] += g_.in[i];
            ++size_[comm_[i]];
            for (std::size_t j = 0; j < n_; ++j)
                if (j != i)
                    link_[i * n_ + comm_[j]] += g_.at(i, j) + g_.at(j, i);
        }
    }

    double link(std::size_t i, int c) const { return link_[i * n_ + c]; }

    // modularity change of moving i from its community into c (c may be empty)
    double move_gain(std::size_t i, int c) const
    {
        const int old = comm_[i];
        const double leave = link(i, old) - (g_.out[i] * (s_in_[old] - g_.in[i]) + g_.in[i] * (s_out_[old] - g_.out[i]));
        const double join = link(i, c) - (g_.out[i] * s_in_[c] + g_.in[i] * s_out_[c]);
        return join - leave;
    }

    void apply(std::size_t i, int to)
    {
        const int from = comm_[i];
        s_out_[from] -= g_.out[i];
        s_in_[from] -= g_.in[i];
        --size_[from];
        s_out_[to] += g_.out[i];
        s_in_[to] += g_.in[i];
        ++size_[to];
        comm_[i] = to;
        for (std::size_t m = 0; m < n_; ++m) {
            if (m == i)
                continue;
            const double w = g_.at(m, i) + g_.at(i, m);
            link_[m * n_ + from] -= w;
            link_[m * n_ + to] += w;
        }
    }

    int empty_community() const
    {
        for (std::size_t c = 0; c < n_; ++c)
            if (size_[c] == 0)
                return static_cast<int>(c);
        return -1;
    }

    // Kernighan-Lin style: move every node once along the best available
    // relocation (even if negative), then keep the best prefix of the sequence.
    bool kl_pass()
    {
        rebuild();
        std::vector<char> locked(n_, 0);
        std::vector<std::pair<std::size_t, int>> history; // node, previous community
        double cur = 0.0, best = 0.0;
        std::size_t best_len = 0;
        for (std::size_t step = 0; step < n_; ++step) {
            const int fresh = empty_community();
            double best_gain = -std::numeric_limits<double>::infinity();
            std::size_t best_node = n_;
            int best_target = -1;
            for (std::size_t i = 0; i < n_; ++i) {
                if (locked[i])
                    continue;
                for (std::size_t c = 0; c < n_; ++c) {
                    const int ci = static_cast<int>(c);
                    if (ci == comm_[i])
                        continue;
                    if (size_[c] == 0 && (ci != fresh || size_[comm_[i]] == 1))
                        continue;
                    const double gain = move_gain(i, ci);
                    if (gain > best_gain + tol_) {
                        best_gain = gain;
                        best_node = i;
                        best_target = ci;
                    }
                }
            }
            if (best_node == n_)
                break;
            history.emplace_back(best_node, comm_[best_node]);
            apply(best_node, best_target);
            locked[best_node] = 1;
            cur += best_gain;
            if (cur > best + tol_) {
                best = cur;
                best_len = history.size();
            }
        }
        while (history.size() > best_len) {
            apply(history.back().first, history.back().second);
            history.pop_back();
        }
        return best_len > 0;
    }

    bool merge_pass()
    {
        bool merged = false;
        while (true) {
            std::vector<double> between(n_ * n_, 0.0);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    between[comm_[i] * n_ + comm_[j]] += g_.at(i, j);
            double best_gain = tol_;
            int ba = -1, bb = -1;
            for (std::size_t a = 0; a < n_; ++a) {
                if (size_[a] == 0)
                    continue;
                for (std::size_t b = a + 1; b < n_; ++b) {
                    if (size_[b] == 0)
                        continue;
                    const double gain = between[a * n_ + b] + between[b * n_ + a] -
                                        (s_out_[a] * s_in_[b] + s_out_[b] * s_in_[a]);
                    if (gain > best_gain) {
                        best_gain = gain;
                        ba = static_cast<int>(a);
                        bb = static_cast<int>(b);
                    }
                }
            }
            if (ba < 0)
                return merged;
            for (std::size_t i = 0; i < n_; ++i)
                if (comm_[i] == bb)
                    comm_[i] = ba;
            rebuild();
            merged = true;
        }
    }

    const NormalizedGraph& g_;
    std::size_t n_;
    std::vector<int> comm_;
    double tol_;
    std::vector<double> s_out_, s_in_;
    std::vector<int> size_;
    std::vector<double> link_; // node x community
};

} // namespace

Partition optimize_partition(const Digraph& graph, std::uint64_t seed, const OptimizerOptions& options)
{
    const std::size_t n = graph.size();
    Partition trivial{std::vector<int>(n, 0), 0.0};
    if (n <= 1)
        return trivial;
    const double total = graph.total_weight();
    if (!(total > 0.0))
        return trivial;
    trivial.q = modularity(graph, trivial.assignment);

    // label order makes the result independent of the caller's node order
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return graph.labels()[a] < graph.labels()[b]; });
    const Digraph canon = graph.induced(perm);
    const NormalizedGraph ng = normalize(canon, total);

    std::vector<int> best;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        Refiner refiner(ng, louvain(ng, rng, options.tolerance), options.tolerance);
        refiner.run();
        auto comm = canonical_labels(refiner.assignment());
        const double q = modularity(canon, comm);
        if (q > best_q + options.tolerance) {
            best_q = q;
            best = std::move(comm);
        }
    }
    if (best_q <= options.tolerance)
        return trivial;

    Partition result;
    result.assignment.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k)
        result.assignment[perm[k]] = best[k];
    result.q = best_q;
    return result;
}

PartitionHierarchy hierarchical_partition(const Digraph& graph, std::uint64_t seed, const HierarchyOptions& options)
{
    PartitionHierarchy h;
    if (options.max_levels < 1)
        return h;
    const std::size_t n = graph.size();
    h.levels.push_back(optimize_partition(graph, derive_seed(seed, 1), options.optimizer));
    h.parents.emplace_back();

    for (int level = 2; level <= options.max_levels; ++level) {
        const auto& prev = h.levels.back().assignment;
        const int k_prev = h.levels.back().communities();
        std::vector<int> next(n, -1);
        std::vector<int> parents;
        for (int c = 0; c < k_prev; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (prev[i] == c)
                    members.push_back(i);
            const int base = static_cast<int>(parents.size());
            bool split = false;
            if (members.size() >= options.min_split_size) {
                const Digraph sub = graph.induced(members);
                if (sub.total_weight() > 0.0) {
                    const auto key = (static_cast<std::uint64_t>(level) << 32) | static_cast<std::uint64_t>(c);
                    const Partition p = optimize_partition(sub, derive_seed(seed, key), options.optimizer);
                    if (p.q > options.min_split_q && p.communities() > 1) {
                        for (std::size_t m = 0; m < members.size(); ++m)
                            next[members[m]] = base + p.assignment[m];
                        parents.insert(parents.end(), p.communities(), c);
                        split = true;
                    }
                }
            }
            if (!split) {
                for (auto m : members)
                    next[m] = base;
                parents.push_back(c);
            }
        }
        Partition part;
        part.assignment = std::move(next);
        part.q = graph.total_weight() > 0.0 ? modularity(graph, part.assignment) : 0.0;
        h.levels.push_back(std::move(part));
        h.parents.push_back(std::move(parents));
    }
    return h;
}

} // namespace geoflow
