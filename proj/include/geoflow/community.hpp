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
#ifndef GEOFLOW_COMMUNITY_HPP
#define GEOFLOW_COMMUNITY_HPP

#include "geoflow/network.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace geoflow
{

/// Dense weighted digraph over labelled nodes. Parallel edges accumulate.
class Digraph
{
public:
    Digraph() = default;
    explicit Digraph(std::vector<std::string> labels);

    /// With `symmetrize` every edge is added in both directions (w + w^T).
    static Digraph from_network(const FlowNetwork& network, WeightKind kind = WeightKind::Est,
                                bool symmetrize = false);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

    void add_edge(std::size_t from, std::size_t to, double weight);
    double weight(std::size_t from, std::size_t to) const { return w_[from * size() + to]; }

    /// Sum of all edge weights, exactly rounded.
    double total_weight() const;

    /// Sub-graph on `nodes` (in the given order) keeping internal edges only.
    Digraph induced(std::span<const std::size_t> nodes) const;

    /// Same graph with every weight multiplied by `factor`.
    Digraph scaled(double factor) const;

private:
    std::vector<std::string> labels_;
    std::vector<double> w_;
};

/// Community assignment with its modularity on the graph it was computed for.
struct Partition {
    std::vector<int> assignment; ///< node -> community id, dense from 0
    double q = 0.0;

    int communities() const;
};

/// Directed modularity with an in/out-strength-preserving null model:
///   Q = 1/W * sum_ij [w_ij - s_i^out s_j^in / W] delta(c_i, c_j).
/// Throws DataError when W == 0.
double modularity(const Digraph& graph, std::span<const int> assignment);

/// Renumbers community ids densely in order of first appearance.
std::vector<int> canonical_labels(std::span<const int> assignment);

struct OptimizerOptions {
    int restarts = 20;
    /// Smallest modularity gain treated as an improvement.
    double tolerance = 1e-12;
};

/// Best partition found over `restarts` randomised runs of a local-move
/// optimiser (Louvain-style sweeps with aggregation, then a Kernighan-Lin
/// style pass of node relocations and community merges).
///
/// Node visit order is shuffled per restart from `seed`; nodes are first put
/// into label order, so permuting the input nodes does not change the result.
/// Ties between restarts go to the lowest restart index. When no restart beats
/// Q = 0 the all-in-one partition is returned.
Partition optimize_partition(const Digraph& graph, std::uint64_t seed, const OptimizerOptions& options = {});

struct PartitionHierarchy {
    std::vector<Partition> levels; ///< levels[0] is the top level; q measured on the full graph
    /// parents[k][c] is the level-(k-1) community that level-k community c came
    /// from; parents[0] is empty.
    std::vector<std::vector<int>> parents;
};

struct HierarchyOptions {
    int max_levels = 3;
    /// Communities smaller than this are never split.
    std::size_t min_split_size = 3;
    /// A sub-network split is adopted only above this modularity.
    double min_split_q = 1e-9;
    OptimizerOptions optimizer;
};

/// Iterative partitioning: level 1 optimises the whole graph, each further
/// level re-optimises the sub-network inside every community of the previous
/// one. Communities that do not split are carried down unchanged.
PartitionHierarchy hierarchical_partition(const Digraph& graph, std::uint64_t seed,
                                          const HierarchyOptions& options = {});

} // namespace geoflow

#endif
