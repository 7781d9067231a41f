#pragma once

#include "consensus/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace consensus {

enum class ensemble_tag { erdos_renyi, sbm, barabasi_albert, custom };

std::string to_string(ensemble_tag t);
ensemble_tag ensemble_from_string(const std::string& s);

struct edge_ref {
    std::int32_t to;
    std::int32_t delay; // t_ij, integer steps >= 1
};

/// Undirected weighted communication graph in CSR form. Immutable once built;
/// safe to share read-only across threads.
class graph {
public:
    graph() = default;
    /// edges: unordered pairs (i, j, delay); validated (no self loops, no
    /// duplicates, delays >= 1).
    graph(std::int32_t node_count, std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges,
          ensemble_tag tag, std::uint64_t seed);

    std::int32_t node_count() const { return n_; }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(adj_.size()) / 2; }
    ensemble_tag tag() const { return tag_; }
    std::uint64_t seed() const { return seed_; }

    std::span<const edge_ref> neighbors(std::int32_t v) const {
        return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
    }
    std::int32_t degree(std::int32_t v) const {
        return static_cast<std::int32_t>(offsets_[v + 1] - offsets_[v]);
    }
    double mean_degree() const { return 2.0 * static_cast<double>(edge_count()) / n_; }
    std::int32_t max_delay() const { return max_delay_; }

    bool connected() const;

    /// Unweighted BFS hop distances from src (delays ignored).
    std::vector<std::int32_t> hop_distances(std::int32_t src) const;
    /// Weighted shortest-path distances from src (Dijkstra over delays).
    std::vector<std::int64_t> weighted_distances(std::int32_t src) const;

    /// Edge-list text format. Header `# nodes=N ensemble=TAG seed=S`, then one
    /// line `i j t_ij` per undirected edge, i < j, sorted lexicographically.
    void save(std::ostream& os) const;
    static graph load(std::istream& is);

private:
    std::int32_t n_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<edge_ref> adj_;
    ensemble_tag tag_ = ensemble_tag::custom;
    std::uint64_t seed_ = 0;
    std::int32_t max_delay_ = 1;
};

struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a generated sample cannot be used (callers resample).
struct disconnected_graph : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- generators (all edges get delay 1) ---

/// G(n, p); every unordered pair is an edge independently with probability p.
graph gen_erdos_renyi(std::int32_t n, double p, rng_t& rng, std::uint64_t seed_label = 0);

/// Stochastic block model parametrized by expected edge counts: C[a][b] is the
/// expected number of edges from one node of block a into block b, so
/// p_ab = C[a][b]/n_b across blocks and p_aa = C[a][a]/(n_a - 1) within.
graph gen_sbm(const std::vector<std::int32_t>& block_sizes,
              const std::vector<std::vector<double>>& expected_edges, rng_t& rng,
              std::uint64_t seed_label = 0);

/// Preferential attachment starting from an (m+1)-clique; each new node
/// attaches to m distinct existing nodes chosen proportionally to degree.
graph gen_barabasi_albert(std::int32_t n, std::int32_t m, rng_t& rng, std::uint64_t seed_label = 0);

/// Copy of g with every edge delay redrawn uniformly from `choices`.
graph with_random_delays(const graph& g, std::span<const std::int32_t> choices, rng_t& rng);

// --- centrality ---

struct centrality_ranking {
    std::vector<double> values;            // closeness per node, (n-1)/sum(d)
    std::vector<std::int32_t> sorted_ids;  // ascending by value, ties by id
};

/// Closeness over unweighted hop distances. Throws disconnected_graph.
centrality_ranking closeness_centrality(const graph& g);

/// sorted_ids[floor(q*(n-1))]; q in [0,1].
std::int32_t node_at_quantile(const centrality_ranking& r, double q);

/// The 4-block connection matrix used by the SBM experiments (5 on the
/// diagonal, 1 off-diagonal).
std::vector<std::vector<double>> sbm_paper_matrix();

} // namespace consensus
