#include "consensus/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <tuple>

namespace consensus {

std::string to_string(ensemble_tag t) {
    switch (t) {
    case ensemble_tag::erdos_renyi: return "ErdosRenyi";
    case ensemble_tag::sbm: return "SBM";
    case ensemble_tag::barabasi_albert: return "BarabasiAlbert";
    case ensemble_tag::custom: return "Custom";
    }
    return "Custom";
}

ensemble_tag ensemble_from_string(const std::string& s) {
    if (s == "ErdosRenyi") return ensemble_tag::erdos_renyi;
    if (s == "SBM") return ensemble_tag::sbm;
    if (s == "BarabasiAlbert") return ensemble_tag::barabasi_albert;
    if (s == "Custom") return ensemble_tag::custom;
    throw parameter_error("unknown ensemble tag: " + s);
}

graph::graph(std::int32_t node_count,
             std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges,
             ensemble_tag tag, std::uint64_t seed)
    : n_(node_count), tag_(tag), seed_(seed) {
    if (node_count < 1)
        throw parameter_error("graph needs at least one node");
    for (auto& [i, j, d] : edges) {
        if (i == j)
            throw parameter_error("self loop at node " + std::to_string(i));
        if (i < 0 || j < 0 || i >= n_ || j >= n_)
            throw parameter_error("edge endpoint out of range");
        if (d < 1)
            throw parameter_error("edge delay must be >= 1");
        if (i > j)
            std::swap(i, j);
        max_delay_ = std::max(max_delay_, d);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
            return std::get<0>(a) == std::get<0>(b) && std::get<1>(a) == std::get<1>(b);
        }) != edges.end())
        throw parameter_error("duplicate edge");

    std::vector<std::int32_t> deg(n_, 0);
    for (const auto& [i, j, d] : edges) {
        ++deg[i];
        ++deg[j];
    }
    offsets_.assign(n_ + 1, 0);
    for (std::int32_t v = 0; v < n_; ++v)
        offsets_[v + 1] = offsets_[v] + deg[v];
    adj_.resize(static_cast<std::size_t>(offsets_[n_]));
    std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [i, j, d] : edges) {
        adj_[static_cast<std::size_t>(cursor[i]++)] = {j, d};
        adj_[static_cast<std::size_t>(cursor[j]++)] = {i, d};
    }
}

bool graph::connected() const {
    if (n_ == 0)
        return false;
    auto d = hop_distances(0);
    return std::none_of(d.begin(), d.end(), [](std::int32_t x) { return x < 0; });
}

std::vector<std::int32_t> graph::hop_distances(std::int32_t src) const {
    std::vector<std::int32_t> dist(n_, -1);
    std::vector<std::int32_t> frontier{src};
    dist[src] = 0;
    std::vector<std::int32_t> next;
    std::int32_t level = 0;
    while (!frontier.empty()) {
        ++level;
        next.clear();
        for (std::int32_t v : frontier) {
            for (const edge_ref& e : neighbors(v)) {
                if (dist[e.to] < 0) {
                    dist[e.to] = level;
                    next.push_back(e.to);
                }
            }
        }
        frontier.swap(next);
    }
    return dist;
}

std::vector<std::int64_t> graph::weighted_distances(std::int32_t src) const {
    constexpr std::int64_t inf = -1;
    std::vector<std::int64_t> dist(n_, inf);
    using item = std::pair<std::int64_t, std::int32_t>;
    std::priority_queue<item, std::vector<item>, std::greater<item>> pq;
    pq.emplace(0, src);
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (dist[v] != inf)
            continue;
        dist[v] = d;
        for (const edge_ref& e : neighbors(v))
            if (dist[e.to] == inf)
                pq.emplace(d + e.delay, e.to);
    }
    return dist;
}

void graph::save(std::ostream& os) const {
    os << "# nodes=" << n_ << " ensemble=" << to_string(tag_) << " seed=" << seed_ << "\n";
    for (std::int32_t i = 0; i < n_; ++i)
        for (const edge_ref& e : neighbors(i))
            if (i < e.to)
                os << i << ' ' << e.to << ' ' << e.delay << "\n";
}

graph graph::load(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("# nodes=", 0) != 0)
        throw parameter_error("graph file: missing '# nodes=...' header");
    std::int32_t n = 0;
    std::uint64_t seed = 0;
    std::string tag_str = "Custom";
    {
        std::istringstream hs(header.substr(1));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("nodes=", 0) == 0)
                n = std::stoi(tok.substr(6));
            else if (tok.rfind("ensemble=", 0) == 0)
                tag_str = tok.substr(9);
            else if (tok.rfind("seed=", 0) == 0)
                seed = std::stoull(tok.substr(5));
        }
    }
    std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        std::int32_t i, j, d;
        if (!(ls >> i >> j >> d))
            throw parameter_error("graph file: bad edge line: " + line);
        edges.emplace_back(i, j, d);
    }
    return graph(n, std::move(edges), ensemble_from_string(tag_str), seed);
}

graph gen_erdos_renyi(std::int32_t n, double p, rng_t& rng, std::uint64_t seed_label) {
    if (n < 2)
        throw parameter_error("gen_erdos_renyi: n must be >= 2");
    if (!(p > 0.0) || p > 1.0)
        throw parameter_error("gen_erdos_renyi: p must be in (0, 1]");
    std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges;
    const std::int64_t pairs = static_cast<std::int64_t>(n) * (n - 1) / 2;
    if (p == 1.0) {
        for (std::int32_t i = 0; i < n; ++i)
            for (std::int32_t j = i + 1; j < n; ++j)
                edges.emplace_back(i, j, 1);
    } else {
        // geometric gap skipping over the linearized pair index
        const double log1mp = std::log1p(-p);
        std::int64_t idx = -1;
        while (true) {
            const double u = uniform_unit(rng);
            idx += 1 + static_cast<std::int64_t>(std::floor(std::log(u) / log1mp));
            if (idx >= pairs)
                break;
            // invert idx -> (i, j), row-major over i<j
            std::int32_t i = 0;
            std::int64_t rem = idx;
            std::int64_t row = n - 1;
            while (rem >= row) {
                rem -= row;
                --row;
                ++i;
            }
            const std::int32_t j = static_cast<std::int32_t>(i + 1 + rem);
            edges.emplace_back(i, j, 1);
        }
    }
    return graph(n, std::move(edges), ensemble_tag::erdos_renyi, seed_label);
}

graph gen_sbm(const std::vector<std::int32_t>& block_sizes,
              const std::vector<std::vector<double>>& expected_edges, rng_t& rng,
              std::uint64_t seed_label) {
    const std::size_t blocks = block_sizes.size();
    if (blocks == 0)
        throw parameter_error("gen_sbm: need at least one block");
    for (std::int32_t s : block_sizes)
        if (s < 1)
            throw parameter_error("gen_sbm: block sizes must be positive");
    if (expected_edges.size() != blocks)
        throw parameter_error("gen_sbm: matrix dimension must equal block count");
    for (const auto& row : expected_edges)
        if (row.size() != blocks)
            throw parameter_error("gen_sbm: matrix must be square");
    for (std::size_t a = 0; a < blocks; ++a)
        for (std::size_t b = 0; b < blocks; ++b) {
            if (expected_edges[a][b] < 0)
                throw parameter_error("gen_sbm: expected edge counts must be >= 0");
            if (expected_edges[a][b] != expected_edges[b][a])
                throw parameter_error("gen_sbm: matrix must be symmetric");
        }

    std::vector<std::int32_t> block_start(blocks + 1, 0);
    for (std::size_t a = 0; a < blocks; ++a)
        block_start[a + 1] = block_start[a] + block_sizes[a];
    const std::int32_t n = block_start[blocks];

    // probability for an unordered pair with blocks (a, b), a <= b
    auto pair_prob = [&](std::size_t a, std::size_t b) {
        if (a == b) {
            if (block_sizes[a] == 1)
                return expected_edges[a][a] > 0 ? 2.0 : 0.0; // force the error below
            return expected_edges[a][a] / static_cast<double>(block_sizes[a] - 1);
        }
        return expected_edges[a][b] / static_cast<double>(block_sizes[b]);
    };
    for (std::size_t a = 0; a < blocks; ++a)
        for (std::size_t b = a; b < blocks; ++b)
            if (pair_prob(a, b) > 1.0)
                throw parameter_error("gen_sbm: derived probability > 1 for blocks " +
                                      std::to_string(a) + "," + std::to_string(b));

    std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges;
    for (std::size_t a = 0; a < blocks; ++a) {
        for (std::size_t b = a; b < blocks; ++b) {
            const double p = pair_prob(a, b);
            if (p <= 0.0)
                continue;
            for (std::int32_t i = block_start[a]; i < block_start[a + 1]; ++i) {
                const std::int32_t j0 = (a == b) ? i + 1 : block_start[b];
                for (std::int32_t j = j0; j < block_start[b + 1]; ++j)
                    if (p >= 1.0 || uniform_unit(rng) <= p)
                        edges.emplace_back(i, j, 1);
            }
        }
    }
    return graph(n, std::move(edges), ensemble_tag::sbm, seed_label);
}

graph gen_barabasi_albert(std::int32_t n, std::int32_t m, rng_t& rng, std::uint64_t seed_label) {
    if (m < 1)
        throw parameter_error("gen_barabasi_albert: m must be >= 1");
    if (n <= m)
        throw parameter_error("gen_barabasi_albert: n must exceed m");
    std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges;
    // endpoint multiset; sampling from it is degree-proportional
    std::vector<std::int32_t> endpoints;
    endpoints.reserve(2 * (static_cast<std::size_t>(m) * (m + 1) / 2 +
                           static_cast<std::size_t>(n - m - 1) * m));
    for (std::int32_t i = 0; i <= m; ++i)
        for (std::int32_t j = i + 1; j <= m; ++j) {
            edges.emplace_back(i, j, 1);
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    std::vector<std::int32_t> picked;
    picked.reserve(m);
    for (std::int32_t v = m + 1; v < n; ++v) {
        picked.clear();
        while (static_cast<std::int32_t>(picked.size()) < m) {
            const std::int32_t t =
                endpoints[uniform_below(rng, endpoints.size())];
            if (std::find(picked.begin(), picked.end(), t) == picked.end())
                picked.push_back(t);
        }
        for (std::int32_t t : picked) {
            edges.emplace_back(t, v, 1);
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return graph(n, std::move(edges), ensemble_tag::barabasi_albert, seed_label);
}

graph with_random_delays(const graph& g, std::span<const std::int32_t> choices, rng_t& rng) {
    if (choices.empty())
        throw parameter_error("with_random_delays: empty choice set");
    std::vector<std::tuple<std::int32_t, std::int32_t, std::int32_t>> edges;
    edges.reserve(static_cast<std::size_t>(g.edge_count()));
    for (std::int32_t i = 0; i < g.node_count(); ++i)
        for (const edge_ref& e : g.neighbors(i))
            if (i < e.to)
                edges.emplace_back(i, e.to,
                                   choices[uniform_below(rng, choices.size())]);
    return graph(g.node_count(), std::move(edges), ensemble_tag::custom, g.seed());
}

centrality_ranking closeness_centrality(const graph& g) {
    const std::int32_t n = g.node_count();
    centrality_ranking r;
    r.values.resize(n);
    for (std::int32_t v = 0; v < n; ++v) {
        const auto dist = g.hop_distances(v);
        std::int64_t total = 0;
        for (std::int32_t d : dist) {
            if (d < 0)
                throw disconnected_graph("closeness_centrality: graph is disconnected");
            total += d;
        }
        r.values[v] = n > 1 ? static_cast<double>(n - 1) / static_cast<double>(total) : 0.0;
    }
    r.sorted_ids.resize(n);
    for (std::int32_t v = 0; v < n; ++v)
        r.sorted_ids[v] = v;
    std::sort(r.sorted_ids.begin(), r.sorted_ids.end(), [&](std::int32_t a, std::int32_t b) {
        return r.values[a] != r.values[b] ? r.values[a] < r.values[b] : a < b;
    });
    return r;
}

std::int32_t node_at_quantile(const centrality_ranking& r, double q) {
    if (!(q >= 0.0 && q <= 1.0))
        throw parameter_error("node_at_quantile: q must be in [0, 1]");
    const std::size_t n = r.sorted_ids.size();
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(n - 1)));
    return r.sorted_ids[std::min(idx, n - 1)];
}

std::vector<std::vector<double>> sbm_paper_matrix() {
    std::vector<std::vector<double>> c(4, std::vector<double>(4, 1.0));
    for (int i = 0; i < 4; ++i)
        c[i][i] = 5.0;
    return c;
}

} // namespace consensus
