#ifndef ODYN_NETWORK_HPP
#define ODYN_NETWORK_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "odyn/errors.hpp"
#include "odyn/parallel.hpp"
#include "odyn/random.hpp"
#include "odyn/spatial.hpp"

namespace odyn {

using AgentId = std::uint32_t;

// ---------------------------------------------------------------------------
// Influence weights
// ---------------------------------------------------------------------------

/// Heavy-tailed influence weight with P(W > x) = x^-gamma for x > 1,
/// drawn by inversion W = U^(-1/gamma), U uniform on (0, 1).
inline double weight_from_uniform(double u, double gamma) {
    if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
    return std::pow(u, -1.0 / gamma);
}

template <class Urbg>
double sample_weight(double gamma, Urbg& rng) {
    return weight_from_uniform(uniform01_open(rng), gamma);
}

template <class Urbg>
std::vector<double> sample_weights(std::size_t n, double gamma, Urbg& rng) {
    if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
    std::vector<double> w(n);
    for (auto& x : w) x = sample_weight(gamma, rng);
    return w;
}

/// Closed-form complementary CDF of the weight law.
inline double weight_ccdf(double x, double gamma) { return x <= 1.0 ? 1.0 : std::pow(x, -gamma); }

// ---------------------------------------------------------------------------
// Connection probability
// ---------------------------------------------------------------------------

struct ConnectionParams {
    double lambda = 1.0; ///< reference length
    double delta = 0.0;  ///< importance of spatial proximity
    double alpha = 0.0;  ///< importance of influence weight
    double b = 1.0;      ///< confidence bound

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be finite and > 0");
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be finite and >= 0");
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be finite and >= 0");
        if (!(b >= 0.0)) throw ParameterError("b must be >= 0"); // b = 0 is the empty-graph limit
    }
};

/// Belief-independent part of the connection probability, already clamped to 1.
inline double spatial_weight_factor(double dist, double weight_pow_alpha, const ConnectionParams& cp) noexcept {
    const double p = std::pow(1.0 + dist / cp.lambda, -cp.delta) * weight_pow_alpha;
    return p < 1.0 ? p : 1.0;
}

inline bool within_confidence(double hu, double hv, double b) noexcept { return std::abs(hu - hv) < b; }

/// Probability that v influences u at the current step.
inline double connection_probability(Point2 xu, Point2 xv, double wv, double hu, double hv,
                                     const ConnectionParams& cp) noexcept {
    if (!within_confidence(hu, hv, cp.b)) return 0.0;
    return spatial_weight_factor(distance(xu, xv), std::pow(wv, cp.alpha), cp);
}

/// Precomputes the belief-independent factor for every ordered pair, which
/// stays fixed for a whole run since positions and weights never change.
/// Large populations fall back to on-the-fly evaluation; both paths produce
/// identical values.
class ConnectionKernel {
public:
    static constexpr std::size_t default_cache_limit = 4096;

    ConnectionKernel(std::span<const Point2> positions, std::span<const double> weights, ConnectionParams cp,
                     std::size_t cache_limit = default_cache_limit)
        : positions_(positions.begin(), positions.end()), cp_(cp) {
        cp_.validate();
        if (weights.size() != positions.size()) throw ParameterError("positions and weights differ in length");
        weight_pow_.reserve(weights.size());
        for (double w : weights) weight_pow_.push_back(std::pow(w, cp_.alpha));
        const std::size_t n = positions_.size();
        if (n <= cache_limit) {
            cache_.resize(n * n);
            for (std::size_t u = 0; u < n; ++u)
                for (std::size_t v = 0; v < n; ++v) cache_[u * n + v] = compute(u, v);
        }
    }

    std::size_t size() const noexcept { return positions_.size(); }
    const ConnectionParams& params() const noexcept { return cp_; }
    bool cached() const noexcept { return !cache_.empty(); }

    /// min(1, distance decay * weight^alpha) for the arrow v -> u.
    double factor(std::size_t u, std::size_t v) const noexcept {
        return cached() ? cache_[u * positions_.size() + v] : compute(u, v);
    }

    double probability(std::size_t u, std::size_t v, double hu, double hv) const noexcept {
        return within_confidence(hu, hv, cp_.b) ? factor(u, v) : 0.0;
    }

private:
    double compute(std::size_t u, std::size_t v) const noexcept {
        return spatial_weight_factor(distance(positions_[u], positions_[v]), weight_pow_[v], cp_);
    }

    std::vector<Point2> positions_;
    std::vector<double> weight_pow_;
    ConnectionParams cp_;
    std::vector<double> cache_;
};

// ---------------------------------------------------------------------------
// Adjacency
// ---------------------------------------------------------------------------

/// Directed influence graph for one time step. An arrow v -> u means v
/// influences u. In-neighbours are kept in compressed sorted lists; a pair of
/// bit matrices gives O(1) membership and word-parallel clustering counts.
class Adjacency {
public:
    Adjacency() = default;

    /// Build from per-target in-neighbour lists. Lists are sorted; duplicates,
    /// self arrows and out-of-range ids are rejected.
    static Adjacency from_in_lists(std::size_t n, std::vector<std::vector<AgentId>> in_lists) {
        if (in_lists.size() != n) throw ParameterError("need one in-neighbour list per agent");
        Adjacency adj(n);
        std::size_t total = 0;
        for (const auto& l : in_lists) total += l.size();
        adj.sources_.reserve(total);
        for (std::size_t u = 0; u < n; ++u) {
            auto& list = in_lists[u];
            std::sort(list.begin(), list.end());
            for (std::size_t i = 0; i < list.size(); ++i) {
                const AgentId v = list[i];
                if (v >= n) throw ParameterError("edge endpoint out of range");
                if (v == u) throw ParameterError("self edges are not allowed");
                if (i > 0 && list[i - 1] == v) throw ParameterError("duplicate edge");
                adj.sources_.push_back(v);
                adj.set_bits(v, static_cast<AgentId>(u));
            }
            adj.offsets_[u + 1] = adj.sources_.size();
        }
        return adj;
    }

    /// Build from (source, target) pairs.
    static Adjacency from_edges(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges) {
        std::vector<std::vector<AgentId>> lists(n);
        for (auto [s, t] : edges) {
            if (s >= n || t >= n) throw ParameterError("edge endpoint out of range");
            lists[t].push_back(s);
        }
        return from_in_lists(n, std::move(lists));
    }

    static Adjacency empty(std::size_t n) { return Adjacency(n); }

    static Adjacency complete(std::size_t n) {
        std::vector<std::vector<AgentId>> lists(n);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = 0; v < n; ++v)
                if (u != v) lists[u].push_back(static_cast<AgentId>(v));
        return from_in_lists(n, std::move(lists));
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return sources_.size(); }

    std::span<const AgentId> in_neighbors(std::size_t u) const noexcept {
        return {sources_.data() + offsets_[u], sources_.data() + offsets_[u + 1]};
    }
    std::size_t in_degree(std::size_t u) const noexcept { return offsets_[u + 1] - offsets_[u]; }

    std::size_t out_degree(std::size_t v) const noexcept {
        std::size_t d = 0;
        for (std::uint64_t w : out_row(v)) d += static_cast<std::size_t>(std::popcount(w));
        return d;
    }

    /// True when the arrow source -> target is present.
    bool has_edge(std::size_t source, std::size_t target) const noexcept {
        return (out_bits_[source * words_ + target / 64] >> (target % 64)) & 1U;
    }

    /// Bit row of targets influenced by v.
    std::span<const std::uint64_t> out_row(std::size_t v) const noexcept {
        return {out_bits_.data() + v * words_, words_};
    }
    /// Bit row of sources that influence u.
    std::span<const std::uint64_t> in_row(std::size_t u) const noexcept {
        return {in_bits_.data() + u * words_, words_};
    }

    /// All arrows as (source, target), ordered by target then source.
    std::vector<std::pair<AgentId, AgentId>> edges() const {
        std::vector<std::pair<AgentId, AgentId>> out;
        out.reserve(edge_count());
        for (std::size_t u = 0; u < n_; ++u)
            for (AgentId v : in_neighbors(u)) out.emplace_back(v, static_cast<AgentId>(u));
        return out;
    }

    friend bool operator==(const Adjacency& a, const Adjacency& b) {
        return a.n_ == b.n_ && a.offsets_ == b.offsets_ && a.sources_ == b.sources_;
    }

private:
    explicit Adjacency(std::size_t n)
        : n_(n), words_((n + 63) / 64), offsets_(n + 1, 0), in_bits_(n * words_, 0), out_bits_(n * words_, 0) {}

    void set_bits(AgentId source, AgentId target) noexcept {
        out_bits_[source * words_ + target / 64] |= std::uint64_t{1} << (target % 64);
        in_bits_[target * words_ + source / 64] |= std::uint64_t{1} << (source % 64);
    }

    std::size_t n_ = 0;
    std::size_t words_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<AgentId> sources_;
    std::vector<std::uint64_t> in_bits_;
    std::vector<std::uint64_t> out_bits_;
};

/// Draw every arrow v -> u independently. Target u uses its own stream keyed
/// by (seed, step, u), so the result does not depend on the thread count.
inline Adjacency sample_adjacency(const ConnectionKernel& kernel, std::span<const double> beliefs,
                                  std::uint64_t seed, std::uint64_t step, unsigned threads = 1) {
    const std::size_t n = kernel.size();
    if (beliefs.size() != n) throw ParameterError("beliefs and positions differ in length");
    std::vector<std::vector<AgentId>> lists(n);
    parallel_for(n, threads, [&](std::size_t u) {
        RandomStream rng = make_stream(seed, StreamPurpose::edges, step, u);
        auto& list = lists[u];
        const double hu = beliefs[u];
        for (std::size_t v = 0; v < n; ++v) {
            if (v == u) continue;
            const double p = kernel.probability(u, v, hu, beliefs[v]);
            if (p <= 0.0) continue;
            if (p >= 1.0 || uniform01(rng) < p) list.push_back(static_cast<AgentId>(v));
        }
    });
    return Adjacency::from_in_lists(n, std::move(lists));
}

inline Adjacency sample_adjacency(std::span<const Point2> positions, std::span<const double> weights,
                                  std::span<const double> beliefs, const ConnectionParams& cp,
                                  std::uint64_t seed, std::uint64_t step, unsigned threads = 1) {
    if (positions.size() != weights.size() || positions.size() != beliefs.size())
        throw ParameterError("positions, weights and beliefs must have equal length");
    return sample_adjacency(ConnectionKernel(positions, weights, cp), beliefs, seed, step, threads);
}

// ---------------------------------------------------------------------------
// Graph statistics
// ---------------------------------------------------------------------------

/// Edges per agent; equal to the mean out-degree.
inline double mean_in_degree(const Adjacency& adj) {
    if (adj.size() == 0) throw ParameterError("mean in-degree of an empty population");
    return static_cast<double>(adj.edge_count()) / static_cast<double>(adj.size());
}

inline double mean_out_degree(const Adjacency& adj) {
    if (adj.size() == 0) throw ParameterError("mean out-degree of an empty population");
    std::size_t total = 0;
    for (std::size_t v = 0; v < adj.size(); ++v) total += adj.out_degree(v);
    return static_cast<double>(total) / static_cast<double>(adj.size());
}

/// Number of ordered in-neighbour pairs (a, b) of u with a -> b.
inline std::size_t connected_in_pairs(const Adjacency& adj, std::size_t u) noexcept {
    const auto mask = adj.in_row(u);
    std::size_t count = 0;
    for (AgentId a : adj.in_neighbors(u)) {
        const auto row = adj.out_row(a);
        for (std::size_t w = 0; w < mask.size(); ++w) count += static_cast<std::size_t>(std::popcount(row[w] & mask[w]));
    }
    return count;
}

/// Directed clustering: fraction of the k(k-1) ordered in-neighbour pairs
/// that are connected; 0 when k <= 1.
inline double clustering_coefficient(const Adjacency& adj, std::size_t u) {
    if (u >= adj.size()) throw ParameterError("agent index out of range");
    const std::size_t k = adj.in_degree(u);
    if (k <= 1) return 0.0;
    return static_cast<double>(connected_in_pairs(adj, u)) / static_cast<double>(k * (k - 1));
}

inline double mean_clustering_coefficient(const Adjacency& adj) {
    if (adj.size() == 0) throw ParameterError("mean clustering of an empty population");
    double sum = 0.0;
    for (std::size_t u = 0; u < adj.size(); ++u) sum += clustering_coefficient(adj, u);
    return sum / static_cast<double>(adj.size());
}

} // namespace odyn

#endif // ODYN_NETWORK_HPP
