// Brute-force reference computations used only by the tests. They work from
// plain edge sets and never touch the library's bit matrices or CSR lists.
#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Edge = std::pair<std::size_t, std::size_t>; // (source, target)

inline std::vector<std::size_t> in_neighbors(const std::set<Edge>& edges, std::size_t u) {
    std::vector<std::size_t> out;
    for (auto [s, t] : edges)
        if (t == u) out.push_back(s);
    return out;
}

inline double clustering(const std::set<Edge>& edges, std::size_t u) {
    const auto nb = in_neighbors(edges, u);
    const std::size_t k = nb.size();
    if (k <= 1) return 0.0;
    std::size_t connected = 0;
    for (std::size_t a : nb)
        for (std::size_t b : nb)
            if (a != b && edges.count({a, b})) ++connected;
    return static_cast<double>(connected) / static_cast<double>(k * (k - 1));
}

inline double mean_clustering(const std::set<Edge>& edges, std::size_t n) {
    double s = 0.0;
    for (std::size_t u = 0; u < n; ++u) s += clustering(edges, u);
    return s / static_cast<double>(n);
}

inline double mean_in_degree(const std::set<Edge>& edges, std::size_t n) {
    std::vector<std::size_t> deg(n, 0);
    for (auto [s, t] : edges) ++deg[t];
    double total = 0.0;
    for (auto d : deg) total += static_cast<double>(d);
    return total / static_cast<double>(n);
}

inline double mean_out_degree(const std::set<Edge>& edges, std::size_t n) {
    std::vector<std::size_t> deg(n, 0);
    for (auto [s, t] : edges) ++deg[s];
    double total = 0.0;
    for (auto d : deg) total += static_cast<double>(d);
    return total / static_cast<double>(n);
}

/// Standard normal CDF.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace oracle
