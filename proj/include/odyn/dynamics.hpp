#ifndef ODYN_DYNAMICS_HPP
#define ODYN_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "odyn/errors.hpp"
#include "odyn/network.hpp"
#include "odyn/parallel.hpp"
#include "odyn/random.hpp"
#include "odyn/spatial.hpp"

namespace odyn {

inline constexpr double left_opinion = -1.0;
inline constexpr double right_opinion = 1.0;

/// Gaussian mixture for initial opinions; draws are clamped to [-1, 1].
struct BeliefInit {
    std::vector<double> centers{-1.0, 1.0};
    std::vector<double> probs{0.5, 0.5};
    double sigma = 0.5;

    void validate() const {
        if (centers.empty()) throw ParameterError("belief mixture needs at least one center");
        if (centers.size() != probs.size()) throw ParameterError("belief mixture centers and probs differ in length");
        double total = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0)) throw ParameterError("belief mixture probabilities must be >= 0");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ParameterError("belief mixture probabilities must sum to 1");
        for (double c : centers)
            if (!std::isfinite(c)) throw ParameterError("belief mixture centers must be finite");
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ParameterError("belief sigma must be finite and >= 0");
    }
};

/// Static mega-influencers at -1 (left) and +1 (right).
struct MegaConfig {
    double p_left = 0.0;   ///< reach of the left influencer
    double p_right = 0.0;  ///< reach of the right influencer
    double epsilon = 1.5;  ///< susceptibility radius
    bool enabled = true;   ///< false skips flag assignment entirely
    bool switching = false; ///< allow lapsed subscribers to change sides each step

    void validate() const {
        if (!(p_left >= 0.0 && p_left <= 1.0)) throw ParameterError("p_L must lie in [0, 1]");
        if (!(p_right >= 0.0 && p_right <= 1.0)) throw ParameterError("p_R must lie in [0, 1]");
        if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    }
};

struct StopRule {
    static constexpr std::size_t min_steps = 2;

    double threshold = 0.01;
    std::size_t window = 5;
    std::size_t max_steps = 200;
    bool abs_inside_window = false; ///< average |change| instead of |average change|

    void validate() const {
        if (!(threshold >= 0.0)) throw ParameterError("stop_threshold must be >= 0");
        if (window == 0) throw ParameterError("window must be >= 1");
        if (max_steps == 0) throw ParameterError("max_steps must be >= 1");
    }
};

/// Everything a single run needs, with lambda already resolved to a length.
struct ModelParams {
    Domain domain{equilateral_triangle()};
    std::optional<std::size_t> n = 1000; ///< unset: Poisson counts from domain rates
    double gamma = 1.5;
    bool unit_weights = false;
    ConnectionParams connection{};
    BeliefInit beliefs{};
    MegaConfig mega{};
    StopRule stop{};

    void validate() const {
        domain.validate();
        if (n && *n == 0) throw ParameterError("n must be >= 1");
        if (n && domain.triangles.size() != 1)
            throw ParameterError("a fixed agent count requires a single-triangle domain");
        if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
        connection.validate();
        beliefs.validate();
        mega.validate();
        stop.validate();
    }
};

using Flags = std::vector<std::uint8_t>;

struct MegaFlags {
    Flags left;
    Flags right;
};

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

template <class Urbg>
std::vector<double> init_beliefs(std::size_t n, const BeliefInit& init, Urbg& rng) {
    if (n == 0) throw ParameterError("n must be >= 1");
    init.validate();
    std::vector<double> beliefs(n);
    for (auto& h : beliefs) {
        const double pick = uniform01(rng);
        std::size_t k = 0;
        double cumulative = init.probs[0];
        while (pick >= cumulative && k + 1 < init.centers.size()) cumulative += init.probs[++k];
        double x = init.centers[k];
        if (init.sigma > 0.0) x = boost::random::normal_distribution<double>(x, init.sigma)(rng);
        h = std::clamp(x, -1.0, 1.0);
    }
    return beliefs;
}

/// Round half to even, for subset sizes.
inline std::size_t round_half_even(double x) { return static_cast<std::size_t>(std::nearbyint(x)); }

namespace detail {

template <class Urbg>
void flag_random_subset(std::vector<std::size_t> pool, double fraction, Flags& flags, Urbg& rng) {
    const std::size_t k = std::min(pool.size(), round_half_even(fraction * static_cast<double>(pool.size())));
    // partial Fisher-Yates: the first k slots become a uniform k-subset
    for (std::size_t i = 0; i < k; ++i) {
        boost::random::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        flags[pool[i]] = 1;
    }
}

} // namespace detail

/// Mark round(p * |pool|) uniformly chosen agents within epsilon of each
/// influencer as susceptible. Left takes precedence where the pools overlap.
template <class Urbg>
MegaFlags assign_mega_susceptibility(std::span<const double> beliefs, const MegaConfig& mc, Urbg& rng) {
    mc.validate();
    const std::size_t n = beliefs.size();
    MegaFlags flags{Flags(n, 0), Flags(n, 0)};
    std::vector<std::size_t> left_pool, right_pool;
    for (std::size_t u = 0; u < n; ++u) {
        if (std::abs(beliefs[u] - left_opinion) < mc.epsilon) left_pool.push_back(u);
        if (std::abs(beliefs[u] - right_opinion) < mc.epsilon) right_pool.push_back(u);
    }
    detail::flag_random_subset(std::move(left_pool), mc.p_left, flags.left, rng);
    detail::flag_random_subset(std::move(right_pool), mc.p_right, flags.right, rng);
    for (std::size_t u = 0; u < n; ++u)
        if (flags.left[u]) flags.right[u] = 0;
    return flags;
}

// ---------------------------------------------------------------------------
// State and update
// ---------------------------------------------------------------------------

struct SimState {
    std::size_t step = 0;
    std::vector<double> beliefs;
    Flags left_flag;
    Flags right_flag;
    Adjacency adjacency;
};

inline bool left_active(double h, double epsilon) noexcept { return h - left_opinion < epsilon; }
inline bool right_active(double h, double epsilon) noexcept { return right_opinion - h < epsilon; }

/// New opinion of agent u: the plain mean of its own opinion, its
/// in-neighbours' opinions and any active influencer opinion.
inline double updated_belief(const SimState& s, std::size_t u, bool with_left, bool with_right) noexcept {
    double sum = s.beliefs[u];
    std::size_t count = 1;
    for (AgentId v : s.adjacency.in_neighbors(u)) {
        sum += s.beliefs[v];
        ++count;
    }
    if (with_left) {
        sum += left_opinion;
        ++count;
    }
    if (with_right) {
        sum += right_opinion;
        ++count;
    }
    return sum / static_cast<double>(count);
}

/// One synchronous step: every agent reads the state at t-1, then the graph
/// is redrawn from the new opinions.
inline SimState hk_step(const SimState& prev, const ConnectionKernel& kernel, const MegaConfig& mc,
                        std::uint64_t seed, unsigned threads = 1) {
    const std::size_t n = prev.beliefs.size();
    SimState next;
    next.step = prev.step + 1;
    next.beliefs.resize(n);
    next.left_flag = prev.left_flag;
    next.right_flag = prev.right_flag;

    parallel_for(n, threads, [&](std::size_t u) {
        const double h = prev.beliefs[u];
        bool with_left = false;
        bool with_right = false;
        if (!mc.switching) {
            with_left = prev.left_flag[u] && left_active(h, mc.epsilon);
            with_right = prev.right_flag[u] && right_active(h, mc.epsilon);
        } else {
            // lapsed subscribers may move to the other influencer
            RandomStream rng = make_stream(seed, StreamPurpose::mega_switch, next.step, u);
            auto& left = next.left_flag[u];
            auto& right = next.right_flag[u];
            if (left) {
                if (left_active(h, mc.epsilon)) {
                    with_left = true;
                } else if (uniform01(rng) < mc.p_right) {
                    left = 0;
                    right = 1;
                }
            }
            if (right) {
                if (right_active(h, mc.epsilon)) {
                    with_right = true;
                } else if (uniform01(rng) < mc.p_left) {
                    right = 0;
                    left = 1;
                }
            }
        }
        next.beliefs[u] = updated_belief(prev, u, with_left, with_right);
    });

    next.adjacency = sample_adjacency(kernel, next.beliefs, seed, next.step, threads);
    return next;
}

// ---------------------------------------------------------------------------
// Stopping criterion
// ---------------------------------------------------------------------------

/// Community mean of |rolling mean of per-step opinion change| over the last
/// min(window, t) steps. Needs at least two snapshots.
inline double stopping_metric(std::span<const std::vector<double>> history, std::size_t window = 5,
                              bool abs_inside_window = false) {
    if (history.size() < 2) throw ParameterError("stopping metric needs at least two snapshots");
    if (window == 0) throw ParameterError("window must be >= 1");
    const std::size_t t = history.size() - 1;
    const std::size_t w = std::min(window, t);
    const std::size_t n = history.back().size();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        double acc = 0.0;
        for (std::size_t s = t - w + 1; s <= t; ++s) {
            const double change = history[s][u] - history[s - 1][u];
            acc += abs_inside_window ? std::abs(change) : change;
        }
        total += std::abs(acc / static_cast<double>(w));
    }
    return total / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Whole runs
// ---------------------------------------------------------------------------

enum class RunStatus { converged, max_steps_reached };

constexpr std::string_view to_string(RunStatus s) noexcept {
    return s == RunStatus::converged ? "converged" : "max steps reached";
}

/// Run-invariant data plus the opening state at t = 0.
struct Initialization {
    std::vector<Point2> positions;
    std::vector<double> weights;
    ConnectionKernel kernel;
    SimState state;
};

inline Initialization initialize(const ModelParams& params, std::uint64_t seed, unsigned threads = 1) {
    params.validate();
    auto placement = make_stream(seed, StreamPurpose::placement);
    std::vector<Point2> positions = sample_population(params.domain, params.n, placement);
    const std::size_t n = positions.size();
    if (n == 0) throw ParameterError("the domain produced an empty population");

    std::vector<double> weights;
    if (params.unit_weights) {
        weights.assign(n, 1.0);
    } else {
        auto rng = make_stream(seed, StreamPurpose::weights);
        weights = sample_weights(n, params.gamma, rng);
    }

    auto belief_rng = make_stream(seed, StreamPurpose::beliefs);
    SimState state;
    state.beliefs = init_beliefs(n, params.beliefs, belief_rng);
    if (params.mega.enabled) {
        auto rng = make_stream(seed, StreamPurpose::mega_flags);
        auto flags = assign_mega_susceptibility(state.beliefs, params.mega, rng);
        state.left_flag = std::move(flags.left);
        state.right_flag = std::move(flags.right);
    } else {
        state.left_flag.assign(n, 0);
        state.right_flag.assign(n, 0);
    }

    ConnectionKernel kernel(positions, weights, params.connection);
    state.adjacency = sample_adjacency(kernel, state.beliefs, seed, 0, threads);
    return Initialization{std::move(positions), std::move(weights), std::move(kernel), std::move(state)};
}

struct Trajectory {
    std::uint64_t seed = 0;
    std::vector<Point2> positions;
    std::vector<double> weights;
    Flags initial_left_flag;
    Flags initial_right_flag;
    Flags final_left_flag;
    Flags final_right_flag;
    std::vector<std::vector<double>> beliefs; ///< one snapshot per step, t = 0..stop_step
    std::vector<double> mean_in_degree;
    std::vector<double> mean_clustering;
    std::vector<double> stopping_metric; ///< NaN at t = 0
    std::map<std::size_t, Adjacency> captured; ///< graphs kept for requested steps
    std::size_t stop_step = 0;
    RunStatus status = RunStatus::converged;

    std::size_t agent_count() const noexcept { return positions.size(); }
    const std::vector<double>& initial_beliefs() const { return beliefs.front(); }
    const std::vector<double>& final_beliefs() const { return beliefs.back(); }
    bool converged() const noexcept { return status == RunStatus::converged; }
};

struct RunOptions {
    unsigned threads = 1;
    std::set<std::size_t> capture_steps; ///< adjacency snapshots to keep
};

inline Trajectory run_simulation(const ModelParams& params, std::uint64_t seed, const RunOptions& opts = {}) {
    Initialization init = initialize(params, seed, opts.threads);
    Trajectory traj;
    traj.seed = seed;
    traj.initial_left_flag = init.state.left_flag;
    traj.initial_right_flag = init.state.right_flag;

    auto record = [&](const SimState& s) {
        traj.beliefs.push_back(s.beliefs);
        traj.mean_in_degree.push_back(mean_in_degree(s.adjacency));
        traj.mean_clustering.push_back(mean_clustering_coefficient(s.adjacency));
        if (opts.capture_steps.contains(s.step)) traj.captured.emplace(s.step, s.adjacency);
    };

    SimState state = std::move(init.state);
    record(state);
    traj.stopping_metric.push_back(std::numeric_limits<double>::quiet_NaN());

    const StopRule& rule = params.stop;
    for (;;) {
        state = hk_step(state, init.kernel, params.mega, seed, opts.threads);
        record(state);
        const double metric = stopping_metric(traj.beliefs, rule.window, rule.abs_inside_window);
        traj.stopping_metric.push_back(metric);
        if (state.step >= StopRule::min_steps && metric < rule.threshold) {
            traj.status = RunStatus::converged;
            break;
        }
        if (state.step >= rule.max_steps) {
            traj.status = RunStatus::max_steps_reached;
            break;
        }
    }
    traj.stop_step = state.step;
    traj.final_left_flag = std::move(state.left_flag);
    traj.final_right_flag = std::move(state.right_flag);
    traj.positions = std::move(init.positions);
    traj.weights = std::move(init.weights);
    return traj;
}

/// Population standard deviation.
inline double population_std(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

} // namespace odyn

#endif // ODYN_DYNAMICS_HPP
