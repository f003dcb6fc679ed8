#ifndef ODYN_EXPERIMENT_HPP
#define ODYN_EXPERIMENT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/random/uniform_int_distribution.hpp>

#include "odyn/dynamics.hpp"
#include "odyn/errors.hpp"
#include "odyn/network.hpp"
#include "odyn/parallel.hpp"
#include "odyn/random.hpp"

namespace odyn {

// ---------------------------------------------------------------------------
// Cohorts and transitions
// ---------------------------------------------------------------------------

enum class Cohort { willing, hesitant };

constexpr Cohort classify_cohort(double belief) noexcept { return belief < 0.0 ? Cohort::willing : Cohort::hesitant; }

struct TransitionTable {
    std::size_t willing_to_willing = 0;
    std::size_t willing_to_hesitant = 0;
    std::size_t hesitant_to_willing = 0;
    std::size_t hesitant_to_hesitant = 0;

    std::size_t initially_willing() const noexcept { return willing_to_willing + willing_to_hesitant; }
    std::size_t initially_hesitant() const noexcept { return hesitant_to_willing + hesitant_to_hesitant; }

    friend bool operator==(const TransitionTable&, const TransitionTable&) = default;
};

inline TransitionTable transition_table(std::span<const double> initial, std::span<const double> final_beliefs) {
    if (initial.size() != final_beliefs.size()) throw ParameterError("initial and final beliefs differ in length");
    TransitionTable t;
    for (std::size_t i = 0; i < initial.size(); ++i) {
        const bool was_willing = classify_cohort(initial[i]) == Cohort::willing;
        const bool is_willing = classify_cohort(final_beliefs[i]) == Cohort::willing;
        if (was_willing) (is_willing ? t.willing_to_willing : t.willing_to_hesitant)++;
        else (is_willing ? t.hesitant_to_willing : t.hesitant_to_hesitant)++;
    }
    return t;
}

enum class Transition { willing_to_willing, willing_to_hesitant, hesitant_to_willing, hesitant_to_hesitant };

inline constexpr std::array<Transition, 4> all_transitions{
    Transition::willing_to_willing, Transition::willing_to_hesitant, Transition::hesitant_to_willing,
    Transition::hesitant_to_hesitant};

constexpr std::string_view to_string(Transition t) noexcept {
    switch (t) {
    case Transition::willing_to_willing: return "willing_to_willing";
    case Transition::willing_to_hesitant: return "willing_to_hesitant";
    case Transition::hesitant_to_willing: return "hesitant_to_willing";
    case Transition::hesitant_to_hesitant: return "hesitant_to_hesitant";
    }
    return "";
}

/// Share of the starting cohort that took this transition; empty when the
/// starting cohort is empty.
inline std::optional<double> transition_fraction(const TransitionTable& t, Transition which) {
    const bool from_willing = which == Transition::willing_to_willing || which == Transition::willing_to_hesitant;
    const std::size_t base = from_willing ? t.initially_willing() : t.initially_hesitant();
    if (base == 0) return std::nullopt;
    std::size_t count = 0;
    switch (which) {
    case Transition::willing_to_willing: count = t.willing_to_willing; break;
    case Transition::willing_to_hesitant: count = t.willing_to_hesitant; break;
    case Transition::hesitant_to_willing: count = t.hesitant_to_willing; break;
    case Transition::hesitant_to_hesitant: count = t.hesitant_to_hesitant; break;
    }
    return static_cast<double>(count) / static_cast<double>(base);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Normal-approximation 95% interval for the mean of a set of fractions,
/// clipped to [0, 1].
inline Interval confidence_interval_95(std::span<const double> samples) {
    const std::size_t k = samples.size();
    if (k < 2) throw ParameterError("confidence interval needs at least two samples");
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    if (*mn == *mx) return {*mn, *mx};
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(k);
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(k - 1));
    const double half = 1.96 * sd / std::sqrt(static_cast<double>(k));
    return {std::clamp(mean - half, 0.0, 1.0), std::clamp(mean + half, 0.0, 1.0)};
}

/// Reference intervals from the longitudinal vaccine-hesitancy survey used for
/// side-by-side output. Only the willing row is available; the willing to
/// hesitant bound is the complement of willing to willing.
namespace survey {
inline constexpr Interval willing_to_willing{0.86, 1.00};
inline constexpr Interval willing_to_hesitant{0.00, 0.14};

inline std::optional<Interval> reference(Transition t) {
    switch (t) {
    case Transition::willing_to_willing: return willing_to_willing;
    case Transition::willing_to_hesitant: return willing_to_hesitant;
    default: return std::nullopt;
    }
}
} // namespace survey

// ---------------------------------------------------------------------------
// Parameter grids
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 14> grid_parameter_names{
    "n", "lambda", "gamma", "delta", "alpha", "b", "epsilon", "p_L", "p_R", "sigma",
    "stop_threshold", "window", "max_steps", "p_willing"};

inline bool is_grid_parameter(std::string_view name) {
    return std::find(grid_parameter_names.begin(), grid_parameter_names.end(), name) != grid_parameter_names.end();
}

namespace detail {
inline std::size_t as_count(std::string_view name, double value) {
    if (!(value >= 1.0) || value != std::floor(value)) throw ParameterError(std::string(name) + " must be a positive integer");
    return static_cast<std::size_t>(value);
}
} // namespace detail

/// Set one named scalar of the model. `lambda` is an absolute length here;
/// `p_willing` sets a two-center mixture to (p, 1 - p).
inline void apply_parameter(ModelParams& p, std::string_view name, double value) {
    if (name == "n") p.n = detail::as_count(name, value);
    else if (name == "lambda") p.connection.lambda = value;
    else if (name == "gamma") p.gamma = value;
    else if (name == "delta") p.connection.delta = value;
    else if (name == "alpha") p.connection.alpha = value;
    else if (name == "b") p.connection.b = value;
    else if (name == "epsilon") p.mega.epsilon = value;
    else if (name == "p_L") p.mega.p_left = value;
    else if (name == "p_R") p.mega.p_right = value;
    else if (name == "sigma") p.beliefs.sigma = value;
    else if (name == "stop_threshold") p.stop.threshold = value;
    else if (name == "window") p.stop.window = detail::as_count(name, value);
    else if (name == "max_steps") p.stop.max_steps = detail::as_count(name, value);
    else if (name == "p_willing") {
        if (p.beliefs.centers.size() != 2) throw ParameterError("p_willing needs a two-center belief mixture");
        p.beliefs.probs = {value, 1.0 - value};
    } else throw ParameterError("unknown grid parameter '" + std::string(name) + "'");
}

/// One grid dimension. Several names bound to one axis move together, so
/// {p_L, p_R} x {0, 0.5, 1} is three cells, not nine.
struct GridAxis {
    std::vector<std::string> names;
    std::vector<double> values;
};

struct GridCell {
    std::size_t id = 0;
    std::vector<std::pair<std::string, double>> assignments;
    ModelParams params;
};

/// Cartesian product of the axes in row-major order (last axis fastest).
/// No axes gives a single cell holding the base parameters.
inline std::vector<GridCell> expand_grid(const ModelParams& base, std::span<const GridAxis> axes) {
    for (const auto& axis : axes) {
        if (axis.names.empty()) throw ParameterError("grid axis without a parameter name");
        if (axis.values.empty()) throw ParameterError("grid axis '" + axis.names.front() + "' has no values");
        for (const auto& name : axis.names)
            if (!is_grid_parameter(name)) throw ParameterError("unknown grid parameter '" + name + "'");
    }
    std::size_t total = 1;
    for (const auto& axis : axes) total *= axis.values.size();

    std::vector<GridCell> cells;
    cells.reserve(total);
    for (std::size_t id = 0; id < total; ++id) {
        GridCell cell{id, {}, base};
        std::size_t rest = id;
        std::vector<std::size_t> index(axes.size());
        for (std::size_t a = axes.size(); a-- > 0;) {
            index[a] = rest % axes[a].values.size();
            rest /= axes[a].values.size();
        }
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const double v = axes[a].values[index[a]];
            for (const auto& name : axes[a].names) {
                apply_parameter(cell.params, name, v);
                cell.assignments.emplace_back(name, v);
            }
        }
        cell.params.validate();
        cells.push_back(std::move(cell));
    }
    return cells;
}

inline std::vector<std::uint64_t> derive_seeds(std::uint64_t master_seed, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = derive_key(master_seed, StreamPurpose::ensemble_seed, i);
    return seeds;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleSpec {
    ModelParams base;
    std::vector<std::uint64_t> seeds;
    std::vector<GridAxis> grid;
};

struct RunRecord {
    std::uint64_t seed = 0;
    double final_std = 0.0;
    std::size_t stop_step = 0;
    RunStatus status = RunStatus::converged;
    double mean_in_degree = 0.0;  ///< averaged over steps 0..stop_step
    double mean_clustering = 0.0; ///< averaged over steps 0..stop_step
    double initial_in_degree = 0.0;
    double initial_clustering = 0.0;
    TransitionTable transitions;

    bool converged() const noexcept { return status == RunStatus::converged; }
};

struct CellSummary {
    GridCell cell;
    std::vector<RunRecord> runs; ///< one per seed, in seed order

    std::vector<double> final_stds() const {
        std::vector<double> out;
        for (const auto& r : runs) out.push_back(r.final_std);
        return out;
    }

    /// Per-seed fractions for one transition, skipping seeds whose starting cohort was empty.
    std::vector<double> transition_fractions(Transition t) const {
        std::vector<double> out;
        for (const auto& r : runs)
            if (auto f = transition_fraction(r.transitions, t)) out.push_back(*f);
        return out;
    }
};

struct EnsembleSummary {
    std::vector<CellSummary> cells;
};

inline RunRecord summarize_run(const Trajectory& traj) {
    RunRecord r;
    r.seed = traj.seed;
    r.final_std = population_std(traj.final_beliefs());
    r.stop_step = traj.stop_step;
    r.status = traj.status;
    auto mean = [](const std::vector<double>& xs) {
        return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    r.mean_in_degree = mean(traj.mean_in_degree);
    r.mean_clustering = mean(traj.mean_clustering);
    r.initial_in_degree = traj.mean_in_degree.front();
    r.initial_clustering = traj.mean_clustering.front();
    r.transitions = transition_table(traj.initial_beliefs(), traj.final_beliefs());
    return r;
}

/// Called once per finished run, possibly from a worker thread; (cell, seed
/// index) identify the slot, so writes to distinct slots need no locking.
using RunObserver = std::function<void(std::size_t cell, std::size_t seed_index, const Trajectory&)>;

/// One simulation per (cell, seed), executed on a work queue and folded in
/// (cell, seed) order. Non-converged runs are kept and labelled.
inline EnsembleSummary run_ensemble(const EnsembleSpec& spec, unsigned threads = 1, const RunObserver& observer = {}) {
    if (spec.seeds.empty()) throw ParameterError("an ensemble needs at least one seed");
    std::vector<GridCell> cells = expand_grid(spec.base, spec.grid);
    const std::size_t n_seeds = spec.seeds.size();
    std::vector<RunRecord> records(cells.size() * n_seeds);

    parallel_for(records.size(), threads, [&](std::size_t job) {
        const std::size_t c = job / n_seeds;
        const std::size_t s = job % n_seeds;
        Trajectory traj = run_simulation(cells[c].params, spec.seeds[s]);
        records[job] = summarize_run(traj);
        if (observer) observer(c, s, traj);
    });

    EnsembleSummary summary;
    summary.cells.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellSummary cs{std::move(cells[c]), {}};
        cs.runs.assign(records.begin() + static_cast<std::ptrdiff_t>(c * n_seeds),
                       records.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_seeds));
        summary.cells.push_back(std::move(cs));
    }
    return summary;
}

struct TransitionReport {
    Transition transition;
    std::size_t samples = 0;
    std::optional<double> mean;
    std::optional<Interval> model;
    std::optional<Interval> survey;
};

inline std::vector<TransitionReport> transition_report(const CellSummary& cell) {
    std::vector<TransitionReport> out;
    for (Transition t : all_transitions) {
        TransitionReport r{t, 0, std::nullopt, std::nullopt, survey::reference(t)};
        const auto fr = cell.transition_fractions(t);
        r.samples = fr.size();
        if (!fr.empty()) r.mean = std::accumulate(fr.begin(), fr.end(), 0.0) / static_cast<double>(fr.size());
        if (fr.size() >= 2) r.model = confidence_interval_95(fr);
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Network realism grid search
// ---------------------------------------------------------------------------

struct GridStatsRow {
    double alpha = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double mean_in_degree = 0.0;
    double mean_clustering = 0.0;
};

struct GridSearchSpec {
    ModelParams base;
    std::vector<double> alphas;
    std::vector<double> deltas;
    std::vector<double> gammas;
    std::vector<std::uint64_t> seeds;
};

/// Statistics of the graph at t = 0 (before any opinion update) for every
/// (alpha, delta, gamma), averaged over seeds. Rows ordered gamma, alpha, delta.
inline std::vector<GridStatsRow> grid_search_stats(const GridSearchSpec& spec, unsigned threads = 1) {
    if (spec.seeds.empty()) throw ParameterError("grid search needs at least one seed");
    if (spec.alphas.empty() || spec.deltas.empty() || spec.gammas.empty())
        throw ParameterError("grid search ranges must be non-empty");
    std::vector<GridStatsRow> rows;
    for (double g : spec.gammas)
        for (double a : spec.alphas)
            for (double d : spec.deltas) rows.push_back({a, d, g, 0.0, 0.0});

    const std::size_t n_seeds = spec.seeds.size();
    std::vector<std::pair<double, double>> samples(rows.size() * n_seeds);
    parallel_for(samples.size(), threads, [&](std::size_t job) {
        const auto& row = rows[job / n_seeds];
        ModelParams p = spec.base;
        p.gamma = row.gamma;
        p.connection.alpha = row.alpha;
        p.connection.delta = row.delta;
        const Initialization init = initialize(p, spec.seeds[job % n_seeds]);
        samples[job] = {mean_in_degree(init.state.adjacency), mean_clustering_coefficient(init.state.adjacency)};
    });

    for (std::size_t r = 0; r < rows.size(); ++r) {
        double deg = 0.0, cc = 0.0;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            deg += samples[r * n_seeds + s].first;
            cc += samples[r * n_seeds + s].second;
        }
        rows[r].mean_in_degree = deg / static_cast<double>(n_seeds);
        rows[r].mean_clustering = cc / static_cast<double>(n_seeds);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Spatial clustering of opinions
// ---------------------------------------------------------------------------

/// k nearest neighbours of every point by Euclidean distance, ties broken by index.
inline std::vector<std::vector<AgentId>> nearest_neighbors(std::span<const Point2> points, std::size_t k) {
    const std::size_t n = points.size();
    if (k >= n) throw ParameterError("k must be smaller than the number of points");
    std::vector<std::vector<AgentId>> out(n);
    std::vector<std::pair<double, AgentId>> scratch;
    for (std::size_t u = 0; u < n; ++u) {
        scratch.clear();
        for (std::size_t v = 0; v < n; ++v)
            if (v != u) scratch.emplace_back(distance(points[u], points[v]), static_cast<AgentId>(v));
        std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
        for (std::size_t i = 0; i < k; ++i) out[u].push_back(scratch[i].second);
    }
    return out;
}

/// Fraction of (agent, neighbour) pairs whose opinions fall in the same cohort.
inline double same_cohort_fraction(std::span<const std::vector<AgentId>> neighbors, std::span<const Cohort> labels) {
    std::size_t same = 0, total = 0;
    for (std::size_t u = 0; u < neighbors.size(); ++u)
        for (AgentId v : neighbors[u]) {
            same += labels[u] == labels[v];
            ++total;
        }
    return total == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(total);
}

struct JoinCountResult {
    double observed = 0.0;
    double null_q95 = 0.0; ///< 95th percentile under random relabelling
    bool significant = false;
};

/// Join-count test on opinion signs over the k-nearest-neighbour graph:
/// compares the observed same-cohort fraction with its permutation null.
inline JoinCountResult join_count_test(std::span<const Point2> positions, std::span<const double> beliefs,
                                       std::size_t k, std::size_t permutations, std::uint64_t seed) {
    if (positions.size() != beliefs.size()) throw ParameterError("positions and beliefs differ in length");
    if (permutations == 0) throw ParameterError("need at least one permutation");
    const auto nbrs = nearest_neighbors(positions, k);
    std::vector<Cohort> labels;
    labels.reserve(beliefs.size());
    for (double h : beliefs) labels.push_back(classify_cohort(h));

    JoinCountResult res;
    res.observed = same_cohort_fraction(nbrs, labels);

    auto rng = make_stream(seed, StreamPurpose::shuffle);
    std::vector<double> null_stats;
    null_stats.reserve(permutations);
    std::vector<Cohort> shuffled = labels;
    for (std::size_t p = 0; p < permutations; ++p) {
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(shuffled[i - 1], shuffled[pick(rng)]);
        }
        null_stats.push_back(same_cohort_fraction(nbrs, shuffled));
    }
    std::sort(null_stats.begin(), null_stats.end());
    const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(permutations))) - 1;
    res.null_q95 = null_stats[std::min(idx, null_stats.size() - 1)];
    res.significant = res.observed > res.null_q95;
    return res;
}

} // namespace odyn

#endif // ODYN_EXPERIMENT_HPP
