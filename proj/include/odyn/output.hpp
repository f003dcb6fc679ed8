#ifndef ODYN_OUTPUT_HPP
#define ODYN_OUTPUT_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/crc.hpp>
#include "json.hpp"

#include "odyn/config.hpp"
#include "odyn/dynamics.hpp"
#include "odyn/errors.hpp"
#include "odyn/experiment.hpp"
#include "odyn/network.hpp"

namespace odyn {

/// Shortest decimal text that parses back to the same double. NaN becomes an empty field.
inline std::string format_double(double x) {
    if (std::isnan(x)) return {};
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw IoError("number formatting failed");
    return {buf, end};
}

inline double parse_double(std::string_view s) {
    if (s.empty()) return std::nan("");
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("not a number: '" + std::string(s) + "'");
    return x;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string crc32_hex(const std::string& bytes) {
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    std::ostringstream ss;
    ss << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
    return ss.str();
}

// ---------------------------------------------------------------------------
// CSV renderers
// ---------------------------------------------------------------------------

/// Long format: step, agent_id, belief.
inline std::string beliefs_csv(const Trajectory& traj) {
    std::string out = "step,agent_id,belief\n";
    for (std::size_t t = 0; t < traj.beliefs.size(); ++t)
        for (std::size_t u = 0; u < traj.beliefs[t].size(); ++u) {
            out += std::to_string(t);
            out += ',';
            out += std::to_string(u);
            out += ',';
            out += format_double(traj.beliefs[t][u]);
            out += '\n';
        }
    return out;
}

inline std::string summary_csv(const Trajectory& traj) {
    std::string out = "step,mean_in_degree,mean_clustering,stopping_metric\n";
    for (std::size_t t = 0; t < traj.beliefs.size(); ++t) {
        out += std::to_string(t) + ',' + format_double(traj.mean_in_degree[t]) + ',' +
               format_double(traj.mean_clustering[t]) + ',' + format_double(traj.stopping_metric[t]) + '\n';
    }
    return out;
}

/// Static agent attributes, for spatial plots.
inline std::string agents_csv(const Trajectory& traj) {
    std::string out = "agent_id,x,y,weight,left_flag,right_flag,initial_belief,final_belief\n";
    for (std::size_t u = 0; u < traj.agent_count(); ++u) {
        out += std::to_string(u) + ',' + format_double(traj.positions[u].x) + ',' + format_double(traj.positions[u].y) +
               ',' + format_double(traj.weights[u]) + ',' + std::to_string(traj.initial_left_flag[u]) + ',' +
               std::to_string(traj.initial_right_flag[u]) + ',' + format_double(traj.initial_beliefs()[u]) + ',' +
               format_double(traj.final_beliefs()[u]) + '\n';
    }
    return out;
}

inline std::string edges_csv(const Adjacency& adj) {
    std::string out = "source,target\n";
    for (auto [s, t] : adj.edges()) out += std::to_string(s) + ',' + std::to_string(t) + '\n';
    return out;
}

inline std::string ensemble_csv(const EnsembleSummary& summary) {
    std::string out = "cell_id";
    if (!summary.cells.empty())
        for (const auto& [name, _] : summary.cells.front().cell.assignments) out += ',' + name;
    out += ",seed,final_std,stop_step,mean_in_degree,mean_clustering,ww,wh,hw,hh,converged\n";
    for (const auto& cs : summary.cells)
        for (const auto& r : cs.runs) {
            out += std::to_string(cs.cell.id);
            for (const auto& [_, v] : cs.cell.assignments) out += ',' + format_double(v);
            const auto& t = r.transitions;
            out += ',' + std::to_string(r.seed) + ',' + format_double(r.final_std) + ',' + std::to_string(r.stop_step) +
                   ',' + format_double(r.mean_in_degree) + ',' + format_double(r.mean_clustering) + ',' +
                   std::to_string(t.willing_to_willing) + ',' + std::to_string(t.willing_to_hesitant) + ',' +
                   std::to_string(t.hesitant_to_willing) + ',' + std::to_string(t.hesitant_to_hesitant) + ',' +
                   (r.converged() ? "true" : "false") + '\n';
        }
    return out;
}

inline std::string gridsearch_csv(const std::vector<GridStatsRow>& rows) {
    std::string out = "alpha,delta,gamma,mean_in_degree,mean_clustering\n";
    for (const auto& r : rows)
        out += format_double(r.alpha) + ',' + format_double(r.delta) + ',' + format_double(r.gamma) + ',' +
               format_double(r.mean_in_degree) + ',' + format_double(r.mean_clustering) + '\n';
    return out;
}

inline Json interval_json(const std::optional<Interval>& iv) {
    if (!iv) return nullptr;
    return Json{{"lo", iv->lo}, {"hi", iv->hi}};
}

/// Per-cell transition intervals with the survey reference next to each model interval.
inline Json transitions_json(const EnsembleSummary& summary) {
    Json survey_ref = Json::object();
    for (Transition t : all_transitions) survey_ref[std::string(to_string(t))] = interval_json(survey::reference(t));

    Json cells = Json::array();
    for (const auto& cs : summary.cells) {
        Json params = Json::object();
        for (const auto& [name, v] : cs.cell.assignments) params[name] = v;
        Json transitions = Json::object();
        for (const auto& rep : transition_report(cs)) {
            Json entry;
            entry["samples"] = rep.samples;
            entry["mean"] = rep.mean ? Json(*rep.mean) : Json(nullptr);
            entry["model_lo"] = rep.model ? Json(rep.model->lo) : Json(nullptr);
            entry["model_hi"] = rep.model ? Json(rep.model->hi) : Json(nullptr);
            entry["survey_lo"] = rep.survey ? Json(rep.survey->lo) : Json(nullptr);
            entry["survey_hi"] = rep.survey ? Json(rep.survey->hi) : Json(nullptr);
            transitions[std::string(to_string(rep.transition))] = entry;
        }
        std::size_t converged = 0;
        for (const auto& r : cs.runs) converged += r.converged();
        cells.push_back({{"cell_id", cs.cell.id},
                         {"params", params},
                         {"seeds", cs.runs.size()},
                         {"converged_runs", converged},
                         {"transitions", transitions}});
    }
    return Json{{"confidence_level", 0.95}, {"survey_reference", survey_ref}, {"cells", cells}};
}

} // namespace odyn

#endif // ODYN_OUTPUT_HPP
