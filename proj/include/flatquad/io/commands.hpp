#ifndef FLATQUAD_IO_COMMANDS_HPP
#define FLATQUAD_IO_COMMANDS_HPP

// The generate / simulate / compare operations behind the command-line tool.

#include "flatquad/io/report.hpp"
#include "flatquad/io/scenario_file.hpp"
#include "flatquad/io/trace_csv.hpp"
#include "flatquad/io/trajectory_dump.hpp"
#include "flatquad/sim.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

namespace flatquad::io
{

    inline constexpr double kDefaultSampleStep = 0.01; // s, dense reference table

    struct LoadedScenario
    {
        Scenario scenario;
        std::string path;
        std::string digest;
    };

    /// Parses the file and applies a control-period override.
    inline LoadedScenario load(const std::string &path, std::optional<double> control_period = std::nullopt)
    {
        LoadedScenario out;
        const std::string bytes = read_file(path);
        out.path = path;
        out.digest = sha256_hex(bytes);
        out.scenario = parse_scenario(bytes, path);
        if (control_period)
        {
            out.scenario.control_period = *control_period;
            out.scenario.validate();
        }
        return out;
    }

    inline std::filesystem::path prepare_dir(const std::string &dir)
    {
        std::filesystem::path p(dir.empty() ? "." : dir);
        std::filesystem::create_directories(p);
        return p;
    }

    struct GenerateResult
    {
        PlannedTrajectory plan;
        std::vector<FlatStateRef> references;
        std::filesystem::path trajectory_file;
        std::filesystem::path reference_file;
    };

    /// Writes trajectory.txt (curve and yaw profile) and flat_reference.csv into out_dir.
    inline GenerateResult cmd_generate(const std::string &scenario_path, const std::string &out_dir,
                                       std::optional<double> dt = std::nullopt)
    {
        const LoadedScenario ls = load(scenario_path);
        const Scenario &s = ls.scenario;
        GenerateResult r;
        r.plan = plan_trajectory(s);
        r.references = flat_references(r.plan, s.body, s.env.gravity, dt.value_or(kDefaultSampleStep));
        const auto dir = prepare_dir(out_dir);
        r.trajectory_file = dir / "trajectory.txt";
        r.reference_file = dir / "flat_reference.csv";
        write_file(r.trajectory_file.string(), [&](std::ostream &o) { write_trajectory(o, r.plan); });
        write_file(r.reference_file.string(), [&](std::ostream &o) { write_flat_reference_csv(o, r.references); });
        return r;
    }

    struct SimulateResult
    {
        RunReport report;
        std::optional<RunResult> run; // empty when the rollout aborted
        std::filesystem::path trace_file;
        std::filesystem::path report_file;
    };

    /// Runs the scenario's strategy; writes trace.csv and report.json into out_dir.
    /// A controller abort is recorded in the report and then rethrown.
    inline SimulateResult cmd_simulate(const std::string &scenario_path, const std::string &out_dir,
                                       std::optional<double> control_period = std::nullopt)
    {
        const LoadedScenario ls = load(scenario_path, control_period);
        const Scenario &s = ls.scenario;
        SimulateResult r;
        r.report.scenario = ls.path;
        r.report.scenario_sha256 = ls.digest;
        RunEntry entry;
        entry.strategy = s.strategy;
        entry.wind = std::string(to_string(s.wind.kind));

        const auto dir = prepare_dir(out_dir);
        r.trace_file = dir / "trace.csv";
        r.report_file = dir / "report.json";
        try
        {
            r.run = run_scenario(s);
            entry.metrics = r.run->metrics;
        }
        catch (const Error &e)
        {
            entry.error = e.what();
            r.report.runs.push_back(entry);
            write_file(r.report_file.string(), [&](std::ostream &o) { o << report_json(r.report).dump(2) << '\n'; });
            throw;
        }
        r.report.runs.push_back(entry);
        write_trace_csv(r.trace_file.string(), r.run->trace);
        write_file(r.report_file.string(), [&](std::ostream &o) { o << report_json(r.report).dump(2) << '\n'; });
        return r;
    }

    struct CompareResult
    {
        RunReport report;
        std::string table;
        bool all_ok = true;
        std::optional<std::filesystem::path> report_file;
    };

    /// Fixed-width text table: one row per strategy, calm and windy columns.
    inline std::string format_table(const RunReport &r)
    {
        std::ostringstream out;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-14s %14s %14s\n", "IAE [m s]", "no wind", "wind");
        out << buf;
        for (std::size_t i = 0; i + 1 < r.runs.size(); i += 2)
        {
            const auto cell = [](const RunEntry &e) {
                char c[32];
                if (e.metrics)
                    std::snprintf(c, sizeof c, "%.6g", e.metrics->iae);
                else
                    std::snprintf(c, sizeof c, "failed");
                return std::string(c);
            };
            std::snprintf(buf, sizeof buf, "%-14s %14s %14s\n", std::string(to_string(r.runs[i].strategy)).c_str(),
                          cell(r.runs[i]).c_str(), cell(r.runs[i + 1]).c_str());
            out << buf;
        }
        return out.str();
    }

    /// Runs the 3 x 2 strategy/wind grid. Writes compare.json into out_dir when it is non-empty.
    inline CompareResult cmd_compare(const std::string &scenario_path, const std::string &out_dir = "",
                                     std::optional<double> control_period = std::nullopt)
    {
        const LoadedScenario ls = load(scenario_path, control_period);
        CompareResult r;
        r.report.scenario = ls.path;
        r.report.scenario_sha256 = ls.digest;
        for (const ComparisonCell &c : compare_strategies(ls.scenario))
        {
            RunEntry e;
            e.strategy = c.strategy;
            e.wind = std::string(to_string(c.windy ? ls.scenario.comparison_wind.kind : WindProfile::Kind::None));
            e.metrics = c.metrics;
            e.error = c.error;
            r.all_ok = r.all_ok && c.metrics.has_value();
            r.report.runs.push_back(std::move(e));
        }
        r.table = format_table(r.report);
        if (!out_dir.empty())
        {
            r.report_file = prepare_dir(out_dir) / "compare.json";
            write_file(r.report_file->string(), [&](std::ostream &o) { o << report_json(r.report).dump(2) << '\n'; });
        }
        return r;
    }

} // namespace flatquad::io

#endif
