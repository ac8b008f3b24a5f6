// flatquad generate|simulate|compare <scenario> [--out DIR] [--dt SECONDS] [--seed N]
//
// Exit status: 0 success, 1 bad input, 2 planning or rollout failure,
// 3 some compare cells failed.

#include "flatquad/io/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace
{

    struct Options
    {
        std::string scenario;
        std::string out = ".";
        std::optional<double> dt;
        std::optional<unsigned long long> seed; // reserved, no stochastic component yet
    };

    void add_common(CLI::App *cmd, Options &o, const char *dt_help)
    {
        cmd->add_option("scenario", o.scenario, "scenario file (YAML)")->required();
        cmd->add_option("--out", o.out, "output directory");
        cmd->add_option("--dt", o.dt, dt_help)->check(CLI::PositiveNumber);
        cmd->add_option("--seed", o.seed, "reserved");
    }

    int run(const std::string &which, const Options &o)
    {
        using namespace flatquad;
        if (which == "generate")
        {
            const auto r = io::cmd_generate(o.scenario, o.out, o.dt);
            std::cout << "control points: " << r.plan.curve.control_points().size()
                      << "\nreference rows: " << r.references.size() << "\nwrote " << r.trajectory_file.string()
                      << "\nwrote " << r.reference_file.string() << '\n';
            return 0;
        }
        if (which == "simulate")
        {
            const auto r = io::cmd_simulate(o.scenario, o.out, o.dt);
            const Metrics &m = r.run->metrics;
            std::printf("strategy %s\nIAE %.6g m s\nmax position error %.6g m\nmax tilt %.4f deg\n"
                        "saturated periods %d\n",
                        std::string(to_string(r.report.runs.front().strategy)).c_str(), m.iae,
                        m.max_position_error, m.max_tilt * 180.0 / 3.141592653589793, m.saturation_count);
            std::cout << "wrote " << r.trace_file.string() << "\nwrote " << r.report_file.string() << '\n';
            return 0;
        }
        const auto r = io::cmd_compare(o.scenario, o.out, o.dt);
        std::cout << r.table;
        for (const auto &e : r.report.runs)
            if (!e.metrics)
                std::cerr << to_string(e.strategy) << " (" << e.wind << "): " << e.error << '\n';
        if (r.report_file)
            std::cout << "wrote " << r.report_file->string() << '\n';
        return r.all_ok ? 0 : 3;
    }

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Flatness-based quadcopter trajectory generation and tracking simulation"};
    app.set_version_flag("--version", flatquad::io::kToolVersion);
    app.require_subcommand(1);

    Options opts;
    add_common(app.add_subcommand("generate", "plan the trajectory and write the flat reference"), opts,
               "sampling step of the reference table (s)");
    add_common(app.add_subcommand("simulate", "run the scenario's strategy and write trace and metrics"), opts,
               "control period override (s)");
    add_common(app.add_subcommand("compare", "run all strategies with and without wind"), opts,
               "control period override (s)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        // --help and --version exit 0; usage errors share the input-error code
        return app.exit(e) == 0 ? 0 : 1;
    }
    const std::string which = app.get_subcommands().front()->get_name();

    try
    {
        return run(which, opts);
    }
    catch (const flatquad::InfeasibleConstraints &e)
    {
        std::cerr << "error: " << e.what() << " (constraint rank " << e.rank() << " of " << e.rows() << ")\n";
        return 2;
    }
    catch (const flatquad::ValidationError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const flatquad::Error &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
