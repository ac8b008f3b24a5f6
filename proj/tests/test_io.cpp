#include "flatquad/io/commands.hpp"
#include "flatquad/io/csv.hpp"
#include "flatquad/io/report.hpp"
#include "flatquad/io/scenario_file.hpp"
#include "flatquad/io/trace_csv.hpp"
#include "flatquad/io/trajectory_dump.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace flatquad;
using namespace flatquad::io;
namespace fs = std::filesystem;

namespace
{

    const std::string kSource = FLATQUAD_SOURCE_DIR;
    const std::string kReference = kSource + "/scenarios/reference.yaml";
    const std::string kHover = kSource + "/scenarios/hover.yaml";

    fs::path scratch(const std::string &name)
    {
        const fs::path p = fs::temp_directory_path() / ("flatquad_io_" + std::to_string(::getpid())) / name;
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    int run_cli(const std::string &args)
    {
        const std::string cmd = std::string(FLATQUAD_CLI) + " " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string expect_file_error(const std::string &yaml, int line)
    {
        try
        {
            parse_scenario(yaml, "inline.yaml");
        }
        catch (const ScenarioFileError &e)
        {
            EXPECT_EQ(e.line(), line) << e.what();
            return e.what();
        }
        ADD_FAILURE() << "expected ScenarioFileError";
        return {};
    }

} // namespace

TEST(ScenarioFile, ReferenceFileMatchesBuiltInMission)
{
    const Scenario a = load_scenario(kReference), b = Scenario::reference();
    ASSERT_EQ(a.waypoints.positions.size(), b.waypoints.positions.size());
    for (std::size_t k = 0; k < a.waypoints.positions.size(); ++k)
    {
        EXPECT_EQ(a.waypoints.positions[k], b.waypoints.positions[k]);
        EXPECT_EQ(a.waypoints.times[k], b.waypoints.times[k]);
    }
    EXPECT_EQ(a.spline_order, b.spline_order);
    EXPECT_EQ(a.control_points, b.control_points);
    EXPECT_EQ(a.yaw_start, b.yaw_start);
    EXPECT_EQ(a.yaw_end, b.yaw_end);
    EXPECT_EQ(a.strategy, b.strategy);
    EXPECT_EQ(a.body.mass, b.body.mass);
    EXPECT_EQ(a.body.arm_length, b.body.arm_length);
    EXPECT_EQ(a.body.thrust_coeff, b.body.thrust_coeff);
    EXPECT_EQ(a.body.drag_torque_coeff, b.body.drag_torque_coeff);
    EXPECT_EQ(a.body.inertia, b.body.inertia);
    EXPECT_EQ(a.body.max_rotor_speed, b.body.max_rotor_speed);
    EXPECT_EQ(a.body.max_rotor_accel, b.body.max_rotor_accel);
    EXPECT_EQ(a.env.gravity, b.env.gravity);
    EXPECT_EQ(a.env.air_density, b.env.air_density);
    EXPECT_EQ(a.env.drag_coeff, b.env.drag_coeff);
    EXPECT_EQ(a.env.projected_area, b.env.projected_area);
    EXPECT_EQ(a.gains.torque.kp, b.gains.torque.kp);
    EXPECT_EQ(a.gains.torque.kd, b.gains.torque.kd);
    EXPECT_EQ(a.gains.torque.ki, b.gains.torque.ki);
    EXPECT_EQ(a.gains.attitude.kp, b.gains.attitude.kp);
    EXPECT_EQ(a.gains.attitude.kd, b.gains.attitude.kd);
    EXPECT_EQ(a.gains.attitude.ki, b.gains.attitude.ki);
    EXPECT_EQ(a.integral_limit, b.integral_limit);
    EXPECT_EQ(a.wind.kind, WindProfile::Kind::None);
    EXPECT_EQ(a.comparison_wind.kind, b.comparison_wind.kind);
    EXPECT_LT((a.comparison_wind.direction - b.comparison_wind.direction).norm(), 1e-15);
    EXPECT_EQ(a.comparison_wind.peak_speed, b.comparison_wind.peak_speed);
    EXPECT_EQ(a.comparison_wind.start, b.comparison_wind.start);
    EXPECT_EQ(a.comparison_wind.rise, b.comparison_wind.rise);
    EXPECT_EQ(a.comparison_wind.hold, b.comparison_wind.hold);
    EXPECT_EQ(a.comparison_wind.fall, b.comparison_wind.fall);
    EXPECT_EQ(a.control_period, b.control_period);
    EXPECT_EQ(a.physics_substep, b.physics_substep);
}

TEST(ScenarioFile, UnknownKeyNamesFieldAndLine)
{
    try
    {
        load_scenario(kSource + "/tests/data/unknown_key.yaml");
        FAIL() << "expected ScenarioFileError";
    }
    catch (const ScenarioFileError &e)
    {
        EXPECT_EQ(e.line(), 6);
        EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos) << e.what();
    }
}

TEST(ScenarioFile, NonIncreasingTimesNameTheWaypoint)
{
    try
    {
        load_scenario(kSource + "/tests/data/bad_times.yaml");
        FAIL() << "expected ScenarioFileError";
    }
    catch (const ScenarioFileError &e)
    {
        EXPECT_EQ(e.line(), 4);
        EXPECT_NE(std::string(e.what()).find("waypoints[2].time"), std::string::npos) << e.what();
    }
}

TEST(ScenarioFile, FieldErrors)
{
    expect_file_error("waypoints:\n  - {position: [0, 0, 5], time: 0}\n  - {position: [1, 0], time: 1}\n", 3);
    expect_file_error("waypoints:\n  - {position: [0, 0, 5], time: 0}\n  - {position: [1, 0, 5], time: 1}\n"
                      "strategy: pid\n",
                      4);
    expect_file_error("waypoints:\n  - {position: [0, 0, 5], time: 0}\n  - {position: [1, 0, 5], time: 1}\n"
                      "body:\n  mass: heavy\n",
                      5);
    expect_file_error("waypoints:\n  - {position: [0, 0, 5], time: 0}\n  - {position: [1, 0, 5], time: 1}\n"
                      "duration: 3\n",
                      4);
    EXPECT_THROW(parse_scenario("waypoints: [", "broken.yaml"), ValidationError);
    EXPECT_THROW(parse_scenario("strategy: combined\n", "empty.yaml"), ValidationError);
    EXPECT_THROW(load_scenario(kSource + "/tests/data/missing.yaml"), ValidationError);
}

TEST(ScenarioFile, SingleWaypointBecomesHover)
{
    const Scenario s = load_scenario(kHover);
    EXPECT_EQ(s.t_begin(), 0.0);
    EXPECT_EQ(s.t_end(), 10.0);
    const PlannedTrajectory plan = plan_trajectory(s);
    for (const FlatStateRef &r : flat_references(plan, s.body, s.env.gravity, 0.5))
    {
        EXPECT_LT((r.position - Eigen::Vector3d(0.0, 0.0, 5.0)).norm(), 1e-12);
        EXPECT_LT(r.velocity.norm(), 1e-12);
        EXPECT_LT(r.euler.norm(), 1e-12);
        EXPECT_NEAR(r.thrust, s.body.mass * s.env.gravity, 1e-12);
        EXPECT_LT(r.torque.norm(), 1e-12);
    }
}

TEST(ScenarioFile, WindDirectionIsNormalized)
{
    const Scenario s = parse_scenario("waypoints:\n  - {position: [0, 0, 5], time: 0}\n  - {position: [1, 0, 5], time: 1}\n"
                                      "wind: {kind: constant, direction: [3, 4, 0], peak_speed: 2}\n");
    EXPECT_LT((s.wind.direction - Eigen::Vector3d(0.6, 0.8, 0.0)).norm(), 1e-15);
}

TEST(Csv, DoublesRoundTripExactly)
{
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<double> values{0.0, -0.0, 1e-300, 5e-324, 1.0 / 3.0, std::numbers::pi};
    for (int k = 0; k < 200; ++k)
        values.push_back(u(rng) * std::pow(10.0, k % 30 - 15));
    std::stringstream s;
    s << "a";
    for (std::size_t k = 1; k < values.size(); ++k)
        s << ",c" << k;
    s << '\n';
    write_csv_row(s, values);
    const NumericTable t = read_numeric_csv(s);
    ASSERT_EQ(t.rows.size(), 1u);
    for (std::size_t k = 0; k < values.size(); ++k)
        EXPECT_EQ(t.rows[0][k], values[k]);
}

TEST(Csv, MalformedRowsReportTheLine)
{
    std::stringstream s("a,b\n1,2\n3,x\n");
    try
    {
        read_numeric_csv(s);
        FAIL() << "expected ValidationError";
    }
    catch (const ValidationError &e)
    {
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
    }
    std::stringstream overflow("a\n1e999\n");
    EXPECT_THROW(read_numeric_csv(overflow), ValidationError);
    std::stringstream short_row("a,b\n1\n");
    EXPECT_THROW(read_numeric_csv(short_row), ValidationError);
}

TEST(TraceCsv, RoundTripPreservesEveryField)
{
    Scenario s = Scenario::reference();
    s.wind = s.comparison_wind;
    const RunResult r = run_scenario(s);
    std::stringstream first;
    write_trace_csv(first, r.trace);
    EXPECT_EQ(first.str().substr(0, first.str().find('\n')),
              "t,x,y,z,vx,vy,vz,phi,theta,psi,wx,wy,wz,T,tau_phi,tau_theta,tau_psi,ref_x,ref_y,ref_z,ref_phi,"
              "ref_theta,ref_psi,wind_x,wind_y,wind_z");
    const std::vector<TraceRow> back = read_trace_csv(first);
    ASSERT_EQ(back.size(), r.trace.size());
    for (std::size_t k = 0; k < back.size(); ++k)
        EXPECT_EQ(trace_fields(back[k]), trace_fields(r.trace[k]));
    std::stringstream second;
    write_trace_csv(second, back);
    std::stringstream again;
    write_trace_csv(again, r.trace);
    EXPECT_EQ(second.str(), again.str());
}

TEST(TrajectoryDump, RoundTrip)
{
    const PlannedTrajectory plan = plan_trajectory(Scenario::reference());
    std::stringstream s;
    write_trajectory(s, plan);
    const PlannedTrajectory back = read_trajectory(s);
    EXPECT_EQ(back.curve.knots().knots(), plan.curve.knots().knots());
    EXPECT_EQ(back.curve.knots().order(), plan.curve.knots().order());
    ASSERT_EQ(back.curve.control_points().size(), plan.curve.control_points().size());
    for (std::size_t i = 0; i < back.curve.control_points().size(); ++i)
        EXPECT_EQ(back.curve.control_points()[i], plan.curve.control_points()[i]);
    for (double t : {0.0, 2.5, 7.3, 10.0})
        for (int r = 0; r <= 4; ++r)
        {
            EXPECT_EQ(back.yaw.eval(t, r), plan.yaw.eval(t, r));
            EXPECT_EQ(back.curve.eval(t, r), plan.curve.eval(t, r));
        }
    std::stringstream bad("flatquad-trajectory 2\n");
    EXPECT_THROW(read_trajectory(bad), ValidationError);
}

TEST(Report, DigestTracksTheBytes)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const std::string bytes = read_file(kReference);
    EXPECT_EQ(sha256_hex(bytes), sha256_hex(std::string(bytes)));
    std::string edited = bytes;
    edited.back() = edited.back() == ' ' ? '\t' : ' ';
    EXPECT_NE(sha256_hex(edited), sha256_hex(bytes));
}

TEST(Report, JsonRoundTrip)
{
    RunReport r;
    r.scenario = "scenarios/reference.yaml";
    r.scenario_sha256 = sha256_hex("x");
    Metrics m;
    m.iae = 0.123456789012345678;
    m.max_position_error = 0.5;
    m.max_tilt = 0.25;
    m.saturation_count = 3;
    m.rate_limit_count = 1;
    m.max_rotor_speed = 650.0;
    m.max_rotor_accel = 210.0;
    r.runs.push_back({StrategyKind::FlatAngle, "none", m, ""});
    r.runs.push_back({StrategyKind::Combined, "ramp_gust", std::nullopt, "rollout aborted at t=1.5 s: x"});

    const nlohmann::json j = report_json(r);
    EXPECT_EQ(j.at("tool"), "flatquad");
    const RunReport back = report_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.scenario, r.scenario);
    EXPECT_EQ(back.scenario_sha256, r.scenario_sha256);
    EXPECT_EQ(back.version, kToolVersion);
    ASSERT_EQ(back.runs.size(), 2u);
    EXPECT_EQ(back.runs[0].strategy, StrategyKind::FlatAngle);
    ASSERT_TRUE(back.runs[0].metrics.has_value());
    EXPECT_EQ(back.runs[0].metrics->iae, m.iae);
    EXPECT_EQ(back.runs[0].metrics->saturation_count, 3);
    EXPECT_EQ(back.runs[0].metrics->max_rotor_accel, 210.0);
    EXPECT_FALSE(back.runs[1].metrics.has_value());
    EXPECT_EQ(back.runs[1].error, r.runs[1].error);
    EXPECT_EQ(back.runs[1].wind, "ramp_gust");
}

TEST(Commands, GenerateWritesReferenceFiles)
{
    const fs::path dir = scratch("generate");
    const GenerateResult r = cmd_generate(kReference, dir.string());
    EXPECT_EQ(r.plan.curve.control_points().size(), 12u);
    EXPECT_EQ(r.references.size(), 1001u);
    std::ifstream csv(r.reference_file);
    const NumericTable t = read_numeric_csv(csv);
    EXPECT_EQ(t.rows.size(), 1001u);
    EXPECT_EQ(t.header.size(), 11u);
    EXPECT_EQ(t.rows.back()[0], 10.0);
    std::ifstream dump(r.trajectory_file);
    EXPECT_EQ(read_trajectory(dump).curve.control_points().size(), 12u);
}

TEST(Commands, SimulateWritesTraceAndReport)
{
    const fs::path dir = scratch("simulate");
    const SimulateResult r = cmd_simulate(kHover, dir.string());
    ASSERT_TRUE(r.run.has_value());
    std::ifstream trace(r.trace_file);
    EXPECT_EQ(read_trace_csv(trace).size(), 1001u);
    const RunReport rep = report_from_json(nlohmann::json::parse(slurp(r.report_file)));
    EXPECT_EQ(rep.scenario_sha256, sha256_hex(read_file(kHover)));
    ASSERT_EQ(rep.runs.size(), 1u);
    ASSERT_TRUE(rep.runs[0].metrics.has_value());
    EXPECT_LT(rep.runs[0].metrics->iae, 1e-6);
}

TEST(Commands, SimulateRecordsAbortBeforeRethrowing)
{
    const fs::path dir = scratch("abort");
    const fs::path yaml = dir / "tilted.yaml";
    std::ofstream(yaml) << "waypoints:\n  - {position: [0, 0, 5], time: 0}\nduration: 2\n"
                           "initial_perturbation: {euler: [0, 1.5707963267948966, 0]}\n";
    EXPECT_THROW(cmd_simulate(yaml.string(), dir.string()), RolloutAborted);
    const RunReport rep = report_from_json(nlohmann::json::parse(slurp(dir / "report.json")));
    ASSERT_EQ(rep.runs.size(), 1u);
    EXPECT_FALSE(rep.runs[0].metrics.has_value());
    EXPECT_NE(rep.runs[0].error.find("t=0"), std::string::npos);
}

TEST(Commands, CompareIsAPureFunctionOfTheFile)
{
    const CompareResult a = cmd_compare(kReference), b = cmd_compare(kReference);
    EXPECT_TRUE(a.all_ok);
    EXPECT_EQ(report_json(a.report).dump(), report_json(b.report).dump());
    EXPECT_EQ(a.table, b.table);
    EXPECT_NE(a.table.find("combined"), std::string::npos);
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch("cli");
    EXPECT_EQ(run_cli("generate " + kReference + " --out " + (dir / "gen").string()), 0);
    EXPECT_EQ(run_cli("simulate " + kHover + " --out " + (dir / "sim").string()), 0);
    EXPECT_EQ(run_cli("generate " + kSource + "/tests/data/bad_times.yaml --out " + (dir / "bad").string()), 1);
    EXPECT_EQ(run_cli("generate " + kSource + "/tests/data/few_points.yaml --out " + (dir / "few").string()), 2);
    EXPECT_EQ(run_cli("simulate " + kReference + " --dt 0.0025 --out " + (dir / "dt").string()), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("--version"), 0);
}

TEST(Cli, GenerateFilesMatchLibraryOutput)
{
    const fs::path dir = scratch("cli_match");
    ASSERT_EQ(run_cli("generate " + kReference + " --out " + (dir / "cli").string()), 0);
    cmd_generate(kReference, (dir / "lib").string());
    EXPECT_EQ(slurp(dir / "cli" / "flat_reference.csv"), slurp(dir / "lib" / "flat_reference.csv"));
    EXPECT_EQ(slurp(dir / "cli" / "trajectory.txt"), slurp(dir / "lib" / "trajectory.txt"));
}
