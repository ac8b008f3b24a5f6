#ifndef FLATQUAD_SIM_HPP
#define FLATQUAD_SIM_HPP

// Scenario orchestration: plan the flat trajectory, roll out the closed loop
// against the rigid-body model, record one trace row per control period.

#include "flatquad/control.hpp"
#include "flatquad/errors.hpp"
#include "flatquad/flat_map.hpp"
#include "flatquad/rigid_body.hpp"
#include "flatquad/spline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace flatquad
{

    inline constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }

    struct WindProfile
    {
        enum class Kind
        {
            None,
            Constant,
            RampGust,
            Sinusoidal,
        };

        Kind kind = Kind::None;
        Eigen::Vector3d direction{1.0, 0.0, 0.0}; // unit vector the wind blows toward
        double peak_speed = 0.0;                  // m/s
        double start = 0.0;                       // s, onset (ramp-gust, sinusoidal)
        double rise = 0.0;                        // s, ramp-gust
        double hold = 0.0;                        // s, ramp-gust
        double fall = 0.0;                        // s, ramp-gust
        double period = 1.0;                      // s, sinusoidal

        void validate() const
        {
            if (!(peak_speed >= 0.0) || !std::isfinite(peak_speed))
                throw ValidationError("wind.peak_speed must be non-negative");
            if (kind != Kind::None && std::abs(direction.norm() - 1.0) > 1e-9)
                throw ValidationError("wind.direction must be a unit vector");
            if (!(rise >= 0.0 && hold >= 0.0 && fall >= 0.0 && start >= 0.0))
                throw ValidationError("wind timing parameters must be non-negative");
            if (kind == Kind::Sinusoidal && !(period > 0.0))
                throw ValidationError("wind.period must be positive");
        }

        /// 25 km/h gust blowing toward the north-east: 2 s ramp from t = 2 s, 4 s hold, 2 s decay.
        static WindProfile reference_gust()
        {
            WindProfile w;
            w.kind = Kind::RampGust;
            w.direction = Eigen::Vector3d(1.0, 1.0, 0.0).normalized();
            w.peak_speed = kmh_to_mps(25.0);
            w.start = 2.0;
            w.rise = 2.0;
            w.hold = 4.0;
            w.fall = 2.0;
            return w;
        }
    };

    inline std::string_view to_string(WindProfile::Kind k)
    {
        switch (k)
        {
        case WindProfile::Kind::None:
            return "none";
        case WindProfile::Kind::Constant:
            return "constant";
        case WindProfile::Kind::RampGust:
            return "ramp_gust";
        case WindProfile::Kind::Sinusoidal:
            return "sinusoidal";
        }
        return "unknown";
    }

    inline WindProfile::Kind wind_kind_from_string(std::string_view s)
    {
        for (auto k : {WindProfile::Kind::None, WindProfile::Kind::Constant, WindProfile::Kind::RampGust,
                       WindProfile::Kind::Sinusoidal})
            if (to_string(k) == s)
                return k;
        throw ValidationError("unknown wind kind '" + std::string(s) +
                              "' (expected none, constant, ramp_gust or sinusoidal)");
    }

    inline WindSample wind_sample(const WindProfile &p, double t)
    {
        double speed = 0.0;
        switch (p.kind)
        {
        case WindProfile::Kind::None:
            break;
        case WindProfile::Kind::Constant:
            speed = p.peak_speed;
            break;
        case WindProfile::Kind::RampGust:
        {
            const double a = t - p.start;
            if (a < 0.0)
                speed = 0.0;
            else if (a < p.rise)
                speed = p.peak_speed * a / p.rise;
            else if (a < p.rise + p.hold)
                speed = p.peak_speed;
            else if (a < p.rise + p.hold + p.fall)
                speed = p.peak_speed * (1.0 - (a - p.rise - p.hold) / p.fall);
            break;
        }
        case WindProfile::Kind::Sinusoidal:
            if (t >= p.start)
                speed = p.peak_speed * std::sin(2.0 * std::numbers::pi * (t - p.start) / p.period);
            break;
        }
        return {speed * p.direction};
    }

    struct Scenario
    {
        WaypointSet waypoints;
        int spline_order = 6;
        int control_points = 12;
        double yaw_start = 0.0; // rad
        double yaw_end = 0.0;   // rad
        BodyParams body;
        EnvParams env;
        StrategyGains gains;
        double integral_limit = kDefaultIntegralLimit;
        StrategyKind strategy = StrategyKind::Combined;
        WindProfile wind;
        WindProfile comparison_wind = WindProfile::reference_gust(); // wind column of compare runs
        double control_period = 0.01;   // s
        double physics_substep = 0.001; // s
        RigidState initial_perturbation;

        double t_begin() const { return waypoints.times.front(); }
        double t_end() const { return waypoints.times.back(); }
        double duration() const { return t_end() - t_begin(); }

        int substeps_per_period() const
        {
            return static_cast<int>(std::llround(control_period / physics_substep));
        }

        void validate() const
        {
            waypoints.validate();
            body.validate();
            env.validate();
            gains.torque.validate();
            gains.attitude.validate();
            wind.validate();
            comparison_wind.validate();
            if (spline_order < 5)
                throw ValidationError("spline.order must be at least 5 (fourth derivatives are required)");
            if (control_points < spline_order)
                throw ValidationError("spline.control_points must be at least spline.order");
            if (!(control_period > 0.0) || !(physics_substep > 0.0))
                throw ValidationError("timing.control_period and timing.physics_substep must be positive");
            const double ratio = control_period / physics_substep;
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
                throw ValidationError("timing.control_period must be an integer multiple of timing.physics_substep");
            if (!(integral_limit > 0.0))
                throw ValidationError("integral_limit must be positive");
        }

        /// Reference mission: five waypoints over 10 s, order-6 spline with 12
        /// control points, yaw 0 -> 10 deg, Crazyflie parameters, default gains.
        static Scenario reference()
        {
            Scenario s;
            s.waypoints.positions = {{0.0, 0.0, 5.0}, {0.4, 0.9, 6.0}, {1.4, 1.2, 6.5}, {2.0, 0.8, 5.7},
                                     {1.5, -0.5, 5.0}};
            s.waypoints.times = {0.0, 3.0, 5.5, 7.0, 10.0};
            s.yaw_end = 10.0 * std::numbers::pi / 180.0;
            return s;
        }
    };

    struct PlannedTrajectory
    {
        BSplineCurve curve;
        YawProfile yaw;
    };

    inline PlannedTrajectory plan_trajectory(const Scenario &s)
    {
        PlannedTrajectory plan;
        plan.curve = solve_trajectory(s.waypoints, s.spline_order, s.control_points);
        plan.yaw = yaw_profile(s.yaw_start, s.yaw_end, s.t_begin(), s.t_end());
        return plan;
    }

    inline FlatStateRef reference_at(const PlannedTrajectory &plan, double t, const BodyParams &p, double g)
    {
        return full_flat_map(flat_sample_at(plan.curve, plan.yaw, t, g), p, g);
    }

    /// Dense flat references (state and inputs) at the given step.
    inline std::vector<FlatStateRef> flat_references(const PlannedTrajectory &plan, const BodyParams &p, double g,
                                                     double dt)
    {
        std::vector<FlatStateRef> out;
        for (const FlatSample &s : sample_flat_trajectory(plan.curve, plan.yaw, dt, g))
            out.push_back(full_flat_map(s, p, g));
        return out;
    }

    struct TraceRow
    {
        double t = 0.0;
        RigidState state;
        Eigen::Vector3d ref_position = Eigen::Vector3d::Zero();
        Eigen::Vector3d ref_euler = Eigen::Vector3d::Zero();
        ControlInput input; // applied (after saturation and rate limiting)
        RotorSpeeds rotors;
        Eigen::Vector3d wind = Eigen::Vector3d::Zero();
    };

    struct Metrics
    {
        double iae = 0.0;                // m s
        double max_position_error = 0.0; // m
        double max_tilt = 0.0;           // rad
        int saturation_count = 0;        // control periods with a clamped rotor speed
        int rate_limit_count = 0;        // control periods with a rate-limited rotor
        double max_rotor_speed = 0.0;    // rad/s
        double max_rotor_accel = 0.0;    // rad/s^2, between consecutive control periods
    };

    struct RunResult
    {
        std::vector<TraceRow> trace;
        Metrics metrics;
    };

    /// Trapezoidal integral of |reference - actual| over the sample times.
    inline double compute_iae(const std::vector<double> &times, const std::vector<Eigen::Vector3d> &actual,
                              const std::vector<Eigen::Vector3d> &reference)
    {
        if (times.size() != actual.size() || times.size() != reference.size())
            throw LengthMismatch("IAE inputs differ in length");
        double iae = 0.0;
        for (std::size_t k = 1; k < times.size(); ++k)
            iae += 0.5 * (times[k] - times[k - 1]) *
                   ((reference[k] - actual[k]).norm() + (reference[k - 1] - actual[k - 1]).norm());
        return iae;
    }

    inline double compute_iae(const std::vector<TraceRow> &trace)
    {
        std::vector<double> ts;
        std::vector<Eigen::Vector3d> act, ref;
        for (const TraceRow &r : trace)
        {
            ts.push_back(r.t);
            act.push_back(r.state.position);
            ref.push_back(r.ref_position);
        }
        return compute_iae(ts, act, ref);
    }

    inline double tilt_angle(const Eigen::Vector3d &euler)
    {
        return std::acos(std::clamp(std::cos(euler.x()) * std::cos(euler.y()), -1.0, 1.0));
    }

    inline Metrics summarize(const std::vector<TraceRow> &trace)
    {
        Metrics m;
        m.iae = compute_iae(trace);
        for (const TraceRow &r : trace)
        {
            m.max_position_error = std::max(m.max_position_error, (r.ref_position - r.state.position).norm());
            m.max_tilt = std::max(m.max_tilt, tilt_angle(r.state.euler));
            for (double w : r.rotors.w)
                m.max_rotor_speed = std::max(m.max_rotor_speed, w);
        }
        for (std::size_t k = 1; k < trace.size(); ++k)
        {
            const double dt = trace[k].t - trace[k - 1].t;
            for (int i = 0; i < 4; ++i)
                m.max_rotor_accel = std::max(
                    m.max_rotor_accel, std::abs(trace[k].rotors.w[i] - trace[k - 1].rotors.w[i]) / dt);
        }
        return m;
    }

    /// Rotor command after the speed and acceleration limits.
    struct ActuatorCommand
    {
        RotorSpeeds rotors;
        bool saturated = false;
        bool rate_limited = false;
    };

    /// Clamps each squared speed into [0, w_max^2], then limits the change from
    /// `previous` to max_rotor_accel * dt (skipped when previous is empty).
    inline ActuatorCommand actuate(const ControlInput &u, const BodyParams &p, const std::optional<RotorSpeeds> &previous,
                                   double dt)
    {
        const auto sq = mix_squared(u, p);
        const double scale = std::max({1.0, std::abs(sq[0]), std::abs(sq[1]), std::abs(sq[2]), std::abs(sq[3])});
        const double max_sq = p.max_rotor_speed * p.max_rotor_speed;
        ActuatorCommand cmd;
        for (int i = 0; i < 4; ++i)
        {
            double s = sq[static_cast<std::size_t>(i)];
            if (s < -1e-12 * scale || s > max_sq)
                cmd.saturated = true;
            s = std::clamp(s, 0.0, max_sq);
            double w = std::sqrt(s);
            if (previous)
            {
                const double prev = previous->w[static_cast<std::size_t>(i)];
                const double step = p.max_rotor_accel * dt;
                const double limited = std::clamp(w, prev - step, prev + step);
                if (limited != w)
                    cmd.rate_limited = true;
                w = limited;
            }
            cmd.rotors.w[static_cast<std::size_t>(i)] = w;
        }
        return cmd;
    }

    /// Per-step diagnostics available to callers that observe a rollout.
    struct StepInfo
    {
        double t = 0.0;
        const RigidState *state = nullptr;
        const FlatStateRef *reference = nullptr;
        const StrategyOutput *command = nullptr;
        const ControllerStates *controllers = nullptr;
    };

    struct NoObserver
    {
        void operator()(const StepInfo &) const {}
    };

    /// Closed-loop rollout of the scenario's strategy. Deterministic: identical
    /// scenarios give bit-identical traces.
    template <typename Observer = NoObserver>
    RunResult run_scenario(const Scenario &s, Observer &&observe = Observer{})
    {
        s.validate();
        const double g = s.env.gravity;
        const PlannedTrajectory plan = plan_trajectory(s);
        const std::vector<FlatStateRef> refs = flat_references(plan, s.body, g, s.control_period);
        const int substeps = s.substeps_per_period();

        RunResult result;
        result.trace.reserve(refs.size());
        ControllerStates ctl(s.integral_limit);
        RigidState state = refs.front().state() + s.initial_perturbation;
        std::optional<RotorSpeeds> previous;
        int saturations = 0, rate_limits = 0;

        for (std::size_t k = 0; k < refs.size(); ++k)
        {
            const FlatStateRef &ref = refs[k];
            const double t = ref.t;
            try
            {
                const double dt = k + 1 < refs.size() ? refs[k + 1].t - t : s.control_period;
                const StrategyOutput cmd = strategy_step(s.strategy, state, ref, ctl, s.gains, s.body, g, dt);
                observe(StepInfo{t, &state, &ref, &cmd, &ctl});

                const ActuatorCommand act = actuate(cmd.input, s.body, previous, dt);
                saturations += act.saturated ? 1 : 0;
                rate_limits += act.rate_limited ? 1 : 0;
                previous = act.rotors;

                TraceRow row;
                row.t = t;
                row.state = state;
                row.ref_position = ref.position;
                row.ref_euler = ref.euler;
                row.input = rotor_forces(act.rotors, s.body);
                row.rotors = act.rotors;
                row.wind = wind_sample(s.wind, t).velocity;
                result.trace.push_back(row);

                if (k + 1 < refs.size())
                {
                    const double h = dt / substeps;
                    for (int j = 0; j < substeps; ++j)
                        state = integrate_step(state, row.input, wind_sample(s.wind, t + j * h), s.body, s.env, h);
                }
            }
            catch (const RolloutAborted &)
            {
                throw;
            }
            catch (const Error &e)
            {
                throw RolloutAborted(t, e.what());
            }
        }

        result.metrics = summarize(result.trace);
        result.metrics.saturation_count = saturations;
        result.metrics.rate_limit_count = rate_limits;
        return result;
    }

    struct OpenLoopResult
    {
        std::vector<TraceRow> trace; // one row per control period
        double max_position_error = 0.0;
        double max_angle_error = 0.0;
    };

    /// Applies the flat thrust and torques, evaluated continuously at every
    /// integrator stage, from the exact flat initial state with no feedback.
    inline OpenLoopResult run_open_loop(const Scenario &s)
    {
        s.validate();
        const double g = s.env.gravity;
        const PlannedTrajectory plan = plan_trajectory(s);
        const int substeps = s.substeps_per_period();
        const std::vector<double> times = sample_times(s.t_begin(), s.t_end(), s.control_period);

        const auto input = [&](double t) {
            const FlatStateRef r = reference_at(plan, std::min(t, s.t_end()), s.body, g);
            return ControlInput{r.thrust, r.torque};
        };
        const auto wind = [&](double t) { return wind_sample(s.wind, t); };

        OpenLoopResult out;
        RigidState state = reference_at(plan, times.front(), s.body, g).state() + s.initial_perturbation;
        for (std::size_t k = 0; k < times.size(); ++k)
        {
            const FlatStateRef ref = reference_at(plan, times[k], s.body, g);
            TraceRow row;
            row.t = times[k];
            row.state = state;
            row.ref_position = ref.position;
            row.ref_euler = ref.euler;
            row.input = {ref.thrust, ref.torque};
            row.rotors.w = {};
            row.wind = wind(times[k]).velocity;
            out.trace.push_back(row);
            out.max_position_error = std::max(out.max_position_error, (ref.position - state.position).norm());
            out.max_angle_error = std::max(out.max_angle_error, (ref.euler - state.euler).cwiseAbs().maxCoeff());

            if (k + 1 < times.size())
            {
                const double h = (times[k + 1] - times[k]) / substeps;
                for (int j = 0; j < substeps; ++j)
                    state = integrate_step(state, times[k] + j * h, h, input, wind, s.body, s.env);
            }
        }
        return out;
    }

    /// One cell of the strategy comparison grid.
    struct ComparisonCell
    {
        StrategyKind strategy = StrategyKind::Combined;
        bool windy = false;
        std::optional<Metrics> metrics;
        std::string error; // set when the rollout failed
    };

    /// Runs every strategy with no wind and with the scenario's comparison wind.
    /// Cells run concurrently; the result is ordered strategy-major, calm first.
    inline std::vector<ComparisonCell> compare_strategies(const Scenario &base)
    {
        std::vector<std::future<ComparisonCell>> jobs;
        for (StrategyKind kind : kAllStrategies)
            for (bool windy : {false, true})
            {
                Scenario s = base;
                s.strategy = kind;
                s.wind = windy ? base.comparison_wind : WindProfile{};
                jobs.push_back(std::async(std::launch::async, [s, kind, windy]() {
                    ComparisonCell cell;
                    cell.strategy = kind;
                    cell.windy = windy;
                    try
                    {
                        cell.metrics = run_scenario(s).metrics;
                    }
                    catch (const std::exception &e)
                    {
                        cell.error = e.what();
                    }
                    return cell;
                }));
            }
        std::vector<ComparisonCell> cells;
        for (auto &j : jobs)
            cells.push_back(j.get());
        return cells;
    }

} // namespace flatquad

#endif
