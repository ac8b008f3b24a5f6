#ifndef FLATQUAD_IO_SCENARIO_FILE_HPP
#define FLATQUAD_IO_SCENARIO_FILE_HPP

// YAML scenario files. Every key maps onto one Scenario field; keys that are
// not listed below are rejected. All quantities are SI, angles in radians.
//
//   waypoints:                  # required, at least one entry
//     - {position: [x, y, z], time: t}          # m, s
//   duration: 10                # s; required for a single waypoint (held in hover)
//   spline: {order: 6, control_points: 12}
//   yaw: {start: 0, end: 0.1745}                # rad
//   strategy: combined          # flat_angle | flat_position | combined
//   body:
//     mass: 0.5                 # kg
//     arm_length: 0.225         # m
//     thrust_coeff: 2.98e-6     # N s^2
//     drag_torque_coeff: 1.14e-7 # N m s^2
//     inertia: [Ixx, Iyy, Izz]  # kg m^2
//     max_rotor_speed: 6157.5   # rad/s
//     max_rotor_accel: 1000     # rad/s^2
//   env:
//     gravity: 9.81             # m/s^2
//     air_density: 1.225        # kg/m^3
//     drag_coeff: 1.0
//     projected_area: [Ax, Ay, Az]  # m^2
//   gains:
//     torque:   {kp: 225, kd: 30, ki: 0}        # scalar or [x, y, z]
//     attitude: {kp: [25, 25, 9], kd: [10, 10, 6], ki: [1, 1, 0.3]}
//   integral_limit: 10
//   wind:            {kind: ramp_gust, direction: [1, 1, 0], peak_speed: 6.94,
//                     start: 2, rise: 2, hold: 4, fall: 2, period: 1}
//   comparison_wind: {...}      # same keys; the wind column of `compare`
//   timing: {control_period: 0.01, physics_substep: 0.001}  # s
//   initial_perturbation: {position: [..], velocity: [..], euler: [..], body_rates: [..]}
//
// Wind directions are normalized on load; a zero direction is an error.

#include "flatquad/errors.hpp"
#include "flatquad/sim.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

namespace flatquad::io
{

    /// Parse or validation failure in a scenario file. line() is 1-based, 0 when unknown.
    class ScenarioFileError : public ValidationError
    {
    public:
        ScenarioFileError(const std::string &source, int line, const std::string &msg)
            : ValidationError(format(source, line, msg)), line_(line) {}

        int line() const { return line_; }

    private:
        static std::string format(const std::string &source, int line, const std::string &msg)
        {
            std::string s = source;
            if (line > 0)
                s += ":" + std::to_string(line);
            return s + ": " + msg;
        }

        int line_;
    };

    namespace detail
    {
        class Reader
        {
        public:
            explicit Reader(std::string source) : source_(std::move(source)) {}

            [[noreturn]] void fail(const YAML::Node &n, const std::string &msg) const
            {
                throw ScenarioFileError(source_, n.Mark().is_null() ? 0 : n.Mark().line + 1, msg);
            }

            void require_map(const YAML::Node &n, const std::string &path) const
            {
                if (!n.IsMap())
                    fail(n, path + " must be a mapping");
            }

            void allow_keys(const YAML::Node &n, const std::string &path,
                            std::initializer_list<const char *> keys) const
            {
                require_map(n, path);
                const std::set<std::string> allowed(keys.begin(), keys.end());
                for (const auto &kv : n)
                {
                    const std::string key = kv.first.as<std::string>();
                    if (!allowed.count(key))
                        fail(kv.first, "unknown key '" + join(path, key) + "'");
                }
            }

            double number(const YAML::Node &n, const std::string &path) const
            {
                if (!n.IsScalar())
                    fail(n, path + " must be a number");
                try
                {
                    return n.as<double>();
                }
                catch (const YAML::Exception &)
                {
                    fail(n, path + " must be a number, got '" + n.Scalar() + "'");
                }
            }

            int integer(const YAML::Node &n, const std::string &path) const
            {
                if (!n.IsScalar())
                    fail(n, path + " must be an integer");
                try
                {
                    return n.as<int>();
                }
                catch (const YAML::Exception &)
                {
                    fail(n, path + " must be an integer, got '" + n.Scalar() + "'");
                }
            }

            std::string text(const YAML::Node &n, const std::string &path) const
            {
                if (!n.IsScalar())
                    fail(n, path + " must be a string");
                return n.Scalar();
            }

            Eigen::Vector3d vec3(const YAML::Node &n, const std::string &path) const
            {
                if (!n.IsSequence() || n.size() != 3)
                    fail(n, path + " must be a list of three numbers");
                Eigen::Vector3d v;
                for (int i = 0; i < 3; ++i)
                    v[i] = number(n[i], path + "[" + std::to_string(i) + "]");
                return v;
            }

            /// Scalar broadcast to all three axes, or an explicit list.
            Eigen::Vector3d axes(const YAML::Node &n, const std::string &path) const
            {
                if (n.IsScalar())
                    return Eigen::Vector3d::Constant(number(n, path));
                return vec3(n, path);
            }

            void read(const YAML::Node &map, const char *key, const std::string &path, double &out) const
            {
                if (const YAML::Node n = map[key])
                    out = number(n, join(path, key));
            }

            void read(const YAML::Node &map, const char *key, const std::string &path, int &out) const
            {
                if (const YAML::Node n = map[key])
                    out = integer(n, join(path, key));
            }

            void read(const YAML::Node &map, const char *key, const std::string &path, Eigen::Vector3d &out) const
            {
                if (const YAML::Node n = map[key])
                    out = vec3(n, join(path, key));
            }

            template <typename Fn>
            void checked(const YAML::Node &n, Fn &&fn) const
            {
                try
                {
                    fn();
                }
                catch (const ScenarioFileError &)
                {
                    throw;
                }
                catch (const ValidationError &e)
                {
                    fail(n, e.what());
                }
            }

            static std::string join(const std::string &path, const std::string &key)
            {
                return path.empty() ? key : path + "." + key;
            }

            const std::string &source() const { return source_; }

        private:
            std::string source_;
        };

        inline GainSet read_gains(const Reader &r, const YAML::Node &n, const std::string &path, GainSet g)
        {
            r.allow_keys(n, path, {"kp", "kd", "ki"});
            if (n["kp"])
                g.kp = r.axes(n["kp"], path + ".kp");
            if (n["kd"])
                g.kd = r.axes(n["kd"], path + ".kd");
            if (n["ki"])
                g.ki = r.axes(n["ki"], path + ".ki");
            r.checked(n, [&] { g.validate(); });
            return g;
        }

        inline WindProfile read_wind(const Reader &r, const YAML::Node &n, const std::string &path, WindProfile w)
        {
            r.allow_keys(n, path, {"kind", "direction", "peak_speed", "start", "rise", "hold", "fall", "period"});
            if (n["kind"])
                r.checked(n["kind"], [&] { w.kind = wind_kind_from_string(r.text(n["kind"], path + ".kind")); });
            if (n["direction"])
            {
                const Eigen::Vector3d d = r.vec3(n["direction"], path + ".direction");
                if (!(d.norm() > 0.0))
                    r.fail(n["direction"], path + ".direction must be non-zero");
                w.direction = d.normalized();
            }
            r.read(n, "peak_speed", path, w.peak_speed);
            r.read(n, "start", path, w.start);
            r.read(n, "rise", path, w.rise);
            r.read(n, "hold", path, w.hold);
            r.read(n, "fall", path, w.fall);
            r.read(n, "period", path, w.period);
            r.checked(n, [&] { w.validate(); });
            return w;
        }

        inline void read_waypoints(const Reader &r, const YAML::Node &root, Scenario &s)
        {
            const YAML::Node list = root["waypoints"];
            if (!list)
                r.fail(root, "missing required key 'waypoints'");
            if (!list.IsSequence() || list.size() == 0)
                r.fail(list, "waypoints must be a non-empty list");
            for (std::size_t k = 0; k < list.size(); ++k)
            {
                const YAML::Node w = list[k];
                const std::string path = "waypoints[" + std::to_string(k) + "]";
                r.allow_keys(w, path, {"position", "time"});
                if (!w["position"] || !w["time"])
                    r.fail(w, path + " needs both 'position' and 'time'");
                s.waypoints.positions.push_back(r.vec3(w["position"], path + ".position"));
                const double t = r.number(w["time"], path + ".time");
                if (!s.waypoints.times.empty() && !(t > s.waypoints.times.back()))
                    r.fail(w["time"], path + ".time: time stamps must be strictly increasing");
                s.waypoints.times.push_back(t);
            }

            const YAML::Node dur = root["duration"];
            if (s.waypoints.times.size() == 1)
            {
                if (!dur)
                    r.fail(list, "a single waypoint needs 'duration' for the hover hold");
                const double d = r.number(dur, "duration");
                if (!(d > 0.0))
                    r.fail(dur, "duration must be positive");
                s.waypoints.positions.push_back(s.waypoints.positions.front());
                s.waypoints.times.push_back(s.waypoints.times.front() + d);
            }
            else if (dur)
            {
                const double d = r.number(dur, "duration");
                const double span = s.waypoints.times.back() - s.waypoints.times.front();
                if (std::abs(d - span) > 1e-9 * std::max(1.0, span))
                    r.fail(dur, "duration must equal the last minus the first waypoint time");
            }
        }
    } // namespace detail

    /// Parses scenario text. `source` names the document in error messages.
    inline Scenario parse_scenario(const std::string &text, const std::string &source = "<scenario>")
    {
        const detail::Reader r(source);
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ScenarioFileError(source, e.mark.line + 1, e.msg);
        }
        if (!root || root.IsNull())
            throw ScenarioFileError(source, 0, "empty scenario document");
        r.allow_keys(root, "", {"waypoints", "duration", "spline", "yaw", "strategy", "body", "env", "gains",
                                "integral_limit", "wind", "comparison_wind", "timing", "initial_perturbation"});

        Scenario s;
        detail::read_waypoints(r, root, s);

        if (const YAML::Node n = root["spline"])
        {
            r.allow_keys(n, "spline", {"order", "control_points"});
            r.read(n, "order", "spline", s.spline_order);
            r.read(n, "control_points", "spline", s.control_points);
        }
        if (const YAML::Node n = root["yaw"])
        {
            r.allow_keys(n, "yaw", {"start", "end"});
            r.read(n, "start", "yaw", s.yaw_start);
            r.read(n, "end", "yaw", s.yaw_end);
            if (!(std::abs(s.yaw_start) < std::numbers::pi) || !(std::abs(s.yaw_end) < std::numbers::pi))
                r.fail(n, "yaw angles must lie in (-pi, pi)");
        }
        if (const YAML::Node n = root["strategy"])
            r.checked(n, [&] { s.strategy = strategy_from_string(r.text(n, "strategy")); });
        if (const YAML::Node n = root["body"])
        {
            r.allow_keys(n, "body", {"mass", "arm_length", "thrust_coeff", "drag_torque_coeff", "inertia",
                                     "max_rotor_speed", "max_rotor_accel"});
            r.read(n, "mass", "body", s.body.mass);
            r.read(n, "arm_length", "body", s.body.arm_length);
            r.read(n, "thrust_coeff", "body", s.body.thrust_coeff);
            r.read(n, "drag_torque_coeff", "body", s.body.drag_torque_coeff);
            r.read(n, "inertia", "body", s.body.inertia);
            r.read(n, "max_rotor_speed", "body", s.body.max_rotor_speed);
            r.read(n, "max_rotor_accel", "body", s.body.max_rotor_accel);
            r.checked(n, [&] { s.body.validate(); });
        }
        if (const YAML::Node n = root["env"])
        {
            r.allow_keys(n, "env", {"gravity", "air_density", "drag_coeff", "projected_area"});
            r.read(n, "gravity", "env", s.env.gravity);
            r.read(n, "air_density", "env", s.env.air_density);
            r.read(n, "drag_coeff", "env", s.env.drag_coeff);
            r.read(n, "projected_area", "env", s.env.projected_area);
            r.checked(n, [&] { s.env.validate(); });
        }
        if (const YAML::Node n = root["gains"])
        {
            r.allow_keys(n, "gains", {"torque", "attitude"});
            if (n["torque"])
                s.gains.torque = detail::read_gains(r, n["torque"], "gains.torque", s.gains.torque);
            if (n["attitude"])
                s.gains.attitude = detail::read_gains(r, n["attitude"], "gains.attitude", s.gains.attitude);
        }
        r.read(root, "integral_limit", "", s.integral_limit);
        if (const YAML::Node n = root["wind"])
            s.wind = detail::read_wind(r, n, "wind", s.wind);
        if (const YAML::Node n = root["comparison_wind"])
            s.comparison_wind = detail::read_wind(r, n, "comparison_wind", s.comparison_wind);
        if (const YAML::Node n = root["timing"])
        {
            r.allow_keys(n, "timing", {"control_period", "physics_substep"});
            r.read(n, "control_period", "timing", s.control_period);
            r.read(n, "physics_substep", "timing", s.physics_substep);
        }
        if (const YAML::Node n = root["initial_perturbation"])
        {
            const std::string p = "initial_perturbation";
            r.allow_keys(n, p, {"position", "velocity", "euler", "body_rates"});
            r.read(n, "position", p, s.initial_perturbation.position);
            r.read(n, "velocity", p, s.initial_perturbation.velocity);
            r.read(n, "euler", p, s.initial_perturbation.euler);
            r.read(n, "body_rates", p, s.initial_perturbation.body_rates);
        }

        r.checked(root, [&] { s.validate(); });
        return s;
    }

    inline std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ValidationError("cannot open '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    inline Scenario load_scenario(const std::string &path) { return parse_scenario(read_file(path), path); }

} // namespace flatquad::io

#endif
