#ifndef FLATQUAD_RIGID_BODY_HPP
#define FLATQUAD_RIGID_BODY_HPP

// Nonlinear quadcopter model: XYZ roll-pitch-yaw kinematics, rotor thrust/torque
// model and its inverse (mixer), translational drag and Newton-Euler dynamics.
//
// Frames: the inertial frame is East-North-Up, z points up and gravity acts along -z.
// Rotor layout: rotors 2/4 sit on the body y axis (roll), rotors 1/3 on the x axis (pitch).

#include "flatquad/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace flatquad
{

    /// |cos(theta)| at or below this value is treated as gimbal lock.
    inline constexpr double kGimbalTolerance = 1e-6;

    inline constexpr double rpm_to_rad_per_s(double rpm) { return rpm * 2.0 * std::numbers::pi / 60.0; }

    /// Airframe and rotor constants; defaults are Crazyflie 2.0 figures.
    struct BodyParams
    {
        double mass = 0.5;                 // kg
        double arm_length = 0.225;         // m
        double thrust_coeff = 2.98e-6;     // K_T
        double drag_torque_coeff = 1.14e-7; // b
        Eigen::Vector3d inertia{4.856e-3, 4.856e-3, 8.801e-3}; // diagonal, kg m^2
        double max_rotor_speed = rpm_to_rad_per_s(58800.0);   // rad/s
        double max_rotor_accel = 1000.0;                      // rad/s^2

        void validate() const
        {
            const bool ok = mass > 0.0 && arm_length > 0.0 && thrust_coeff > 0.0 &&
                            drag_torque_coeff > 0.0 && (inertia.array() > 0.0).all() &&
                            max_rotor_speed > 0.0 && max_rotor_accel > 0.0;
            if (!ok)
                throw ValidationError("body parameters must all be strictly positive");
        }
    };

    struct EnvParams
    {
        double gravity = 9.81;      // m/s^2
        double air_density = 1.225; // kg/m^3
        double drag_coeff = 1.0;
        Eigen::Vector3d projected_area{0.01, 0.01, 0.01}; // A_x, A_y, A_z in m^2

        void validate() const
        {
            if (!(gravity > 0.0))
                throw ValidationError("gravity must be positive");
            if (!(air_density >= 0.0) || !(drag_coeff >= 0.0) || !(projected_area.array() >= 0.0).all())
                throw ValidationError("drag parameters must be non-negative");
        }
    };

    /// Full vehicle state. Also used as the state time-derivative, where each
    /// field holds the rate of the corresponding quantity.
    struct RigidState
    {
        Eigen::Vector3d position = Eigen::Vector3d::Zero();
        Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
        Eigen::Vector3d euler = Eigen::Vector3d::Zero(); // phi, theta, psi
        Eigen::Vector3d body_rates = Eigen::Vector3d::Zero();

        RigidState &operator+=(const RigidState &o)
        {
            position += o.position;
            velocity += o.velocity;
            euler += o.euler;
            body_rates += o.body_rates;
            return *this;
        }

        friend RigidState operator+(RigidState a, const RigidState &b) { return a += b; }

        friend RigidState operator*(double s, RigidState a)
        {
            a.position *= s;
            a.velocity *= s;
            a.euler *= s;
            a.body_rates *= s;
            return a;
        }

        bool operator==(const RigidState &) const = default;
    };

    struct ControlInput
    {
        double thrust = 0.0;                          // N
        Eigen::Vector3d torque = Eigen::Vector3d::Zero(); // tau_phi, tau_theta, tau_psi
    };

    struct RotorSpeeds
    {
        std::array<double, 4> w{}; // rad/s, rotors 1..4
    };

    struct WindSample
    {
        Eigen::Vector3d velocity = Eigen::Vector3d::Zero(); // inertial frame, m/s
    };

    /// R = Rz(psi) Ry(theta) Rx(phi); maps body vectors into the inertial frame.
    inline Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d &euler)
    {
        const double sf = std::sin(euler.x()), cf = std::cos(euler.x());
        const double st = std::sin(euler.y()), ct = std::cos(euler.y());
        const double ss = std::sin(euler.z()), cs = std::cos(euler.z());
        Eigen::Matrix3d r;
        r << ct * cs, sf * st * cs - cf * ss, cf * st * cs + sf * ss,
            ct * ss, sf * st * ss + cf * cs, cf * st * ss - sf * cs,
            -st, sf * ct, cf * ct;
        return r;
    }

    /// W and its inverse, with body_rates = W * euler_rates.
    struct BodyRateMap
    {
        Eigen::Matrix3d w;
        Eigen::Matrix3d w_inv;
    };

    inline void check_gimbal(double theta)
    {
        if (std::abs(std::cos(theta)) <= kGimbalTolerance)
            throw GimbalLock("Euler-rate map singular at theta=" + std::to_string(theta));
    }

    inline BodyRateMap body_rate_map(const Eigen::Vector3d &euler)
    {
        check_gimbal(euler.y());
        const double sf = std::sin(euler.x()), cf = std::cos(euler.x());
        const double st = std::sin(euler.y()), ct = std::cos(euler.y());
        const double tt = st / ct;
        BodyRateMap m;
        m.w << 1.0, 0.0, -st,
            0.0, cf, sf * ct,
            0.0, -sf, cf * ct;
        m.w_inv << 1.0, sf * tt, cf * tt,
            0.0, cf, -sf,
            0.0, sf / ct, cf / ct;
        return m;
    }

    /// Time derivative of W along the Euler-angle rates.
    inline Eigen::Matrix3d body_rate_map_derivative(const Eigen::Vector3d &euler, const Eigen::Vector3d &euler_rate)
    {
        const double sf = std::sin(euler.x()), cf = std::cos(euler.x());
        const double st = std::sin(euler.y()), ct = std::cos(euler.y());
        const double df = euler_rate.x(), dt = euler_rate.y();
        Eigen::Matrix3d wd;
        wd << 0.0, 0.0, -ct * dt,
            0.0, -sf * df, cf * ct * df - sf * st * dt,
            0.0, -cf * df, -sf * ct * df - cf * st * dt;
        return wd;
    }

    /// M(eta) = I W: maps Euler accelerations to torque.
    inline Eigen::Matrix3d euler_inertia_matrix(const Eigen::Vector3d &euler, const Eigen::Vector3d &inertia)
    {
        return inertia.asDiagonal() * body_rate_map(euler).w;
    }

    /// V(eta, eta_dot) = I Wdot eta_dot + (W eta_dot) x (I W eta_dot).
    inline Eigen::Vector3d euler_bias_torque(const Eigen::Vector3d &euler, const Eigen::Vector3d &euler_rate,
                                             const Eigen::Vector3d &inertia)
    {
        const Eigen::Vector3d w = body_rate_map(euler).w * euler_rate;
        const Eigen::Vector3d wd_rate = body_rate_map_derivative(euler, euler_rate) * euler_rate;
        return inertia.cwiseProduct(wd_rate) + w.cross(inertia.cwiseProduct(w));
    }

    /// Torque producing the given Euler-angle motion: M(eta) eta_ddot + V(eta, eta_dot).
    inline Eigen::Vector3d euler_inverse_dynamics(const Eigen::Vector3d &euler, const Eigen::Vector3d &euler_rate,
                                                  const Eigen::Vector3d &euler_accel, const Eigen::Vector3d &inertia)
    {
        return euler_inertia_matrix(euler, inertia) * euler_accel + euler_bias_torque(euler, euler_rate, inertia);
    }

    /// Euler accelerations produced by a torque: inverse of euler_inverse_dynamics.
    inline Eigen::Vector3d euler_forward_dynamics(const Eigen::Vector3d &euler, const Eigen::Vector3d &euler_rate,
                                                  const Eigen::Vector3d &torque, const Eigen::Vector3d &inertia)
    {
        const BodyRateMap map = body_rate_map(euler);
        const Eigen::Vector3d w = map.w * euler_rate;
        const Eigen::Vector3d w_dot = (torque - w.cross(inertia.cwiseProduct(w))).cwiseQuotient(inertia);
        return map.w_inv * (w_dot - body_rate_map_derivative(euler, euler_rate) * euler_rate);
    }

    inline ControlInput rotor_forces(const RotorSpeeds &rotors, const BodyParams &p)
    {
        std::array<double, 4> s;
        for (int i = 0; i < 4; ++i)
            s[i] = rotors.w[i] * rotors.w[i];
        const double lk = p.arm_length * p.thrust_coeff;
        ControlInput u;
        u.thrust = p.thrust_coeff * (s[0] + s[1] + s[2] + s[3]);
        u.torque = {lk * (s[3] - s[1]),
                    lk * (s[2] - s[0]),
                    p.drag_torque_coeff * (-s[0] + s[1] - s[2] + s[3])};
        return u;
    }

    /// Squared rotor speeds realizing u, without any feasibility check.
    inline std::array<double, 4> mix_squared(const ControlInput &u, const BodyParams &p)
    {
        const double lk = p.arm_length * p.thrust_coeff;
        const double total = u.thrust / p.thrust_coeff;        // s1+s2+s3+s4
        const double roll = u.torque.x() / lk;                 // s4-s2
        const double pitch = u.torque.y() / lk;                // s3-s1
        const double yaw = u.torque.z() / p.drag_torque_coeff; // (s2+s4)-(s1+s3)
        const double odd = 0.5 * (total - yaw);                // s1+s3
        const double even = 0.5 * (total + yaw);               // s2+s4
        return {0.5 * (odd - pitch), 0.5 * (even - roll), 0.5 * (odd + pitch), 0.5 * (even + roll)};
    }

    /// Inverse of rotor_forces. Throws InfeasibleThrust when a squared speed is
    /// negative and Saturated when a speed exceeds p.max_rotor_speed.
    inline RotorSpeeds rotor_mix(const ControlInput &u, const BodyParams &p)
    {
        const auto sq = mix_squared(u, p);
        const double scale = std::max({1.0, std::abs(sq[0]), std::abs(sq[1]), std::abs(sq[2]), std::abs(sq[3])});
        RotorSpeeds out;
        for (int i = 0; i < 4; ++i)
        {
            if (sq[i] < -1e-12 * scale)
                throw InfeasibleThrust("rotor " + std::to_string(i + 1) + " needs a negative squared speed");
            out.w[i] = std::sqrt(std::max(sq[i], 0.0));
            if (out.w[i] > p.max_rotor_speed)
                throw Saturated("rotor " + std::to_string(i + 1) + " exceeds the speed limit");
        }
        return out;
    }

    /// Aerodynamic drag 0.5 Cd rho |Vr| A Vr with Vr = wind - velocity and the
    /// projected area A taken along the body axes.
    inline Eigen::Vector3d drag_force(const RigidState &state, const WindSample &wind, const EnvParams &env)
    {
        const Eigen::Vector3d vr = wind.velocity - state.velocity;
        const double speed = vr.norm();
        if (speed == 0.0)
            return Eigen::Vector3d::Zero();
        const Eigen::Matrix3d r = rotation_matrix(state.euler);
        const Eigen::Vector3d dir = vr / speed;
        double area = 0.0;
        for (int k = 0; k < 3; ++k)
            area += env.projected_area[k] * std::abs(r.col(k).dot(dir));
        return 0.5 * env.drag_coeff * env.air_density * speed * area * vr;
    }

    inline RigidState state_derivative(const RigidState &state, const ControlInput &u, const WindSample &wind,
                                       const BodyParams &p, const EnvParams &env)
    {
        const BodyRateMap map = body_rate_map(state.euler);
        const Eigen::Matrix3d r = rotation_matrix(state.euler);
        const Eigen::Vector3d &w = state.body_rates;
        const Eigen::Vector3d iw = p.inertia.cwiseProduct(w);

        RigidState d;
        d.position = state.velocity;
        d.velocity = Eigen::Vector3d(0.0, 0.0, -env.gravity) + r.col(2) * (u.thrust / p.mass) +
                     drag_force(state, wind, env) / p.mass;
        d.euler = map.w_inv * w;
        d.body_rates = (u.torque - w.cross(iw)).cwiseQuotient(p.inertia);
        return d;
    }

    /// Classical RK4 step with input and wind held over the step.
    inline RigidState integrate_step(const RigidState &state, const ControlInput &u, const WindSample &wind,
                                     const BodyParams &p, const EnvParams &env, double dt)
    {
        if (!(dt > 0.0))
            throw ValidationError("integration step must be positive");
        const RigidState k1 = state_derivative(state, u, wind, p, env);
        const RigidState k2 = state_derivative(state + (0.5 * dt) * k1, u, wind, p, env);
        const RigidState k3 = state_derivative(state + (0.5 * dt) * k2, u, wind, p, env);
        const RigidState k4 = state_derivative(state + dt * k3, u, wind, p, env);
        return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    /// RK4 step with time-varying input and wind, evaluated at each stage time.
    /// InputFn: double -> ControlInput, WindFn: double -> WindSample.
    template <typename InputFn, typename WindFn>
    RigidState integrate_step(const RigidState &state, double t, double dt, InputFn &&input, WindFn &&wind,
                              const BodyParams &p, const EnvParams &env)
    {
        if (!(dt > 0.0))
            throw ValidationError("integration step must be positive");
        const double th = t + 0.5 * dt;
        const RigidState k1 = state_derivative(state, input(t), wind(t), p, env);
        const RigidState k2 = state_derivative(state + (0.5 * dt) * k1, input(th), wind(th), p, env);
        const RigidState k3 = state_derivative(state + (0.5 * dt) * k2, input(th), wind(th), p, env);
        const RigidState k4 = state_derivative(state + dt * k3, input(t + dt), wind(t + dt), p, env);
        return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

} // namespace flatquad

#endif
