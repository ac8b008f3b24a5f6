#ifndef FLATQUAD_CONTROL_HPP
#define FLATQUAD_CONTROL_HPP

// Feedback-linearizing controllers built on the flat references.
//
// Torque controller (computed torque): with M(eta) = I W and
// V(eta, eta_dot) = I Wdot eta_dot + (W eta_dot) x (I W eta_dot),
//   tau = M(eta) (eta_ddot_ref + Kd e_dot + Kp e + Ki int e) + V(eta, eta_dot),  e = eta_ref - eta
// so that the exact plant obeys e_ddot + Kd e_dot + Kp e + Ki int e = 0.
//
// Attitude controller: the corrected position
//   xi* = xi_ref + Kd int e + Kp int int e + Ki int int int e,  e = xi_ref - xi
// has second derivative  xi*_ddot = xi_ref_ddot + Kd e_dot + Kp e + Ki int e,
// which is pushed through the flat roll/pitch/thrust maps.

#include "flatquad/errors.hpp"
#include "flatquad/flat_map.hpp"
#include "flatquad/rigid_body.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <string_view>

namespace flatquad
{

    /// Diagonal gains of one controller (one entry per axis).
    struct GainSet
    {
        Eigen::Vector3d kp = Eigen::Vector3d::Zero();
        Eigen::Vector3d kd = Eigen::Vector3d::Zero();
        Eigen::Vector3d ki = Eigen::Vector3d::Zero();

        void validate() const
        {
            if (!(kp.array() >= 0.0).all() || !(kd.array() >= 0.0).all() || !(ki.array() >= 0.0).all())
                throw ValidationError("controller gains must be non-negative");
        }

        static GainSet uniform(double kp, double kd, double ki)
        {
            return {Eigen::Vector3d::Constant(kp), Eigen::Vector3d::Constant(kd), Eigen::Vector3d::Constant(ki)};
        }

        /// Reference torque-controller gains.
        static GainSet default_torque() { return uniform(225.0, 30.0, 0.0); }

        /// Reference attitude-controller gains.
        static GainSet default_attitude()
        {
            return {{25.0, 25.0, 9.0}, {10.0, 10.0, 6.0}, {1.0, 1.0, 0.3}};
        }
    };

    /// Hurwitz test of s^3 + kd s^2 + kp s + ki per axis. Without integral action
    /// (ki == 0) the loop reduces to s^2 + kd s + kp, stable iff kp, kd > 0.
    inline bool axis_stable(double kp, double kd, double ki)
    {
        if (ki == 0.0)
            return kp > 0.0 && kd > 0.0;
        return kp > 0.0 && kd > 0.0 && ki > 0.0 && kp * kd > ki;
    }

    inline std::array<bool, 3> check_gains(const GainSet &g)
    {
        return {axis_stable(g.kp[0], g.kd[0], g.ki[0]), axis_stable(g.kp[1], g.kd[1], g.ki[1]),
                axis_stable(g.kp[2], g.kd[2], g.ki[2])};
    }

    inline bool gains_stable(const GainSet &g)
    {
        const auto v = check_gains(g);
        return v[0] && v[1] && v[2];
    }

    inline Eigen::Vector3d clamp_abs(const Eigen::Vector3d &v, double limit)
    {
        return v.cwiseMax(-limit).cwiseMin(limit);
    }

    inline constexpr double kDefaultIntegralLimit = 10.0;

    struct TorqueCtlState
    {
        Eigen::Vector3d integral = Eigen::Vector3d::Zero(); // int e_eta dt
        Eigen::Vector3d prev_error = Eigen::Vector3d::Zero();
        bool started = false;
        double integral_limit = kDefaultIntegralLimit;

        void reset() { *this = TorqueCtlState{.integral_limit = integral_limit}; }
    };

    struct TorqueOutput
    {
        Eigen::Vector3d torque = Eigen::Vector3d::Zero();
        Eigen::Vector3d servo = Eigen::Vector3d::Zero(); // commanded Euler acceleration
        Eigen::Vector3d error = Eigen::Vector3d::Zero();
        Eigen::Vector3d error_rate = Eigen::Vector3d::Zero();
    };

    /// Computed-torque law. `eta_rate` is the measured Euler rate (W^-1 body rates).
    /// The error integral is accumulated with the trapezoidal rule.
    inline TorqueOutput torque_control(const Eigen::Vector3d &eta, const Eigen::Vector3d &eta_ref,
                                       const Eigen::Vector3d &eta_rate, const Eigen::Vector3d &eta_rate_ref,
                                       const Eigen::Vector3d &eta_accel_ref, TorqueCtlState &st, const GainSet &g,
                                       const BodyParams &p, double dt)
    {
        check_gimbal(eta.y());
        TorqueOutput out;
        out.error = eta_ref - eta;
        out.error_rate = eta_rate_ref - eta_rate;
        if (st.started)
            st.integral = clamp_abs(st.integral + 0.5 * dt * (out.error + st.prev_error), st.integral_limit);
        st.prev_error = out.error;
        st.started = true;

        out.servo = eta_accel_ref + g.kd.cwiseProduct(out.error_rate) + g.kp.cwiseProduct(out.error) +
                    g.ki.cwiseProduct(st.integral);
        out.torque = euler_inverse_dynamics(eta, eta_rate, out.servo, p.inertia);
        return out;
    }

    /// e_ddot + Kd e_dot + Kp e + Ki int e for the Euler acceleration the model
    /// produces under `torque`. Zero when the plant matches the model.
    inline Eigen::Vector3d linearization_residual(const Eigen::Vector3d &eta, const Eigen::Vector3d &eta_rate,
                                                  const Eigen::Vector3d &eta_accel_ref, const TorqueOutput &out,
                                                  const TorqueCtlState &st, const GainSet &g,
                                                  const BodyParams &p)
    {
        const Eigen::Vector3d accel = euler_forward_dynamics(eta, eta_rate, out.torque, p.inertia);
        const Eigen::Vector3d err_accel = eta_accel_ref - accel;
        return err_accel + g.kd.cwiseProduct(out.error_rate) + g.kp.cwiseProduct(out.error) +
               g.ki.cwiseProduct(st.integral);
    }

    struct AttitudeCtlState
    {
        Eigen::Vector3d i1 = Eigen::Vector3d::Zero(); // int e
        Eigen::Vector3d i2 = Eigen::Vector3d::Zero(); // int int e
        Eigen::Vector3d i3 = Eigen::Vector3d::Zero(); // int int int e
        Eigen::Vector3d prev_error = Eigen::Vector3d::Zero();
        bool started = false;
        double integral_limit = kDefaultIntegralLimit;

        void reset() { *this = AttitudeCtlState{.integral_limit = integral_limit}; }
    };

    struct AttitudeOutput
    {
        double thrust = 0.0;
        Eigen::Vector3d euler_ref = Eigen::Vector3d::Zero();
        Eigen::Vector3d accel_star = Eigen::Vector3d::Zero();          // second derivative of xi*
        Eigen::Vector3d corrected_position = Eigen::Vector3d::Zero();  // xi*
        Eigen::Vector3d error = Eigen::Vector3d::Zero();
    };

    inline AttitudeOutput attitude_control(const Eigen::Vector3d &position, const Eigen::Vector3d &velocity,
                                           const FlatStateRef &ref, double z4_ref, AttitudeCtlState &st,
                                           const GainSet &g, double mass, double gravity, double dt)
    {
        AttitudeOutput out;
        out.error = ref.position - position;
        const Eigen::Vector3d error_rate = ref.velocity - velocity;
        if (st.started)
        {
            const Eigen::Vector3d i1 = clamp_abs(st.i1 + 0.5 * dt * (out.error + st.prev_error), st.integral_limit);
            const Eigen::Vector3d i2 = clamp_abs(st.i2 + 0.5 * dt * (i1 + st.i1), st.integral_limit);
            st.i3 = clamp_abs(st.i3 + 0.5 * dt * (i2 + st.i2), st.integral_limit);
            st.i2 = i2;
            st.i1 = i1;
        }
        st.prev_error = out.error;
        st.started = true;

        out.corrected_position = ref.position + g.kd.cwiseProduct(st.i1) + g.kp.cwiseProduct(st.i2) +
                                 g.ki.cwiseProduct(st.i3);
        out.accel_star = ref.acceleration + g.kd.cwiseProduct(error_rate) + g.kp.cwiseProduct(out.error) +
                         g.ki.cwiseProduct(st.i1);

        const Eigen::Vector3d k(out.accel_star.x(), out.accel_star.y(), out.accel_star.z() + gravity);
        const auto rp = detail::roll_pitch(k.x(), k.y(), k.z(), z4_ref);
        out.euler_ref = {rp[0], rp[1], 2.0 * std::atan(z4_ref)};
        out.thrust = mass * k.norm();
        return out;
    }

    /// Causal Euler-rate/acceleration estimate of a feedback-generated angle
    /// reference: three-point backward differences over the last three control
    /// samples. Seeded with two virtual past samples extrapolated from the flat
    /// reference, so the first estimate equals the flat rates exactly.
    class ReferenceRateEstimator
    {
    public:
        bool seeded() const { return seeded_; }

        void seed(const FlatStateRef &flat, double dt)
        {
            // update() shifts before inserting, so t - dt goes to slot 0 and t - 2 dt to slot 1
            for (int j = 1; j <= 2; ++j)
            {
                const double h = j * dt;
                hist_[static_cast<std::size_t>(j - 1)] =
                    flat.euler - h * flat.euler_rate + 0.5 * h * h * flat.euler_accel;
            }
            seeded_ = true;
        }

        AngleDerivatives update(const Eigen::Vector3d &euler_ref, double dt)
        {
            hist_[2] = hist_[1];
            hist_[1] = hist_[0];
            hist_[0] = euler_ref;
            if (!seeded_)
            {
                hist_[1] = hist_[2] = euler_ref;
                seeded_ = true;
            }
            AngleDerivatives d;
            d.rate = (3.0 * hist_[0] - 4.0 * hist_[1] + hist_[2]) / (2.0 * dt);
            d.accel = (hist_[0] - 2.0 * hist_[1] + hist_[2]) / (dt * dt);
            return d;
        }

        void reset() { *this = ReferenceRateEstimator{}; }

    private:
        // hist_[0] newest
        std::array<Eigen::Vector3d, 3> hist_{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                                             Eigen::Vector3d::Zero()};
        bool seeded_ = false;
    };

    enum class StrategyKind
    {
        FlatAngle,    // flat thrust + torque controller on flat angles; position open loop
        FlatPosition, // attitude controller + flat torque map at the angle reference; angles open loop
        Combined,     // attitude controller + torque controller
    };

    inline constexpr std::array<StrategyKind, 3> kAllStrategies{StrategyKind::FlatAngle, StrategyKind::FlatPosition,
                                                                StrategyKind::Combined};

    inline std::string_view to_string(StrategyKind k)
    {
        switch (k)
        {
        case StrategyKind::FlatAngle:
            return "flat_angle";
        case StrategyKind::FlatPosition:
            return "flat_position";
        case StrategyKind::Combined:
            return "combined";
        }
        return "unknown";
    }

    inline StrategyKind strategy_from_string(std::string_view s)
    {
        for (StrategyKind k : kAllStrategies)
            if (to_string(k) == s)
                return k;
        throw ValidationError("unknown strategy '" + std::string(s) +
                              "' (expected flat_angle, flat_position or combined)");
    }

    struct StrategyGains
    {
        GainSet torque = GainSet::default_torque();
        GainSet attitude = GainSet::default_attitude();
    };

    struct ControllerStates
    {
        TorqueCtlState torque;
        AttitudeCtlState attitude;
        ReferenceRateEstimator rates;

        explicit ControllerStates(double integral_limit = kDefaultIntegralLimit)
        {
            torque.integral_limit = integral_limit;
            attitude.integral_limit = integral_limit;
        }

        void reset()
        {
            torque.reset();
            attitude.reset();
            rates.reset();
        }
    };

    struct StrategyOutput
    {
        ControlInput input;
        Eigen::Vector3d euler_ref = Eigen::Vector3d::Zero();
        Eigen::Vector3d euler_rate_ref = Eigen::Vector3d::Zero();
        Eigen::Vector3d euler_accel_ref = Eigen::Vector3d::Zero();
        Eigen::Vector3d measured_euler_rate = Eigen::Vector3d::Zero();
        bool torque_loop_closed = false;
        TorqueOutput torque_loop; // valid when torque_loop_closed
    };

    /// One control period of the selected tracking strategy.
    inline StrategyOutput strategy_step(StrategyKind kind, const RigidState &measured, const FlatStateRef &ref,
                                        ControllerStates &states, const StrategyGains &gains, const BodyParams &p,
                                        double gravity, double dt)
    {
        StrategyOutput out;
        out.measured_euler_rate = body_rate_map(measured.euler).w_inv * measured.body_rates;

        if (kind == StrategyKind::FlatAngle)
        {
            out.input.thrust = ref.thrust;
            out.euler_ref = ref.euler;
            out.euler_rate_ref = ref.euler_rate;
            out.euler_accel_ref = ref.euler_accel;
        }
        else
        {
            const AttitudeOutput att = attitude_control(measured.position, measured.velocity, ref, ref.z4,
                                                        states.attitude, gains.attitude, p.mass, gravity, dt);
            if (!states.rates.seeded())
                states.rates.seed(ref, dt);
            const AngleDerivatives d = states.rates.update(att.euler_ref, dt);
            out.input.thrust = att.thrust;
            out.euler_ref = att.euler_ref;
            out.euler_rate_ref = d.rate;
            out.euler_accel_ref = d.accel;
        }

        if (kind == StrategyKind::FlatPosition)
        {
            out.input.torque = euler_inverse_dynamics(out.euler_ref, out.euler_rate_ref, out.euler_accel_ref,
                                                      p.inertia);
            return out;
        }

        out.torque_loop = torque_control(measured.euler, out.euler_ref, out.measured_euler_rate, out.euler_rate_ref,
                                         out.euler_accel_ref, states.torque, gains.torque, p, dt);
        out.torque_loop_closed = true;
        out.input.torque = out.torque_loop.torque;
        return out;
    }

} // namespace flatquad

#endif
