#ifndef FLATQUAD_FLAT_MAP_HPP
#define FLATQUAD_FLAT_MAP_HPP

// Flat output z = (x, y, z, tan(psi/2)) and the maps from z and its derivatives
// to attitude, thrust and torque references.
//
// With k = (zddot_1, zddot_2, zddot_3 + g) the thrust direction and the half-angle
// parametrization s(psi) = 2 z4 / (1 + z4^2), c(psi) = (1 - z4^2) / (1 + z4^2):
//
//   phi   = asin((2 z4 k1 - (1 - z4^2) k2) / ((1 + z4^2) |k|))
//   theta = atan(((1 - z4^2) k1 + 2 z4 k2) / ((1 + z4^2) k3))
//   psi   = 2 atan(z4)
//   T     = m |k|
//
// Angle rates and accelerations are obtained by pushing time derivatives of k and
// z4 through the same expressions (see Jet2). Torques follow from the rotational
// inverse dynamics evaluated on those angles.

#include "flatquad/errors.hpp"
#include "flatquad/jet.hpp"
#include "flatquad/rigid_body.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <iostream>
#include <string>

namespace flatquad
{

    /// Flat output and its derivatives through order four at one instant.
    struct FlatSample
    {
        double t = 0.0;
        std::array<Eigen::Vector4d, 5> z{Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero(),
                                         Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero()};

        const Eigen::Vector4d &derivative(int order) const { return z.at(static_cast<std::size_t>(order)); }
        Eigen::Vector4d &derivative(int order) { return z.at(static_cast<std::size_t>(order)); }

        /// Thrust direction scaled by T/m: (zddot_1, zddot_2, zddot_3 + g).
        Eigen::Vector3d specific_thrust(double g) const
        {
            return {z[2][0], z[2][1], z[2][2] + g};
        }
    };

    /// Full state and input reference reconstructed from a flat sample.
    struct FlatStateRef
    {
        double t = 0.0;
        Eigen::Vector3d position = Eigen::Vector3d::Zero();
        Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
        Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
        Eigen::Vector3d euler = Eigen::Vector3d::Zero();
        Eigen::Vector3d euler_rate = Eigen::Vector3d::Zero();
        Eigen::Vector3d euler_accel = Eigen::Vector3d::Zero();
        double thrust = 0.0;
        Eigen::Vector3d torque = Eigen::Vector3d::Zero();
        double z4 = 0.0; // tan(psi/2)

        /// The rigid-body state this reference describes.
        RigidState state() const
        {
            RigidState s;
            s.position = position;
            s.velocity = velocity;
            s.euler = euler;
            s.body_rates = body_rate_map(euler).w * euler_rate;
            return s;
        }
    };

    struct AngleDerivatives
    {
        Eigen::Vector3d rate = Eigen::Vector3d::Zero();
        Eigen::Vector3d accel = Eigen::Vector3d::Zero();
    };

    namespace detail
    {
        /// Clamping beyond this magnitude is reported on std::clog.
        inline constexpr double kClampReportThreshold = 1e-9;

        inline double value_of(double x) { return x; }
        inline double value_of(const Jet2 &x) { return x.v; }

        template <typename T>
        T clamp_unit(const T &x)
        {
            const double v = value_of(x);
            if (std::abs(v) - 1.0 > kClampReportThreshold)
                std::clog << "flatquad: roll asin argument " << v << " clamped to [-1, 1]\n";
            return x; // asin() below clamps the value
        }

        inline double clamp_asin(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }
        inline Jet2 clamp_asin(const Jet2 &x) { return flatquad::asin(x); }

        inline void require_upward(double k3)
        {
            if (!(k3 > 0.0))
                throw DegenerateAcceleration("zddot_3 + g must be positive, got " + std::to_string(k3));
        }

        /// Roll and pitch from the thrust direction (k1, k2, k3) and z4. Works for
        /// plain doubles and for Jet2 derivative carriers.
        template <typename T>
        std::array<T, 2> roll_pitch(const T &k1, const T &k2, const T &k3, const T &z4)
        {
            using std::atan;
            using std::sqrt;
            require_upward(value_of(k3));
            const T one(1.0);
            const T z4sq = z4 * z4;
            const T den = one + z4sq;
            const T norm = sqrt(k1 * k1 + k2 * k2 + k3 * k3);
            const T roll_arg = (2.0 * z4 * k1 - (one - z4sq) * k2) / (den * norm);
            const T pitch_arg = ((one - z4sq) * k1 + 2.0 * z4 * k2) / (den * k3);
            return {clamp_asin(clamp_unit(roll_arg)), atan(pitch_arg)};
        }
    } // namespace detail

    /// Roll, pitch and yaw of the flat sample.
    inline Eigen::Vector3d flat_angles(const FlatSample &s, double g)
    {
        const Eigen::Vector3d k = s.specific_thrust(g);
        const auto rp = detail::roll_pitch(k.x(), k.y(), k.z(), s.z[0][3]);
        return {rp[0], rp[1], 2.0 * std::atan(s.z[0][3])};
    }

    /// The (unclamped) asin argument of the roll map. Bounded by 1 in magnitude.
    inline double roll_asin_argument(const FlatSample &s, double g)
    {
        const Eigen::Vector3d k = s.specific_thrust(g);
        const double z4 = s.z[0][3];
        return (2.0 * z4 * k.x() - (1.0 - z4 * z4) * k.y()) / ((1.0 + z4 * z4) * k.norm());
    }

    inline double flat_thrust(const FlatSample &s, double mass, double g)
    {
        const Eigen::Vector3d k = s.specific_thrust(g);
        detail::require_upward(k.z());
        return mass * k.norm();
    }

    /// First and second time derivatives of the flat angles (needs z up to order 4).
    inline AngleDerivatives flat_angle_derivatives(const FlatSample &s, double g)
    {
        const Jet2 k1(s.z[2][0], s.z[3][0], s.z[4][0]);
        const Jet2 k2(s.z[2][1], s.z[3][1], s.z[4][1]);
        const Jet2 k3(s.z[2][2] + g, s.z[3][2], s.z[4][2]);
        const Jet2 z4(s.z[0][3], s.z[1][3], s.z[2][3]);
        const auto rp = detail::roll_pitch(k1, k2, k3, z4);
        const Jet2 yaw = 2.0 * flatquad::atan(z4);
        AngleDerivatives out;
        out.rate = {rp[0].d1, rp[1].d1, yaw.d1};
        out.accel = {rp[0].d2, rp[1].d2, yaw.d2};
        return out;
    }

    inline Eigen::Vector3d flat_torques(const FlatSample &s, const BodyParams &p, double g)
    {
        const Eigen::Vector3d eta = flat_angles(s, g);
        const AngleDerivatives d = flat_angle_derivatives(s, g);
        return euler_inverse_dynamics(eta, d.rate, d.accel, p.inertia);
    }

    inline FlatStateRef full_flat_map(const FlatSample &s, const BodyParams &p, double g)
    {
        FlatStateRef r;
        r.t = s.t;
        r.position = s.z[0].head<3>();
        r.velocity = s.z[1].head<3>();
        r.acceleration = s.z[2].head<3>();
        r.z4 = s.z[0][3];
        r.euler = flat_angles(s, g);
        const AngleDerivatives d = flat_angle_derivatives(s, g);
        r.euler_rate = d.rate;
        r.euler_accel = d.accel;
        r.thrust = flat_thrust(s, p.mass, g);
        r.torque = euler_inverse_dynamics(r.euler, r.euler_rate, r.euler_accel, p.inertia);
        return r;
    }

    /// Residuals of the two implicit translational constraints linking the
    /// acceleration to roll, pitch and yaw. Both vanish on consistent tuples.
    inline Eigen::Vector2d implicit_residuals(const Eigen::Vector3d &accel, const Eigen::Vector3d &euler, double g)
    {
        const double az = accel.z() + g;
        const double norm = std::sqrt(accel.x() * accel.x() + accel.y() * accel.y() + az * az);
        const double sf = std::sin(euler.x());
        const double ss = std::sin(euler.z()), cs = std::cos(euler.z());
        return {sf * norm - ss * accel.x() + cs * accel.y(),
                std::tan(euler.y()) * az - cs * accel.x() - ss * accel.y()};
    }

} // namespace flatquad

#endif
