#ifndef FLATQUAD_TESTS_SUPPORT_HPP
#define FLATQUAD_TESTS_SUPPORT_HPP

// Helpers shared by the unit tests and the acceptance runner: random smooth
// flat trajectories and oracles that avoid the library's own formulas.

#include "flatquad/flat_map.hpp"
#include "flatquad/spline.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace flatquad::testing
{

    /// Four polynomial channels of degree 7, evaluated with exact derivatives.
    struct PolyFlat
    {
        std::array<std::array<double, 8>, 4> c{};

        double eval(int ch, double t, int r) const
        {
            double acc = 0.0;
            for (int j = 7; j >= r; --j)
            {
                double f = 1.0;
                for (int q = 0; q < r; ++q)
                    f *= j - q;
                acc = acc * t + f * c[ch][j];
            }
            return acc;
        }

        FlatSample sample(double t) const
        {
            FlatSample s;
            s.t = t;
            for (int r = 0; r <= 4; ++r)
                for (int ch = 0; ch < 4; ++ch)
                    s.z[r][ch] = eval(ch, t, r);
            return s;
        }
    };

    /// Smooth trajectory on t in [0, 1] with accelerations below 7 m/s^2 and
    /// yaw within about 30 degrees, so the thrust axis stays upward.
    inline PolyFlat random_flat(std::mt19937 &rng)
    {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        PolyFlat p;
        for (int ch = 0; ch < 4; ++ch)
        {
            const double scale = ch < 3 ? 0.4 : 0.15; // |zddot_3| < 7 m/s^2 on [0, 1]
            for (int j = 0; j < 8; ++j)
                p.c[ch][j] = scale * u(rng) / (1.0 + j);
        }
        p.c[2][0] += 5.0;
        return p;
    }

    inline Eigen::Matrix3d rotation_oracle(const Eigen::Vector3d &e)
    {
        return (Eigen::AngleAxisd(e.z(), Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(e.y(), Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(e.x(), Eigen::Vector3d::UnitX()))
            .toRotationMatrix();
    }

    /// Central differences of f at t with step h: first and second derivatives
    /// from a five-point stencil.
    template <typename Fn>
    std::pair<Eigen::Vector3d, Eigen::Vector3d> central_diff(Fn &&f, double t, double h)
    {
        const Eigen::Vector3d m2 = f(t - 2 * h), m1 = f(t - h), z = f(t), p1 = f(t + h), p2 = f(t + 2 * h);
        const Eigen::Vector3d d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        const Eigen::Vector3d d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
        return {d1, d2};
    }

    /// Body angular velocity from the attitude history: vee(R^T dR/dt), with dR/dt
    /// by a five-point stencil.
    template <typename AngleFn>
    Eigen::Vector3d body_rate_oracle(AngleFn &&angles, double t, double h)
    {
        const auto r = [&](double s) { return rotation_oracle(angles(s)); };
        const Eigen::Matrix3d rdot = (r(t - 2 * h) - 8.0 * r(t - h) + 8.0 * r(t + h) - r(t + 2 * h)) / (12.0 * h);
        const Eigen::Matrix3d skew = r(t).transpose() * rdot;
        return {0.5 * (skew(2, 1) - skew(1, 2)), 0.5 * (skew(0, 2) - skew(2, 0)), 0.5 * (skew(1, 0) - skew(0, 1))};
    }

    /// Euler's rotation equation I w_dot + w x I w on numerically differentiated
    /// body rates of the given attitude history.
    template <typename AngleFn>
    Eigen::Vector3d torque_oracle(AngleFn &&angles, double t, double h, const Eigen::Vector3d &inertia)
    {
        const auto w = [&](double s) { return body_rate_oracle(angles, s, h); };
        const Eigen::Vector3d wdot = (w(t - 2 * h) - 8.0 * w(t - h) + 8.0 * w(t + h) - w(t + 2 * h)) / (12.0 * h);
        const Eigen::Vector3d omega = w(t);
        return inertia.cwiseProduct(wdot) + omega.cross(inertia.cwiseProduct(omega));
    }

    /// Clamped knot vector of order 2..7 on [t0, t1] with random, possibly
    /// repeated, interior knots.
    inline KnotVector random_clamped_knots(std::mt19937 &rng, double t0 = 0.0, double t1 = 1.0)
    {
        std::uniform_int_distribution<int> order_dist(2, 7), extra(0, 8), coin(0, 4);
        std::uniform_real_distribution<double> u(t0, t1);
        const int order = order_dist(rng);
        const int n_ctrl = order + extra(rng);
        std::vector<double> interior;
        for (int i = 0; i < n_ctrl - order; ++i)
            interior.push_back(!interior.empty() && coin(rng) == 0 ? interior.back() : u(rng));
        std::sort(interior.begin(), interior.end());
        std::vector<double> knots(static_cast<std::size_t>(order), t0);
        knots.insert(knots.end(), interior.begin(), interior.end());
        knots.insert(knots.end(), static_cast<std::size_t>(order), t1);
        return KnotVector(knots, order);
    }

} // namespace flatquad::testing

#endif
