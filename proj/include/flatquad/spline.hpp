#ifndef FLATQUAD_SPLINE_HPP
#define FLATQUAD_SPLINE_HPP

// Clamped B-splines for the position channels of the flat output, the
// waypoint-constrained least-velocity trajectory fit, and the polynomial yaw
// channel.
//
// Orders follow the Cox-de Boor convention: a basis of order d is piecewise
// polynomial of degree d - 1, and B_{i,1} is the indicator of [tau_i, tau_{i+1}).

#include "flatquad/errors.hpp"
#include "flatquad/flat_map.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace flatquad
{

    class KnotVector
    {
    public:
        KnotVector() = default;

        KnotVector(std::vector<double> knots, int order) : knots_(std::move(knots)), order_(order)
        {
            if (order_ < 1)
                throw ValidationError("B-spline order must be at least 1");
            if (static_cast<int>(knots_.size()) < order_ + 1)
                throw ValidationError("knot vector too short for order " + std::to_string(order_));
            for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
                if (!(knots_[i] <= knots_[i + 1]))
                    throw ValidationError("knot vector must be non-decreasing");
            if (!(knots_.front() < knots_.back()))
                throw ValidationError("knot vector spans an empty interval");
        }

        /// Clamped knots on [t0, t1] for n_ctrl control points: d copies of each end,
        /// interior knots equally spaced.
        static KnotVector clamped_uniform(double t0, double t1, int n_ctrl, int order)
        {
            if (order < 1)
                throw ValidationError("B-spline order must be at least 1");
            if (n_ctrl < order)
                throw ValidationError("need at least " + std::to_string(order) + " control points for order " +
                                      std::to_string(order));
            if (!(t0 < t1))
                throw ValidationError("knot interval must be increasing");
            const int spans = n_ctrl - order + 1;
            std::vector<double> k;
            k.reserve(static_cast<std::size_t>(n_ctrl + order));
            for (int i = 0; i < order; ++i)
                k.push_back(t0);
            for (int j = 1; j < spans; ++j)
                k.push_back(t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(spans));
            for (int i = 0; i < order; ++i)
                k.push_back(t1);
            return KnotVector(std::move(k), order);
        }

        const std::vector<double> &knots() const { return knots_; }
        int order() const { return order_; }
        /// Index of the last knot (m).
        int last() const { return static_cast<int>(knots_.size()) - 1; }
        /// Number of order-d basis functions (n + 1 = m + 1 - d).
        int basis_count() const { return last() + 1 - order_; }
        double front() const { return knots_.front(); }
        double back() const { return knots_.back(); }
        double operator[](int i) const { return knots_[static_cast<std::size_t>(i)]; }

        bool operator==(const KnotVector &) const = default;

    private:
        std::vector<double> knots_;
        int order_ = 0;
    };

    namespace detail
    {
        inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

        inline void require_in_domain(const KnotVector &kv, double t)
        {
            if (!(t >= kv.front() && t <= kv.back()))
                throw IndexOutOfRange("t=" + std::to_string(t) + " outside the knot range");
        }

        /// All order-1 basis values at t. At the right end of the domain the last
        /// non-empty span is closed so that the clamped curve reaches its last point.
        inline std::vector<double> order_one(const KnotVector &kv, double t)
        {
            const int m = kv.last();
            std::vector<double> b(static_cast<std::size_t>(m), 0.0);
            if (t == kv.back())
            {
                for (int i = m - 1; i >= 0; --i)
                    if (kv[i] < kv[i + 1])
                    {
                        b[static_cast<std::size_t>(i)] = 1.0;
                        break;
                    }
                return b;
            }
            for (int i = 0; i < m; ++i)
                if (kv[i] <= t && t < kv[i + 1])
                    b[static_cast<std::size_t>(i)] = 1.0;
            return b;
        }

        /// Raise basis values from order q-1 to q with the Cox-de Boor recursion
        /// (0/0 taken as 0).
        inline std::vector<double> raise_value(const KnotVector &kv, const std::vector<double> &prev, int q, double t)
        {
            const int count = kv.last() + 1 - q;
            std::vector<double> b(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i)
            {
                const double left = safe_ratio(t - kv[i], kv[i + q - 1] - kv[i]);
                const double right = safe_ratio(kv[i + q] - t, kv[i + q] - kv[i + 1]);
                b[static_cast<std::size_t>(i)] =
                    left * prev[static_cast<std::size_t>(i)] + right * prev[static_cast<std::size_t>(i + 1)];
            }
            return b;
        }

        /// Raise derivative values from order q-1 to q: one more derivative.
        inline std::vector<double> raise_derivative(const KnotVector &kv, const std::vector<double> &prev, int q)
        {
            const int count = kv.last() + 1 - q;
            std::vector<double> b(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i)
            {
                const double left = safe_ratio(prev[static_cast<std::size_t>(i)], kv[i + q - 1] - kv[i]);
                const double right = safe_ratio(prev[static_cast<std::size_t>(i + 1)], kv[i + q] - kv[i + 1]);
                b[static_cast<std::size_t>(i)] = static_cast<double>(q - 1) * (left - right);
            }
            return b;
        }
    } // namespace detail

    /// r-th derivative of every order-d basis function at t (r = 0 gives values).
    inline std::vector<double> basis_all(const KnotVector &kv, int order, double t, int r = 0)
    {
        if (order < 1 || order > kv.last())
            throw IndexOutOfRange("basis order " + std::to_string(order) + " not supported by the knot vector");
        if (r < 0 || r >= order)
            throw OrderTooHigh("derivative order " + std::to_string(r) + " needs a basis of order above " +
                               std::to_string(r));
        detail::require_in_domain(kv, t);
        std::vector<double> b = detail::order_one(kv, t);
        for (int q = 2; q <= order - r; ++q)
            b = detail::raise_value(kv, b, q, t);
        for (int q = order - r + 1; q <= order; ++q)
            b = detail::raise_derivative(kv, b, q);
        return b;
    }

    /// B_{i,d}(t).
    inline double basis_eval(const KnotVector &kv, int i, int order, double t)
    {
        if (i < 0 || i > kv.last() - order)
            throw IndexOutOfRange("basis index " + std::to_string(i) + " out of range");
        return basis_all(kv, order, t)[static_cast<std::size_t>(i)];
    }

    /// r-th time derivative of B_{i,d}(t); requires r < d.
    inline double basis_derivative(const KnotVector &kv, int i, int order, double t, int r)
    {
        if (r >= order)
            throw OrderTooHigh("derivative order " + std::to_string(r) + " >= basis order " + std::to_string(order));
        if (i < 0 || i > kv.last() - order)
            throw IndexOutOfRange("basis index " + std::to_string(i) + " out of range");
        return basis_all(kv, order, t, r)[static_cast<std::size_t>(i)];
    }

    class BSplineCurve
    {
    public:
        BSplineCurve() = default;

        BSplineCurve(KnotVector knots, std::vector<Eigen::Vector3d> control_points)
            : knots_(std::move(knots)), points_(std::move(control_points))
        {
            if (static_cast<int>(points_.size()) != knots_.basis_count())
                throw ValidationError("expected " + std::to_string(knots_.basis_count()) + " control points, got " +
                                      std::to_string(points_.size()));
        }

        const KnotVector &knots() const { return knots_; }
        int order() const { return knots_.order(); }
        const std::vector<Eigen::Vector3d> &control_points() const { return points_; }
        double t_begin() const { return knots_.front(); }
        double t_end() const { return knots_.back(); }

        /// r-th derivative of the curve at t.
        Eigen::Vector3d eval(double t, int r = 0) const
        {
            const std::vector<double> b = basis_all(knots_, knots_.order(), t, r);
            Eigen::Vector3d out = Eigen::Vector3d::Zero();
            for (std::size_t i = 0; i < points_.size(); ++i)
                out += b[i] * points_[i];
            return out;
        }

        bool operator==(const BSplineCurve &) const = default;

    private:
        KnotVector knots_;
        std::vector<Eigen::Vector3d> points_;
    };

    inline Eigen::Vector3d curve_eval(const BSplineCurve &c, double t, int r = 0) { return c.eval(t, r); }

    struct WaypointSet
    {
        std::vector<Eigen::Vector3d> positions;
        std::vector<double> times;

        void validate() const
        {
            if (positions.size() != times.size())
                throw ValidationError("waypoints: positions and times differ in length");
            if (positions.size() < 2)
                throw ValidationError("waypoints: at least two waypoints are required");
            for (std::size_t k = 0; k + 1 < times.size(); ++k)
                if (!(times[k] < times[k + 1]))
                    throw ValidationError("waypoints.times: time stamps must be strictly increasing (index " +
                                          std::to_string(k + 1) + ")");
        }
    };

    /// n Gauss-Legendre nodes and weights on [-1, 1].
    inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
    {
        std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
        {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it)
            {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 1; j <= n; ++j)
                {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double step = p0 / dp;
                z -= step;
                if (std::abs(step) < 1e-16)
                    break;
            }
            x[static_cast<std::size_t>(i)] = -z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return {x, w};
    }

    /// G_ij = integral over the domain of B_i^(r) B_j^(r), by Gauss-Legendre
    /// quadrature on every non-empty knot span.
    inline Eigen::MatrixXd gram_matrix(const KnotVector &kv, int derivative, int nodes_per_span)
    {
        const int n = kv.basis_count();
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        const auto [xs, ws] = gauss_legendre(nodes_per_span);
        for (int j = 0; j < kv.last(); ++j)
        {
            const double a = kv[j], b = kv[j + 1];
            if (!(a < b))
                continue;
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (std::size_t q = 0; q < xs.size(); ++q)
            {
                const std::vector<double> d = basis_all(kv, kv.order(), mid + half * xs[q], derivative);
                const Eigen::Map<const Eigen::VectorXd> v(d.data(), n);
                g.noalias() += (ws[q] * half) * v * v.transpose();
            }
        }
        return g;
    }

    struct TrajectoryFit
    {
        BSplineCurve curve;
        Eigen::MatrixXd multipliers; // (N+1) x 3, one column per axis
        Eigen::MatrixXd gram;        // velocity Gram matrix
        Eigen::MatrixXd constraints; // (N+1) x n_ctrl basis values at the waypoint times
        double cost = 0.0;           // integral of |velocity|^2
    };

    /// Control points minimizing the integral of |velocity|^2 subject to passing
    /// through every waypoint at its time stamp. Solved per axis as one KKT system
    ///   [2G A^T; A 0] [p; lambda] = [0; w].
    inline TrajectoryFit fit_trajectory(const WaypointSet &wp, int order, int n_ctrl)
    {
        wp.validate();
        if (order < 2)
            throw ValidationError("spline order must be at least 2");
        const int rows = static_cast<int>(wp.positions.size());
        const KnotVector kv = KnotVector::clamped_uniform(wp.times.front(), wp.times.back(), n_ctrl, order);

        Eigen::MatrixXd a(rows, n_ctrl);
        Eigen::MatrixXd w(rows, 3);
        for (int k = 0; k < rows; ++k)
        {
            const std::vector<double> b = basis_all(kv, order, wp.times[static_cast<std::size_t>(k)]);
            a.row(k) = Eigen::Map<const Eigen::RowVectorXd>(b.data(), n_ctrl);
            w.row(k) = wp.positions[static_cast<std::size_t>(k)].transpose();
        }
        Eigen::FullPivLU<Eigen::MatrixXd> a_lu(a);
        a_lu.setThreshold(1e-10);
        if (a_lu.rank() < rows)
            throw InfeasibleConstraints("waypoint constraints are rank deficient: rank " +
                                            std::to_string(a_lu.rank()) + " of " + std::to_string(rows) +
                                            " with " + std::to_string(n_ctrl) + " control points",
                                        static_cast<int>(a_lu.rank()), rows);

        const Eigen::MatrixXd g = gram_matrix(kv, 1, order + 1);
        const int dim = n_ctrl + rows;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
        kkt.topLeftCorner(n_ctrl, n_ctrl) = 2.0 * g;
        kkt.topRightCorner(n_ctrl, rows) = a.transpose();
        kkt.bottomLeftCorner(rows, n_ctrl) = a;
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, 3);
        rhs.bottomRows(rows) = w;

        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible())
            throw SingularKKT("KKT matrix of the trajectory fit is singular");
        const Eigen::MatrixXd sol = lu.solve(rhs);
        const Eigen::MatrixXd p = sol.topRows(n_ctrl);

        std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(n_ctrl));
        for (int i = 0; i < n_ctrl; ++i)
            pts[static_cast<std::size_t>(i)] = p.row(i).transpose();

        TrajectoryFit fit{BSplineCurve(kv, std::move(pts)), sol.bottomRows(rows), g, a, (p.transpose() * g * p).trace()};
        return fit;
    }

    inline BSplineCurve solve_trajectory(const WaypointSet &wp, int order, int n_ctrl)
    {
        return fit_trajectory(wp, order, n_ctrl).curve;
    }

    /// Yaw channel z4(t) = tan(psi(t)/2): a degree-9 rest-to-rest polynomial with
    /// derivatives one to four vanishing at both ends.
    class YawProfile
    {
    public:
        YawProfile() = default;

        /// Coefficients c_0..c_9 of z4 in normalized time s = (t - t0)/(t1 - t0).
        YawProfile(double t0, double t1, std::array<double, 10> coeffs) : t0_(t0), t1_(t1), c_(coeffs)
        {
            if (!(t0 < t1))
                throw ValidationError("yaw profile interval must be increasing");
        }

        double t_begin() const { return t0_; }
        double t_end() const { return t1_; }
        const std::array<double, 10> &coefficients() const { return c_; }

        /// r-th time derivative of z4; constant extension outside [t0, t1].
        double eval(double t, int r = 0) const
        {
            const double span = t1_ - t0_;
            if (t < t0_ || t > t1_)
            {
                if (r > 0)
                    return 0.0;
                return eval(t < t0_ ? t0_ : t1_, 0);
            }
            const double s = (t - t0_) / span;
            double acc = 0.0;
            for (int j = 9; j >= r; --j)
            {
                double falling = 1.0;
                for (int q = 0; q < r; ++q)
                    falling *= static_cast<double>(j - q);
                acc = acc * s + falling * c_[static_cast<std::size_t>(j)];
            }
            return acc / std::pow(span, r);
        }

        bool operator==(const YawProfile &) const = default;

    private:
        double t0_ = 0.0;
        double t1_ = 1.0;
        std::array<double, 10> c_{};
    };

    inline YawProfile yaw_profile(double psi_start, double psi_end, double t0, double t1)
    {
        if (!(std::abs(psi_start) < std::numbers::pi) || !(std::abs(psi_end) < std::numbers::pi))
            throw ValidationError("yaw endpoints must lie in (-pi, pi)");
        const double a = std::tan(0.5 * psi_start);
        const double delta = std::tan(0.5 * psi_end) - a;
        // a + delta * (126 s^5 - 420 s^6 + 540 s^7 - 315 s^8 + 70 s^9)
        std::array<double, 10> c{};
        c[0] = a;
        c[5] = 126.0 * delta;
        c[6] = -420.0 * delta;
        c[7] = 540.0 * delta;
        c[8] = -315.0 * delta;
        c[9] = 70.0 * delta;
        return YawProfile(t0, t1, c);
    }

    /// Flat sample (position channels from the curve, yaw channel from the profile).
    inline FlatSample flat_sample_at(const BSplineCurve &curve, const YawProfile &yaw, double t, double g)
    {
        FlatSample s;
        s.t = t;
        for (int r = 0; r <= 4; ++r)
        {
            s.z[static_cast<std::size_t>(r)].head<3>() = curve.eval(t, r);
            s.z[static_cast<std::size_t>(r)][3] = yaw.eval(t, r);
        }
        if (!(s.z[2][2] + g > 0.0))
            throw DegenerateAcceleration("zddot_3 + g <= 0 at t=" + std::to_string(t));
        return s;
    }

    /// Sample times t0, t0 + dt, ..., t1 (the end point is always included).
    inline std::vector<double> sample_times(double t0, double t1, double dt)
    {
        if (!(dt > 0.0))
            throw ValidationError("sampling step must be positive");
        const double steps = (t1 - t0) / dt;
        const auto n = static_cast<long long>(std::floor(steps + 1e-9));
        std::vector<double> ts;
        ts.reserve(static_cast<std::size_t>(n + 2));
        for (long long k = 0; k <= n; ++k)
            ts.push_back(t0 + static_cast<double>(k) * dt);
        if (std::abs(ts.back() - t1) <= 1e-9 * std::max(1.0, std::abs(t1)))
            ts.back() = t1;
        else
            ts.push_back(t1);
        return ts;
    }

    inline std::vector<FlatSample> sample_flat_trajectory(const BSplineCurve &curve, const YawProfile &yaw, double dt,
                                                          double g)
    {
        if (curve.order() < 5)
            throw OrderTooHigh("flat sampling needs fourth derivatives: spline order must be at least 5");
        std::vector<FlatSample> out;
        for (double t : sample_times(curve.t_begin(), curve.t_end(), dt))
            out.push_back(flat_sample_at(curve, yaw, t, g));
        return out;
    }

} // namespace flatquad

#endif
