#ifndef FLATQUAD_IO_TRAJECTORY_DUMP_HPP
#define FLATQUAD_IO_TRAJECTORY_DUMP_HPP

// Text dump of a planned trajectory, one record per line:
//
//   flatquad-trajectory 1
//   order 6
//   knots 18 <k0> <k1> ...
//   control_points 12
//   <x> <y> <z>            (one line per control point)
//   yaw <t0> <t1> <c0> ... <c9>
//
// and the dense flat reference table t,x,y,z,phi,theta,psi,T,tau_phi,tau_theta,tau_psi.

#include "flatquad/io/csv.hpp"
#include "flatquad/sim.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace flatquad::io
{

    inline void write_trajectory(std::ostream &out, const PlannedTrajectory &plan)
    {
        const auto &kv = plan.curve.knots();
        out << "flatquad-trajectory 1\n";
        out << "order " << kv.order() << '\n';
        out << "knots " << kv.knots().size();
        for (double k : kv.knots())
            out << ' ' << format_double(k);
        out << '\n';
        out << "control_points " << plan.curve.control_points().size() << '\n';
        for (const auto &p : plan.curve.control_points())
            out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
        out << "yaw " << format_double(plan.yaw.t_begin()) << ' ' << format_double(plan.yaw.t_end());
        for (double c : plan.yaw.coefficients())
            out << ' ' << format_double(c);
        out << '\n';
    }

    inline PlannedTrajectory read_trajectory(std::istream &in)
    {
        const auto expect = [&](const char *word) {
            std::string tok;
            if (!(in >> tok) || tok != word)
                throw ValidationError(std::string("trajectory dump: expected '") + word + "'");
        };
        const auto number = [&]() {
            double v;
            if (!(in >> v))
                throw ValidationError("trajectory dump: expected a number");
            return v;
        };

        expect("flatquad-trajectory");
        if (number() != 1.0)
            throw ValidationError("trajectory dump: unsupported version");
        expect("order");
        const int order = static_cast<int>(number());
        expect("knots");
        std::vector<double> knots(static_cast<std::size_t>(number()));
        for (double &k : knots)
            k = number();
        expect("control_points");
        std::vector<Eigen::Vector3d> points(static_cast<std::size_t>(number()));
        for (auto &p : points)
            for (int i = 0; i < 3; ++i)
                p[i] = number();
        expect("yaw");
        const double t0 = number();
        const double t1 = number();
        std::array<double, 10> c{};
        for (double &v : c)
            v = number();
        return {BSplineCurve(KnotVector(std::move(knots), order), std::move(points)), YawProfile(t0, t1, c)};
    }

    inline constexpr const char *kFlatReferenceHeader = "t,x,y,z,phi,theta,psi,T,tau_phi,tau_theta,tau_psi";

    inline void write_flat_reference_csv(std::ostream &out, const std::vector<FlatStateRef> &refs)
    {
        out << kFlatReferenceHeader << '\n';
        for (const FlatStateRef &r : refs)
            write_csv_row(out, {r.t, r.position.x(), r.position.y(), r.position.z(), r.euler.x(), r.euler.y(),
                                r.euler.z(), r.thrust, r.torque.x(), r.torque.y(), r.torque.z()});
    }

    template <typename Fn>
    void write_file(const std::string &path, Fn &&fn)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw ValidationError("cannot write '" + path + "'");
        fn(out);
        if (!out)
            throw ValidationError("write to '" + path + "' failed");
    }

} // namespace flatquad::io

#endif
