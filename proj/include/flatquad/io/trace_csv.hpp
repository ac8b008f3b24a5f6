#ifndef FLATQUAD_IO_TRACE_CSV_HPP
#define FLATQUAD_IO_TRACE_CSV_HPP

#include "flatquad/io/csv.hpp"
#include "flatquad/sim.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace flatquad::io
{

    inline constexpr const char *kTraceHeader =
        "t,x,y,z,vx,vy,vz,phi,theta,psi,wx,wy,wz,T,tau_phi,tau_theta,tau_psi,"
        "ref_x,ref_y,ref_z,ref_phi,ref_theta,ref_psi,wind_x,wind_y,wind_z";

    inline constexpr std::size_t kTraceColumns = 26;

    inline std::vector<double> trace_fields(const TraceRow &r)
    {
        const auto &s = r.state;
        return {r.t,
                s.position.x(), s.position.y(), s.position.z(),
                s.velocity.x(), s.velocity.y(), s.velocity.z(),
                s.euler.x(), s.euler.y(), s.euler.z(),
                s.body_rates.x(), s.body_rates.y(), s.body_rates.z(),
                r.input.thrust, r.input.torque.x(), r.input.torque.y(), r.input.torque.z(),
                r.ref_position.x(), r.ref_position.y(), r.ref_position.z(),
                r.ref_euler.x(), r.ref_euler.y(), r.ref_euler.z(),
                r.wind.x(), r.wind.y(), r.wind.z()};
    }

    inline void write_trace_csv(std::ostream &out, const std::vector<TraceRow> &trace)
    {
        out << kTraceHeader << '\n';
        for (const TraceRow &r : trace)
            write_csv_row(out, trace_fields(r));
    }

    inline void write_trace_csv(const std::string &path, const std::vector<TraceRow> &trace)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw ValidationError("cannot write '" + path + "'");
        write_trace_csv(out, trace);
    }

    /// Inverse of write_trace_csv. Rotor speeds are not part of the file and come back as zero.
    inline std::vector<TraceRow> read_trace_csv(std::istream &in)
    {
        const NumericTable table = read_numeric_csv(in);
        std::string header;
        for (std::size_t i = 0; i < table.header.size(); ++i)
            header += (i ? "," : "") + table.header[i];
        if (header != kTraceHeader)
            throw ValidationError("trace csv: unexpected header");

        std::vector<TraceRow> trace;
        trace.reserve(table.rows.size());
        for (const auto &v : table.rows)
        {
            TraceRow r;
            r.t = v[0];
            r.state.position = {v[1], v[2], v[3]};
            r.state.velocity = {v[4], v[5], v[6]};
            r.state.euler = {v[7], v[8], v[9]};
            r.state.body_rates = {v[10], v[11], v[12]};
            r.input.thrust = v[13];
            r.input.torque = {v[14], v[15], v[16]};
            r.ref_position = {v[17], v[18], v[19]};
            r.ref_euler = {v[20], v[21], v[22]};
            r.wind = {v[23], v[24], v[25]};
            trace.push_back(r);
        }
        return trace;
    }

} // namespace flatquad::io

#endif
