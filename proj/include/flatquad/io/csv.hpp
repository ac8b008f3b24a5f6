#ifndef FLATQUAD_IO_CSV_HPP
#define FLATQUAD_IO_CSV_HPP

// Plain comma-separated numeric tables. Numbers are written with 17
// significant digits so that reading them back is exact.

#include "flatquad/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace flatquad::io
{

    inline std::string format_double(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    inline void write_csv_row(std::ostream &out, const std::vector<double> &values)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            if (i)
                out << ',';
            out << format_double(values[i]);
        }
        out << '\n';
    }

    inline std::vector<std::string> split_csv_line(const std::string &line)
    {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line)
        {
            if (c == ',')
            {
                cells.push_back(cur);
                cur.clear();
            }
            else if (c != '\r')
                cur += c;
        }
        cells.push_back(cur);
        return cells;
    }

    struct NumericTable
    {
        std::vector<std::string> header;
        std::vector<std::vector<double>> rows;
    };

    /// Reads a header line and numeric rows. Every row must match the header width.
    inline NumericTable read_numeric_csv(std::istream &in)
    {
        NumericTable t;
        std::string line;
        if (!std::getline(in, line))
            throw ValidationError("csv: missing header line");
        t.header = split_csv_line(line);
        int line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            const auto cells = split_csv_line(line);
            if (cells.size() != t.header.size())
                throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(t.header.size()) + " fields, got " +
                                      std::to_string(cells.size()));
            std::vector<double> row;
            row.reserve(cells.size());
            for (const std::string &c : cells)
            {
                char *end = nullptr;
                errno = 0;
                const double v = std::strtod(c.c_str(), &end);
                if (c.empty() || end != c.c_str() + c.size() || (errno == ERANGE && std::abs(v) == HUGE_VAL))
                    throw ValidationError("csv line " + std::to_string(line_no) + ": bad number '" + c + "'");
                row.push_back(v);
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }

} // namespace flatquad::io

#endif
