#pragma once

// CSV writers with locale-independent, round-trippable float formatting.

#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "cqsim/core.hpp"
#include "cqsim/dynamics.hpp"
#include "cqsim/phase_space.hpp"

namespace cqsim {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// (coordinate, value) rows with a header naming the quantity and time.
inline void write_density_csv(const std::string& path, const std::string& quantity, double t,
                              const Grid1D& grid, std::span<const double> values) {
    if (values.size() != grid.n)
        throw SimError(ErrorCode::GridMismatch, "values do not match grid");
    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    out << "# quantity=" << quantity << " t=" << fmt_double(t) << "\n";
    out << "coordinate,value\n";
    for (std::size_t i = 0; i < grid.n; ++i)
        out << fmt_double(grid.coord(i)) << "," << fmt_double(values[i]) << "\n";
}

/// Several columns over a shared coordinate axis.
inline void write_columns_csv(const std::string& path, const std::string& header_note,
                              const std::string& coord_name, const Grid1D& grid,
                              const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    if (!header_note.empty()) out << "# " << header_note << "\n";
    out << coord_name;
    for (const auto& c : cols) out << "," << c.first;
    out << "\n";
    for (std::size_t i = 0; i < grid.n; ++i) {
        out << fmt_double(grid.coord(i));
        for (const auto& c : cols) out << "," << fmt_double(c.second[i]);
        out << "\n";
    }
}

/// Evolution diagnostics: t, mass, energies, optional L1 against a reference.
inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    out << "t,mass,H_C,H_Q,H_CQ,L1_vs_analytic\n";
    for (const auto& r : rows) {
        out << fmt_double(r.t) << "," << fmt_double(r.mass) << "," << fmt_double(r.classical)
            << "," << fmt_double(r.quantum) << "," << fmt_double(r.interaction) << ",";
        if (r.l1_vs_reference) out << fmt_double(*r.l1_vs_reference);
        out << "\n";
    }
}

inline void write_samples_csv(const std::string& path, std::span<const double> xs) {
    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    out << "x\n";
    for (double x : xs) out << fmt_double(x) << "\n";
}

/// (x, p, rho) triples.
inline void write_phase_csv(const std::string& path, const PhaseDensity& d) {
    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    out << "# quantity=phase_density t=" << fmt_double(d.t) << "\n";
    out << "x,p,rho\n";
    for (std::size_t ix = 0; ix < d.grid.x.n; ++ix)
        for (std::size_t ip = 0; ip < d.grid.q.n; ++ip)
            out << fmt_double(d.grid.x.coord(ix)) << "," << fmt_double(d.grid.q.coord(ip)) << ","
                << fmt_double(d.rho.at(ix, ip)) << "\n";
}

}  // namespace cqsim
