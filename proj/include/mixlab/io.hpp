#ifndef MIXLAB_IO_HPP
#define MIXLAB_IO_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlab/actionangle.hpp"
#include "mixlab/core.hpp"
#include "mixlab/lagrangian.hpp"
#include "mixlab/period.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab {

using json = nlohmann::json;

/** CSV writer; every float printed with 17 significant digits so artifacts
    re-ingest bit-faithfully. */
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c)
            out << fmt17(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

/// Trajectory dump: columns t, x1, x2, H_drift (drift vs the launch level).
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                                 const HamiltonianField& field) {
    std::vector<std::vector<double>> rows;
    double h0 = traj.points.empty() ? 0.0 : field.eval(traj.points.front());
    for (size_t i = 0; i < traj.times.size(); ++i)
        rows.push_back({traj.times[i], traj.points[i].x, traj.points[i].y,
                        std::abs(field.eval(traj.points[i]) - h0)});
    write_csv(path, {"t", "x1", "x2", "H_drift"}, rows);
}

inline void write_period_table_csv(const std::filesystem::path& path, const PeriodTable& table) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "h,T,Tprime,method\n";
    for (size_t i = 0; i < table.levels.size(); ++i)
        out << fmt17(table.levels[i]) << "," << fmt17(table.T[i]) << ","
            << fmt17(table.Tprime[i]) << "," << table.method[i] << "\n";
}

/// Chart dump: CSV (theta, level, x1, x2, jac) plus a JSON header.
inline void write_chart(const std::filesystem::path& csv_path,
                        const std::filesystem::path& header_path,
                        const ActionAngleChart& chart) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < chart.s.size(); ++i)
        for (int j = 0; j < chart.n_theta; ++j)
            rows.push_back({(double)j / chart.n_theta, chart.s[i], chart.pos[i][j].x,
                            chart.pos[i][j].y, chart.jac[i][j]});
    write_csv(csv_path, {"theta", "level", "x1", "x2", "jac"}, rows);
    json header;
    header["variant"] = chart.variant == ActionAngleChart::Standard ? "standard" : "cellular";
    header["field"] = chart.field.name;
    header["n_theta"] = chart.n_theta;
    header["n_levels"] = chart.s.size();
    header["level_lo"] = chart.s_front();
    header["level_hi"] = chart.s_back();
    write_json(header_path, header);
}

inline void write_norm_series_csv(const std::filesystem::path& path, const NormSeries& s) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < s.t.size(); ++i)
        rows.push_back({s.t[i], s.l2[i], s.h1[i], s.hminus1[i], s.energy_residual[i]});
    write_csv(path, {"t", "l2", "h1", "hminus1", "energy_residual"}, rows);
}

/// Snapshot: raw doubles (row-major physical grid) with a JSON sidecar.
inline void write_snapshot(const std::filesystem::path& bin_path,
                           const std::filesystem::path& sidecar_path, const ScalarField& rho,
                           const std::string& field_name, double nu) {
    Fft2 fft(rho.N);
    std::vector<double> phys;
    fft.backward(rho.c, phys);
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw Error("cannot open " + bin_path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(phys.data()),
              (std::streamsize)(phys.size() * sizeof(double)));
    json side;
    side["N"] = rho.N;
    side["time"] = rho.time;
    side["field"] = field_name;
    side["nu"] = nu;
    side["layout"] = "row-major x1 outer, x2 inner, doubles";
    write_json(sidecar_path, side);
}

} // namespace mixlab

#endif
