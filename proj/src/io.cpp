#include "polyfsi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyfsi/diagnostics.hpp"

namespace polyfsi::io {

using mac::FaceField;
using mac::Metrics;

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_snapshot(const std::string& path, const Metrics& m, const FaceField& u,
                    const Grid2D& p, const solute::StressField& t, double time) {
    const mac::Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    auto out = open_out(path);

    Grid2D c1, c2;
    mac::face_to_center(m, u, mac::WallTraces::zeros(nx), c1, c2);

    out << "# vtk DataFile Version 3.0\n";
    out << "slab snapshot t=" << g17(time) << "\n";
    out << "ASCII\nDATASET STRUCTURED_GRID\n";
    out << "DIMENSIONS " << nx << " " << nz << " 1\n";
    out << "POINTS " << nx * nz << " double\n";
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            const int i1 = (i + 1) % nx;
            const double z = 0.25 * (m.z_node(i, j) + m.z_node(i, j + 1) +
                                     m.z_node(i1, j) + m.z_node(i1, j + 1));
            out << g17(lay.xi_center(i)) << " " << g17(z) << " 0\n";
        }
    out << "POINT_DATA " << nx * nz << "\n";
    out << "VECTORS velocity double\n";
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i)
            out << g17(c1(i, j)) << " " << g17(c2(i, j)) << " 0\n";
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i) out << g17(p(i, j)) << "\n";
    const int d = t.d;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            out << "SCALARS T" << a + 1 << b + 1 << " double 1\nLOOKUP_TABLE default\n";
            const auto& c = t.comp[static_cast<std::size_t>(d * a + b)];
            for (int j = 0; j < nz; ++j)
                for (int i = 0; i < nx; ++i) out << g17(c(i, j)) << "\n";
        }
    out << "SCALARS conformation_min_eig double 1\nLOOKUP_TABLE default\n";
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i) {
            oldroyd::Mat s = t.tensor(i, j);
            oldroyd::Mat sym = 0.5 * (s + s.transpose());
            for (int k = 0; k < d; ++k) sym(k, k) += 1.0;
            out << g17(diag::min_eig_sym(sym)) << "\n";
        }
}

void write_shell_csv(const std::string& path, std::span<const double> eta,
                     std::span<const double> eta_t) {
    auto out = open_out(path);
    out << "y,eta,eta_t\n";
    const int n = static_cast<int>(eta.size());
    for (int i = 0; i < n; ++i)
        out << g17(2.0 * M_PI * i / n) << "," << g17(eta[static_cast<std::size_t>(i)])
            << "," << g17(eta_t[static_cast<std::size_t>(i)]) << "\n";
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    Snapshot snap;
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);  // title with time
    {
        const auto pos = line.find("t=");
        if (pos != std::string::npos) snap.time = std::stod(line.substr(pos + 2));
    }
    std::getline(in, line);  // ASCII
    std::getline(in, line);  // DATASET
    in >> line >> snap.nx >> snap.nz;
    int one;
    in >> one;
    int npts;
    in >> line >> npts >> line;
    snap.px.resize(static_cast<std::size_t>(npts));
    snap.pz.resize(static_cast<std::size_t>(npts));
    for (int k = 0; k < npts; ++k) {
        double z;
        in >> snap.px[static_cast<std::size_t>(k)] >> snap.pz[static_cast<std::size_t>(k)] >> z;
    }
    in >> line >> npts;          // POINT_DATA n
    in >> line >> line >> line;  // VECTORS velocity double
    snap.u1.resize(static_cast<std::size_t>(npts));
    snap.u2.resize(static_cast<std::size_t>(npts));
    for (int k = 0; k < npts; ++k) {
        double z;
        in >> snap.u1[static_cast<std::size_t>(k)] >> snap.u2[static_cast<std::size_t>(k)] >> z;
    }
    auto read_scalars = [&](std::vector<double>& dst) {
        std::string a, b, c;
        in >> a >> b >> c >> one;  // SCALARS name double 1
        in >> a >> b;              // LOOKUP_TABLE default
        dst.resize(static_cast<std::size_t>(npts));
        for (int k = 0; k < npts; ++k) in >> dst[static_cast<std::size_t>(k)];
        return b;
    };
    read_scalars(snap.p);
    for (int c = 0; c < 4; ++c) {
        snap.stress.emplace_back();
        read_scalars(snap.stress.back());
    }
    read_scalars(snap.conf_eig);
    return snap;
}

void write_energy_csv(const std::string& path,
                      const std::vector<ss::StepLedger>& ledgers) {
    auto out = open_out(path);
    out << "t,E_shell_kin,E_shell_el,E_fluid,D_shell,D_fluid,W_f,W_g,W_T,residual,"
           "W_load,lambda,subiters,interface_resid,div_after,kin_trace_err\n";
    for (const auto& l : ledgers) {
        out << g17(l.t1) << "," << g17(l.e_shell_kin) << "," << g17(l.e_shell_el)
            << "," << g17(l.e_fluid) << "," << g17(l.d_shell) << "," << g17(l.d_fluid)
            << "," << g17(l.w_f) << "," << g17(l.w_g) << "," << g17(l.w_t) << ","
            << g17(l.residual) << "," << g17(l.w_load) << "," << g17(l.lambda) << ","
            << l.subiters << "," << g17(l.interface_resid) << "," << g17(l.div_after)
            << "," << g17(l.kin_trace_err) << "\n";
    }
}

void write_fixedpoint_csv(const std::string& path,
                          const std::vector<coupling::FpRow>& rows) {
    auto out = open_out(path);
    out << "window,k,dY,rho,X_norm,Y_norm\n";
    for (const auto& r : rows)
        out << r.window << "," << r.k << "," << g17(r.dy) << "," << g17(r.rho) << ","
            << g17(r.x_norm) << "," << g17(r.y_norm) << "\n";
}

void write_norms_csv(
    const std::string& path,
    const std::vector<std::pair<double, std::vector<diag::NormRow>>>& per_time_rows) {
    auto out = open_out(path);
    out << "t,field,norm,value\n";
    for (const auto& [t, rows] : per_time_rows)
        for (const auto& r : rows)
            out << g17(t) << "," << r.field << "," << r.norm << "," << g17(r.value)
                << "\n";
}

void write_summary_csv(const std::string& path, const coupling::Trajectory& traj) {
    auto out = open_out(path);
    out << "key,value\n";
    out << "stop_reason," << traj.stop_reason << "\n";
    out << "stop_detail," << (traj.stop_detail.empty() ? "-" : traj.stop_detail)
        << "\n";
    out << "steps," << (traj.times.empty() ? 0 : traj.times.size() - 1) << "\n";
    out << "final_time," << g17(traj.times.empty() ? 0.0 : traj.times.back()) << "\n";
    out << "windows," << traj.window_starts.size() << "\n";
    out << "smallness_value," << g17(traj.smallness.value) << "\n";
    out << "smallness_ok," << (traj.smallness.ok ? "true" : "false") << "\n";
    out << "compatibility_error," << g17(traj.compat_err) << "\n";
    out << "min_conformation_eig," << g17(traj.min_conformation_eig) << "\n";
}

}  // namespace polyfsi::io
