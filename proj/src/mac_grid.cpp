#include "polyfsi/mac_grid.hpp"

#include <cassert>
#include <cmath>

namespace polyfsi::mac {

namespace {

inline int wrap(int i, int n) { return i >= n ? i - n : (i < 0 ? i + n : i); }

}  // namespace

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

Metrics Metrics::identity_box(const Layout& lay) {
    Metrics m;
    m.lay = lay;
    m.z_node = Grid2D(lay.nx, lay.nz + 1);
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j <= lay.nz; ++j) m.z_node(i, j) = lay.zeta_node(j);
    m.zzeta_xface = Grid2D(lay.nx, lay.nz, 1.0);
    m.zxi_zface = Grid2D(lay.nx, lay.nz + 1, 0.0);
    m.jac_cell = Grid2D(lay.nx, lay.nz, 1.0);
    m.zzeta_node = Grid2D(lay.nx, lay.nz + 1, 1.0);
    m.identity = true;
    return m;
}

Metrics Metrics::from_displacement(const Layout& lay,
                                   std::span<const double> eta_at_nodes,
                                   const CutoffProfile& pc) {
    assert(lay.bc == BcMode::SlabWalls);
    assert(static_cast<int>(eta_at_nodes.size()) == lay.nx);
    Metrics m;
    m.lay = lay;
    m.identity = false;
    const int nx = lay.nx, nz = lay.nz;
    m.z_node = Grid2D(nx, nz + 1);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= nz; ++j) {
            const double z = lay.zeta_node(j);
            m.z_node(i, j) = z + eta_at_nodes[i] * pc(z - 1.0);
        }
    m.zzeta_xface = Grid2D(nx, nz);
    m.zxi_zface = Grid2D(nx, nz + 1);
    m.jac_cell = Grid2D(nx, nz);
    m.zzeta_node = Grid2D(nx, nz + 1);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j)
            m.zzeta_xface(i, j) = (m.z_node(i, j + 1) - m.z_node(i, j)) / lay.hz;
        for (int j = 0; j <= nz; ++j)
            m.zxi_zface(i, j) = (m.z_node(wrap(i + 1, nx), j) - m.z_node(i, j)) / lay.hx;
        for (int j = 0; j <= nz; ++j) {
            if (j == 0)
                m.zzeta_node(i, j) = (m.z_node(i, 1) - m.z_node(i, 0)) / lay.hz;
            else if (j == nz)
                m.zzeta_node(i, j) = (m.z_node(i, nz) - m.z_node(i, nz - 1)) / lay.hz;
            else
                m.zzeta_node(i, j) =
                    (m.z_node(i, j + 1) - m.z_node(i, j - 1)) / (2.0 * lay.hz);
        }
    }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j)
            m.jac_cell(i, j) =
                0.5 * (m.zzeta_xface(i, j) + m.zzeta_xface(wrap(i + 1, nx), j));
    return m;
}

double Metrics::volume() const {
    double v = 0;
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j) v += jac_cell(i, j);
    return v * lay.hx * lay.hz;
}

// ---------------------------------------------------------------------------
// interpolations
// ---------------------------------------------------------------------------

Grid2D avg_u1_to_zface(const Metrics& m, const Grid2D& u1) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    Grid2D out(nx, lay.u2_rows(), 0.0);
    if (lay.bc == BcMode::Periodic) {
        for (int i = 0; i < nx; ++i) {
            const int i1 = wrap(i + 1, nx);
            for (int j = 0; j < nz; ++j) {
                const int jm = wrap(j - 1, nz);
                out(i, j) = 0.25 * (u1(i, jm) + u1(i, j) + u1(i1, jm) + u1(i1, j));
            }
        }
        return out;
    }
    for (int i = 0; i < nx; ++i) {
        const int i1 = wrap(i + 1, nx);
        for (int j = 1; j < nz; ++j)
            out(i, j) = 0.25 * (u1(i, j - 1) + u1(i, j) + u1(i1, j - 1) + u1(i1, j));
        // walls carry the tangential trace, which is identically zero here
        // (the kinematic datum is purely normal and the bottom is no slip)
        out(i, nz) = 0.0;
        out(i, 0) = 0.0;
    }
    return out;
}

Grid2D avg_u1_to_zface_transpose(const Metrics& m, const Grid2D& zf) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    Grid2D out(nx, nz, 0.0);
    if (lay.bc == BcMode::Periodic) {
        for (int i = 0; i < nx; ++i) {
            const int i1 = wrap(i + 1, nx);
            for (int j = 0; j < nz; ++j) {
                const int jm = wrap(j - 1, nz);
                const double a = 0.25 * zf(i, j);
                out(i, jm) += a;
                out(i, j) += a;
                out(i1, jm) += a;
                out(i1, j) += a;
            }
        }
        return out;
    }
    for (int i = 0; i < nx; ++i) {
        const int i1 = wrap(i + 1, nx);
        for (int j = 1; j < nz; ++j) {
            const double a = 0.25 * zf(i, j);
            out(i, j - 1) += a;
            out(i, j) += a;
            out(i1, j - 1) += a;
            out(i1, j) += a;
        }
        // wall rows are trace data, nothing scatters back
    }
    return out;
}

void face_to_center(const Metrics& m, const FaceField& u, const WallTraces& tr,
                    Grid2D& c1, Grid2D& c2) {
    (void)tr;
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    c1 = Grid2D(nx, nz);
    c2 = Grid2D(nx, nz);
    for (int i = 0; i < nx; ++i) {
        const int i1 = wrap(i + 1, nx);
        for (int j = 0; j < nz; ++j) {
            c1(i, j) = 0.5 * (u.u1(i, j) + u.u1(i1, j));
            const int j1 = lay.bc == BcMode::Periodic ? wrap(j + 1, nz) : j + 1;
            c2(i, j) = 0.5 * (u.u2(i, j) + u.u2(i, j1));
        }
    }
}

// ---------------------------------------------------------------------------
// fluxes and divergence
// ---------------------------------------------------------------------------

Grid2D flux_xi(const Metrics& m, const FaceField& u) {
    const Layout& lay = m.lay;
    Grid2D f(lay.nx, lay.nz);
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j)
            f(i, j) = m.zzeta_xface(i, j) * u.u1(i, j) * lay.hz;
    return f;
}

Grid2D flux_zeta(const Metrics& m, const FaceField& u) {
    const Layout& lay = m.lay;
    const Grid2D ubar = avg_u1_to_zface(m, u.u1);
    Grid2D f(lay.nx, lay.u2_rows());
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.u2_rows(); ++j)
            f(i, j) = (u.u2(i, j) - m.zxi_zface(i, j) * ubar(i, j)) * lay.hx;
    return f;
}

Grid2D div_flux(const Metrics& m, const FaceField& u) {
    const Layout& lay = m.lay;
    const Grid2D fxi = flux_xi(m, u);
    const Grid2D fz = flux_zeta(m, u);
    Grid2D d(lay.nx, lay.nz);
    for (int i = 0; i < lay.nx; ++i) {
        const int i1 = wrap(i + 1, lay.nx);
        for (int j = 0; j < lay.nz; ++j) {
            const int j1 = lay.bc == BcMode::Periodic ? wrap(j + 1, lay.nz) : j + 1;
            d(i, j) = fxi(i1, j) - fxi(i, j) + fz(i, j1) - fz(i, j);
        }
    }
    return d;
}

double max_divergence(const Metrics& m, const FaceField& u) {
    const Grid2D d = div_flux(m, u);
    double worst = 0;
    for (int i = 0; i < m.lay.nx; ++i)
        for (int j = 0; j < m.lay.nz; ++j)
            worst = std::max(worst,
                             std::abs(d(i, j) / (m.jac_cell(i, j) * m.lay.hx * m.lay.hz)));
    return worst;
}

FaceField face_volumes(const Metrics& m) {
    const Layout& lay = m.lay;
    FaceField vol = FaceField::zeros(lay);
    const double cell = lay.hx * lay.hz;
    for (int i = 0; i < lay.nx; ++i)
        for (int j = 0; j < lay.nz; ++j) vol.u1(i, j) = cell * m.zzeta_xface(i, j);
    if (lay.bc == BcMode::Periodic) {
        for (int i = 0; i < lay.nx; ++i)
            for (int j = 0; j < lay.nz; ++j) {
                const int jm = wrap(j - 1, lay.nz);
                vol.u2(i, j) = cell * 0.5 * (m.jac_cell(i, jm) + m.jac_cell(i, j));
            }
        return vol;
    }
    for (int i = 0; i < lay.nx; ++i) {
        for (int j = 1; j < lay.nz; ++j)
            vol.u2(i, j) = cell * 0.5 * (m.jac_cell(i, j - 1) + m.jac_cell(i, j));
        vol.u2(i, 0) = cell * 0.5 * m.jac_cell(i, 0);
        vol.u2(i, lay.nz) = cell * 0.5 * m.jac_cell(i, lay.nz - 1);
    }
    return vol;
}

FaceField grad_dual(const Metrics& m, const Grid2D& q) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    FaceField dt = FaceField::zeros(lay);  // D^T q (plain pairing)

    // pairing through the xi fluxes
    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        for (int j = 0; j < nz; ++j)
            dt.u1(i, j) = m.zzeta_xface(i, j) * lay.hz * (q(im, j) - q(i, j));
    }
    // pairing through the zeta fluxes: q(cell below) - q(cell above)
    Grid2D zpair(nx, lay.u2_rows());
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < lay.u2_rows(); ++j) {
            double below, above;
            if (lay.bc == BcMode::Periodic) {
                below = q(i, wrap(j - 1, nz));
                above = q(i, j);
            } else {
                below = (j == 0) ? 0.0 : q(i, j - 1);
                above = (j == nz) ? 0.0 : q(i, j);
            }
            zpair(i, j) = below - above;
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < lay.u2_rows(); ++j) dt.u2(i, j) = lay.hx * zpair(i, j);
    // u1 also enters the zeta fluxes through -zxi * avg(u1)
    Grid2D zf(nx, lay.u2_rows());
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < lay.u2_rows(); ++j)
            zf(i, j) = -m.zxi_zface(i, j) * lay.hx * zpair(i, j);
    const Grid2D cross = avg_u1_to_zface_transpose(m, zf);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) dt.u1(i, j) += cross(i, j);

    // G = -M^{-1} D^T, zero on wall rows
    const FaceField vol = face_volumes(m);
    FaceField g = FaceField::zeros(lay);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j) g.u1(i, j) = -dt.u1(i, j) / vol.u1(i, j);
        if (lay.bc == BcMode::Periodic) {
            for (int j = 0; j < nz; ++j) g.u2(i, j) = -dt.u2(i, j) / vol.u2(i, j);
        } else {
            for (int j = 1; j < nz; ++j) g.u2(i, j) = -dt.u2(i, j) / vol.u2(i, j);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// strain
// ---------------------------------------------------------------------------

StrainSamples strain(const Metrics& m, const FaceField& u, const WallTraces& tr) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    const bool per = lay.bc == BcMode::Periodic;
    StrainSamples s;
    s.d11 = Grid2D(nx, nz);
    s.d22 = Grid2D(nx, nz);
    s.d12 = Grid2D(nx, lay.u2_rows());

    const Grid2D ubar = avg_u1_to_zface(m, u.u1);

    for (int i = 0; i < nx; ++i) {
        const int i1 = wrap(i + 1, nx);
        for (int j = 0; j < nz; ++j) {
            const int j1 = per ? wrap(j + 1, nz) : j + 1;
            const double dxu1 = (u.u1(i1, j) - u.u1(i, j)) / lay.hx;
            const double dzu1 = (ubar(i, j1) - ubar(i, j)) / lay.hz;
            const double zxic = 0.5 * (m.zxi_zface(i, j) + m.zxi_zface(i, j1));
            const double jc = m.jac_cell(i, j);
            s.d11(i, j) = dxu1 - zxic / jc * dzu1;
            s.d22(i, j) = (u.u2(i, j1) - u.u2(i, j)) / (lay.hz * jc);
        }
    }

    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        for (int j = 0; j < lay.u2_rows(); ++j) {
            double dzu1, dzu2;
            if (per) {
                const int jm = wrap(j - 1, nz);
                const int jp = wrap(j + 1, nz);
                dzu1 = (u.u1(i, j) - u.u1(i, jm)) / lay.hz;
                dzu2 = 0.5 * ((u.u2(i, jp) - u.u2(i, jm)) +
                              (u.u2(im, jp) - u.u2(im, jm))) /
                       (2.0 * lay.hz);
            } else if (j == 0) {
                dzu1 = (u.u1(i, 0) - tr.u1_bottom[static_cast<std::size_t>(i)]) /
                       (0.5 * lay.hz);
                dzu2 = 0.5 * ((u.u2(i, 1) - u.u2(i, 0)) + (u.u2(im, 1) - u.u2(im, 0))) /
                       lay.hz;
            } else if (j == nz) {
                dzu1 = (tr.u1_top[static_cast<std::size_t>(i)] - u.u1(i, nz - 1)) /
                       (0.5 * lay.hz);
                dzu2 = 0.5 * ((u.u2(i, nz) - u.u2(i, nz - 1)) +
                              (u.u2(im, nz) - u.u2(im, nz - 1))) /
                       lay.hz;
            } else {
                dzu1 = (u.u1(i, j) - u.u1(i, j - 1)) / lay.hz;
                dzu2 = 0.5 * ((u.u2(i, j + 1) - u.u2(i, j - 1)) +
                              (u.u2(im, j + 1) - u.u2(im, j - 1))) /
                       (2.0 * lay.hz);
            }
            const double dxu2 = (u.u2(i, j) - u.u2(im, j)) / lay.hx;
            const double zn = m.zzeta_node(i, j);
            const double zxin = 0.5 * (m.zxi_zface(im, j) + m.zxi_zface(i, j));
            s.d12(i, j) = 0.5 * (dzu1 / zn + dxu2 - zxin / zn * dzu2);
        }
    }
    return s;
}

namespace {

// quadrature weights of the three strain sample families
struct StrainWeights {
    Grid2D w11, w22;  // cells
    Grid2D w12;       // nodes
};

StrainWeights strain_weights(const Metrics& m) {
    const Layout& lay = m.lay;
    const double cell = lay.hx * lay.hz;
    StrainWeights w;
    w.w11 = Grid2D(lay.nx, lay.nz);
    w.w22 = Grid2D(lay.nx, lay.nz);
    w.w12 = Grid2D(lay.nx, lay.u2_rows());
    for (int i = 0; i < lay.nx; ++i) {
        for (int j = 0; j < lay.nz; ++j) {
            w.w11(i, j) = 2.0 * m.jac_cell(i, j) * cell;
            w.w22(i, j) = w.w11(i, j);
        }
        for (int j = 0; j < lay.u2_rows(); ++j) {
            double rw = 1.0;
            if (lay.bc == BcMode::SlabWalls && (j == 0 || j == lay.nz)) rw = 0.5;
            w.w12(i, j) = 4.0 * m.zzeta_node(i, j) * cell * rw;
        }
    }
    return w;
}

}  // namespace

double strain_form(const Metrics& m, const StrainSamples& a, const StrainSamples& b) {
    const StrainWeights w = strain_weights(m);
    double s = 0;
    for (std::size_t k = 0; k < a.d11.size(); ++k)
        s += w.w11.data()[k] * a.d11.data()[k] * b.d11.data()[k] +
             w.w22.data()[k] * a.d22.data()[k] * b.d22.data()[k];
    for (std::size_t k = 0; k < a.d12.size(); ++k)
        s += w.w12.data()[k] * a.d12.data()[k] * b.d12.data()[k];
    return s;
}

FaceField apply_viscous(const Metrics& m, const FaceField& u, const WallTraces& tr) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    const bool per = lay.bc == BcMode::Periodic;
    const StrainSamples s = strain(m, u, tr);
    const StrainWeights w = strain_weights(m);

    FaceField out = FaceField::zeros(lay);
    Grid2D zscatter(nx, lay.u2_rows(), 0.0);  // deferred avg^T contributions

    // d11 and d22 (cell samples)
    for (int i = 0; i < nx; ++i) {
        const int i1 = wrap(i + 1, nx);
        for (int j = 0; j < nz; ++j) {
            const int j1 = per ? wrap(j + 1, nz) : j + 1;
            const double g11 = w.w11(i, j) * s.d11(i, j);
            const double g22 = w.w22(i, j) * s.d22(i, j);
            // d11 = (u1(i1,j) - u1(i,j))/hx - zxic/jc * (ubar(i,j1)-ubar(i,j))/hz
            out.u1(i1, j) += g11 / lay.hx;
            out.u1(i, j) -= g11 / lay.hx;
            const double zxic = 0.5 * (m.zxi_zface(i, j) + m.zxi_zface(i, j1));
            const double cross = g11 * zxic / (m.jac_cell(i, j) * lay.hz);
            zscatter(i, j1) -= cross;
            zscatter(i, j) += cross;
            // d22 = (u2(i,j1) - u2(i,j)) / (hz jc)
            const double c22 = g22 / (lay.hz * m.jac_cell(i, j));
            out.u2(i, j1) += c22;
            out.u2(i, j) -= c22;
        }
    }

    // d12 (node samples)
    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        for (int j = 0; j < lay.u2_rows(); ++j) {
            const double g = 0.5 * w.w12(i, j) * s.d12(i, j);
            const double zn = m.zzeta_node(i, j);
            const double zxin = 0.5 * (m.zxi_zface(im, j) + m.zxi_zface(i, j));
            // dzu1 / zn term
            if (per) {
                const int jm = wrap(j - 1, nz);
                out.u1(i, j) += g / (zn * lay.hz);
                out.u1(i, jm) -= g / (zn * lay.hz);
            } else if (j == 0) {
                out.u1(i, 0) += g / (zn * 0.5 * lay.hz);
            } else if (j == nz) {
                out.u1(i, nz - 1) -= g / (zn * 0.5 * lay.hz);
            } else {
                out.u1(i, j) += g / (zn * lay.hz);
                out.u1(i, j - 1) -= g / (zn * lay.hz);
            }
            // dxu2 term
            out.u2(i, j) += g / lay.hx;
            out.u2(im, j) -= g / lay.hx;
            // -zxin/zn * dzu2 term
            const double c = -g * zxin / zn;
            if (per) {
                const int jm = wrap(j - 1, nz);
                const int jp = wrap(j + 1, nz);
                out.u2(i, jp) += 0.5 * c / (2.0 * lay.hz);
                out.u2(i, jm) -= 0.5 * c / (2.0 * lay.hz);
                out.u2(im, jp) += 0.5 * c / (2.0 * lay.hz);
                out.u2(im, jm) -= 0.5 * c / (2.0 * lay.hz);
            } else if (j == 0) {
                out.u2(i, 1) += 0.5 * c / lay.hz;
                out.u2(i, 0) -= 0.5 * c / lay.hz;
                out.u2(im, 1) += 0.5 * c / lay.hz;
                out.u2(im, 0) -= 0.5 * c / lay.hz;
            } else if (j == nz) {
                out.u2(i, nz) += 0.5 * c / lay.hz;
                out.u2(i, nz - 1) -= 0.5 * c / lay.hz;
                out.u2(im, nz) += 0.5 * c / lay.hz;
                out.u2(im, nz - 1) -= 0.5 * c / lay.hz;
            } else {
                out.u2(i, j + 1) += 0.5 * c / (2.0 * lay.hz);
                out.u2(i, j - 1) -= 0.5 * c / (2.0 * lay.hz);
                out.u2(im, j + 1) += 0.5 * c / (2.0 * lay.hz);
                out.u2(im, j - 1) -= 0.5 * c / (2.0 * lay.hz);
            }
        }
    }

    const Grid2D back = avg_u1_to_zface_transpose(m, zscatter);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) out.u1(i, j) += back(i, j);
    return out;
}

double dissipation(const Metrics& m, const FaceField& u, const WallTraces& tr) {
    const StrainSamples s = strain(m, u, tr);
    return strain_form(m, s, s);
}

// ---------------------------------------------------------------------------
// convection
// ---------------------------------------------------------------------------

FaceField convect_weighted(const Metrics& m, const Grid2D& fxi, const Grid2D& fz,
                           const FaceField& u, const WallTraces& tr) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    const bool per = lay.bc == BcMode::Periodic;
    FaceField out = FaceField::zeros(lay);

    // u1 control volumes
    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        const int i1 = wrap(i + 1, nx);
        for (int j = 0; j < nz; ++j) {
            const int jp = per ? wrap(j + 1, nz) : j + 1;
            const double fe = 0.5 * (fxi(i, j) + fxi(i1, j));
            const double fw = 0.5 * (fxi(im, j) + fxi(i, j));
            const double ue = 0.5 * (u.u1(i, j) + u.u1(i1, j));
            const double uw = 0.5 * (u.u1(im, j) + u.u1(i, j));
            const double fn = 0.5 * (fz(im, jp) + fz(i, jp));
            const double fs = 0.5 * (fz(im, j) + fz(i, j));
            double un, us;
            if (per) {
                un = 0.5 * (u.u1(i, j) + u.u1(i, wrap(j + 1, nz)));
                us = 0.5 * (u.u1(i, wrap(j - 1, nz)) + u.u1(i, j));
            } else {
                un = (j == nz - 1) ? tr.u1_top[static_cast<std::size_t>(i)]
                                   : 0.5 * (u.u1(i, j) + u.u1(i, j + 1));
                us = (j == 0) ? tr.u1_bottom[static_cast<std::size_t>(i)]
                              : 0.5 * (u.u1(i, j - 1) + u.u1(i, j));
            }
            out.u1(i, j) = fe * ue - fw * uw + fn * un - fs * us;
        }
    }

    // u2 control volumes
    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        const int i1 = wrap(i + 1, nx);
        const int jlo = per ? 0 : 0;
        const int jhi = per ? nz : nz + 1;
        for (int j = jlo; j < jhi; ++j) {
            double val;
            if (!per && j == 0) {
                // half control volume at the flat bottom; quiet in practice
                const double fn = 0.5 * (fz(i, 0) + fz(i, 1));
                const double un = 0.5 * (u.u2(i, 0) + u.u2(i, 1));
                const double fsb = fz(i, 0);
                val = fn * un - fsb * u.u2(i, 0);
            } else if (!per && j == nz) {
                // half control volume at the moving top
                const double fnb = fz(i, nz);
                const double fs = 0.5 * (fz(i, nz - 1) + fz(i, nz));
                const double us = 0.5 * (u.u2(i, nz - 1) + u.u2(i, nz));
                const double fe = 0.5 * fxi(i1, nz - 1);
                const double fw = 0.5 * fxi(i, nz - 1);
                const double ue = 0.5 * (u.u2(i, nz) + u.u2(i1, nz));
                const double uw = 0.5 * (u.u2(im, nz) + u.u2(i, nz));
                val = fnb * u.u2(i, nz) - fs * us + fe * ue - fw * uw;
            } else {
                const int jm = per ? wrap(j - 1, nz) : j - 1;
                const int jp = j;  // cell above the z-face
                const double fe = 0.5 * (fxi(i1, jm) + fxi(i1, jp));
                const double fw = 0.5 * (fxi(i, jm) + fxi(i, jp));
                const double ue = 0.5 * (u.u2(i, j) + u.u2(i1, j));
                const double uw = 0.5 * (u.u2(im, j) + u.u2(i, j));
                const int jup = per ? wrap(j + 1, nz) : j + 1;
                const double fn = 0.5 * (fz(i, j) + fz(i, jup));
                const double fs = 0.5 * (fz(i, jm) + fz(i, j));
                const double un = 0.5 * (u.u2(i, j) + u.u2(i, jup));
                const double us = 0.5 * (u.u2(i, jm) + u.u2(i, j));
                val = fe * ue - fw * uw + fn * un - fs * us;
            }
            out.u2(i, j) = val;
        }
    }
    return out;
}

FaceField convect(const Metrics& m, const Grid2D& fxi, const Grid2D& fz,
                  const FaceField& u, const WallTraces& tr) {
    FaceField out = convect_weighted(m, fxi, fz, u, tr);
    const FaceField vol = face_volumes(m);
    const Layout& lay = m.lay;
    for (int i = 0; i < lay.nx; ++i) {
        for (int j = 0; j < lay.nz; ++j) out.u1(i, j) /= vol.u1(i, j);
        if (lay.bc == BcMode::Periodic) {
            for (int j = 0; j < lay.nz; ++j) out.u2(i, j) /= vol.u2(i, j);
        } else {
            for (int j = 1; j < lay.nz; ++j) out.u2(i, j) /= vol.u2(i, j);
            out.u2(i, 0) = 0.0;
            out.u2(i, lay.nz) = 0.0;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// gradients and stress divergence
// ---------------------------------------------------------------------------

CenterGradient velocity_gradient(const Metrics& m, const FaceField& u,
                                 const WallTraces& tr) {
    (void)tr;
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    const bool per = lay.bc == BcMode::Periodic;
    const Grid2D ubar = avg_u1_to_zface(m, u.u1);
    CenterGradient g;
    g.g11 = Grid2D(nx, nz);
    g.g12 = Grid2D(nx, nz);
    g.g21 = Grid2D(nx, nz);
    g.g22 = Grid2D(nx, nz);

    auto v2c = [&](int i, int j) {
        const int j1 = per ? wrap(j + 1, nz) : j + 1;
        return 0.5 * (u.u2(i, j) + u.u2(i, j1));
    };

    for (int i = 0; i < nx; ++i) {
        const int i1 = wrap(i + 1, nx);
        const int imc = wrap(i - 1, nx);
        for (int j = 0; j < nz; ++j) {
            const int j1 = per ? wrap(j + 1, nz) : j + 1;
            const double jc = m.jac_cell(i, j);
            const double zxic = 0.5 * (m.zxi_zface(i, j) + m.zxi_zface(i, j1));
            const double dxu1 = (u.u1(i1, j) - u.u1(i, j)) / lay.hx;
            const double dzu1 = (ubar(i, j1) - ubar(i, j)) / lay.hz;
            g.g11(i, j) = dxu1 - zxic / jc * dzu1;
            g.g12(i, j) = dzu1 / jc;
            const double dzu2 = (u.u2(i, j1) - u.u2(i, j)) / lay.hz;
            g.g22(i, j) = dzu2 / jc;
            const double dxu2 = (v2c(i1, j) - v2c(imc, j)) / (2.0 * lay.hx);
            g.g21(i, j) = dxu2 - zxic / jc * dzu2;
        }
    }
    return g;
}

FaceField div_cell_tensor(const Metrics& m, const Grid2D& t11, const Grid2D& t12,
                          const Grid2D& t22) {
    const Layout& lay = m.lay;
    const int nx = lay.nx, nz = lay.nz;
    const bool per = lay.bc == BcMode::Periodic;
    FaceField out = FaceField::zeros(lay);

    // dzeta of a cell field evaluated at center row j of column i (one-sided
    // at the walls)
    auto dz_cell = [&](const Grid2D& t, int i, int j) {
        if (per) return (t(i, wrap(j + 1, nz)) - t(i, wrap(j - 1, nz))) / (2.0 * lay.hz);
        if (j == 0) return (t(i, 1) - t(i, 0)) / lay.hz;
        if (j == nz - 1) return (t(i, nz - 1) - t(i, nz - 2)) / lay.hz;
        return (t(i, j + 1) - t(i, j - 1)) / (2.0 * lay.hz);
    };

    // component 1 at x-faces
    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        for (int j = 0; j < nz; ++j) {
            const double zz = m.zzeta_xface(i, j);
            const int j1 = per ? wrap(j + 1, nz) : j + 1;
            const double zxi =
                0.25 * (m.zxi_zface(im, j) + m.zxi_zface(im, j1) + m.zxi_zface(i, j) +
                        m.zxi_zface(i, j1));
            const double dxt11 = (t11(i, j) - t11(im, j)) / lay.hx;
            const double dzt11 = 0.5 * (dz_cell(t11, im, j) + dz_cell(t11, i, j));
            const double dzt12 = 0.5 * (dz_cell(t12, im, j) + dz_cell(t12, i, j));
            out.u1(i, j) = dxt11 - zxi / zz * dzt11 + dzt12 / zz;
        }
    }

    // component 2 at z-faces (interior rows plus one-sided wall rows)
    auto t_at_zface = [&](const Grid2D& t, int i, int j) {
        if (per) return 0.5 * (t(i, wrap(j - 1, nz)) + t(i, j));
        if (j == 0) return 1.5 * t(i, 0) - 0.5 * t(i, 1);
        if (j == nz) return 1.5 * t(i, nz - 1) - 0.5 * t(i, nz - 2);
        return 0.5 * (t(i, j - 1) + t(i, j));
    };
    auto dz_at_zface = [&](const Grid2D& t, int i, int j) {
        if (per) return (t(i, j) - t(i, wrap(j - 1, nz))) / lay.hz;
        if (j == 0) return (t(i, 1) - t(i, 0)) / lay.hz;
        if (j == nz) return (t(i, nz - 1) - t(i, nz - 2)) / lay.hz;
        return (t(i, j) - t(i, j - 1)) / lay.hz;
    };

    for (int i = 0; i < nx; ++i) {
        const int im = wrap(i - 1, nx);
        const int i1 = wrap(i + 1, nx);
        for (int j = 0; j < lay.u2_rows(); ++j) {
            double zz;
            if (per)
                zz = 0.5 * (m.jac_cell(i, wrap(j - 1, nz)) + m.jac_cell(i, j));
            else if (j == 0)
                zz = m.jac_cell(i, 0);
            else if (j == nz)
                zz = m.jac_cell(i, nz - 1);
            else
                zz = 0.5 * (m.jac_cell(i, j - 1) + m.jac_cell(i, j));
            const double zxi = m.zxi_zface(i, j);
            const double dxt12 = (t_at_zface(t12, i1, j) - t_at_zface(t12, im, j)) /
                                 (2.0 * lay.hx);
            const double dzt12 = dz_at_zface(t12, i, j);
            const double dzt22 = dz_at_zface(t22, i, j);
            out.u2(i, j) = dxt12 - zxi / zz * dzt12 + dzt22 / zz;
        }
    }
    return out;
}

double inner(const FaceField& w, const FaceField& a, const FaceField& b) {
    std::vector<double> prod(a.u1.size() + a.u2.size());
    std::size_t k = 0;
    for (std::size_t q = 0; q < a.u1.size(); ++q)
        prod[k++] = w.u1.data()[q] * a.u1.data()[q] * b.u1.data()[q];
    for (std::size_t q = 0; q < a.u2.size(); ++q)
        prod[k++] = w.u2.data()[q] * a.u2.data()[q] * b.u2.data()[q];
    return par::det_sum(prod);
}

}  // namespace polyfsi::mac
