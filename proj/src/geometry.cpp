#include "polyfsi/geometry.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "polyfsi/interp.hpp"
#include "polyfsi/shell_fft.hpp"

namespace polyfsi {

namespace {

double wrap_2pi(double y) {
    y = std::fmod(y, 2.0 * M_PI);
    return y < 0 ? y + 2.0 * M_PI : y;
}

}  // namespace

ReferenceGeometry::ReferenceGeometry(GeomKind kind, int dim, int shell_n, double L,
                                     double ell, double kappa0)
    : kind_(kind), dim_(dim), shell_n_(shell_n), L_(L), ell_(ell), kappa0_(kappa0),
      cutoff_(L) {
    assert(shell_n >= 4);
    assert(ell > 0 && ell < L);
}

ReferenceGeometry ReferenceGeometry::flat_slab_2d(int shell_n, double L, double ell,
                                                  double kappa0) {
    return ReferenceGeometry(GeomKind::FlatSlab2D, 2, shell_n, L, ell, kappa0);
}

ReferenceGeometry ReferenceGeometry::flat_slab_3d(int shell_n, double L, double ell,
                                                  double kappa0) {
    return ReferenceGeometry(GeomKind::FlatSlab3D, 3, shell_n, L, ell, kappa0);
}

ReferenceGeometry ReferenceGeometry::annulus_2d(int shell_n, double L, double ell,
                                                double kappa0) {
    return ReferenceGeometry(GeomKind::Annulus2D, 2, shell_n, L, ell, kappa0);
}

Vec ReferenceGeometry::chart(double y1, double y2) const {
    switch (kind_) {
        case GeomKind::FlatSlab2D:
            return Vec(y1, 1.0);
        case GeomKind::FlatSlab3D:
            return Vec(y1, y2, 1.0);
        case GeomKind::Annulus2D:
            return Vec(std::cos(y1), std::sin(y1));
    }
    return Vec();
}

Vec ReferenceGeometry::normal(double y1, double y2) const {
    (void)y2;
    switch (kind_) {
        case GeomKind::FlatSlab2D:
            return Vec(0.0, 1.0);
        case GeomKind::FlatSlab3D:
            return Vec(0.0, 0.0, 1.0);
        case GeomKind::Annulus2D:
            return Vec(std::cos(y1), std::sin(y1));
    }
    return Vec();
}

ReferenceGeometry::FootPoint ReferenceGeometry::foot_point(const Vec& x) const {
    FootPoint fp;
    switch (kind_) {
        case GeomKind::FlatSlab2D:
            fp.y1 = wrap_2pi(x[0]);
            fp.s = x[1] - 1.0;
            break;
        case GeomKind::FlatSlab3D:
            fp.y1 = wrap_2pi(x[0]);
            fp.y2 = wrap_2pi(x[1]);
            fp.s = x[2] - 1.0;
            break;
        case GeomKind::Annulus2D:
            fp.y1 = wrap_2pi(std::atan2(x[1], x[0]));
            fp.s = std::hypot(x[0], x[1]) - 1.0;
            break;
    }
    fp.in_tube = fp.s > -L_;
    return fp;
}

Vec boundary_point(const ReferenceGeometry& geom, const ShellField& eta, int i,
                   int j) {
    const double y1 = geom.shell_coord(i);
    const double y2 = geom.dim() == 3 ? geom.shell_coord(j) : 0.0;
    return geom.chart(y1, y2) + geom.normal(y1, y2) * eta.at(i, j);
}

MovingBoundary moving_normal_and_area(const ReferenceGeometry& geom,
                                      const ShellField& eta, bool enforce_floor) {
    MovingBoundary mb;
    const int n = geom.shell_n();
    const int count = geom.shell_size();
    mb.n_eta.resize(count);
    mb.a_eta.resize(count);
    mb.weight.resize(count);
    mb.min_area = 1e300;
    mb.min_orientation = 1e300;

    if (geom.dim() == 2) {
        std::span<const double> vals(eta.g.data(), static_cast<std::size_t>(n));
        const std::vector<double> deta = sfft::derivative_1d(vals, 1);
        for (int i = 0; i < n; ++i) {
            const double y = geom.shell_coord(i);
            const double e = eta.at(i), ep = deta[i];
            Vec t, nref = geom.normal(y);
            if (geom.kind() == GeomKind::FlatSlab2D) {
                t = Vec(1.0, ep);
                mb.weight[i] = 1.0;  // (n . n_eta) a_eta, exact for the slab
            } else {
                const double c = std::cos(y), s = std::sin(y);
                t = Vec(ep * c - (1.0 + e) * s, ep * s + (1.0 + e) * c);
                mb.weight[i] = 1.0 + e;
            }
            const double a = t.norm();
            Vec nn(t[1] / a, -t[0] / a);
            if (nn.dot(nref) < 0) nn *= -1.0;
            mb.n_eta[i] = nn;
            mb.a_eta[i] = a;
            mb.min_area = std::min(mb.min_area, a);
            mb.min_orientation = std::min(mb.min_orientation, nn.dot(nref));
        }
    } else {
        const Grid2D d1 = sfft::derivative_2d(eta.g, 1, 0);
        const Grid2D d2 = sfft::derivative_2d(eta.g, 0, 1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const int idx = i * n + j;
                // cross product of (1,0,d1) and (0,1,d2)
                Vec cr(-d1(i, j), -d2(i, j), 1.0);
                const double a = cr.norm();
                mb.n_eta[idx] = (1.0 / a) * cr;
                mb.a_eta[idx] = a;
                mb.weight[idx] = 1.0;  // cross . e3 is exactly 1
                mb.min_area = std::min(mb.min_area, a);
                mb.min_orientation = std::min(mb.min_orientation, 1.0 / a);
            }
    }

    if (enforce_floor && mb.min_area < geom.kappa0()) {
        std::ostringstream os;
        os << "area element " << mb.min_area << " below floor " << geom.kappa0();
        throw DegeneracyError(os.str());
    }
    return mb;
}

NondegeneracyReport check_nondegeneracy(const ReferenceGeometry& geom,
                                        const ShellField& eta) {
    NondegeneracyReport rep;
    rep.max_disp = eta.max_abs();
    const MovingBoundary mb = moving_normal_and_area(geom, eta, false);
    rep.min_area = mb.min_area;
    rep.ok = rep.max_disp <= geom.ell() && rep.min_area >= geom.kappa0() &&
             mb.min_orientation > 0;
    return rep;
}

// ---------------------------------------------------------------------------
// HanzawaMap
// ---------------------------------------------------------------------------

HanzawaMap::HanzawaMap(const ReferenceGeometry& geom, ShellField eta)
    : geom_(&geom), eta_(std::move(eta)) {
    max_disp_ = eta_.max_abs();
    if (max_disp_ > geom.ell()) {
        std::ostringstream os;
        os << "displacement " << max_disp_ << " exceeds bound " << geom.ell();
        throw DegeneracyError(os.str());
    }
}

double HanzawaMap::eta_at(double y1, double y2) const {
    const int n = geom_->shell_n();
    const double h = geom_->shell_h();
    if (geom_->dim() == 2) {
        return interp::periodic_cubic({eta_.g.data(), static_cast<std::size_t>(n)},
                                      0.0, h, y1);
    }
    // tensor cubic on the doubly periodic grid
    const double u = y1 / h, v = y2 / h;
    const double fu = std::floor(u), fv = std::floor(v);
    const int i0 = static_cast<int>(fu), j0 = static_cast<int>(fv);
    double wu[4], wv[4];
    interp::cr_weights(u - fu, wu);
    interp::cr_weights(v - fv, wv);
    double s = 0;
    for (int a = 0; a < 4; ++a) {
        const int i = interp::wrap(i0 - 1 + a, n);
        double row = 0;
        for (int b = 0; b < 4; ++b) row += wv[b] * eta_.g(i, interp::wrap(j0 - 1 + b, n));
        s += wu[a] * row;
    }
    return s;
}

double HanzawaMap::eta_deriv_at(double y1, double y2, int axis) const {
    const int n = geom_->shell_n();
    const double h = geom_->shell_h();
    if (geom_->dim() == 2) {
        return interp::periodic_cubic_deriv(
            {eta_.g.data(), static_cast<std::size_t>(n)}, 0.0, h, y1);
    }
    const double u = y1 / h, v = y2 / h;
    const double fu = std::floor(u), fv = std::floor(v);
    const int i0 = static_cast<int>(fu), j0 = static_cast<int>(fv);
    double wu[4], wv[4];
    if (axis == 0) {
        interp::cr_weights_deriv(u - fu, wu);
        interp::cr_weights(v - fv, wv);
    } else {
        interp::cr_weights(u - fu, wu);
        interp::cr_weights_deriv(v - fv, wv);
    }
    double s = 0;
    for (int a = 0; a < 4; ++a) {
        const int i = interp::wrap(i0 - 1 + a, n);
        double row = 0;
        for (int b = 0; b < 4; ++b) row += wv[b] * eta_.g(i, interp::wrap(j0 - 1 + b, n));
        s += wu[a] * row;
    }
    return s / h;
}

Vec HanzawaMap::forward(const Vec& x) const {
    const auto fp = geom_->foot_point(x);
    if (!fp.in_tube) return x;
    const double e = eta_at(fp.y1, fp.y2);
    return x + geom_->normal(fp.y1, fp.y2) * (e * geom_->cutoff()(fp.s));
}

double invert_normal_offset(const CutoffProfile& pc, double e, double s_hat) {
    if (e == 0.0) return s_hat;
    double lo = s_hat - std::max(e, 0.0) - 1e-12;
    double hi = s_hat + std::max(-e, 0.0) + 1e-12;
    auto g = [&](double s) { return s + e * pc(s) - s_hat; };
    double s = s_hat - e * pc(s_hat);  // initial guess
    if (s < lo || s > hi) s = 0.5 * (lo + hi);
    const double tol = 1e-14 * (1.0 + std::abs(s_hat) + std::abs(e));
    for (int it = 0; it < 50; ++it) {
        const double gs = g(s);
        if (std::abs(gs) <= tol) return s;
        if (gs > 0)
            hi = s;
        else
            lo = s;
        const double dg = 1.0 + e * pc.deriv(s);
        double snew = (std::abs(dg) > 1e-8) ? s - gs / dg : 0.5 * (lo + hi);
        if (snew <= lo || snew >= hi) snew = 0.5 * (lo + hi);
        if (hi - lo < 1e-16 * (1.0 + std::abs(s_hat))) return 0.5 * (lo + hi);
        s = snew;
    }
    throw ConvergenceError("tube inverse: root solve exceeded iteration budget "
                           "(displacement slope near degeneracy)");
}

Vec HanzawaMap::inverse(const Vec& xhat) const {
    const auto fp = geom_->foot_point(xhat);
    if (fp.s <= -geom_->L()) return xhat;  // identity region
    const double e = eta_at(fp.y1, fp.y2);
    const double s = invert_normal_offset(geom_->cutoff(), e, fp.s);
    return geom_->chart(fp.y1, fp.y2) + geom_->normal(fp.y1, fp.y2) * s;
}

oldroyd::Mat HanzawaMap::jacobian(const Vec& x) const {
    const int d = geom_->dim();
    oldroyd::Mat J = oldroyd::Mat::Identity(d, d);
    const auto fp = geom_->foot_point(x);
    if (!fp.in_tube) return J;
    const CutoffProfile& pc = geom_->cutoff();
    const double e = eta_at(fp.y1, fp.y2);
    const double phic = pc(fp.s), dphic = pc.deriv(fp.s);
    const Vec n = geom_->normal(fp.y1, fp.y2);

    switch (geom_->kind()) {
        case GeomKind::FlatSlab2D: {
            const double ep = eta_deriv_at(fp.y1);
            // grad y = e1, grad s = e2, n constant
            J(1, 0) += ep * phic;
            J(1, 1) += e * dphic;
            break;
        }
        case GeomKind::FlatSlab3D: {
            const double e1 = eta_deriv_at(fp.y1, fp.y2, 0);
            const double e2 = eta_deriv_at(fp.y1, fp.y2, 1);
            J(2, 0) += e1 * phic;
            J(2, 1) += e2 * phic;
            J(2, 2) += e * dphic;
            break;
        }
        case GeomKind::Annulus2D: {
            const double ep = eta_deriv_at(fp.y1);
            const double r = 1.0 + fp.s;
            const double c = std::cos(fp.y1), sn = std::sin(fp.y1);
            const Vec grad_th(-sn / r, c / r);
            const Vec grad_s(c, sn);
            const Vec dn(-sn, c);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    J(i, j) += n[i] * (ep * phic * grad_th[j] + e * dphic * grad_s[j]);
                    J(i, j) += e * phic * dn[i] * grad_th[j];
                }
            break;
        }
    }
    return J;
}

double HanzawaMap::boundary_excess(const Vec& xhat) const {
    const auto fp = geom_->foot_point(xhat);
    const double e = eta_at(fp.y1, fp.y2);
    double excess = fp.s - e;  // flexible side
    if (geom_->kind() != GeomKind::Annulus2D) {
        const int d = geom_->dim();
        excess = std::max(excess, -xhat[d - 1]);  // rigid bottom wall
    }
    return excess;
}

double HanzawaMap::naive_inverse_defect() const {
    ShellField neg = eta_;
    for (std::size_t k = 0; k < neg.g.size(); ++k) neg.g.data()[k] *= -1.0;
    HanzawaMap back(*geom_, std::move(neg));

    double worst = 0.0;
    const int ns = 24;
    const int n = geom_->shell_n();
    for (int i = 0; i < n; ++i) {
        const double y = geom_->shell_coord(i);
        for (int k = 1; k <= ns; ++k) {
            const double s = -geom_->L() + geom_->L() * k / ns;
            const Vec x = geom_->chart(y) + geom_->normal(y) * s;
            const Vec rt = back.forward(forward(x));
            worst = std::max(worst, (rt - x).norm_inf());
        }
    }
    return worst;
}

}  // namespace polyfsi
