#include "polyfsi/solute.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace polyfsi::solute {

using oldroyd::BigMat;
using oldroyd::BigVec;
using oldroyd::Mat;

namespace {

// one RK4 step of dx/dt = v(t, x)
Vec rk4_step(const VelocityField& v, double t, const Vec& x, double h) {
    const Vec k1 = v.velocity(t, x);
    const Vec k2 = v.velocity(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec k3 = v.velocity(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec k4 = v.velocity(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Path trace_one(const VelocityField& v, const Vec& seed, double t_from, double t_to,
               double dt, const TraceOptions& opt) {
    assert(dt > 0);
    const bool backward = t_to < t_from;
    const double span = std::abs(t_to - t_from);
    const int nfull = static_cast<int>(std::floor(span / dt + 1e-9));
    const double rem = span - nfull * dt;
    const int nstep = nfull + (rem > 1e-12 * (1.0 + span) ? 1 : 0);

    Path p;
    p.dt = dt;
    p.t.reserve(2 * nstep + 1);
    p.x.reserve(2 * nstep + 1);
    p.grad.reserve(2 * nstep + 1);

    Vec x = seed;
    double t = t_from;
    const double dir = backward ? -1.0 : 1.0;

    auto accept = [&](double tt, Vec& pos) {
        const double ex = v.boundary_excess(tt, pos);
        p.max_excess = std::max(p.max_excess, ex);
        if (ex > opt.eps_dom) {
            std::ostringstream os;
            os << "characteristic left the moving domain by " << ex << " at t=" << tt
               << " (kinematic coupling violated upstream)";
            throw DomainExitError(os.str());
        }
        if (ex > 0) pos = v.project_inside(tt, pos);
    };

    accept(t, x);
    p.t.push_back(t);
    p.x.push_back(x);
    p.grad.push_back(v.gradient(t, x));

    for (int s = 0; s < nstep; ++s) {
        double hfull = dt;
        if (s == nfull) hfull = rem;  // short final step
        const double h = 0.5 * dir * hfull;
        for (int half = 0; half < 2; ++half) {
            x = rk4_step(v, t, x, h);
            t += h;
            accept(t, x);
            p.t.push_back(t);
            p.x.push_back(x);
            p.grad.push_back(v.gradient(t, x));
        }
    }

    if (backward) {
        std::reverse(p.t.begin(), p.t.end());
        std::reverse(p.x.begin(), p.x.end());
        std::reverse(p.grad.begin(), p.grad.end());
        p.t0 = t_to;
        p.t1 = t_from;
    } else {
        p.t0 = t_from;
        p.t1 = t_to;
    }
    return p;
}

CharacteristicBundle trace_characteristics(const VelocityField& v,
                                           std::span<const Vec> seeds, double t0,
                                           double t1, double dt,
                                           const TraceOptions& opt, bool parallel) {
    CharacteristicBundle b;
    b.t0 = t0;
    b.t1 = t1;
    b.dt = dt;
    b.paths.resize(seeds.size());
    std::exception_ptr err;
    auto body = [&](std::int64_t i) {
        try {
            b.paths[static_cast<std::size_t>(i)] = trace_one(v, seeds[i], t0, t1, dt, opt);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    };
    if (parallel)
        par::parallel_for(static_cast<std::int64_t>(seeds.size()), body);
    else
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(seeds.size()); ++i) body(i);
    if (err) std::rethrow_exception(err);
    for (const auto& p : b.paths) b.max_excess = std::max(b.max_excess, p.max_excess);
    return b;
}

BigVec advance_stress_along_path(const BigVec& T0, const Path& path) {
    const std::size_t nsamp = path.x.size();
    assert(nsamp >= 1 && nsamp % 2 == 1);
    const int nstep = static_cast<int>((nsamp - 1) / 2);
    const int m = static_cast<int>(T0.size());

    BigVec T = T0;
    BigMat I = BigMat::Identity(m, m);
    for (int s = 0; s < nstep; ++s) {
        const double h = path.t[2 * s + 2] - path.t[2 * s];
        const BigMat A0 = oldroyd::assemble_W(path.grad[2 * s]) - 2.0 * I;
        const BigMat Am = oldroyd::assemble_W(path.grad[2 * s + 1]) - 2.0 * I;
        const BigMat A1 = oldroyd::assemble_W(path.grad[2 * s + 2]) - 2.0 * I;
        const BigVec w0 = oldroyd::assemble_Wvec(path.grad[2 * s]);
        const BigVec wm = oldroyd::assemble_Wvec(path.grad[2 * s + 1]);
        const BigVec w1 = oldroyd::assemble_Wvec(path.grad[2 * s + 2]);

        const BigVec k1 = A0 * T + w0;
        const BigVec k2 = Am * (T + 0.5 * h * k1) + wm;
        const BigVec k3 = Am * (T + 0.5 * h * k2) + wm;
        const BigVec k4 = A1 * (T + h * k3) + w1;
        T += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return T;
}

BigVec closed_form_constant_coeff(const BigVec& T0, const BigMat& W,
                                  const BigVec& Wvec, double t) {
    const int m = static_cast<int>(T0.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m + 1, m + 1);
    M.topLeftCorner(m, m) = W - 2.0 * BigMat::Identity(m, m);
    M.topRightCorner(m, 1) = Wvec;
    const Eigen::MatrixXd E = (M * t).exp();
    return E.topLeftCorner(m, m) * T0 + E.topRightCorner(m, 1);
}

// ---------------------------------------------------------------------------
// field solve
// ---------------------------------------------------------------------------

StressField StressField::zeros(int d, int nx, int ny) {
    StressField f;
    f.d = d;
    f.comp.assign(static_cast<std::size_t>(d) * d, Grid2D(nx, ny, 0.0));
    return f;
}

BigVec StressField::at(int i, int j) const {
    BigVec t(static_cast<int>(comp.size()));
    for (std::size_t c = 0; c < comp.size(); ++c) t(static_cast<int>(c)) = comp[c](i, j);
    return t;
}

void StressField::set(int i, int j, const BigVec& t) {
    for (std::size_t c = 0; c < comp.size(); ++c) comp[c](i, j) = t(static_cast<int>(c));
}

double StressField::symmetry_defect() const {
    double worst = 0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const auto& a = comp[static_cast<std::size_t>(d * i + j)];
            const auto& b = comp[static_cast<std::size_t>(d * j + i)];
            for (std::size_t k = 0; k < a.size(); ++k)
                worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
        }
    return worst;
}

SoluteFieldResult solve_solute_field(const VelocityField& v, const SoluteGrid& grid,
                                     const StressInitFn& T0, double t0,
                                     std::span<const double> out_times, double dt,
                                     const TraceOptions& opt, bool parallel) {
    SoluteFieldResult res;
    const int d = v.dim();
    const std::int64_t nnode = static_cast<std::int64_t>(grid.nx) * grid.ny;

    for (double tau : out_times) {
        StressField field = StressField::zeros(d, grid.nx, grid.ny);
        std::vector<double> sym_defect(static_cast<std::size_t>(nnode), 0.0);
        std::vector<double> excess(static_cast<std::size_t>(nnode), 0.0);
        std::exception_ptr err;

        auto body = [&](std::int64_t idx) {
            try {
                const int i = static_cast<int>(idx / grid.ny);
                const int j = static_cast<int>(idx % grid.ny);
                const Vec xout = grid.position(tau, i, j);
                BigVec T;
                if (std::abs(tau - t0) <= 1e-14 * (1.0 + std::abs(t0))) {
                    T = T0(xout);
                } else {
                    const Path p = trace_one(v, xout, tau, t0, dt, opt);
                    T = advance_stress_along_path(T0(p.x.front()), p);
                    excess[static_cast<std::size_t>(idx)] = p.max_excess;
                }
                field.set(i, j, T);
                const Mat M = oldroyd::unvec(T);
                sym_defect[static_cast<std::size_t>(idx)] =
                    (M - M.transpose()).cwiseAbs().maxCoeff();
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        };

        if (parallel)
            par::parallel_for(nnode, body);
        else
            for (std::int64_t i = 0; i < nnode; ++i) body(i);
        if (err) std::rethrow_exception(err);

        res.max_symmetry_defect =
            std::max(res.max_symmetry_defect, par::det_max_abs(sym_defect));
        res.max_excess = std::max(res.max_excess, par::det_max_abs(excess));
        res.series.push_back(std::move(field));
    }
    return res;
}

}  // namespace polyfsi::solute
