#include "polyfsi/cutoff.hpp"

#include <cassert>

namespace polyfsi {

namespace {
// quintic smoothstep: q(0)=0, q(1)=1, q'=q''=0 at both ends
double quintic(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double quintic_deriv(double t) {
    const double u = t * (1.0 - t);
    return 30.0 * u * u;
}
}  // namespace

CutoffProfile::CutoffProfile(double L, double delta_c, double flat_frac) : L_(L) {
    assert(L > 0);
    assert(flat_frac > 0 && flat_frac < 1);
    delta_c_ = delta_c < 0 ? L / 8.0 : delta_c;
    s0_ = -L + delta_c_;
    s1_ = -flat_frac * L;
    assert(s0_ < s1_);
}

double CutoffProfile::operator()(double s) const {
    if (s >= s1_) return 1.0;
    if (s <= s0_) return 0.0;
    return quintic((s - s0_) / (s1_ - s0_));
}

double CutoffProfile::deriv(double s) const {
    if (s >= s1_ || s <= s0_) return 0.0;
    const double w = s1_ - s0_;
    return quintic_deriv((s - s0_) / w) / w;
}

double CutoffProfile::sup_deriv() const { return (15.0 / 8.0) / (s1_ - s0_); }

}  // namespace polyfsi
