/// @file cutoff.hpp
/// @brief Normal-coordinate cutoff profile of the boundary displacement.
///
/// Identically 1 for s >= -L/4, identically 0 for s <= -L + delta_c, and a
/// C^2 quintic transition in between. The declared margin delta_c keeps the
/// profile exactly zero on a strip above -L.

#pragma once

namespace polyfsi {

class CutoffProfile {
  public:
    /// Profile over the strip of half-width L: identically 1 on
    /// [-flat_frac * L, infinity), identically 0 below -L + delta_c.
    /// delta_c < 0 picks the default margin L/8.
    explicit CutoffProfile(double L, double delta_c = -1.0, double flat_frac = 0.25);

    double operator()(double s) const;
    double deriv(double s) const;

    double L() const { return L_; }
    double margin() const { return delta_c_; }
    /// start of the flat collar (the profile is 1 from here up)
    double flat_start() const { return s1_; }
    /// sup |phi_c'|; the inverse map is monotone while |eta| * sup_deriv < 1.
    double sup_deriv() const;

  private:
    double L_;
    double delta_c_;
    double s0_;  // transition start (-L + delta_c)
    double s1_;  // transition end (-flat_frac L)
};

}  // namespace polyfsi
