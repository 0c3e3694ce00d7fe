/// @file oldroyd.hpp
/// @brief Tensor algebra for the Oldroyd-B reaction terms: symmetric/skew
///        splits, the Q form, and the row-major tensor-to-vector rewrite with
///        its d^2 x d^2 companion matrix.
///
/// Conventions: the velocity gradient is stored as L with L(i,j) = dv_i/dx_j.
/// vec() lists a d x d tensor row-major, so vec and unvec are exact
/// inverses and vec is an isometry between the Frobenius and Euclidean norms.

#pragma once

#include <Eigen/Dense>

namespace polyfsi::oldroyd {

/// d x d matrix, d in {2,3}, fixed-capacity storage (no heap).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
/// d^2 x d^2 matrix.
using BigMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;
/// Length-d^2 vector.
using BigVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1>;

/// Row-major listing (T11, T12, ..., Tdd).
BigVec vec(const Mat& T);
Mat unvec(const BigVec& t);

Mat sym(const Mat& L);
Mat skew(const Mat& L);

/// Companion matrix W with W * vec(T) = vec(L T + T L^T) for every T.
/// d = 3 uses the explicit block table; d = 2 is generated from the identity.
BigMat assemble_W(const Mat& L);

/// Generator form of assemble_W: columns are vec(L E_kl + E_kl L^T).
/// Valid for any d; kept as the independent route the tests compare against.
BigMat assemble_W_generated(const Mat& L);

/// Forcing vector W = vec(L + L^T) = vec(2 sym(L)).
BigVec assemble_Wvec(const Mat& L);

/// Q(T, L) = T D + D T + W T - T W with D = sym(L), W = skew(L).
/// Identically equal to L T + T L^T for symmetric T.
Mat q_form(const Mat& T, const Mat& L);

}  // namespace polyfsi::oldroyd
