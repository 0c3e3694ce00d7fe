#include "polyfsi/oldroyd.hpp"

#include <cassert>

namespace polyfsi::oldroyd {

BigVec vec(const Mat& T) {
    const int d = static_cast<int>(T.rows());
    BigVec t(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) t(d * i + j) = T(i, j);
    return t;
}

Mat unvec(const BigVec& t) {
    const int d = t.size() == 9 ? 3 : 2;
    Mat T(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) T(i, j) = t(d * i + j);
    return T;
}

Mat sym(const Mat& L) { return 0.5 * (L + L.transpose()); }
Mat skew(const Mat& L) { return 0.5 * (L - L.transpose()); }

BigMat assemble_W_generated(const Mat& L) {
    const int d = static_cast<int>(L.rows());
    BigMat W(d * d, d * d);
    Mat E(d, d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            E.setZero();
            E(k, l) = 1.0;
            W.col(d * k + l) = vec(L * E + E * L.transpose());
        }
    return W;
}

namespace {

// Explicit 3x3-block table for d = 3. Entries are written against
// L(i,j) = dv_i/dx_j.
BigMat assemble_W3(const Mat& L) {
    BigMat W(9, 9);
    W.setZero();

    auto diag3 = [&](int bi, int bj, double v) {
        for (int r = 0; r < 3; ++r) W(3 * bi + r, 3 * bj + r) = v;
    };

    // W11
    W.block<3, 3>(0, 0) << 2 * L(0, 0), L(0, 1), L(0, 2),
        L(1, 0), L(0, 0) + L(1, 1), L(1, 2),
        L(2, 0), L(2, 1), L(0, 0) + L(2, 2);
    // W22
    W.block<3, 3>(3, 3) << L(0, 0) + L(1, 1), L(0, 1), L(0, 2),
        L(1, 0), 2 * L(1, 1), L(1, 2),
        L(2, 0), L(2, 1), L(1, 1) + L(2, 2);
    // W33
    W.block<3, 3>(6, 6) << L(0, 0) + L(2, 2), L(0, 1), L(0, 2),
        L(1, 0), L(1, 1) + L(2, 2), L(1, 2),
        L(2, 0), L(2, 1), 2 * L(2, 2);

    diag3(0, 1, L(0, 1));  // W12
    diag3(0, 2, L(0, 2));  // W13
    diag3(1, 0, L(1, 0));  // W21
    diag3(1, 2, L(1, 2));  // W23
    diag3(2, 0, L(2, 0));  // W31
    diag3(2, 1, L(2, 1));  // W32
    return W;
}

}  // namespace

BigMat assemble_W(const Mat& L) {
    const int d = static_cast<int>(L.rows());
    assert(d == 2 || d == 3);
    if (d == 3) return assemble_W3(L);
    return assemble_W_generated(L);
}

BigVec assemble_Wvec(const Mat& L) { return vec(L + L.transpose()); }

Mat q_form(const Mat& T, const Mat& L) {
    const Mat D = sym(L);
    const Mat W = skew(L);
    return T * D + D * T + W * T - T * W;
}

}  // namespace polyfsi::oldroyd
