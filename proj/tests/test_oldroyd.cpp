#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "polyfsi/oldroyd.hpp"

using namespace polyfsi::oldroyd;

namespace {

Mat random_mat(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = dist(rng);
    return m;
}

Mat random_sym(int d, std::mt19937_64& rng) {
    Mat m = random_mat(d, rng);
    return Mat(0.5 * (m + m.transpose()));
}

}  // namespace

TEST_CASE("vec lists row-major and unvec is its exact inverse") {
    Mat T(2, 2);
    T << 1.5, -2.0, -2.0, 0.25;  // [[a,b],[b,c]]
    BigVec t = vec(T);
    CHECK(t(0) == 1.5);
    CHECK(t(1) == -2.0);
    CHECK(t(2) == -2.0);
    CHECK(t(3) == 0.25);

    Mat I3 = Mat::Identity(3, 3);
    BigVec i3 = vec(I3);
    const double want[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (int k = 0; k < 9; ++k) CHECK(i3(k) == want[k]);

    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        Mat S = random_sym(3, rng);
        CHECK(unvec(vec(S)) == S);  // bitwise
    }
}

TEST_CASE("vec is an isometry between Frobenius and Euclidean norms") {
    std::mt19937_64 rng(11);
    for (int d : {2, 3})
        for (int rep = 0; rep < 50; ++rep) {
            Mat T = random_mat(d, rng);
            CHECK(vec(T).norm() == doctest::Approx(T.norm()).epsilon(1e-15));
        }
}

TEST_CASE("companion matrix reproduces L T + T L^T") {
    std::mt19937_64 rng(17);
    for (int d : {2, 3}) {
        double worst = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            Mat L = random_mat(d, rng);
            Mat T = random_sym(d, rng);
            BigVec lhs = assemble_W(L) * vec(T);
            BigVec rhs = vec(L * T + T * L.transpose());
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-13);
    }
}

TEST_CASE("explicit d=3 table equals the generated companion matrix") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        Mat L = random_mat(3, rng);
        CHECK((assemble_W(L) - assemble_W_generated(L)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("block table entries for a diagonal gradient") {
    // only dv1/dx1 = 1 and dv3/dx3 = -1
    Mat L = Mat::Zero(3, 3);
    L(0, 0) = 1.0;
    L(2, 2) = -1.0;
    BigMat W = assemble_W(L);
    CHECK(W(0, 0) == 2.0);
    CHECK(W(1, 1) == 1.0);
    CHECK(W(2, 2) == 0.0);
    CHECK(W(6, 6) == 0.0);
    CHECK(W(7, 7) == -1.0);
    CHECK(W(8, 8) == -2.0);
    // blocks holding dv1/dx3 and dv3/dx1 vanish here
    CHECK(W.block<3, 3>(0, 6).cwiseAbs().maxCoeff() == 0.0);
    CHECK(W.block<3, 3>(6, 0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forcing vector is vec(2 sym(L))") {
    Mat L0 = Mat::Zero(3, 3);
    CHECK(assemble_Wvec(L0).cwiseAbs().maxCoeff() == 0.0);

    const double gamma = 0.7;
    Mat L = Mat::Zero(3, 3);
    L(0, 1) = gamma;  // dv1/dx2
    BigVec w = assemble_Wvec(L);
    const double want[9] = {0, gamma, 0, gamma, 0, 0, 0, 0, 0};
    for (int k = 0; k < 9; ++k) CHECK(w(k) == doctest::Approx(want[k]));

    std::mt19937_64 rng(29);
    for (int d : {2, 3})
        for (int rep = 0; rep < 100; ++rep) {
            Mat Lr = random_mat(d, rng);
            Mat back = unvec(assemble_Wvec(Lr));
            CHECK((back - 2.0 * sym(Lr)).cwiseAbs().maxCoeff() <= 1e-13);
            CHECK((back - back.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
        }
}

TEST_CASE("q form equals L T + T L^T and keeps symmetry") {
    std::mt19937_64 rng(31);
    for (int d : {2, 3}) {
        for (int rep = 0; rep < 200; ++rep) {
            Mat L = random_mat(d, rng);
            Mat T = random_sym(d, rng);
            Mat q = q_form(T, L);
            CHECK((q - (L * T + T * L.transpose())).cwiseAbs().maxCoeff() <= 1e-13);
            CHECK((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
        }
        // identity stress, trace-free gradient: q = L + L^T
        Mat L = random_mat(d, rng);
        L(d - 1, d - 1) -= L.trace();
        Mat q = q_form(Mat::Identity(d, d), L);
        CHECK((q - (L + L.transpose())).cwiseAbs().maxCoeff() <= 1e-13);
        // pure rotation against identity stress commutes away
        Mat R = skew(random_mat(d, rng));
        CHECK(q_form(Mat::Identity(d, d), R).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("symmetry is preserved through the vectorized right-hand side") {
    std::mt19937_64 rng(37);
    for (int d : {2, 3})
        for (int rep = 0; rep < 100; ++rep) {
            Mat L = random_mat(d, rng);
            Mat T = random_sym(d, rng);
            BigVec r = assemble_W(L) * vec(T) + assemble_Wvec(L);
            Mat R = unvec(r);
            CHECK((R - R.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
        }
}
