#include <doctest.h>

#include "loca/gradients.hpp"
#include "loca/losses.hpp"
#include "test_support.hpp"

using namespace loca;

namespace {

Matrix random_points(int rows, int cols, uint64_t seed, double lo = -1, double hi = 1) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

} // namespace

TEST_CASE("whitening gradient matches central finite differences") {
    const int n_clouds = 5, m = 8;
    Matrix pts = random_points(n_clouds * m, 2, 21);
    const double sigma = 0.3;
    for (Activation act : {Activation::Tanh, Activation::LeakyRelu}) {
        MLPModel enc = mlp_init({2, 9, 6, 2, 2}, act, 2, 31);
        GradientSet g;
        ForwardCache cache;
        whitening_loss_grad(enc, pts, n_clouds, sigma, g, cache);
        const double max_rel = test::fd_gradient_check(
            enc, g, [&] { return whitening_loss_points(enc, pts, n_clouds, sigma); }, 60, 77);
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("reconstruction gradient matches central finite differences") {
    const int n_clouds = 4, m = 6;
    Matrix pts = random_points(n_clouds * m, 3, 22);
    MLPModel enc = mlp_init({3, 8, 2, 2}, Activation::Tanh, 2, 41);
    MLPModel dec = mlp_init({2, 8, 3, 3}, Activation::LeakyRelu, 2, 42);
    GradientSet ge, gd;
    ForwardCache ce, cd;
    reconstruction_loss_grad(enc, dec, pts, ge, gd, ce, cd);

    const double enc_rel = test::fd_gradient_check(
        enc, ge, [&] { return reconstruction_loss_points(enc, dec, pts); }, 60, 78);
    CHECK(enc_rel < 1e-5);
    const double dec_rel = test::fd_gradient_check(
        dec, gd, [&] { return reconstruction_loss_points(enc, dec, pts); }, 60, 79);
    CHECK(dec_rel < 1e-5);
}

TEST_CASE("reconstruction gradient vanishes when decoder∘encoder is the identity") {
    MLPModel enc = test::identity_model(2);
    MLPModel dec = test::identity_model(2);
    Matrix pts = random_points(20, 2, 23);
    GradientSet ge, gd;
    ForwardCache ce, cd;
    const double loss = reconstruction_loss_grad(enc, dec, pts, ge, gd, ce, cd);
    CHECK(loss == 0.0);
    CHECK(ge.squared_norm() < 1e-24);
    CHECK(gd.squared_norm() < 1e-24);
}

TEST_CASE("whitening gradient vanishes at exactly whitened clouds") {
    const double sigma = 0.2;
    const int n_clouds = 3;
    Vector cov = Vector::Constant(2, sigma * sigma);
    Matrix pts(n_clouds * 4, 2);
    Rng rng(5);
    for (int c = 0; c < n_clouds; ++c) {
        Vector center(2);
        center << rng.uniform(-1, 1), rng.uniform(-1, 1);
        pts.middleRows(c * 4, 4) = test::exact_cov_cloud(center, cov);
    }
    MLPModel enc = test::identity_model(2);
    GradientSet g;
    ForwardCache cache;
    const double loss = whitening_loss_grad(enc, pts, n_clouds, sigma, g, cache);
    CHECK(loss < 1e-28);
    CHECK(g.squared_norm() < 1e-20);
}

TEST_CASE("generic gradient entry point dispatches and rejects unknown kinds") {
    Matrix pts = random_points(12, 2, 24);
    MLPModel enc = mlp_init({2, 5, 2, 2}, Activation::Tanh, 2, 51);
    MLPModel dec = mlp_init({2, 5, 2, 2}, Activation::Tanh, 2, 52);

    GradientSet gw = loss_gradients(enc, LossKind::Whitening, pts, 3, {.sigma = 0.5});
    GradientSet expected;
    ForwardCache cache;
    whitening_loss_grad(enc, pts, 3, 0.5, expected, cache);
    for (int l = 0; l < enc.num_layers(); ++l) CHECK(gw.w[l] == expected.w[l]);

    GradientSet gr = loss_gradients(enc, LossKind::Reconstruction, pts, 3, {.decoder = &dec});
    CHECK(gr.w.size() == expected.w.size());

    CHECK_THROWS_AS(parse_loss_kind("no_such_loss"), ConfigError);
    CHECK(parse_loss_kind("whitening") == LossKind::Whitening);
    CHECK(parse_loss_kind("reconstruction") == LossKind::Reconstruction);
    CHECK_THROWS_AS(loss_gradients(enc, LossKind::Reconstruction, pts, 3, {}), ConfigError);
    CHECK_THROWS_AS(loss_gradients(enc, static_cast<LossKind>(42), pts, 3, {.sigma = 1.0}),
                    ConfigError);
}
