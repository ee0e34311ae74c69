#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "loca/adam.hpp"
#include "loca/mlp.hpp"
#include "test_support.hpp"

using namespace loca;

TEST_CASE("mlp_init produces the documented shapes with zero biases") {
    MLPModel m = mlp_init({2, 50, 50, 2, 2}, Activation::Tanh, 2, 7);
    REQUIRE(m.num_layers() == 4);
    CHECK(m.weights[0].rows() == 50);
    CHECK(m.weights[0].cols() == 2);
    CHECK(m.weights[1].rows() == 50);
    CHECK(m.weights[1].cols() == 50);
    CHECK(m.weights[2].rows() == 2);
    CHECK(m.weights[2].cols() == 50);
    CHECK(m.weights[3].rows() == 2);
    CHECK(m.weights[3].cols() == 2);
    for (const auto& b : m.biases) CHECK(b.isZero(0.0));

    // Glorot-uniform bound per layer
    for (int l = 0; l < m.num_layers(); ++l) {
        const double limit = std::sqrt(6.0 / (m.layer_sizes[l] + m.layer_sizes[l + 1]));
        CHECK(m.weights[l].cwiseAbs().maxCoeff() <= limit);
    }
}

TEST_CASE("mlp_init is bit-deterministic per seed") {
    MLPModel a = mlp_init({2, 50, 50, 2, 2}, Activation::Tanh, 2, 7);
    MLPModel b = mlp_init({2, 50, 50, 2, 2}, Activation::Tanh, 2, 7);
    for (int l = 0; l < a.num_layers(); ++l) CHECK(a.weights[l] == b.weights[l]);
    MLPModel c = mlp_init({2, 50, 50, 2, 2}, Activation::Tanh, 2, 8);
    CHECK(a.weights[0] != c.weights[0]);
}

TEST_CASE("mlp_init single linear map and error paths") {
    MLPModel m = mlp_init({3, 3}, Activation::Tanh, 1, 1);
    CHECK(m.num_layers() == 1);
    CHECK(m.biases[0].isZero(0.0));

    CHECK_THROWS_AS(mlp_init({}, Activation::Tanh, 0, 1), ConfigError);
    CHECK_THROWS_AS(mlp_init({5}, Activation::Tanh, 0, 1), ConfigError);
    CHECK_THROWS_AS(mlp_init({3, 0, 2}, Activation::Tanh, 1, 1), ConfigError);
    CHECK_THROWS_AS(mlp_init({3, 3}, Activation::Tanh, 5, 1), ConfigError);
}

TEST_CASE("mlp_forward basics") {
    SUBCASE("zero model maps anything to zero") {
        MLPModel m = mlp_init({2, 4, 3}, Activation::Tanh, 1, 3);
        for (auto& w : m.weights) w.setZero();
        Matrix x(5, 2);
        x.setRandom();
        CHECK(mlp_forward(m, x).isZero(0.0));
    }
    SUBCASE("single linear layer with identity weights shifts by the bias") {
        MLPModel m = test::identity_model(2);
        m.biases[0] << 1, 1;
        Matrix x = Matrix::Zero(1, 2);
        Matrix y = mlp_forward(m, x);
        CHECK(y(0, 0) == 1.0);
        CHECK(y(0, 1) == 1.0);
    }
    SUBCASE("tanh saturates to 1 for huge inputs") {
        MLPModel m = mlp_init({1, 1}, Activation::Tanh, 0, 1);
        m.weights[0](0, 0) = 1.0;
        Matrix x(1, 1);
        x << 1e6;
        CHECK(mlp_forward(m, x)(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("dimension mismatch throws") {
        MLPModel m = mlp_init({2, 3}, Activation::Tanh, 1, 1);
        CHECK_THROWS_AS(mlp_forward(m, Matrix::Zero(4, 3)), ShapeError);
    }
    SUBCASE("empty batch gives empty output") {
        MLPModel m = mlp_init({2, 3, 4}, Activation::Tanh, 1, 1);
        Matrix y = mlp_forward(m, Matrix(0, 2));
        CHECK(y.rows() == 0);
        CHECK(y.cols() == 4);
    }
    SUBCASE("forward is bit-deterministic") {
        MLPModel m = mlp_init({3, 9, 4, 2}, Activation::LeakyRelu, 2, 5);
        Matrix x(7, 3);
        x.setRandom();
        CHECK(mlp_forward(m, x) == mlp_forward(m, x));
    }
}

TEST_CASE("linear_tail == layer count makes the network exactly affine") {
    MLPModel m = mlp_init({2, 5, 2}, Activation::Tanh, 2, 11);
    Rng rng(3);
    Matrix a(3, 2), b(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            a(i, j) = rng.normal();
            b(i, j) = rng.normal();
        }
    Matrix f0 = mlp_forward(m, Matrix::Zero(3, 2));
    Matrix superposed = mlp_forward(m, a) + mlp_forward(m, b) - f0;
    CHECK((mlp_forward(m, a + b) - superposed).cwiseAbs().maxCoeff() < 1e-12);

    // composing two affine networks stays affine
    MLPModel m2 = mlp_init({2, 4, 2}, Activation::Tanh, 2, 12);
    auto compose = [&](const Matrix& x) { return mlp_forward(m2, mlp_forward(m, x)); };
    Matrix g0 = compose(Matrix::Zero(3, 2));
    CHECK((compose(a + b) - (compose(a) + compose(b) - g0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adam first step moves by lr * g / (|g| + eps)") {
    MLPModel m = mlp_init({1, 1}, Activation::Tanh, 1, 1);
    const double w0 = m.weights[0](0, 0);
    AdamState st = AdamState::for_model(m);
    GradientSet g = GradientSet::zeros_like(m);
    g.w[0](0, 0) = 0.3;
    adam_step(st, m, g, 1e-3);
    const double delta = m.weights[0](0, 0) - w0;
    CHECK(delta == doctest::Approx(-1e-3 * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
    CHECK(delta == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(st.step_count == 1);
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    MLPModel m = mlp_init({2, 3, 2}, Activation::Tanh, 1, 2);
    MLPModel before = m;
    AdamState st = AdamState::for_model(m);
    GradientSet g = GradientSet::zeros_like(m);
    adam_step(st, m, g, 1e-3);
    for (int l = 0; l < m.num_layers(); ++l) CHECK(m.weights[l] == before.weights[l]);
    CHECK(st.step_count == 1);
}

TEST_CASE("adam with constant gradient matches the scalar recurrence") {
    MLPModel m = mlp_init({1, 1}, Activation::Tanh, 1, 1);
    AdamState st = AdamState::for_model(m);
    GradientSet g = GradientSet::zeros_like(m);
    const double grad = 0.7, lr = 2e-3;
    g.w[0](0, 0) = grad;

    // hand-rolled recurrence
    double w = m.weights[0](0, 0), mom = 0, vel = 0;
    std::vector<double> expected;
    for (int t = 1; t <= 3; ++t) {
        mom = 0.9 * mom + 0.1 * grad;
        vel = 0.999 * vel + 0.001 * grad * grad;
        const double mh = mom / (1 - std::pow(0.9, t));
        const double vh = vel / (1 - std::pow(0.999, t));
        w -= lr * mh / (std::sqrt(vh) + 1e-8);
        expected.push_back(w);
    }

    double prev = m.weights[0](0, 0);
    for (int t = 0; t < 3; ++t) {
        adam_step(st, m, g, lr);
        CHECK(m.weights[0](0, 0) == doctest::Approx(expected[t]).epsilon(1e-14));
        CHECK(m.weights[0](0, 0) < prev); // monotone motion against a positive gradient
        prev = m.weights[0](0, 0);
    }
}

TEST_CASE("adam rejects non-finite gradients naming the location") {
    MLPModel m = mlp_init({2, 3}, Activation::Tanh, 1, 2);
    AdamState st = AdamState::for_model(m);
    GradientSet g = GradientSet::zeros_like(m);
    g.w[0](1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(adam_step(st, m, g, 1e-3),
                         doctest::Contains("layer 0"), NumericError);
}

TEST_CASE("model serialization round-trips bit-exactly") {
    MLPModel m = mlp_init({3, 17, 5, 2, 2}, Activation::LeakyRelu, 2, 99);
    const std::string path = "test_model.mlp";
    save_mlp(m, path);
    MLPModel r = load_mlp(path);
    CHECK(r.layer_sizes == m.layer_sizes);
    CHECK(r.activation == m.activation);
    CHECK(r.linear_tail == m.linear_tail);
    for (int l = 0; l < m.num_layers(); ++l) {
        CHECK(r.weights[l] == m.weights[l]);
        CHECK(r.biases[l] == m.biases[l]);
    }
    std::remove(path.c_str());

    // wrong magic
    std::ofstream bad("test_model.mlp");
    bad << "not a model";
    bad.close();
    CHECK_THROWS_AS(load_mlp("test_model.mlp"), DataError);
    std::remove("test_model.mlp");
    CHECK_THROWS_AS(load_mlp("no_such_file.mlp"), DataError);
}
