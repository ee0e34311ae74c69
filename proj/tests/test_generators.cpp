#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "loca/generators.hpp"
#include "loca/losses.hpp"
#include "test_support.hpp"

using namespace loca;
using namespace loca::gen;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("f1 transform values and closed-form inverse") {
    CHECK(f1_transform(Eigen::Vector2d(0, 0)) == Eigen::Vector2d(0, 0));
    CHECK(f1_transform(Eigen::Vector2d(1, 1)) == Eigen::Vector2d(2, 0));
    Eigen::Vector2d y = f1_transform(Eigen::Vector2d(0.5, 0.2));
    CHECK(y(0) == doctest::Approx(0.508).epsilon(1e-14));
    CHECK(y(1) == doctest::Approx(-0.492).epsilon(1e-14));

    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        Eigen::Vector2d x(rng.uniform(-2, 2), rng.uniform(-2, 2));
        CHECK((f1_inverse(f1_transform(x)) - x).norm() < 1e-12);
    }
}

TEST_CASE("plane bursts reproduce the documented sampling statistics") {
    auto ds = sample_plane_bursts(Region2D::unit_square(), 2000, 200, 0.01, 1);
    REQUIRE(ds.n_clouds == 2000);
    REQUIRE(ds.cloud_size == 200);
    REQUIRE(ds.latents);
    CHECK(ds.latents->minCoeff() >= 0.0);
    CHECK(ds.latents->maxCoeff() <= 1.0);
    CHECK(*ds.sigma == 0.01);

    // pull every observation back through the analytic inverse; per-cloud
    // latent std per axis should average sigma
    double std_sum = 0;
    double max_residual = 0;
    for (int c = 0; c < ds.n_clouds; ++c) {
        Matrix cloud = ds.cloud(c);
        Matrix latent_cloud(cloud.rows(), 2);
        for (long r = 0; r < cloud.rows(); ++r) {
            Eigen::Vector2d lx = f1_inverse(cloud.row(r).transpose());
            latent_cloud.row(r) = lx.transpose();
            max_residual =
                std::max(max_residual, (f1_transform(lx).transpose() - cloud.row(r)).norm());
        }
        Matrix cov = empirical_covariance(latent_cloud);
        std_sum += 0.5 * (std::sqrt(cov(0, 0)) + std::sqrt(cov(1, 1)));
    }
    const double mean_std = std_sum / ds.n_clouds;
    CHECK(mean_std > 0.008);
    CHECK(mean_std < 0.012);
    CHECK(max_residual < 1e-10); // latent fidelity of the analytic pullback
}

TEST_CASE("plane bursts collapse to anchors as sigma -> 0") {
    auto ds = sample_plane_bursts(Region2D::unit_square(), 50, 10, 1e-12, 3);
    double max_dist = 0;
    for (int c = 0; c < ds.n_clouds; ++c) {
        Matrix cloud = ds.cloud(c);
        for (long r = 0; r < cloud.rows(); ++r)
            max_dist = std::max(max_dist, (cloud.row(r) - ds.anchors.row(c)).norm());
    }
    CHECK(max_dist < 1e-9);
}

TEST_CASE("frame region sampling leaves the hole empty") {
    auto region = Region2D::frame({0, 0}, {1, 1}, {0.1, 0.1}, {0.9, 0.9});
    auto ds = sample_plane_bursts(region, 500, 2, 0.01, 4);
    for (int i = 0; i < ds.n_clouds; ++i) {
        const double x = (*ds.latents)(i, 0), y = (*ds.latents)(i, 1);
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
        const bool in_hole = x > 0.1 && x < 0.9 && y > 0.1 && y < 0.9;
        CHECK(!in_hole);
    }
}

TEST_CASE("hopeless rejection sampling raises a region error") {
    auto region = Region2D::frame({0, 0}, {1, 1}, {1e-9, 1e-9}, {1 - 1e-9, 1 - 1e-9});
    CHECK_THROWS_AS(sample_plane_bursts(region, 1, 2, 0.01, 5), DataError);
}

TEST_CASE("region constructors validate bounds") {
    CHECK_THROWS_AS(Region2D::rectangle({1, 0}, {0, 1}), ConfigError);
    CHECK_THROWS_AS(Region2D::frame({0, 0}, {1, 1}, {0.5, 0.5}, {0.4, 0.9}), ConfigError);
    CHECK_THROWS_AS(Region2D::frame({0, 0}, {1, 1}, {-0.1, 0.1}, {0.9, 0.9}), ConfigError);
}

TEST_CASE("generators are bit-deterministic for a fixed seed") {
    auto a = sample_plane_bursts(Region2D::unit_square(), 20, 10, 0.01, 9);
    auto b = sample_plane_bursts(Region2D::unit_square(), 20, 10, 0.01, 9);
    CHECK(a.points == b.points);
    CHECK(a.anchors == b.anchors);
    auto c = sample_plane_bursts(Region2D::unit_square(), 20, 10, 0.01, 10);
    CHECK(a.points != c.points);

    auto s1 = sphere_bursts({kPi / 3, 5 * kPi / 6}, 100, 8, 0.01, 9);
    auto s2 = sphere_bursts({kPi / 3, 5 * kPi / 6}, 100, 8, 0.01, 9);
    CHECK(s1.points == s2.points);

    auto plan = default_floor_plan();
    auto w1 = wifi_simulate(plan, 15, 6, 0.5, 600, 9);
    auto w2 = wifi_simulate(plan, 15, 6, 0.5, 600, 9);
    CHECK(w1.points == w2.points);
}

TEST_CASE("frame interpolation pairs") {
    SUBCASE("equispaced interior points between opposed midpoints") {
        auto fi = frame_interpolation_pairs(4, 3);
        REQUIRE(fi.boundary_latent.rows() == 4);
        REQUIRE(fi.segments.size() == 2);
        const auto& horizontal = fi.segments[0];
        CHECK(fi.boundary_latent.row(horizontal.a) == Eigen::RowVector2d(0.1, 0.5));
        CHECK(fi.boundary_latent.row(horizontal.b) == Eigen::RowVector2d(0.9, 0.5));
        REQUIRE(horizontal.latent.rows() == 3);
        CHECK(horizontal.latent(0, 0) == doctest::Approx(0.3).epsilon(1e-14));
        CHECK(horizontal.latent(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(horizontal.latent(2, 0) == doctest::Approx(0.7).epsilon(1e-14));
        for (long r = 0; r < 3; ++r) CHECK(horizontal.latent(r, 1) == 0.5);
    }
    SUBCASE("400 boundary points means 100 per side, all interpolants inside the hole") {
        auto fi = frame_interpolation_pairs(400, 5);
        CHECK(fi.boundary_latent.rows() == 400);
        CHECK(fi.segments.size() == 200);
        int per_side_left = 0;
        for (long r = 0; r < 400; ++r)
            if (fi.boundary_latent(r, 0) == 0.1) ++per_side_left;
        CHECK(per_side_left == 100);
        for (const auto& seg : fi.segments)
            for (long r = 0; r < seg.latent.rows(); ++r) {
                CHECK(seg.latent(r, 0) > 0.1);
                CHECK(seg.latent(r, 0) < 0.9);
                CHECK(seg.latent(r, 1) > 0.1);
                CHECK(seg.latent(r, 1) < 0.9);
            }
    }
    SUBCASE("boundary count must be a positive multiple of 4") {
        CHECK_THROWS_AS(frame_interpolation_pairs(10, 3), ConfigError);
    }
}

TEST_CASE("fibonacci sphere lattice") {
    SUBCASE("every point is unit norm") {
        Matrix pts = fibonacci_sphere(800);
        for (long i = 0; i < pts.rows(); ++i)
            CHECK(std::abs(pts.row(i).norm() - 1.0) < 1e-12);
    }
    SUBCASE("n = 1 gives a single unit point at the equator (z = 0 convention)") {
        Matrix pts = fibonacci_sphere(1);
        REQUIRE(pts.rows() == 1);
        CHECK(pts(0, 2) == 0.0);
        CHECK(std::abs(pts.row(0).norm() - 1.0) < 1e-12);
    }
    SUBCASE("alpha-band counts under the documented z = 1 - 2(i+0.5)/n convention") {
        // the training band of the stereographic experiment keeps 546 of 800
        // lattice points (appendix total; its 90/10 split is then 491/55) and
        // the unseen lower cap keeps 54
        Matrix pts = fibonacci_sphere(800);
        int train = 0, cap = 0;
        AlphaRange train_range{kPi / 3, 5 * kPi / 6, true, true};
        AlphaRange cap_range{5 * kPi / 6, kPi, false, true};
        for (long i = 0; i < pts.rows(); ++i) {
            const double alpha = std::acos(std::clamp(pts(i, 2), -1.0, 1.0));
            if (train_range.contains(alpha)) ++train;
            if (cap_range.contains(alpha)) ++cap;
        }
        CHECK(train == 546);
        CHECK(cap == 54);
    }
}

TEST_CASE("stereographic projection") {
    CHECK(stereographic_project(Eigen::Vector3d(0, 0, -1)) == Eigen::Vector2d(0, 0));
    CHECK(stereographic_project(Eigen::Vector3d(1, 0, 0)) == Eigen::Vector2d(1, 0));
    CHECK(stereographic_project(Eigen::Vector3d(0, 1, 0)) == Eigen::Vector2d(0, 1));
    CHECK_THROWS_AS(stereographic_project(Eigen::Vector3d(0, 0, 1)), DataError);
    CHECK_THROWS_AS(stereographic_project(Eigen::Vector3d(0, 0, 1 - 1e-10)), DataError);
}

namespace {

// inverse of the projection: the unit-sphere point mapping to y
Eigen::Vector3d stereographic_unproject(const Eigen::Vector2d& y) {
    const double s = y.squaredNorm();
    return Eigen::Vector3d(2 * y(0), 2 * y(1), s - 1) / (s + 1);
}

} // namespace

TEST_CASE("sphere bursts: anchors, tangent clouds, geodesic concentration") {
    const double sigma = 0.01;
    auto ds = sphere_bursts({kPi / 3, 5 * kPi / 6, true, true}, 800, 400, sigma, 6);
    REQUIRE(ds.n_clouds == 546);
    REQUIRE(ds.cloud_size == 400);
    REQUIRE(ds.latents);
    CHECK(ds.ambient_dim() == 2);

    for (int i = 0; i < ds.n_clouds; ++i)
        CHECK(std::abs(ds.latents->row(i).norm() - 1.0) < 1e-9);

    double max_geodesic = 0;
    int checked = 0;
    for (int i = 0; i < ds.n_clouds; i += 25) {
        const Eigen::Vector3d anchor = ds.latents->row(i).transpose();
        Matrix cloud = ds.cloud(i);
        Matrix cloud3(cloud.rows(), 3);
        for (long r = 0; r < cloud.rows(); ++r) {
            const Eigen::Vector3d p = stereographic_unproject(cloud.row(r).transpose());
            CHECK(std::abs(p.norm() - 1.0) < 1e-9); // cloud latents live on the sphere
            cloud3.row(r) = p.transpose();
            max_geodesic =
                std::max(max_geodesic, std::acos(std::clamp(p.dot(anchor), -1.0, 1.0)));
        }
        // tangent-plane covariance: two directions at sigma^2, none normal
        Matrix cov = empirical_covariance(cloud3);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        const Vector lam = eig.eigenvalues();
        CHECK(lam(2) == doctest::Approx(sigma * sigma).epsilon(0.2));
        CHECK(lam(1) == doctest::Approx(sigma * sigma).epsilon(0.2));
        CHECK(lam(0) < 0.05 * sigma * sigma);
        ++checked;
    }
    CHECK(checked >= 20);
    CHECK(max_geodesic < 6 * sigma);
}

TEST_CASE("wifi simulation") {
    auto plan = default_floor_plan();
    REQUIRE(plan.transmitters.rows() == 17);
    plan.validate();

    SUBCASE("default experiment dataset has shape (4000, 6, 17)") {
        auto ds = wifi_simulate(plan, 4000, 6, 0.5, 600, 7);
        CHECK(ds.n_clouds == 4000);
        CHECK(ds.cloud_size == 6);
        CHECK(ds.ambient_dim() == 17);
        CHECK(ds.latents->cols() == 2);
        CHECK(!ds.sigma);
    }
    SUBCASE("amplitudes follow the RBF formula in (0, 1], monotone in distance") {
        auto ds = wifi_simulate(plan, 40, 6, 0.5, 600, 8);
        CHECK(ds.points.minCoeff() > 0.0);
        CHECK(ds.points.maxCoeff() <= 1.0);
        for (int i = 0; i < ds.n_clouds; ++i) {
            const Eigen::RowVector2d pos = ds.latents->row(i);
            for (long l = 0; l < plan.transmitters.rows(); ++l) {
                const double d2 = (pos - plan.transmitters.row(l)).squaredNorm();
                const double expected = std::exp(-d2 / (600.0 * 600.0));
                CHECK(ds.anchors(i, l) == doctest::Approx(expected).epsilon(1e-12));
            }
            // monotone: nearer transmitter, not-smaller amplitude
            for (long a = 0; a < plan.transmitters.rows(); ++a)
                for (long b = 0; b < plan.transmitters.rows(); ++b) {
                    const double da = (pos - plan.transmitters.row(a)).norm();
                    const double db = (pos - plan.transmitters.row(b)).norm();
                    if (da < db) CHECK(ds.anchors(i, a) >= ds.anchors(i, b));
                }
        }
    }
    SUBCASE("unit-amplitude at the transmitter, 1/e at distance eps") {
        // direct consequences of the formula, pinned numerically
        const double eps = 600;
        CHECK(std::exp(-0.0 / (eps * eps)) == 1.0);
        CHECK(std::exp(-(eps * eps) / (eps * eps)) == doctest::Approx(std::exp(-1.0)));
        auto ds = wifi_simulate(plan, 5, 6, 0.5, eps, 9);
        for (int i = 0; i < 5; ++i) {
            const Eigen::RowVector2d pos = ds.latents->row(i);
            CHECK(plan.in_free_space(pos(0), pos(1)));
        }
    }
    SUBCASE("floor plan validation") {
        gen::FloorPlan bad = plan;
        bad.transmitters.resize(0, 2);
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        gen::FloorPlan outside = plan;
        outside.transmitters(0, 0) = -5;
        CHECK_THROWS_AS(outside.validate(), ConfigError);
    }
    SUBCASE("floor plan file round-trip") {
        save_floor_plan(plan, "test_plan.txt");
        auto r = load_floor_plan("test_plan.txt");
        CHECK(r.width == plan.width);
        CHECK(r.space.size() == plan.space.size());
        CHECK(r.holes.size() == plan.holes.size());
        CHECK((r.transmitters - plan.transmitters).cwiseAbs().maxCoeff() < 1e-9);
        std::remove("test_plan.txt");
    }
}
