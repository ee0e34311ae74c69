#include <doctest.h>

#include <algorithm>
#include "loca/generators.hpp"
#include "loca/losses.hpp"
#include "loca/spectral.hpp"
#include "test_support.hpp"

using namespace loca;
using namespace loca::spectral;

namespace {

Matrix random_blob(int n, int d, uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Matrix m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// P = D^-1 K rebuilt from points and the embedding's bandwidth
Matrix markov_matrix(const Matrix& points, double epsilon) {
    Matrix k = pairwise_sq_dists(points);
    k.array() = (-k.array() / (2.0 * epsilon)).exp();
    Vector deg = k.rowwise().sum();
    return deg.cwiseInverse().asDiagonal() * k;
}

} // namespace

TEST_CASE("maxmin bandwidth") {
    SUBCASE("1-D points {0, 1, 3}: minima {1, 1, 4}, max 4") {
        Matrix pts(3, 1);
        pts << 0, 1, 3;
        // independent brute force
        double expected = 0;
        for (int j = 0; j < 3; ++j) {
            double mn = 1e300;
            for (int i = 0; i < 3; ++i)
                if (i != j) mn = std::min(mn, (pts(i, 0) - pts(j, 0)) * (pts(i, 0) - pts(j, 0)));
            expected = std::max(expected, mn);
        }
        CHECK(expected == 4.0);
        CHECK(maxmin_epsilon_points(pts) == 4.0);
    }
    SUBCASE("two points at distance 2") {
        Matrix pts(2, 2);
        pts << 0, 0, 2, 0;
        CHECK(maxmin_epsilon_points(pts) == 4.0);
    }
    SUBCASE("equilateral triangle of side 1") {
        Matrix pts(3, 2);
        pts << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
        CHECK(maxmin_epsilon_points(pts) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("duplicate-only dataset is degenerate") {
        Matrix pts = Matrix::Zero(3, 2);
        CHECK_THROWS_AS(maxmin_epsilon_points(pts), DataError);
    }
}

TEST_CASE("dm_embed spectral invariants") {
    Matrix pts = random_blob(80, 2, 11);
    auto se = dm_embed(pts, 2);

    REQUIRE(se.eigenvalues.size() == 3);
    REQUIRE(se.eigenvectors.cols() == 3);
    REQUIRE(se.coords.cols() == 2);

    SUBCASE("trivial eigenpair: lambda_0 = 1 with a constant eigenvector") {
        CHECK(se.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-10));
        const double mean = se.eigenvectors.col(0).mean();
        for (long i = 0; i < se.eigenvectors.rows(); ++i)
            CHECK(se.eigenvectors(i, 0) == doctest::Approx(mean).epsilon(1e-6));
    }
    SUBCASE("eigenvalues descending, magnitude at most 1") {
        for (long k = 0; k + 1 < se.eigenvalues.size(); ++k)
            CHECK(se.eigenvalues(k) >= se.eigenvalues(k + 1));
        CHECK(se.eigenvalues.cwiseAbs().maxCoeff() <= 1.0 + 1e-8);
    }
    SUBCASE("P is row-stochastic and the right-eigenvector residuals are tiny") {
        Matrix p = markov_matrix(pts, se.epsilon);
        CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
        for (long k = 0; k < se.eigenvalues.size(); ++k) {
            Vector res = p * se.eigenvectors.col(k) - se.eigenvalues(k) * se.eigenvectors.col(k);
            CHECK(res.norm() < 1e-8);
        }
    }
    SUBCASE("coords are lambda^t * psi") {
        for (int k = 1; k <= 2; ++k)
            CHECK((se.coords.col(k - 1) - se.eigenvalues(k) * se.eigenvectors.col(k)).norm() <
                  1e-14);
    }
}

TEST_CASE("dm_embed separates two well-separated pairs by the sign of psi_1") {
    // Pairs far enough apart to be distinct clusters but still coupled; with
    // fully underflowed cross-kernel entries the lambda = 1 eigenspace is
    // degenerate and psi_1 is an arbitrary basis vector of it.
    Matrix pts(4, 1);
    pts << 0.0, 1.0, 4.0, 5.0;
    auto se = dm_embed(pts, 1);
    const auto& psi1 = se.eigenvectors.col(1);
    CHECK(psi1(0) * psi1(1) > 0);
    CHECK(psi1(2) * psi1(3) > 0);
    CHECK(psi1(0) * psi1(2) < 0);

    // 4x4 eigenproblem oracle: build P explicitly, solve with the general
    // eigensolver, compare the retained eigenvalues
    Matrix k = pairwise_sq_dists(pts);
    k.array() = (-k.array() / (2.0 * se.epsilon)).exp();
    Matrix p = Vector(k.rowwise().sum()).cwiseInverse().asDiagonal() * k;
    Eigen::EigenSolver<Matrix> eig(p);
    std::vector<double> lam;
    for (int i = 0; i < 4; ++i) lam.push_back(eig.eigenvalues()(i).real());
    std::sort(lam.begin(), lam.end(), std::greater<>());
    CHECK(se.eigenvalues(0) == doctest::Approx(lam[0]).epsilon(1e-12));
    CHECK(se.eigenvalues(1) == doctest::Approx(lam[1]).epsilon(1e-12));
}

TEST_CASE("dm_embed is permutation-equivariant") {
    Matrix pts = random_blob(40, 2, 13);
    auto se = dm_embed(pts, 2);
    // reverse the point order
    Matrix rev = pts.colwise().reverse();
    auto se_rev = dm_embed(rev, 2);
    Matrix expected = se.coords.colwise().reverse();
    CHECK((se_rev.coords - expected).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("block power path matches spectral invariants on a large blob") {
    Matrix pts = random_blob(2500, 2, 14, 0.7); // above the dense-solver cutoff
    auto se = dm_embed(pts, 2);
    CHECK(se.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-9));
    Matrix p = markov_matrix(pts, se.epsilon);
    for (long k = 0; k < se.eigenvalues.size(); ++k) {
        Vector res = p * se.eigenvectors.col(k) - se.eigenvalues(k) * se.eigenvectors.col(k);
        CHECK(res.norm() < 1e-8);
    }
}

TEST_CASE("mahalanobis_sq closed forms") {
    Vector a(2), b(2);
    a << 1, 2;
    b << 1, 2;
    Matrix id = Matrix::Identity(2, 2);
    CHECK(mahalanobis_sq(a, b, id, id) == 0.0);
    b << 4, 6;
    CHECK(mahalanobis_sq(a, b, id, id) == doctest::Approx((a - b).squaredNorm()).epsilon(1e-14));
    Vector ci_diag(2), cj_diag(2);
    ci_diag << 4, 0;
    cj_diag << 0, 4;
    Matrix ci = ci_diag.asDiagonal();
    Matrix cj = cj_diag.asDiagonal();
    Vector u(2), v(2);
    u << 0, 0;
    v << 1, 1;
    CHECK(mahalanobis_sq(u, v, ci, cj) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("burst covariance pseudo-inverse") {
    SUBCASE("diag(2, 0) inverts to diag(0.5, 0)") {
        Vector cov(2);
        cov << 2.0, 0.0;
        Matrix cloud = test::exact_cov_cloud(Vector::Zero(2), cov);
        Matrix pinv = burst_cov_pinv(cloud, {});
        CHECK(pinv(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(std::abs(pinv(1, 1)) < 1e-12);
        CHECK(std::abs(pinv(0, 1)) < 1e-12);
    }
    SUBCASE("full-rank covariance with tiny tolerance matches the ordinary inverse") {
        Rng rng(15);
        Matrix cloud(40, 2);
        for (int i = 0; i < 40; ++i) {
            cloud(i, 0) = rng.normal();
            cloud(i, 1) = 0.5 * rng.normal() + 0.2 * cloud(i, 0);
        }
        Matrix cov = empirical_covariance(cloud);
        Matrix pinv = burst_cov_pinv(cloud, {.rank = 0, .rel_tol = 1e-15});
        CHECK((pinv - cov.inverse()).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("rank-2 truncation on planar clouds in 3-D") {
        Rng rng(16);
        Matrix cloud(60, 3);
        for (int i = 0; i < 60; ++i) {
            const double u = rng.normal(), v = rng.normal();
            cloud.row(i) << u, v, u + v; // rank-2 plane
        }
        Matrix pinv = burst_cov_pinv(cloud, {.rank = 2});
        Eigen::SelfAdjointEigenSolver<Matrix> eig(pinv);
        int nonzero = 0;
        for (int k = 0; k < 3; ++k)
            if (eig.eigenvalues()(k) > 1e-10) ++nonzero;
        CHECK(nonzero == 2);
    }
    SUBCASE("zero covariance is degenerate") {
        CHECK_THROWS_AS(burst_cov_pinv(Matrix::Zero(5, 2), {}), DataError);
    }
}

namespace {

BurstDataset identity_cov_dataset(int n, uint64_t seed) {
    BurstDataset ds;
    ds.n_clouds = n;
    ds.cloud_size = 4;
    ds.anchors.resize(n, 2);
    ds.points.resize(4L * n, 2);
    Rng rng(seed);
    for (int c = 0; c < n; ++c) {
        Vector center(2);
        center << 3 * rng.normal(), 3 * rng.normal();
        ds.anchors.row(c) = center.transpose();
        ds.points.middleRows(4L * c, 4) = test::exact_cov_cloud(center, Vector::Ones(2));
    }
    return ds;
}

} // namespace

TEST_CASE("adm reduces to dm when all burst covariances are the identity") {
    auto ds = identity_cov_dataset(60, 17);
    auto dm = dm_embed(ds.anchors, 2);
    auto adm = adm_embed(ds, 2, 1, {.rel_tol = 1e-12});
    CHECK(adm.epsilon == doctest::Approx(dm.epsilon).epsilon(1e-10));
    CHECK((adm.coords - dm.coords).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("the mahalanobis metric matrix is affine invariant on full-rank clouds") {
    Rng rng(18);
    const int n = 30, m = 50;
    BurstDataset ds;
    ds.n_clouds = n;
    ds.cloud_size = m;
    ds.anchors.resize(n, 2);
    ds.points.resize(static_cast<long>(n) * m, 2);
    for (int c = 0; c < n; ++c) {
        Eigen::RowVector2d center(rng.uniform(-2, 2), rng.uniform(-2, 2));
        ds.anchors.row(c) = center;
        for (int j = 0; j < m; ++j)
            ds.points.row(static_cast<long>(c) * m + j) =
                center + 0.1 * Eigen::RowVector2d(rng.normal(), rng.normal());
    }
    Matrix base = mahalanobis_sq_matrix(ds, {.rel_tol = 1e-12});

    Matrix a(2, 2);
    a << 1.3, -0.7, 0.4, 2.1; // invertible
    BurstDataset tds = ds;
    tds.anchors = ds.anchors * a.transpose();
    tds.points = ds.points * a.transpose();
    Matrix transformed = mahalanobis_sq_matrix(tds, {.rel_tol = 1e-12});

    double max_rel = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                max_rel = std::max(max_rel, std::abs(transformed(i, j) - base(i, j)) /
                                                std::max(1e-12, base(i, j)));
    CHECK(max_rel < 1e-6);
}

TEST_CASE("kernel symmetry and positivity hold along the adm path") {
    auto ds = identity_cov_dataset(25, 19);
    Matrix msq = mahalanobis_sq_matrix(ds, {});
    CHECK((msq - msq.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const double eps = maxmin_epsilon(msq);
    Matrix kernel = (-msq.array() / (2 * eps)).exp();
    CHECK(kernel.minCoeff() > 0.0);
    CHECK(kernel.maxCoeff() <= 1.0);
    CHECK((kernel - kernel.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("embedding needs enough points") {
    Matrix pts = random_blob(3, 2, 20);
    CHECK_THROWS_AS(dm_embed(pts, 2), DataError);
}
