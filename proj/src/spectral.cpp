#include "loca/spectral.hpp"

#include <cmath>

#include "loca/losses.hpp"
#include "loca/parallel.hpp"
#include "loca/rng.hpp"

namespace loca::spectral {

Matrix pairwise_sq_dists(const Matrix& points) {
    const long n = points.rows();
    Vector sq = points.rowwise().squaredNorm();
    Matrix d = sq.replicate(1, n) + sq.transpose().replicate(n, 1);
    d.noalias() -= 2.0 * points * points.transpose();
    d.diagonal().setZero();
    return d.cwiseMax(0.0);
}

double maxmin_epsilon(const Matrix& sq_dists) {
    const long n = sq_dists.rows();
    if (n < 2 || sq_dists.cols() != n) throw ShapeError("maxmin_epsilon: need a square matrix, N >= 2");
    double eps = 0;
    for (long j = 0; j < n; ++j) {
        double mn = std::numeric_limits<double>::infinity();
        for (long i = 0; i < n; ++i)
            if (i != j) mn = std::min(mn, sq_dists(i, j));
        eps = std::max(eps, mn);
    }
    if (!(eps > 0)) throw DataError("maxmin_epsilon: degenerate bandwidth (duplicate points)");
    return eps;
}

double maxmin_epsilon_points(const Matrix& points) {
    return maxmin_epsilon(pairwise_sq_dists(points));
}

namespace {

// Orthonormalize the columns of q in place (thin QR).
void orthonormalize(Matrix& q) {
    Eigen::HouseholderQR<Matrix> qr(q);
    q = qr.householderQ() * Matrix::Identity(q.rows(), q.cols());
}

// Top-k eigenpairs of a symmetric matrix: dense solve for small N, block power
// iteration with Rayleigh-Ritz extraction otherwise. Eigenvalues descending.
void top_eigenpairs(const Matrix& s, int k, Vector& values, Matrix& vectors) {
    const long n = s.rows();
    if (k > n) throw ShapeError("top_eigenpairs: k > N");
    if (n <= 2048) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
        if (eig.info() != Eigen::Success) throw NumericError("eigensolver failed");
        values.resize(k);
        vectors.resize(n, k);
        for (int i = 0; i < k; ++i) { // Eigen sorts ascending
            values(i) = eig.eigenvalues()(n - 1 - i);
            vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
        }
        return;
    }

    const int block = std::min<long>(n, k + 4);
    Matrix q(n, block);
    Rng rng(0x5EED ^ static_cast<uint64_t>(n));
    for (long i = 0; i < n; ++i)
        for (int j = 0; j < block; ++j) q(i, j) = rng.normal();
    orthonormalize(q);

    Matrix z(n, block), small(block, block);
    Vector prev = Vector::Zero(k);
    const int max_iters = 3000;
    for (int it = 1; it <= max_iters; ++it) {
        z.noalias() = s * q;
        if (it % 8 == 0 || it == max_iters) {
            small.noalias() = q.transpose() * z;
            small = 0.5 * (small + small.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Matrix> ritz(small);
            Vector theta(k);
            for (int i = 0; i < k; ++i) theta(i) = ritz.eigenvalues()(block - 1 - i);
            if ((theta - prev).cwiseAbs().maxCoeff() < 1e-13) {
                Matrix rot(block, k);
                for (int i = 0; i < k; ++i) rot.col(i) = ritz.eigenvectors().col(block - 1 - i);
                vectors.noalias() = q * rot;
                values = theta;
                // residual check per retained pair
                Matrix res = s * vectors - vectors * values.asDiagonal();
                if (res.colwise().norm().maxCoeff() < 1e-9) return;
            }
            prev = theta;
        }
        q = z;
        orthonormalize(q);
    }
    throw NumericError("block power iteration did not converge");
}

} // namespace

SpectralEmbedding embed_from_sq_dists(Matrix sq_dists, int d, int t) {
    const long n = sq_dists.rows();
    if (d < 1) throw ConfigError("embedding dimension must be >= 1");
    if (n < d + 2) throw DataError("spectral embedding needs N >= d + 2");

    SpectralEmbedding out;
    out.t = t;
    out.epsilon = maxmin_epsilon(sq_dists);

    // kernel, in place (column blocks are independent)
    Matrix& kernel = sq_dists;
    const double eps2 = 2.0 * out.epsilon;
    parallel_for(0, n, [&](long j) {
        kernel.col(j).array() = (-kernel.col(j).array() / eps2).exp();
    });

    Vector degree = kernel.rowwise().sum();
    Vector dinv_sqrt = degree.array().rsqrt();
    // symmetric conjugate D^-1/2 K D^-1/2, in place
    kernel.array() = kernel.array() * (dinv_sqrt * dinv_sqrt.transpose()).array();

    Vector values;
    Matrix phi;
    top_eigenpairs(kernel, d + 1, values, phi);

    // right eigenvectors of P = D^-1 K
    Matrix psi = dinv_sqrt.asDiagonal() * phi;
    // sign convention: largest-magnitude entry positive
    for (int c = 0; c < psi.cols(); ++c) {
        long idx = 0;
        psi.col(c).cwiseAbs().maxCoeff(&idx);
        if (psi(idx, c) < 0) psi.col(c) = -psi.col(c);
    }

    out.eigenvalues = values;
    out.eigenvectors = psi;
    out.coords.resize(n, d);
    for (int k = 1; k <= d; ++k)
        out.coords.col(k - 1) = std::pow(values(k), t) * psi.col(k);
    return out;
}

SpectralEmbedding dm_embed(const Matrix& points, int d, int t) {
    return embed_from_sq_dists(pairwise_sq_dists(points), d, t);
}

double mahalanobis_sq(const Eigen::Ref<const Vector>& y_i, const Eigen::Ref<const Vector>& y_j,
                      const Matrix& ci_pinv, const Matrix& cj_pinv) {
    Vector diff = y_i - y_j;
    return 0.5 * (diff.dot(ci_pinv * diff) + diff.dot(cj_pinv * diff));
}

Matrix burst_cov_pinv(const Eigen::Ref<const Matrix>& cloud, const PinvOptions& opts) {
    Matrix cov = empirical_covariance(cloud);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("burst_cov_pinv: eigensolver failed");
    const Vector& lam = eig.eigenvalues(); // ascending
    const long dim = cov.rows();
    const double lmax = lam(dim - 1);
    if (!(lmax > 0)) throw DataError("burst_cov_pinv: zero covariance");

    Vector inv = Vector::Zero(dim);
    if (opts.rank > 0) {
        const long keep = std::min<long>(opts.rank, dim);
        for (long i = dim - keep; i < dim; ++i)
            if (lam(i) > lmax * 1e-14) inv(i) = 1.0 / lam(i);
    } else {
        for (long i = 0; i < dim; ++i)
            if (lam(i) > opts.rel_tol * lmax) inv(i) = 1.0 / lam(i);
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix mahalanobis_sq_matrix(const BurstDataset& ds, const PinvOptions& opts) {
    ds.validate();
    const long n = ds.n_clouds;
    std::vector<Matrix> pinvs(n);
    for (long i = 0; i < n; ++i) pinvs[i] = burst_cov_pinv(ds.cloud(static_cast<int>(i)), opts);

    // q(i, j) = (y_j - y_i)^T Ci^+ (y_j - y_i), assembled one row at a time
    Matrix q(n, n);
    parallel_for(0, n, [&](long i) {
        static thread_local Matrix diffs, td;
        diffs = ds.anchors.rowwise() - ds.anchors.row(i);
        td.noalias() = diffs * pinvs[i];
        q.row(i) = (td.array() * diffs.array()).rowwise().sum().transpose();
    });
    Matrix m = 0.5 * (q + q.transpose());
    m.diagonal().setZero();
    return m.cwiseMax(0.0);
}

SpectralEmbedding adm_embed(const BurstDataset& ds, int d, int t, const PinvOptions& opts) {
    return embed_from_sq_dists(mahalanobis_sq_matrix(ds, opts), d, t);
}

} // namespace loca::spectral
