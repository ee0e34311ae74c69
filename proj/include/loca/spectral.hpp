#pragma once

#include "loca/dataset.hpp"

namespace loca::spectral {

// Eigendecomposition of the row-normalized kernel Markov matrix P = D^-1 K.
// `eigenvalues` are the top d+1 in descending order (the trivial lambda_0 = 1
// first); `eigenvectors` holds the corresponding right eigenvectors of P as
// columns; coords(i, k-1) = lambda_k^t psi_k(i) for k = 1..d.
struct SpectralEmbedding {
    Vector eigenvalues;  // d+1, descending
    Matrix eigenvectors; // N x (d+1), includes the trivial vector
    Matrix coords;       // N x d
    int t = 1;
    double epsilon = 0;
};

Matrix pairwise_sq_dists(const Matrix& points);

// Max-min bandwidth: the largest nearest-neighbor squared distance.
double maxmin_epsilon(const Matrix& sq_dists);
double maxmin_epsilon_points(const Matrix& points);

// Shared normalization/eigendecomposition path working on any squared-distance
// matrix (consumed in place). Eigensolve is dense for small N and a Ritz-
// projected block power iteration on the symmetric conjugate otherwise.
SpectralEmbedding embed_from_sq_dists(Matrix sq_dists, int d, int t);

// Diffusion Maps on raw points with the Euclidean RBF kernel of Appendix B.
SpectralEmbedding dm_embed(const Matrix& points, int d, int t = 1);

// (1/2) (y_i - y_j)^T [Ci_pinv + Cj_pinv] (y_i - y_j)
double mahalanobis_sq(const Eigen::Ref<const Vector>& y_i, const Eigen::Ref<const Vector>& y_j,
                      const Matrix& ci_pinv, const Matrix& cj_pinv);

// Truncated pseudo-inverse of a burst covariance: keep exactly `rank` leading
// eigenvalues when the intrinsic dimension is known, otherwise everything
// above rel_tol * lambda_max.
struct PinvOptions {
    int rank = 0; // 0 = use rel_tol
    double rel_tol = 1e-3;
};
Matrix burst_cov_pinv(const Eigen::Ref<const Matrix>& cloud, const PinvOptions& opts = {});

Matrix mahalanobis_sq_matrix(const BurstDataset& ds, const PinvOptions& opts = {});

// Anisotropic Diffusion Maps: identical path to dm_embed but with the
// burst-covariance Mahalanobis metric, bandwidth included.
SpectralEmbedding adm_embed(const BurstDataset& ds, int d, int t = 1,
                            const PinvOptions& opts = {});

} // namespace loca::spectral
