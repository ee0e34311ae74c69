#include "loca/losses.hpp"

#include <algorithm>

#include "loca/gradients.hpp"

namespace loca {

Matrix empirical_covariance(const Eigen::Ref<const Matrix>& cloud) {
    const long m = cloud.rows();
    if (m < 2) throw DataError("empirical_covariance: cloud needs at least 2 points");
    Matrix centered = cloud.rowwise() - cloud.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(m - 1);
}

double whitening_loss_points(const MLPModel& encoder, const Matrix& points, int n_clouds,
                             double sigma) {
    if (sigma <= 0) throw ConfigError("whitening_loss: sigma must be positive");
    if (n_clouds < 1 || points.rows() % n_clouds != 0)
        throw ShapeError("whitening_loss: points rows must be n_clouds * cloud_size");
    const int m = static_cast<int>(points.rows()) / n_clouds;
    if (m < 2) throw DataError("whitening_loss: clouds need at least 2 points");

    ForwardCache cache;
    const Matrix& z = mlp_forward_cached(encoder, points, cache);
    const int d = static_cast<int>(z.cols());
    const double s2 = sigma * sigma;
    const Matrix id = Matrix::Identity(d, d);
    Matrix centered(m, d), scaled(d, d);
    double loss = 0;
    for (int c = 0; c < n_clouds; ++c) {
        auto block = z.middleRows(static_cast<long>(c) * m, m);
        centered = block.rowwise() - block.colwise().mean();
        scaled.noalias() = centered.transpose() * centered;
        loss += (scaled / (s2 * (m - 1)) - id).squaredNorm();
    }
    return loss / n_clouds;
}

double whitening_loss(const MLPModel& encoder, const BurstDataset& ds, double sigma) {
    if (encoder.input_dim() != ds.ambient_dim())
        throw ShapeError("whitening_loss: encoder input dim != ambient dim");
    return whitening_loss_points(encoder, ds.points, ds.n_clouds, sigma);
}

double reconstruction_loss_points(const MLPModel& encoder, const MLPModel& decoder,
                                  const Matrix& points) {
    if (encoder.input_dim() != points.cols() || decoder.output_dim() != points.cols() ||
        decoder.input_dim() != encoder.output_dim())
        throw ShapeError("reconstruction_loss: encoder/decoder do not map D -> D");
    Matrix recon = mlp_forward(decoder, mlp_forward(encoder, points));
    return (recon - points).squaredNorm() / static_cast<double>(points.rows());
}

double reconstruction_loss(const MLPModel& encoder, const MLPModel& decoder,
                           const BurstDataset& ds) {
    return reconstruction_loss_points(encoder, decoder, ds.points);
}

double estimate_sigma2(const BurstDataset& ds) {
    ds.validate();
    std::vector<double> top(ds.n_clouds);
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    for (int i = 0; i < ds.n_clouds; ++i) {
        eig.compute(empirical_covariance(ds.cloud(i)), Eigen::EigenvaluesOnly);
        top[i] = eig.eigenvalues().maxCoeff();
    }
    const size_t mid = top.size() / 2;
    std::nth_element(top.begin(), top.begin() + mid, top.end());
    double med = top[mid];
    if (top.size() % 2 == 0) {
        double lower = *std::max_element(top.begin(), top.begin() + mid);
        med = 0.5 * (med + lower);
    }
    if (!(med > 0))
        throw DataError("estimate_sigma2: clouds are degenerate (median top eigenvalue is 0)");
    return med;
}

} // namespace loca
