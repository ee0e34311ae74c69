#pragma once

#include "loca/dataset.hpp"
#include "loca/mlp.hpp"

namespace loca {

// Sample covariance of an M x k cloud about its mean, denominator M-1.
Matrix empirical_covariance(const Eigen::Ref<const Matrix>& cloud);

// Mean over clouds of || C(rho(Y_i)) / sigma^2 - I ||_F^2. `points` holds
// n_clouds equal blocks of rows.
double whitening_loss_points(const MLPModel& encoder, const Matrix& points, int n_clouds,
                             double sigma);
double whitening_loss(const MLPModel& encoder, const BurstDataset& ds, double sigma);

// Mean squared reconstruction error over every cloud point.
double reconstruction_loss_points(const MLPModel& encoder, const MLPModel& decoder,
                                  const Matrix& points);
double reconstruction_loss(const MLPModel& encoder, const MLPModel& decoder,
                           const BurstDataset& ds);

// Burst-scale estimate when sigma is unknown: median over clouds of the top
// eigenvalue of the ambient cloud covariance. Returns sigma^2.
double estimate_sigma2(const BurstDataset& ds);

} // namespace loca
