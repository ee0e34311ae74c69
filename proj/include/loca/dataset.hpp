#pragma once

#include <optional>
#include <string>

#include "loca/common.hpp"

namespace loca {

// Burst-sampled observations: N anchors, each with an M-point cloud of
// perturbed realizations. Clouds are stored flattened cloud-major, cloud i
// occupying rows [i*M, (i+1)*M) of `points`. `sigma` is the burst scale in
// latent units when known; `latents` carries ground truth for synthetic data.
struct BurstDataset {
    Matrix anchors;  // N x D
    Matrix points;   // (N*M) x D
    int n_clouds = 0;
    int cloud_size = 0;
    std::optional<double> sigma;
    std::optional<Matrix> latents; // N x d

    int ambient_dim() const { return static_cast<int>(anchors.cols()); }
    int latent_dim() const { return latents ? static_cast<int>(latents->cols()) : 0; }

    Eigen::Block<const Matrix> cloud(int i) const {
        return points.middleRows(static_cast<long>(i) * cloud_size, cloud_size);
    }

    void validate() const;
};

// Columnar binary format: magic "LOCABDS\1", counts, then row-major arrays
// (anchors, clouds, optional latents).
void save_dataset(const BurstDataset& ds, const std::string& path);
BurstDataset load_dataset(const std::string& path);

} // namespace loca
