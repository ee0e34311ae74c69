#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loca/common.hpp"

namespace loca::eval {

// Orthogonal map (reflections permitted) + shift + optional uniform scale,
// applied as p -> scale * R p + shift. Fit for reporting/visualization only.
struct Alignment {
    Matrix rotation;
    Vector shift;
    double scale = 1.0;
    double residual_mse = 0.0;

    Matrix apply(const Matrix& points) const;
};

struct StressReport {
    double stress = 0;             // (1/N) sum over ordered pairs of squared distance error
    double rms_distance_error = 0; // sqrt of the mean squared error over pairs used
    long n_pairs_used = 0;
    double scale_applied = 1.0;
};

// Seeded ordered-pair subsampling for large N; max_pairs = 0 evaluates every
// ordered pair (the i = j terms contribute nothing).
struct PairSampling {
    long max_pairs = 0;
    uint64_t seed = 0;
};

// Stress with embedding distances multiplied by `scale` before comparison.
// Subsampled sums are rescaled to the full-ordered-pair convention.
StressReport stress(const Matrix& embedding, const Matrix& latents, double scale = 1.0,
                    const PairSampling& sampling = {});

// Closed-form stress-minimizing global scale: sum(Dx*Dg) / sum(Dg^2).
double optimal_scale(const Matrix& embedding, const Matrix& latents,
                     const PairSampling& sampling = {});

// Least-squares orthogonal Procrustes of `embedding` onto `reference`, with
// optional uniform scale, fit on `subset` rows (all rows when null).
Alignment procrustes_calibrate(const Matrix& embedding, const Matrix& reference, bool with_scale,
                               const std::vector<int>* subset = nullptr);

enum class MapKind { Linear, F1, Stereographic };

// Monte Carlo check of the covariance-Jacobian relation: pushes samples of
// N(x0, sigma^2 I) through the map and returns
// ||C_hat / sigma^2 - J J^T||_F / ||J J^T||_F.
// `linear_map` is used by MapKind::Linear (identity when null).
double lemma1_check(MapKind kind, const Vector& x0, double sigma, long n_samples, uint64_t seed,
                    const Matrix* linear_map = nullptr);

// CSV of (latent_dist, embedded_dist) over a seeded pair subsample.
void export_distance_scatter(const Matrix& embedding, const Matrix& latents, double scale,
                             long n_pairs, uint64_t seed, const std::string& path);

} // namespace loca::eval
