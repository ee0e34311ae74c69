#include "loca/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "loca/generators.hpp"
#include "loca/rng.hpp"

namespace loca::eval {

Matrix Alignment::apply(const Matrix& points) const {
    if (points.cols() != rotation.cols()) throw ShapeError("Alignment::apply: dimension mismatch");
    Matrix out = scale * (points * rotation.transpose());
    out.rowwise() += shift.transpose();
    return out;
}

namespace {

void check_pair_inputs(const Matrix& embedding, const Matrix& latents) {
    if (embedding.rows() != latents.rows())
        throw ShapeError("embedding/latents row counts differ");
    if (embedding.rows() < 2) throw DataError("need at least 2 points");
}

} // namespace

StressReport stress(const Matrix& embedding, const Matrix& latents, double scale,
                    const PairSampling& sampling) {
    check_pair_inputs(embedding, latents);
    if (scale <= 0) throw ConfigError("stress: scale must be positive");
    const long n = embedding.rows();

    StressReport rep;
    rep.scale_applied = scale;
    double sum = 0;
    if (sampling.max_pairs > 0 && n * n > sampling.max_pairs) {
        Rng rng(sampling.seed);
        for (long p = 0; p < sampling.max_pairs; ++p) {
            const long i = static_cast<long>(rng.below(n));
            const long j = static_cast<long>(rng.below(n));
            const double dx = (latents.row(i) - latents.row(j)).norm();
            const double dg = scale * (embedding.row(i) - embedding.row(j)).norm();
            sum += (dx - dg) * (dx - dg);
        }
        rep.n_pairs_used = sampling.max_pairs;
        const double mean = sum / sampling.max_pairs;
        rep.stress = n * mean; // rescaled to the full ordered-pair convention
        rep.rms_distance_error = std::sqrt(mean);
    } else {
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j) {
                const double dx = (latents.row(i) - latents.row(j)).norm();
                const double dg = scale * (embedding.row(i) - embedding.row(j)).norm();
                sum += 2.0 * (dx - dg) * (dx - dg); // ordered pairs
            }
        rep.n_pairs_used = n * n;
        rep.stress = sum / n;
        rep.rms_distance_error = std::sqrt(sum / (static_cast<double>(n) * n));
    }
    return rep;
}

double optimal_scale(const Matrix& embedding, const Matrix& latents,
                     const PairSampling& sampling) {
    check_pair_inputs(embedding, latents);
    const long n = embedding.rows();
    double cross = 0, gg = 0;
    if (sampling.max_pairs > 0 && n * n > sampling.max_pairs) {
        Rng rng(sampling.seed);
        for (long p = 0; p < sampling.max_pairs; ++p) {
            const long i = static_cast<long>(rng.below(n));
            const long j = static_cast<long>(rng.below(n));
            const double dx = (latents.row(i) - latents.row(j)).norm();
            const double dg = (embedding.row(i) - embedding.row(j)).norm();
            cross += dx * dg;
            gg += dg * dg;
        }
    } else {
        for (long i = 0; i < n; ++i)
            for (long j = i + 1; j < n; ++j) {
                const double dx = (latents.row(i) - latents.row(j)).norm();
                const double dg = (embedding.row(i) - embedding.row(j)).norm();
                cross += dx * dg;
                gg += dg * dg;
            }
    }
    if (!(gg > 0)) throw DataError("optimal_scale: all embedding distances are zero");
    return cross / gg;
}

Alignment procrustes_calibrate(const Matrix& embedding, const Matrix& reference, bool with_scale,
                               const std::vector<int>* subset) {
    if (embedding.cols() != reference.cols())
        throw ShapeError("procrustes: embedding/reference dimensions differ");
    if (embedding.rows() != reference.rows())
        throw ShapeError("procrustes: embedding/reference row counts differ");
    const long d = embedding.cols();

    Matrix x, y;
    if (subset) {
        x.resize(static_cast<long>(subset->size()), d);
        y.resize(static_cast<long>(subset->size()), d);
        for (size_t i = 0; i < subset->size(); ++i) {
            x.row(static_cast<long>(i)) = embedding.row((*subset)[i]);
            y.row(static_cast<long>(i)) = reference.row((*subset)[i]);
        }
    } else {
        x = embedding;
        y = reference;
    }
    const long ns = x.rows();
    if (ns < d + 1) throw DataError("procrustes: need at least d+1 calibration points");

    Eigen::RowVectorXd xm = x.colwise().mean(), ym = y.colwise().mean();
    Matrix xc = x.rowwise() - xm, yc = y.rowwise() - ym;

    Eigen::JacobiSVD<Matrix> rank_check(xc);
    const auto& sv = rank_check.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0)))
        throw DataError("procrustes: calibration subset is rank deficient");

    Matrix h = xc.transpose() * yc;
    Eigen::JacobiSVD<Matrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);

    Alignment a;
    a.rotation = svd.matrixV() * svd.matrixU().transpose();
    a.scale = 1.0;
    if (with_scale) {
        const double denom = xc.squaredNorm();
        a.scale = svd.singularValues().sum() / denom;
        if (!(a.scale > 0)) throw DataError("procrustes: nonpositive optimal scale");
    }
    a.shift = ym.transpose() - a.scale * (a.rotation * xm.transpose());
    a.residual_mse = (a.apply(x) - y).squaredNorm() / static_cast<double>(ns);
    return a;
}

double lemma1_check(MapKind kind, const Vector& x0, double sigma, long n_samples, uint64_t seed,
                    const Matrix* linear_map) {
    if (sigma <= 0) throw ConfigError("lemma1_check: sigma must be positive");
    if (n_samples < 2) throw ConfigError("lemma1_check: need at least 2 samples");

    const long d = x0.size();
    Matrix jac;
    std::function<Vector(const Vector&)> map;
    switch (kind) {
    case MapKind::Linear: {
        Matrix a = linear_map ? *linear_map : Matrix::Identity(d, d);
        if (a.cols() != d) throw ShapeError("lemma1_check: linear map column count != dim(x0)");
        jac = a;
        map = [a](const Vector& x) { return Vector(a * x); };
        break;
    }
    case MapKind::F1: {
        if (d != 2) throw ShapeError("lemma1_check: f1 needs a 2-D base point");
        jac = gen::f1_jacobian(x0.head<2>());
        map = [](const Vector& x) { return Vector(gen::f1_transform(Eigen::Vector2d(x))); };
        break;
    }
    case MapKind::Stereographic: {
        if (d != 3) throw ShapeError("lemma1_check: stereographic needs a 3-D base point");
        jac = gen::stereographic_jacobian(x0.head<3>()); // rejects singular points
        map = [](const Vector& x) {
            return Vector(gen::stereographic_project(Eigen::Vector3d(x)));
        };
        break;
    }
    }

    // streaming moments so large sample counts need no storage
    Rng rng(seed);
    Vector x(d);
    const long out_dim = jac.rows();
    Vector s1 = Vector::Zero(out_dim);
    Matrix s2 = Matrix::Zero(out_dim, out_dim);
    for (long i = 0; i < n_samples; ++i) {
        for (long k = 0; k < d; ++k) x(k) = x0(k) + sigma * rng.normal();
        const Vector y = map(x);
        s1 += y;
        s2.noalias() += y * y.transpose();
    }
    Matrix cov = (s2 - s1 * s1.transpose() / static_cast<double>(n_samples)) /
                 static_cast<double>(n_samples - 1);
    Matrix target = jac * jac.transpose();
    return (cov / (sigma * sigma) - target).norm() / target.norm();
}

void export_distance_scatter(const Matrix& embedding, const Matrix& latents, double scale,
                             long n_pairs, uint64_t seed, const std::string& path) {
    if (n_pairs > 0) check_pair_inputs(embedding, latents);
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << "latent_dist,embedded_dist\n";
    const long n = embedding.rows();
    Rng rng(seed);
    char buf[80];
    for (long p = 0; p < n_pairs; ++p) {
        long i, j;
        do {
            i = static_cast<long>(rng.below(n));
            j = static_cast<long>(rng.below(n));
        } while (i == j);
        const double dx = (latents.row(i) - latents.row(j)).norm();
        const double dg = scale * (embedding.row(i) - embedding.row(j)).norm();
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", dx, dg);
        os << buf;
    }
}

} // namespace loca::eval
