#include "loca/dataset.hpp"

#include <cstring>
#include <fstream>

namespace loca {

void BurstDataset::validate() const {
    if (n_clouds < 1) throw DataError("dataset needs at least one cloud");
    if (cloud_size < 2) throw DataError("clouds need at least 2 points for a covariance");
    if (anchors.rows() != n_clouds) throw ShapeError("anchor count != n_clouds");
    if (points.rows() != static_cast<long>(n_clouds) * cloud_size)
        throw ShapeError("points rows != n_clouds * cloud_size");
    if (points.cols() != anchors.cols()) throw ShapeError("points/anchors dimension mismatch");
    if (sigma && *sigma <= 0) throw DataError("sigma must be positive");
    if (latents && latents->rows() != n_clouds)
        throw ShapeError("latent row count != n_clouds");
}

namespace {

constexpr char kDsMagic[8] = {'L', 'O', 'C', 'A', 'B', 'D', 'S', '\1'};

void write_raw(std::ofstream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::ifstream& is, void* p, size_t n) {
    is.read(static_cast<char*>(is ? p : p), static_cast<std::streamsize>(n));
    if (!is) throw DataError("dataset file truncated");
}

void write_matrix(std::ofstream& os, const Matrix& m) {
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) {
            double v = m(r, c);
            write_raw(os, &v, sizeof(v));
        }
}

void read_matrix(std::ifstream& is, Matrix& m) {
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) read_raw(is, &m(r, c), sizeof(double));
}

} // namespace

void save_dataset(const BurstDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    write_raw(os, kDsMagic, sizeof(kDsMagic));
    int64_t n = ds.n_clouds, m = ds.cloud_size, dim = ds.ambient_dim();
    int64_t dlat = ds.latents ? ds.latents->cols() : 0;
    write_raw(os, &n, sizeof(n));
    write_raw(os, &m, sizeof(m));
    write_raw(os, &dim, sizeof(dim));
    write_raw(os, &dlat, sizeof(dlat));
    uint8_t has_sigma = ds.sigma ? 1 : 0;
    double sigma = ds.sigma.value_or(0.0);
    write_raw(os, &has_sigma, sizeof(has_sigma));
    write_raw(os, &sigma, sizeof(sigma));
    write_matrix(os, ds.anchors);
    write_matrix(os, ds.points);
    if (ds.latents) write_matrix(os, *ds.latents);
    if (!os) throw DataError("failed writing dataset to '" + path + "'");
}

BurstDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open dataset file '" + path + "'");
    char magic[8];
    read_raw(is, magic, sizeof(magic));
    if (std::memcmp(magic, kDsMagic, sizeof(magic)) != 0)
        throw DataError("'" + path + "' is not a dataset file (bad magic)");
    int64_t n = 0, m = 0, dim = 0, dlat = 0;
    read_raw(is, &n, sizeof(n));
    read_raw(is, &m, sizeof(m));
    read_raw(is, &dim, sizeof(dim));
    read_raw(is, &dlat, sizeof(dlat));
    if (n < 1 || m < 2 || dim < 1 || dlat < 0)
        throw DataError("dataset file has invalid header counts");
    uint8_t has_sigma = 0;
    double sigma = 0;
    read_raw(is, &has_sigma, sizeof(has_sigma));
    read_raw(is, &sigma, sizeof(sigma));
    BurstDataset ds;
    ds.n_clouds = static_cast<int>(n);
    ds.cloud_size = static_cast<int>(m);
    ds.anchors.resize(n, dim);
    read_matrix(is, ds.anchors);
    ds.points.resize(n * m, dim);
    read_matrix(is, ds.points);
    if (dlat > 0) {
        Matrix lat(n, dlat);
        read_matrix(is, lat);
        ds.latents = std::move(lat);
    }
    if (has_sigma) ds.sigma = sigma;
    ds.validate();
    return ds;
}

} // namespace loca
