#include "loca/generators.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "loca/rng.hpp"

namespace loca::gen {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr long kMaxRejectionAttempts = 1000000;
} // namespace

Region2D Region2D::unit_square() { return rectangle({0, 0}, {1, 1}); }

Region2D Region2D::rectangle(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi) {
    if (!(lo.x() < hi.x() && lo.y() < hi.y()))
        throw ConfigError("Region2D: rectangle bounds must satisfy lo < hi componentwise");
    Region2D r;
    r.kind = Kind::Rectangle;
    r.lo = lo;
    r.hi = hi;
    return r;
}

Region2D Region2D::frame(const Eigen::Vector2d& outer_lo, const Eigen::Vector2d& outer_hi,
                         const Eigen::Vector2d& inner_lo, const Eigen::Vector2d& inner_hi) {
    Region2D r = rectangle(outer_lo, outer_hi);
    if (!(inner_lo.x() > outer_lo.x() && inner_lo.y() > outer_lo.y() &&
          inner_hi.x() < outer_hi.x() && inner_hi.y() < outer_hi.y() &&
          inner_lo.x() < inner_hi.x() && inner_lo.y() < inner_hi.y()))
        throw ConfigError("Region2D: inner box must lie strictly inside the outer box");
    r.kind = Kind::Frame;
    r.inner_lo = inner_lo;
    r.inner_hi = inner_hi;
    return r;
}

bool Region2D::contains(const Eigen::Vector2d& p) const {
    const bool in_outer = p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
    if (!in_outer) return false;
    if (kind == Kind::Frame) {
        const bool in_hole = p.x() > inner_lo.x() && p.x() < inner_hi.x() &&
                             p.y() > inner_lo.y() && p.y() < inner_hi.y();
        return !in_hole;
    }
    return true;
}

Eigen::Vector2d f1_transform(const Eigen::Vector2d& x) {
    const double c = x[1] * x[1] * x[1];
    return {x[0] + c, -x[0] + c};
}

Matrix f1_transform(const Matrix& pts) {
    if (pts.cols() != 2) throw ShapeError("f1_transform: points must be 2-D");
    Matrix out(pts.rows(), 2);
    for (long i = 0; i < pts.rows(); ++i)
        out.row(i) = f1_transform(Eigen::Vector2d(pts.row(i))).transpose();
    return out;
}

Eigen::Vector2d f1_inverse(const Eigen::Vector2d& y) {
    // y0 + y1 = 2 x1^3, y0 - y1 = 2 x0
    return {0.5 * (y[0] - y[1]), std::cbrt(0.5 * (y[0] + y[1]))};
}

Eigen::Matrix2d f1_jacobian(const Eigen::Vector2d& x) {
    Eigen::Matrix2d j;
    j << 1, 3 * x[1] * x[1], -1, 3 * x[1] * x[1];
    return j;
}

BurstDataset sample_plane_bursts(const Region2D& region, int n, int m, double sigma,
                                 uint64_t seed) {
    if (n < 1 || m < 1) throw ConfigError("sample_plane_bursts: n and m must be >= 1");
    if (sigma <= 0) throw ConfigError("sample_plane_bursts: sigma must be positive");

    Matrix latents(n, 2);
    Rng anchor_rng(derive_seed(seed, 0));
    for (int i = 0; i < n; ++i) {
        Eigen::Vector2d p;
        long attempts = 0;
        do {
            if (++attempts > kMaxRejectionAttempts)
                throw DataError("sample_plane_bursts: rejection sampling exceeded attempt limit");
            p = {anchor_rng.uniform(region.lo.x(), region.hi.x()),
                 anchor_rng.uniform(region.lo.y(), region.hi.y())};
        } while (!region.contains(p));
        latents.row(i) = p.transpose();
    }

    BurstDataset ds;
    ds.n_clouds = n;
    ds.cloud_size = m;
    ds.sigma = sigma;
    ds.anchors = f1_transform(latents);
    ds.points.resize(static_cast<long>(n) * m, 2);
    for (int i = 0; i < n; ++i) {
        Rng cloud_rng(derive_seed(seed, static_cast<uint64_t>(i) + 1));
        for (int j = 0; j < m; ++j) {
            Eigen::Vector2d z{latents(i, 0) + sigma * cloud_rng.normal(),
                              latents(i, 1) + sigma * cloud_rng.normal()};
            ds.points.row(static_cast<long>(i) * m + j) = f1_transform(z).transpose();
        }
    }
    ds.latents = std::move(latents);
    return ds;
}

FrameInterpolation frame_interpolation_pairs(int n_boundary, int n_steps,
                                             const Eigen::Vector2d& inner_lo,
                                             const Eigen::Vector2d& inner_hi) {
    if (n_boundary < 4 || n_boundary % 4 != 0)
        throw ConfigError("frame_interpolation_pairs: n_boundary must be a positive multiple of 4");
    if (n_steps < 1) throw ConfigError("frame_interpolation_pairs: n_steps must be >= 1");

    const int per_side = n_boundary / 4;
    FrameInterpolation out;
    out.boundary_latent.resize(n_boundary, 2);
    // Sides in order: left, right, bottom, top. Points at cell midpoints so
    // horizontally/vertically opposed pairs share the orthogonal coordinate.
    for (int j = 0; j < per_side; ++j) {
        const double tx = inner_lo.x() + (inner_hi.x() - inner_lo.x()) * (j + 0.5) / per_side;
        const double ty = inner_lo.y() + (inner_hi.y() - inner_lo.y()) * (j + 0.5) / per_side;
        out.boundary_latent.row(j) = Eigen::RowVector2d(inner_lo.x(), ty);
        out.boundary_latent.row(per_side + j) = Eigen::RowVector2d(inner_hi.x(), ty);
        out.boundary_latent.row(2 * per_side + j) = Eigen::RowVector2d(tx, inner_lo.y());
        out.boundary_latent.row(3 * per_side + j) = Eigen::RowVector2d(tx, inner_hi.y());
    }
    out.boundary_obs = f1_transform(out.boundary_latent);

    auto add_segment = [&](int a, int b) {
        FrameInterpolation::Segment seg;
        seg.a = a;
        seg.b = b;
        seg.latent.resize(n_steps, 2);
        const Eigen::RowVector2d pa = out.boundary_latent.row(a);
        const Eigen::RowVector2d pb = out.boundary_latent.row(b);
        for (int s = 0; s < n_steps; ++s) {
            const double t = static_cast<double>(s + 1) / (n_steps + 1);
            seg.latent.row(s) = pa + t * (pb - pa);
        }
        seg.obs = f1_transform(seg.latent);
        out.segments.push_back(std::move(seg));
    };
    for (int j = 0; j < per_side; ++j) add_segment(j, per_side + j);                     // horizontal
    for (int j = 0; j < per_side; ++j) add_segment(2 * per_side + j, 3 * per_side + j);  // vertical
    return out;
}

Matrix fibonacci_sphere(int n) {
    if (n < 1) throw ConfigError("fibonacci_sphere: n must be >= 1");
    Matrix pts(n, 3);
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * i;
        pts(i, 0) = r * std::cos(phi);
        pts(i, 1) = r * std::sin(phi);
        pts(i, 2) = z;
    }
    return pts;
}

bool AlphaRange::contains(double alpha) const {
    if (alpha < min || alpha > max) return false;
    if (!include_min && alpha == min) return false;
    if (!include_max && alpha == max) return false;
    return true;
}

namespace {

// Orthogonal map sending the equator point (1,0,0) to the anchor at (alpha, beta):
// rotate about y by (alpha - pi/2), then about z by beta.
Eigen::Matrix3d equator_to_anchor(double alpha, double beta) {
    const double a = alpha - kPi / 2;
    Eigen::Matrix3d ry, rz;
    ry << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    rz << std::cos(beta), -std::sin(beta), 0, std::sin(beta), std::cos(beta), 0, 0, 0, 1;
    return rz * ry;
}

Eigen::Vector3d polar_to_cartesian(double alpha, double beta) {
    return {std::sin(alpha) * std::cos(beta), std::sin(alpha) * std::sin(beta), std::cos(alpha)};
}

} // namespace

Eigen::Vector2d stereographic_project(const Eigen::Vector3d& x) {
    if (std::abs(1.0 - x[2]) <= 1e-9)
        throw DataError("stereographic_project: point at the projection pole");
    return {x[0] / (1.0 - x[2]), x[1] / (1.0 - x[2])};
}

Matrix stereographic_project(const Matrix& pts) {
    if (pts.cols() != 3) throw ShapeError("stereographic_project: points must be 3-D");
    Matrix out(pts.rows(), 2);
    for (long i = 0; i < pts.rows(); ++i)
        out.row(i) = stereographic_project(Eigen::Vector3d(pts.row(i))).transpose();
    return out;
}

Eigen::Matrix<double, 2, 3> stereographic_jacobian(const Eigen::Vector3d& x) {
    if (std::abs(1.0 - x[2]) <= 1e-9)
        throw DataError("stereographic_jacobian: point at the projection pole");
    const double w = 1.0 / (1.0 - x[2]);
    Eigen::Matrix<double, 2, 3> j;
    j << w, 0, x[0] * w * w, 0, w, x[1] * w * w;
    return j;
}

BurstDataset sphere_bursts(const AlphaRange& range, int n_lattice, int m, double sigma,
                           uint64_t seed) {
    if (n_lattice < 1 || m < 2) throw ConfigError("sphere_bursts: need n_lattice >= 1, m >= 2");
    if (sigma <= 0) throw ConfigError("sphere_bursts: sigma must be positive");
    if (range.min < 0 || range.max > kPi || range.min >= range.max)
        throw ConfigError("sphere_bursts: alpha range must lie in [0, pi]");

    const Matrix lattice = fibonacci_sphere(n_lattice);
    std::vector<int> keep;
    for (int i = 0; i < n_lattice; ++i) {
        const double alpha = std::acos(std::clamp(lattice(i, 2), -1.0, 1.0));
        if (range.contains(alpha)) keep.push_back(i);
    }
    if (keep.empty()) throw DataError("sphere_bursts: no lattice points in the alpha range");

    const int n = static_cast<int>(keep.size());
    BurstDataset ds;
    ds.n_clouds = n;
    ds.cloud_size = m;
    ds.sigma = sigma;
    Matrix latents(n, 3);
    ds.points.resize(static_cast<long>(n) * m, 2);
    ds.anchors.resize(n, 2);

    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d p = lattice.row(keep[i]).transpose();
        latents.row(i) = p.transpose();
        const double alpha = std::acos(std::clamp(p[2], -1.0, 1.0));
        const double beta = std::atan2(p[1], p[0]);
        ds.anchors.row(i) = stereographic_project(p).transpose();
        const Eigen::Matrix3d rot = equator_to_anchor(alpha, beta);
        Rng cloud_rng(derive_seed(seed, static_cast<uint64_t>(i) + 1));
        for (int j = 0; j < m; ++j) {
            const double a = kPi / 2 + sigma * cloud_rng.normal();
            const double b = sigma * cloud_rng.normal();
            const Eigen::Vector3d q = rot * polar_to_cartesian(a, b);
            ds.points.row(static_cast<long>(i) * m + j) = stereographic_project(q).transpose();
        }
    }
    ds.latents = std::move(latents);
    return ds;
}

bool FloorPlan::Rect::contains(double x, double y, bool strict) const {
    if (strict) return x > x0 && x < x1 && y > y0 && y < y1;
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

bool FloorPlan::in_free_space(double x, double y) const {
    bool inside = false;
    for (const auto& r : space)
        if (r.contains(x, y)) {
            inside = true;
            break;
        }
    if (!inside) return false;
    for (const auto& r : holes)
        if (r.contains(x, y, true)) return false;
    return true;
}

double FloorPlan::diagonal() const { return std::hypot(width, height); }

void FloorPlan::validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("floor plan: width/height must be positive");
    if (space.empty()) throw ConfigError("floor plan: free space is empty");
    if (transmitters.rows() < 1) throw ConfigError("floor plan: needs at least one transmitter");
    if (transmitters.cols() != 2) throw ShapeError("floor plan: transmitters must be L x 2");
    for (long l = 0; l < transmitters.rows(); ++l)
        if (transmitters(l, 0) < 0 || transmitters(l, 0) > width || transmitters(l, 1) < 0 ||
            transmitters(l, 1) > height)
            throw ConfigError("floor plan: transmitter " + std::to_string(l) + " outside bounds");
}

FloorPlan default_floor_plan() {
    FloorPlan plan;
    plan.width = 600;
    plan.height = 1000;
    // L-shape: full lower block plus a left upper arm.
    plan.space = {{0, 0, 600, 700}, {0, 700, 350, 1000}};
    plan.holes = {{120, 150, 260, 350}, {320, 420, 520, 620}};
    const int n_tx = 17;
    plan.transmitters.resize(n_tx, 2);
    Rng rng(derive_seed(0xF100D, 17));
    for (int l = 0; l < n_tx; ++l) {
        double x, y;
        do {
            x = rng.uniform(0, plan.width);
            y = rng.uniform(0, plan.height);
        } while (!plan.in_free_space(x, y));
        plan.transmitters(l, 0) = x;
        plan.transmitters(l, 1) = y;
    }
    plan.validate();
    return plan;
}

FloorPlan load_floor_plan(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open floor plan file '" + path + "'");
    FloorPlan plan;
    std::vector<Eigen::RowVector2d> tx;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::stringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "width") ss >> plan.width;
        else if (tag == "height") ss >> plan.height;
        else if (tag == "space" || tag == "hole") {
            FloorPlan::Rect r;
            ss >> r.x0 >> r.y0 >> r.x1 >> r.y1;
            (tag == "space" ? plan.space : plan.holes).push_back(r);
        } else if (tag == "transmitter") {
            Eigen::RowVector2d t;
            ss >> t[0] >> t[1];
            tx.push_back(t);
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown tag '" + tag + "'");
        }
        if (ss.fail()) throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed line");
    }
    plan.transmitters.resize(static_cast<long>(tx.size()), 2);
    for (size_t i = 0; i < tx.size(); ++i) plan.transmitters.row(static_cast<long>(i)) = tx[i];
    plan.validate();
    return plan;
}

void save_floor_plan(const FloorPlan& plan, const std::string& path) {
    plan.validate();
    std::ofstream os(path);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    char buf[128];
    os << "width " << plan.width << "\nheight " << plan.height << "\n";
    for (const auto& r : plan.space) {
        std::snprintf(buf, sizeof(buf), "space %.12g %.12g %.12g %.12g\n", r.x0, r.y0, r.x1, r.y1);
        os << buf;
    }
    for (const auto& r : plan.holes) {
        std::snprintf(buf, sizeof(buf), "hole %.12g %.12g %.12g %.12g\n", r.x0, r.y0, r.x1, r.y1);
        os << buf;
    }
    for (long l = 0; l < plan.transmitters.rows(); ++l) {
        std::snprintf(buf, sizeof(buf), "transmitter %.12g %.12g\n", plan.transmitters(l, 0),
                      plan.transmitters(l, 1));
        os << buf;
    }
}

BurstDataset wifi_simulate(const FloorPlan& plan, int n, int m, double r, double eps,
                           uint64_t seed) {
    plan.validate();
    if (n < 1 || m < 2) throw ConfigError("wifi_simulate: need n >= 1, m >= 2");
    if (r <= 0 || eps <= 0) throw ConfigError("wifi_simulate: r and eps must be positive");

    const long n_tx = plan.transmitters.rows();
    Eigen::RowVectorXd amp(n_tx);
    auto amplitudes = [&](double x, double y) -> const Eigen::RowVectorXd& {
        for (long l = 0; l < n_tx; ++l) {
            const double dx = x - plan.transmitters(l, 0);
            const double dy = y - plan.transmitters(l, 1);
            amp(l) = std::exp(-(dx * dx + dy * dy) / (eps * eps));
        }
        return amp;
    };

    BurstDataset ds;
    ds.n_clouds = n;
    ds.cloud_size = m;
    Matrix latents(n, 2);
    ds.anchors.resize(n, n_tx);
    ds.points.resize(static_cast<long>(n) * m, n_tx);

    Rng rng(derive_seed(seed, 0));
    for (int i = 0; i < n; ++i) {
        double x, y;
        long attempts = 0;
        do {
            if (++attempts > kMaxRejectionAttempts)
                throw DataError("wifi_simulate: rejection sampling exceeded attempt limit");
            x = rng.uniform(0, plan.width);
            y = rng.uniform(0, plan.height);
        } while (!plan.in_free_space(x, y));
        latents(i, 0) = x;
        latents(i, 1) = y;
        ds.anchors.row(i) = amplitudes(x, y);
        for (int k = 0; k < m; ++k) {
            const double theta = 2.0 * kPi * k / m;
            ds.points.row(static_cast<long>(i) * m + k) =
                amplitudes(x + r * std::cos(theta), y + r * std::sin(theta));
        }
    }
    ds.latents = std::move(latents);
    return ds;
}

} // namespace loca::gen
