#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loca/dataset.hpp"

namespace loca::gen {

// Planar sampling domains: axis-aligned rectangles and rectangular frames
// (outer box minus an open inner box).
struct Region2D {
    enum class Kind { Rectangle, Frame };
    Kind kind = Kind::Rectangle;
    Eigen::Vector2d lo{0, 0}, hi{1, 1};
    Eigen::Vector2d inner_lo{0, 0}, inner_hi{0, 0};

    static Region2D unit_square();
    static Region2D rectangle(const Eigen::Vector2d& lo, const Eigen::Vector2d& hi);
    static Region2D frame(const Eigen::Vector2d& outer_lo, const Eigen::Vector2d& outer_hi,
                          const Eigen::Vector2d& inner_lo, const Eigen::Vector2d& inner_hi);

    bool contains(const Eigen::Vector2d& p) const;
};

// Planar measurement map (x0 + x1^3, -x0 + x1^3) and its closed-form inverse.
Eigen::Vector2d f1_transform(const Eigen::Vector2d& x);
Matrix f1_transform(const Matrix& pts);
Eigen::Vector2d f1_inverse(const Eigen::Vector2d& y);
Eigen::Matrix2d f1_jacobian(const Eigen::Vector2d& x);

// Anchors uniform over the region; cloud points are anchor + N(0, sigma^2 I_2)
// in latent space; every point is observed through f1. Latents are stored.
BurstDataset sample_plane_bursts(const Region2D& region, int n, int m, double sigma, uint64_t seed);

// Points on the inner-frame boundary plus linear interpolants between
// horizontally and vertically opposed pairs, with their f1 images.
struct FrameInterpolation {
    Matrix boundary_latent; // n_boundary x 2
    Matrix boundary_obs;
    struct Segment {
        int a = 0, b = 0;  // boundary indices of the endpoints
        Matrix latent;     // n_steps x 2, strictly between the endpoints
        Matrix obs;
    };
    std::vector<Segment> segments;
};
FrameInterpolation frame_interpolation_pairs(int n_boundary, int n_steps,
                                             const Eigen::Vector2d& inner_lo = {0.1, 0.1},
                                             const Eigen::Vector2d& inner_hi = {0.9, 0.9});

// Fibonacci lattice on the unit sphere: z_i = 1 - 2(i+0.5)/n, longitude at the
// golden angle pi(3 - sqrt(5)).
Matrix fibonacci_sphere(int n);

struct AlphaRange {
    double min = 0, max = 3.14159265358979323846;
    bool include_min = true, include_max = true;
    bool contains(double alpha) const;
};

// Sphere anchors from the Fibonacci lattice filtered by polar angle; clouds
// sampled as N((pi/2, 0), sigma^2 I_2) in polar coordinates and rotated to the
// anchor; observations are stereographic projections. Latents are the 3-D
// sphere points.
BurstDataset sphere_bursts(const AlphaRange& range, int n_lattice, int m, double sigma,
                           uint64_t seed);

// Projection from the unit sphere minus the north pole onto the plane.
Eigen::Vector2d stereographic_project(const Eigen::Vector3d& x);
Matrix stereographic_project(const Matrix& pts);
Eigen::Matrix<double, 2, 3> stereographic_jacobian(const Eigen::Vector3d& x);

// Floor plan as a union of rectangles minus rectangular cutouts, with fixed
// transmitter positions.
struct FloorPlan {
    struct Rect {
        double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
        bool contains(double x, double y, bool strict = false) const;
    };
    double width = 600, height = 1000;
    std::vector<Rect> space;
    std::vector<Rect> holes;
    Matrix transmitters; // L x 2

    bool in_free_space(double x, double y) const;
    double diagonal() const;
    void validate() const;
};

// The default synthetic plan: 600x1000 L-shape with two rectangular cutouts
// and 17 transmitters placed by seeded uniform sampling over free space.
FloorPlan default_floor_plan();

FloorPlan load_floor_plan(const std::string& path);
void save_floor_plan(const FloorPlan& plan, const std::string& path);

// Anchors uniform over free space; each cloud is the RBF amplitude vector
// exp(-||p - t_l||^2 / eps^2) measured at m receivers equally spaced on a
// circle of radius r around the anchor (angles 2*pi*k/m starting at 0).
BurstDataset wifi_simulate(const FloorPlan& plan, int n, int m, double r, double eps,
                           uint64_t seed);

} // namespace loca::gen
