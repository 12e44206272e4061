#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hpnet/network.hpp"

namespace hpnet {

// Presenter-frame ball position, centimetres.
struct Point3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Affine projection of the (y, z) plane into normalized image coordinates,
// plus additive Gaussian pixel noise. Stands in for the robot camera.
struct CameraModel {
    double scale_y = 0.031;
    double scale_z = 0.04;
    double offset_y = 0.5;
    double offset_z = 0.3;
    double noise_sigma = 0.005;

    void validate() const;
};

struct DatasetSpec {
    std::vector<std::string> shapes = {"cosine", "square"};  // of cosine/square/circle
    std::vector<std::string> colors = {"yellow", "green"};
    int repeats = 5;
    int points_per_loop = 20;
    double speed_factor = 1.0;  // > 1 samples the same curves more coarsely
    double noise_sigma = 0.005;
    std::uint64_t seed = 0;

    void validate() const;
};

// The three presenter curves, parameterized by t in (-pi, pi].
Point3D cosine_point(double t);
Point3D square_point(double t);
Point3D circle_point(double t);
Point3D curve_point(const std::string& shape, double t);

// points_per_loop samples at t_k = -pi + (k+1) * (2pi/points_per_loop) *
// speed_factor, wrapped back into (-pi, pi].
std::vector<Point3D> sample_trajectory(const std::string& shape, const DatasetSpec& spec);

struct ImagePoint {
    double x = 0.0;
    double y = 0.0;
};

ImagePoint project_to_image(const Point3D& p, const CameraModel& cam, std::mt19937_64& rng);

// yellow -> (ix, iy, 0, 0); green -> (0, 0, ix, iy).
InputFrame encode_frame(const ImagePoint& p, const std::string& color);

// |shapes| * |colors| * repeats labeled sequences, independently
// noise-perturbed, deterministic per spec.seed.
std::vector<LabeledSequence> make_dataset(const DatasetSpec& spec);
std::vector<LabeledSequence> make_dataset(const DatasetSpec& spec, const CameraModel& cam);

}  // namespace hpnet
