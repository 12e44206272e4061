#include "hpnet/trajectories.hpp"

#include <cmath>
#include <numbers>

#include "hpnet/errors.hpp"

namespace hpnet {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

void CameraModel::validate() const {
    if (scale_y == 0.0 || scale_z == 0.0) throw ConfigError("camera scale must be nonzero");
    if (noise_sigma < 0.0) throw ConfigError("camera noise_sigma must be >= 0");
}

void DatasetSpec::validate() const {
    if (shapes.empty()) throw DataError("dataset spec: no shapes given");
    if (colors.empty()) throw DataError("dataset spec: no colors given");
    if (repeats < 1) throw ConfigError("dataset spec: repeats must be >= 1");
    if (points_per_loop < 2) throw ConfigError("dataset spec: points_per_loop must be >= 2");
    if (speed_factor <= 0.0) throw ConfigError("dataset spec: speed_factor must be > 0");
    if (noise_sigma < 0.0) throw ConfigError("dataset spec: noise_sigma must be >= 0");
    for (const auto& s : shapes)
        if (s != "cosine" && s != "square" && s != "circle")
            throw DataError("dataset spec: unknown shape '" + s + "'");
    for (const auto& c : colors)
        if (c != "yellow" && c != "green")
            throw DataError("dataset spec: unknown color '" + c + "'");
}

Point3D cosine_point(double t) {
    return {12.0, 8.0 * (-t / 2.0) + 0.04, 4.0 * std::cos(2.0 * t) + 0.10};
}

Point3D square_point(double t) {
    double y;
    if (t <= -3.0 * kPi / 4.0)
        y = 0.0;
    else if (t <= -kPi / 4.0)
        y = (16.0 / kPi) * t + 12.0;
    else if (t <= kPi / 4.0)
        y = 8.0;
    else if (t <= 3.0 * kPi / 4.0)
        y = -(16.0 / kPi) * t + 12.0;
    else
        y = 0.0;

    double z;
    if (t <= -3.0 * kPi / 4.0)
        z = (16.0 / kPi) * t + 20.0;
    else if (t <= -kPi / 4.0)
        z = 14.0;
    else if (t <= kPi / 4.0)
        z = -(16.0 / kPi) * t + 10.0;
    else if (t <= 3.0 * kPi / 4.0)
        z = 6.0;
    else
        z = (16.0 / kPi) * t - 6.0;

    return {12.0, y, z};
}

Point3D circle_point(double t) {
    return {12.0, 4.0 * std::sin(2.0 * t) + 0.04, 4.0 * std::cos(2.0 * t) + 0.10};
}

Point3D curve_point(const std::string& shape, double t) {
    if (shape == "cosine") return cosine_point(t);
    if (shape == "square") return square_point(t);
    if (shape == "circle") return circle_point(t);
    throw DataError("unknown trajectory shape '" + shape + "'");
}

std::vector<Point3D> sample_trajectory(const std::string& shape, const DatasetSpec& spec) {
    spec.validate();
    bool known = false;
    for (const auto& s : spec.shapes) known = known || s == shape;
    if (!known) throw DataError("sample_trajectory: shape '" + shape + "' not in spec");

    std::vector<Point3D> points;
    points.reserve(spec.points_per_loop);
    const double n = spec.points_per_loop;
    for (int k = 0; k < spec.points_per_loop; ++k) {
        // grid index in (0, n], so the unit-speed grid ends exactly at t = pi
        double idx = std::fmod((k + 1) * spec.speed_factor, n);
        if (idx <= 0.0) idx += n;
        points.push_back(curve_point(shape, -kPi + (idx / n) * (2.0 * kPi)));
    }
    return points;
}

ImagePoint project_to_image(const Point3D& p, const CameraModel& cam, std::mt19937_64& rng) {
    cam.validate();
    std::normal_distribution<double> noise(0.0, cam.noise_sigma);
    ImagePoint ip;
    ip.x = cam.scale_y * p.y + cam.offset_y + (cam.noise_sigma > 0.0 ? noise(rng) : 0.0);
    ip.y = cam.scale_z * p.z + cam.offset_z + (cam.noise_sigma > 0.0 ? noise(rng) : 0.0);
    return ip;
}

InputFrame encode_frame(const ImagePoint& p, const std::string& color) {
    InputFrame f;
    f.values = Vec::Zero(4);
    if (color == "yellow") {
        f.values(0) = p.x;
        f.values(1) = p.y;
    } else if (color == "green") {
        f.values(2) = p.x;
        f.values(3) = p.y;
    } else {
        throw DataError("encode_frame: unknown color '" + color + "'");
    }
    return f;
}

std::vector<LabeledSequence> make_dataset(const DatasetSpec& spec) {
    CameraModel cam;
    cam.noise_sigma = spec.noise_sigma;
    return make_dataset(spec, cam);
}

std::vector<LabeledSequence> make_dataset(const DatasetSpec& spec, const CameraModel& cam) {
    spec.validate();
    cam.validate();
    std::mt19937_64 rng(spec.seed);

    std::vector<LabeledSequence> out;
    out.reserve(spec.shapes.size() * spec.colors.size() * spec.repeats);
    for (const auto& shape : spec.shapes) {
        const auto points = sample_trajectory(shape, spec);
        for (const auto& color : spec.colors) {
            for (int rep = 0; rep < spec.repeats; ++rep) {
                LabeledSequence seq;
                seq.shape = shape;
                seq.color = color;
                seq.repeat = rep;
                seq.frames.reserve(points.size());
                for (const Point3D& p : points)
                    seq.frames.push_back(encode_frame(project_to_image(p, cam, rng), color));
                out.push_back(std::move(seq));
            }
        }
    }
    return out;
}

}  // namespace hpnet
