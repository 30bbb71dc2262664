#include "acseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace acseg {

GrayImage::GrayImage(int width, int height, double value)
    : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("GrayImage: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, value);
}

double GrayImage::min_value() const {
    return *std::min_element(data_.begin(), data_.end());
}

double GrayImage::max_value() const {
    return *std::max_element(data_.begin(), data_.end());
}

EdgeMap::EdgeMap(int w, int h, std::uint8_t value) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("EdgeMap: dimensions must be positive");
    mask.assign(static_cast<std::size_t>(w) * h, value);
}

std::size_t EdgeMap::count() const {
    std::size_t n = 0;
    for (auto v : mask) n += v ? 1 : 0;
    return n;
}

GrayImage EdgeMap::to_field() const {
    GrayImage out(width, height);
    for (std::size_t i = 0; i < mask.size(); ++i)
        out.values()[i] = mask[i] ? 1.0 : 0.0;
    return out;
}

EdgeMap EdgeMap::from_field(const GrayImage& f, double threshold) {
    EdgeMap out(f.width(), f.height());
    for (std::size_t i = 0; i < f.size(); ++i)
        out.mask[i] = f.values()[i] >= threshold ? 1 : 0;
    return out;
}

PaddedImage::PaddedImage(GrayImage full, int halo)
    : full_(std::move(full)), halo_(halo) {}

PaddedImage pad_neumann(const GrayImage& img, int width) {
    if (img.empty()) throw std::invalid_argument("pad_neumann: empty image");
    if (width < 0) throw std::invalid_argument("pad_neumann: negative width");
    if (width > std::min(img.width(), img.height()))
        throw std::invalid_argument("pad_neumann: width exceeds image extent");

    GrayImage full(img.width() + 2 * width, img.height() + 2 * width);
    for (int r = -width; r < img.height() + width; ++r) {
        const int sr = mirror_index(r, img.height());
        for (int c = -width; c < img.width() + width; ++c)
            full(r + width, c + width) = img(sr, mirror_index(c, img.width()));
    }
    return PaddedImage(std::move(full), width);
}

GrayImage normalize(const GrayImage& img) {
    const double lo = img.min_value(), hi = img.max_value();
    GrayImage out(img.width(), img.height());
    if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < img.size(); ++i)
            out.values()[i] = (img.values()[i] - lo) * inv;
    }
    return out;
}

double GaussianSampler::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 53-bit uniforms; u1 kept away from zero for the log.
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

GrayImage gaussian_field(int width, int height, double mean, double std_dev,
                         std::uint64_t seed) {
    if (std_dev < 0.0)
        throw std::invalid_argument("gaussian_field: negative std_dev");
    GaussianSampler gauss(seed);
    GrayImage out(width, height);
    for (auto& v : out.values()) v = mean + std_dev * gauss();
    return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, double mean, double std_dev,
                             std::uint64_t seed) {
    GrayImage noise = gaussian_field(img.width(), img.height(), mean, std_dev, seed);
    GrayImage out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
        out.values()[i] = clamp01(img.values()[i] + noise.values()[i]);
    return out;
}

ShapeSpec ShapeSpec::make_disk(double cx, double cy, double radius) {
    ShapeSpec s;
    s.kind = Kind::disk;
    s.cx = cx;
    s.cy = cy;
    s.radius = radius;
    return s;
}

ShapeSpec ShapeSpec::make_rectangle(int row0, int col0, int row1, int col1) {
    ShapeSpec s;
    s.kind = Kind::rectangle;
    s.row0 = row0;
    s.col0 = col0;
    s.row1 = row1;
    s.col1 = col1;
    return s;
}

ShapeSpec ShapeSpec::make_blobs(std::vector<ShapeSpec> disks) {
    ShapeSpec s;
    s.kind = Kind::blobs;
    s.parts = std::move(disks);
    return s;
}

namespace {

void validate_shape(const ShapeSpec& shape, int width, int height) {
    switch (shape.kind) {
        case ShapeSpec::Kind::disk:
            if (shape.radius < 0.0)
                throw std::invalid_argument("synth_two_phase: negative radius");
            if (shape.cx - shape.radius < -0.5 || shape.cx + shape.radius > width - 0.5 ||
                shape.cy - shape.radius < -0.5 || shape.cy + shape.radius > height - 0.5)
                throw std::invalid_argument("synth_two_phase: disk exceeds canvas");
            break;
        case ShapeSpec::Kind::rectangle:
            if (shape.row0 > shape.row1 || shape.col0 > shape.col1 ||
                shape.row0 < 0 || shape.col0 < 0 ||
                shape.row1 > height || shape.col1 > width)
                throw std::invalid_argument("synth_two_phase: rectangle exceeds canvas");
            break;
        case ShapeSpec::Kind::blobs:
            for (const auto& p : shape.parts) {
                if (p.kind != ShapeSpec::Kind::disk)
                    throw std::invalid_argument("synth_two_phase: blobs must be disks");
                validate_shape(p, width, height);
            }
            break;
    }
}

bool inside_shape(const ShapeSpec& shape, int row, int col) {
    switch (shape.kind) {
        case ShapeSpec::Kind::disk: {
            const double dx = col - shape.cx, dy = row - shape.cy;
            return dx * dx + dy * dy < shape.radius * shape.radius;
        }
        case ShapeSpec::Kind::rectangle:
            return row >= shape.row0 && row < shape.row1 &&
                   col >= shape.col0 && col < shape.col1;
        case ShapeSpec::Kind::blobs:
            for (const auto& p : shape.parts)
                if (inside_shape(p, row, col)) return true;
            return false;
    }
    return false;
}

}  // namespace

SyntheticScene synth_two_phase(int width, int height, const ShapeSpec& shape) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("synth_two_phase: bad canvas");
    validate_shape(shape, width, height);

    SyntheticScene scene;
    scene.image = GrayImage(width, height, 0.0);
    scene.mask = EdgeMap(width, height, 0);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            if (inside_shape(shape, r, c)) {
                scene.image(r, c) = 1.0;
                scene.mask(r, c) = 1;
            }
    return scene;
}

GrayImage profile_i1(int height) {
    if (height < 1) throw std::invalid_argument("profile_i1: bad height");
    static constexpr double row[24] = {
        0.5, 0.5, 0.45, 0.45,                     // weak edge
        0.0, 0.0, 0.0, 0.7, 0.0, 0.0, 0.0, 0.0,   // isolated bright point
        0.2, 0.5, 0.2, 0.2,                       // jump edge
        0.0, 0.0, 0.0, 0.0, 0.7, 0.7, 0.7, 0.7,   // stair edge
    };
    GrayImage out(24, height);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < 24; ++c) out(r, c) = row[c];
    return out;
}

}  // namespace acseg
