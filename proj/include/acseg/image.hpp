#ifndef ACSEG_IMAGE_HPP
#define ACSEG_IMAGE_HPP

#include <cstdint>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace acseg {

// Dense grayscale raster with double precision samples, row-major storage.
// Image data loaded from disk lives in [0,1]; intermediate fields may not.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double value = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int row, int col) noexcept {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }
    double operator()(int row, int col) const noexcept {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::vector<double>& values() noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool same_shape(const GrayImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    double min_value() const;
    double max_value() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

using Field = GrayImage;

// Binary raster, values restricted to {0,1}.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    EdgeMap() = default;
    EdgeMap(int w, int h, std::uint8_t value = 0);

    std::uint8_t& operator()(int row, int col) noexcept {
        return mask[static_cast<std::size_t>(row) * width + col];
    }
    std::uint8_t operator()(int row, int col) const noexcept {
        return mask[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t count() const;                 // number of set pixels
    GrayImage to_field() const;                // {0.0, 1.0}
    static EdgeMap from_field(const GrayImage& f, double threshold);  // f >= threshold
};

// Image extended by a mirror halo so stencils can read past the core.
// Coordinates are core coordinates; offsets may reach +-halo outside.
class PaddedImage {
public:
    PaddedImage() = default;
    PaddedImage(GrayImage full, int halo);

    int halo() const noexcept { return halo_; }
    int core_width() const noexcept { return full_.width() - 2 * halo_; }
    int core_height() const noexcept { return full_.height() - 2 * halo_; }

    double operator()(int row, int col) const noexcept {
        return full_(row + halo_, col + halo_);
    }
    const GrayImage& full() const noexcept { return full_; }

private:
    GrayImage full_;
    int halo_ = 0;
};

// Mirror (reflect-at-edge) padding: index -1 maps to 0, -2 to 1, and so on.
// width must not exceed min(img dimensions).
PaddedImage pad_neumann(const GrayImage& img, int width);

// Reflected index into [0,n); |i| may exceed n by at most n.
inline int mirror_index(int i, int n) noexcept {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

inline double clamp01(double v) noexcept { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Affine min-max rescale onto [0,1]; a constant image maps to all zeros.
GrayImage normalize(const GrayImage& img);

// Deterministic standard normal stream (Box-Muller over mt19937_64).
// The engine is specified by the standard, so a fixed seed yields the same
// samples on every platform; std::normal_distribution would not.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
    double operator()();

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// i.i.d. samples mean + std * N(0,1), row-major order, no clamping.
GrayImage gaussian_field(int width, int height, double mean, double std_dev,
                         std::uint64_t seed);

// img + noise, clamped to [0,1]. Same sample stream as gaussian_field.
GrayImage add_gaussian_noise(const GrayImage& img, double mean, double std_dev,
                             std::uint64_t seed);

// Piecewise-constant test scenes with exact foreground masks.
struct ShapeSpec {
    enum class Kind { disk, rectangle, blobs };
    Kind kind = Kind::disk;
    // disk: center (cx, cy) in pixel coordinates, strict radius
    double cx = 0.0, cy = 0.0, radius = 0.0;
    // rectangle: half-open [row0,row1) x [col0,col1)
    int row0 = 0, col0 = 0, row1 = 0, col1 = 0;
    // blobs: union of disks
    std::vector<ShapeSpec> parts;

    static ShapeSpec make_disk(double cx, double cy, double radius);
    static ShapeSpec make_rectangle(int row0, int col0, int row1, int col1);
    static ShapeSpec make_blobs(std::vector<ShapeSpec> disks);
};

struct SyntheticScene {
    GrayImage image;   // foreground 1.0, background 0.0
    EdgeMap mask;
};

// Foreground/background scene; shapes must fit inside the canvas.
SyntheticScene synth_two_phase(int width, int height, const ShapeSpec& shape);

// 24-sample calibration profile replicated over all rows: a weak edge, an
// isolated bright point, a jump edge, and a stair edge.
GrayImage profile_i1(int height = 32);

}  // namespace acseg

#endif
