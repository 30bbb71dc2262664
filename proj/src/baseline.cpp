#include "acseg/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace acseg {

namespace {

// Differences are grouped as (positive taps) - (negative taps) so constant
// regions give exactly zero.

GrayImage magnitude_roberts(const GrayImage& img) {
    const PaddedImage p = pad_neumann(img, 1);
    GrayImage out(img.width(), img.height());
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) {
            const double gx = p(i, j) - p(i + 1, j + 1);
            const double gy = p(i, j + 1) - p(i + 1, j);
            out(i, j) = std::hypot(gx, gy);
        }
    return out;
}

// side = 1 gives Prewitt, side = 2 Sobel (center tap of each column/row).
GrayImage magnitude_3x3(const GrayImage& img, double side) {
    const PaddedImage p = pad_neumann(img, 1);
    GrayImage out(img.width(), img.height());
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) {
            const double gx = (p(i - 1, j + 1) + side * p(i, j + 1) + p(i + 1, j + 1)) -
                              (p(i - 1, j - 1) + side * p(i, j - 1) + p(i + 1, j - 1));
            const double gy = (p(i + 1, j - 1) + side * p(i + 1, j) + p(i + 1, j + 1)) -
                              (p(i - 1, j - 1) + side * p(i - 1, j) + p(i - 1, j + 1));
            out(i, j) = std::hypot(gx, gy);
        }
    return out;
}

struct SobelField {
    GrayImage gx, gy, mag;
};

SobelField sobel_field(const GrayImage& img) {
    const PaddedImage p = pad_neumann(img, 1);
    SobelField f{GrayImage(img.width(), img.height()),
                 GrayImage(img.width(), img.height()),
                 GrayImage(img.width(), img.height())};
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) {
            const double gx = (p(i - 1, j + 1) + 2.0 * p(i, j + 1) + p(i + 1, j + 1)) -
                              (p(i - 1, j - 1) + 2.0 * p(i, j - 1) + p(i + 1, j - 1));
            const double gy = (p(i + 1, j - 1) + 2.0 * p(i + 1, j) + p(i + 1, j + 1)) -
                              (p(i - 1, j - 1) + 2.0 * p(i - 1, j) + p(i - 1, j + 1));
            f.gx(i, j) = gx;
            f.gy(i, j) = gy;
            f.mag(i, j) = std::hypot(gx, gy);
        }
    return f;
}

}  // namespace

double log_kernel_value(double x, double y, double varsigma) {
    if (!(varsigma > 0.0))
        throw std::invalid_argument("log kernel: varsigma must be positive");
    const double s2 = varsigma * varsigma;
    const double q = (x * x + y * y) / (2.0 * s2);
    return -1.0 / (std::numbers::pi * s2 * s2) * (1.0 - q) * std::exp(-q);
}

GrayImage log_response(const GrayImage& img, double varsigma) {
    const int radius =
        std::min(static_cast<int>(std::ceil(4.0 * varsigma)),
                 std::min(img.width(), img.height()));
    const int n = 2 * radius + 1;
    std::vector<double> kernel(static_cast<std::size_t>(n) * n);
    double mean = 0.0;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const double v = log_kernel_value(dx, dy, varsigma);
            kernel[(dy + radius) * static_cast<std::size_t>(n) + (dx + radius)] = v;
            mean += v;
        }
    mean /= static_cast<double>(kernel.size());
    for (auto& v : kernel) v -= mean;  // exact annihilation of constants

    const PaddedImage p = pad_neumann(img, radius);
    GrayImage out(img.width(), img.height());
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) {
            const double center = p(i, j);
            double sum = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx)
                    sum += kernel[(dy + radius) * static_cast<std::size_t>(n) +
                                  (dx + radius)] *
                           (p(i + dy, j + dx) - center);
            out(i, j) = sum;
        }
    return out;
}

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) return img;
    const int radius = std::min(static_cast<int>(std::ceil(3.0 * sigma)),
                                std::min(img.width(), img.height()));
    std::vector<double> g(radius + 1);
    double norm = 0.0;
    for (int k = 0; k <= radius; ++k) {
        g[k] = std::exp(-0.5 * k * k / (sigma * sigma));
        norm += (k == 0 ? 1.0 : 2.0) * g[k];
    }
    for (auto& v : g) v /= norm;

    const PaddedImage p = pad_neumann(img, radius);
    GrayImage tmp(img.width(), img.height());
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) {
            double s = g[0] * p(i, j);
            for (int k = 1; k <= radius; ++k) s += g[k] * (p(i, j - k) + p(i, j + k));
            tmp(i, j) = s;
        }
    const PaddedImage q = pad_neumann(tmp, radius);
    GrayImage out(img.width(), img.height());
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j) {
            double s = g[0] * q(i, j);
            for (int k = 1; k <= radius; ++k) s += g[k] * (q(i - k, j) + q(i + k, j));
            out(i, j) = s;
        }
    return out;
}

GrayImage gradient_magnitude(const GrayImage& img, BaselineSpec::Operator op) {
    switch (op) {
        case BaselineSpec::Operator::roberts:
            return magnitude_roberts(img);
        case BaselineSpec::Operator::prewitt:
            return magnitude_3x3(img, 1.0);
        case BaselineSpec::Operator::sobel:
            return magnitude_3x3(img, 2.0);
        default:
            throw std::invalid_argument("gradient_magnitude: not a first-difference stencil");
    }
}

EdgeMap gradient_detect(const GrayImage& img, const BaselineSpec& spec) {
    if (spec.threshold < 0.0)
        throw std::invalid_argument("gradient_detect: threshold must be >= 0");
    return EdgeMap::from_field(gradient_magnitude(img, spec.op), spec.threshold);
}

EdgeMap log_detect(const GrayImage& img, double varsigma, double zero_tol) {
    const GrayImage resp = log_response(img, varsigma);
    const PaddedImage p = pad_neumann(resp, 1);
    EdgeMap out(resp.width(), resp.height());
    constexpr int dir[4][2] = {{0, 1}, {0, -1}, {1, 0}, {-1, 0}};
    for (int i = 0; i < resp.height(); ++i)
        for (int j = 0; j < resp.width(); ++j) {
            const double r0 = p(i, j);
            for (const auto& d : dir) {
                const double rn = p(i + d[0], j + d[1]);
                if (r0 * rn < 0.0 && std::abs(r0 - rn) >= zero_tol) {
                    out(i, j) = 1;
                    break;
                }
            }
        }
    return out;
}

EdgeMap canny_detect(const GrayImage& img, double low, double high, double varsigma) {
    if (!(low >= 0.0 && low <= high))
        throw std::invalid_argument("canny_detect: need 0 <= low <= high");
    if (!(varsigma > 0.0))
        throw std::invalid_argument("canny_detect: varsigma must be positive");
    const GrayImage smooth = gaussian_smooth(img, varsigma);
    const SobelField f = sobel_field(smooth);
    const int w = img.width(), h = img.height();
    const PaddedImage mag = pad_neumann(f.mag, 1);

    // Non-maximum suppression along the gradient, quantized to 4 directions.
    // The >=/> asymmetry keeps exactly one pixel of a tied symmetric ridge.
    EdgeMap thin(w, h);
    const double step = std::numbers::pi / 8.0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const double m = f.mag(i, j);
            if (m <= 0.0) continue;
            double ang = std::atan2(f.gy(i, j), f.gx(i, j));
            if (ang < 0.0) ang += std::numbers::pi;
            int dr, dc;
            if (ang < step || ang >= 7.0 * step) {
                dr = 0; dc = 1;
            } else if (ang < 3.0 * step) {
                dr = 1; dc = 1;
            } else if (ang < 5.0 * step) {
                dr = 1; dc = 0;
            } else {
                dr = 1; dc = -1;
            }
            if (m >= mag(i - dr, j - dc) && m > mag(i + dr, j + dc)) thin(i, j) = 1;
        }

    // Hysteresis: grow from strong responses through weak ones, 8-connected.
    EdgeMap out(w, h);
    std::vector<std::pair<int, int>> stack;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            if (thin(i, j) && f.mag(i, j) >= high) {
                out(i, j) = 1;
                stack.emplace_back(i, j);
            }
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                const int ni = i + di, nj = j + dj;
                if (ni < 0 || nj < 0 || ni >= h || nj >= w) continue;
                if (out(ni, nj) || !thin(ni, nj)) continue;
                if (f.mag(ni, nj) >= low) {
                    out(ni, nj) = 1;
                    stack.emplace_back(ni, nj);
                }
            }
    }
    return out;
}

EdgeMap detect_edges_baseline(const GrayImage& img, const BaselineSpec& spec) {
    if (img.empty()) throw std::invalid_argument("detect_edges_baseline: empty image");
    switch (spec.op) {
        case BaselineSpec::Operator::roberts:
        case BaselineSpec::Operator::prewitt:
        case BaselineSpec::Operator::sobel:
            return gradient_detect(img, spec);
        case BaselineSpec::Operator::log:
            return log_detect(img, spec.varsigma, spec.zero_tol);
        case BaselineSpec::Operator::canny:
            return canny_detect(img, spec.low, spec.high, spec.varsigma);
    }
    throw std::invalid_argument("detect_edges_baseline: unknown operator");
}

}  // namespace acseg
