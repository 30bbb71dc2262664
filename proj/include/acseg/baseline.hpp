#ifndef ACSEG_BASELINE_HPP
#define ACSEG_BASELINE_HPP

#include "acseg/image.hpp"

namespace acseg {

// Classical edge detectors used as comparison baselines.
struct BaselineSpec {
    enum class Operator { roberts, prewitt, sobel, log, canny };
    Operator op = Operator::sobel;

    double threshold = 0.1;  // gradient magnitude cut (roberts/prewitt/sobel)
    double varsigma = 1.0;   // Gaussian width (log kernel scale, canny smoothing)
    double zero_tol = 1e-3;  // log zero-crossing tolerance
    double low = 0.04;       // canny hysteresis thresholds
    double high = 0.1;
};

// Single-threshold first-difference detectors (roberts/prewitt/sobel).
EdgeMap gradient_detect(const GrayImage& img, const BaselineSpec& spec);

// Laplacian-of-Gaussian with zero-crossing against axis neighbors.
EdgeMap log_detect(const GrayImage& img, double varsigma, double zero_tol);

// Gaussian smoothing, Sobel gradient, 4-direction non-maximum suppression,
// dual-threshold hysteresis with 8-connectivity.
EdgeMap canny_detect(const GrayImage& img, double low, double high, double varsigma);

// Dispatch on spec.op.
EdgeMap detect_edges_baseline(const GrayImage& img, const BaselineSpec& spec);

// First-difference magnitude field for the named stencil family.
GrayImage gradient_magnitude(const GrayImage& img, BaselineSpec::Operator op);

// Continuous Laplacian-of-Gaussian value at (x, y).
double log_kernel_value(double x, double y, double varsigma);

// Response of the sampled, zero-mean LoG kernel truncated at ceil(4 varsigma).
GrayImage log_response(const GrayImage& img, double varsigma);

// Separable Gaussian blur with mirror boundary, radius ceil(3 sigma).
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

}  // namespace acseg

#endif
