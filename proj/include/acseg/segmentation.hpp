#ifndef ACSEG_SEGMENTATION_HPP
#define ACSEG_SEGMENTATION_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "acseg/etd.hpp"
#include "acseg/image.hpp"
#include "acseg/nonlocal.hpp"

namespace acseg {

// Two-stage alternating minimization: a large-epsilon solve to clear
// noise-induced clutter, then small-epsilon solves alternated with mean
// updates until the phase field settles.
struct SegConfig {
    double stage1_epsilon = 5.0;
    double stage2_epsilon = 0.1;
    double epsilon1 = 0.5;
    double lambda1 = 1.0;
    double lambda2 = 1.0;

    enum class Init { nonlocal, threshold, mask };
    Init init = Init::nonlocal;
    KernelSpec kernel;                 // nonlocal init
    double sigma = 0.05;
    int quad_level = kDefaultQuadLevel;
    std::string coeff_cache_dir;       // empty disables the cache
    double threshold_i0 = 0.5;         // threshold init: u0 = 1 where I >= I0
    std::string mask_path;             // mask init

    double dt = 0.1;
    double steady_tol = 1e-6;
    int max_steps = 10000;
    double outer_tol = 1e-4;
    int max_outer = 50;
    Scheme scheme = Scheme::etd1;
    std::optional<double> stabilizer;  // per-stage bound when unset
    // Compare thresholded masks instead of the fields in the outer test.
    bool compare_masks = false;
    int threads = 1;
};

// One straddling 4-adjacent pair on the u = 1/2 contour.
struct ContourPair {
    int in_row, in_col;    // the u >= 1/2 member
    int out_row, out_col;  // its neighbor below 1/2
};
using Contour = std::vector<ContourPair>;

struct SegmentationResult {
    GrayImage phase;                        // final u
    EdgeMap mask;                           // u >= 1/2
    Contour contour;
    double c1 = 0.0, c2 = 0.0;
    std::vector<RunDiagnostics> diagnostics;  // one per inner solve
    int outer_loops = 0;                      // m, Stage 1 included
    std::vector<int> inner_steps;             // k_1 ... k_m
    bool converged = false;
    double min_u = 0.0, max_u = 0.0;          // extremes over the whole run
    double wall_seconds = 0.0;
};

// C1 = sum(H I)/sum(H), C2 = sum((1-H) I)/sum(1-H) with H = H_{eps1}(u-1/2).
// A denominator below 1e-12 keeps that mean at its previous value; both
// degenerate throws (u far outside [0,1] or eps1 misconfigured).
std::pair<double, double> update_means(const GrayImage& u, const GrayImage& img,
                                       double eps1,
                                       std::pair<double, double> previous);

// u0 from the configured source: nonlocal edge map, intensity threshold,
// or a mask file (dimensions must match).
GrayImage initialize(const GrayImage& img, const SegConfig& config);

// Runs the full two-stage schedule. Non-convergence sets the flag, never
// throws; the stabilizer is refreshed whenever epsilon changes.
SegmentationResult segment(const GrayImage& img, const SegConfig& config);

// All unordered 4-adjacent pairs straddling 1/2, >=1/2 member first.
Contour extract_contour(const GrayImage& u);

// Copy of img with every >=1/2 contour member set to full intensity.
GrayImage render_overlay(const GrayImage& img, const Contour& contour);

// m, k_i, means, bound deviations, CPU time.
void write_summary(std::ostream& out, const SegmentationResult& result);

// prefix + {mask.pgm, overlay.png, diagnostics.csv, summary.txt}. The CSV
// concatenates the per-loop tables with cumulative step numbers.
void export_result(const SegmentationResult& result, const GrayImage& img,
                   const std::string& prefix);

}  // namespace acseg

#endif
