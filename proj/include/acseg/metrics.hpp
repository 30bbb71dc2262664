#ifndef ACSEG_METRICS_HPP
#define ACSEG_METRICS_HPP

#include "acseg/image.hpp"

namespace acseg {

// Mask agreement ratios; a zero denominator yields +infinity rather than
// an exception so sweeps over degenerate cases keep running.
struct MetricReport {
    double fpr = 0.0;  // |S1 - S2|_1 / |S1|_1
    double fnr = 0.0;  // |S1 - S2|_1 / |S2|_1
    double rse = 0.0;  // |S1 - S2|_1 / (|S1|_1 + |S2|_1)
};

// S1 is the reference mask, S2 the computed one.
MetricReport mask_metrics(const EdgeMap& s1, const EdgeMap& s2);

// Relative L1 segmentation error |U - I_exact|_1 / |U|_1.
double seg_error(const GrayImage& u, const GrayImage& exact);

}  // namespace acseg

#endif
