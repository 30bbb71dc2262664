#include "acseg/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace acseg {

MetricReport mask_metrics(const EdgeMap& s1, const EdgeMap& s2) {
    if (s1.width != s2.width || s1.height != s2.height)
        throw std::invalid_argument("mask_metrics: dimension mismatch");
    double diff = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < s1.mask.size(); ++i) {
        const int a = s1.mask[i], b = s2.mask[i];
        diff += std::abs(a - b);
        n1 += a;
        n2 += b;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    MetricReport r;
    r.fpr = n1 > 0.0 ? diff / n1 : inf;
    r.fnr = n2 > 0.0 ? diff / n2 : inf;
    r.rse = n1 + n2 > 0.0 ? diff / (n1 + n2) : inf;
    return r;
}

double seg_error(const GrayImage& u, const GrayImage& exact) {
    if (!u.same_shape(exact))
        throw std::invalid_argument("seg_error: dimension mismatch");
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        diff += std::abs(u.values()[i] - exact.values()[i]);
        norm += std::abs(u.values()[i]);
    }
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    return diff / norm;
}

}  // namespace acseg
