#ifndef ACSEG_NONLOCAL_HPP
#define ACSEG_NONLOCAL_HPP

#include <string>
#include <vector>

#include "acseg/errors.hpp"
#include "acseg/image.hpp"

namespace acseg {

// Radially symmetric kernel with horizon delta (pixels) and strength alpha.
struct KernelSpec {
    int delta = 4;
    double alpha = 1.0;
};

// rho(r) = 2(4-alpha) / (pi delta^{4-alpha} r^alpha) on (0, delta], zero
// beyond the horizon. Normalized so the second moment over the disk is 4.
// r <= 0 throws domain_error.
double kernel_rho(double r, const KernelSpec& spec);

inline constexpr int kDefaultQuadLevel = 4;
// Declared accuracy: weights move by less than this when quad_level doubles.
inline constexpr double kCoeffTolerance = 1e-6;

// Quadrature weights c_{p,q}, 0 <= p,q <= delta, for the discrete operator
//   (L u)_{ij} = sum_{p,q} c_{p,q} (u_{i+p,j+q} + u_{i-p,j+q}
//                                   + u_{i+p,j-q} + u_{i-p,j-q} - 4 u_{ij}).
// Symmetric in (p,q), c_{0,0} = 0. An entry vanishes when the bilinear hat
// at (p,q), supported on [p-1,p+1]x[q-1,q+1], misses the disk entirely;
// hats centered outside the disk but overlapping it keep positive weight.
class CoeffTable {
public:
    CoeffTable() = default;
    CoeffTable(KernelSpec spec, int quad_level, std::vector<double> weights);

    int delta() const noexcept { return spec_.delta; }
    double alpha() const noexcept { return spec_.alpha; }
    int quad_level() const noexcept { return quad_level_; }
    const KernelSpec& spec() const noexcept { return spec_; }

    double at(int p, int q) const noexcept {
        return weights_[static_cast<std::size_t>(p) * (spec_.delta + 1) + q];
    }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    KernelSpec spec_;
    int quad_level_ = 0;
    std::vector<double> weights_;
};

// Builds the weight table by integrating the kernel against bilinear hats
// over the first-quadrant quarter disk. quad_level controls panel counts;
// each increment doubles the subdivision in every direction. For alpha >= 3
// the near-origin integral is verified against one extra refinement and a
// ConvergenceError is thrown if it has not settled to kCoeffTolerance.
CoeffTable compute_coefficients(const KernelSpec& spec,
                                int quad_level = kDefaultQuadLevel);

// Plain-text cache, stamped with delta/alpha/quad_level and the declared
// tolerance. load_coeff_table validates the stamp and table invariants.
void save_coeff_table(const CoeffTable& table, const std::string& path);
CoeffTable load_coeff_table(const std::string& path);

// Cache-aware fetch: reuse a stored table matching (spec, quad_level) from
// cache_dir, otherwise compute and store it. Empty cache_dir disables caching.
CoeffTable load_or_compute_coefficients(const KernelSpec& spec, int quad_level,
                                        const std::string& cache_dir);

// Applies the discrete operator with a mirror halo of width delta.
// threads > 1 splits rows across that many workers.
GrayImage apply_nonlocal_laplacian(const GrayImage& img, const CoeffTable& table,
                                   int threads = 1);

// Edge indicator: 1 where (L u)_{ij} >= sigma.
EdgeMap detect_edges(const GrayImage& img, const CoeffTable& table, double sigma,
                     int threads = 1);
EdgeMap detect_edges(const GrayImage& img, const KernelSpec& spec, double sigma,
                     int quad_level = kDefaultQuadLevel, int threads = 1);

}  // namespace acseg

#endif
