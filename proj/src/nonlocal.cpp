#include "acseg/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace acseg {

namespace {

constexpr double kGlNode[4] = {-0.8611363115940526, -0.3399810435848563,
                               0.3399810435848563, 0.8611363115940526};
constexpr double kGlWeight[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};

// Composite 4-point Gauss-Legendre rule; f(node, weight) per node.
template <typename F>
void composite_gl(double a, double b, int panels, F&& f) {
    if (!(b > a)) return;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < 4; ++k)
            f(mid + 0.5 * h * kGlNode[k], 0.5 * h * kGlWeight[k]);
    }
}

class WeightAccumulator {
public:
    explicit WeightAccumulator(int delta)
        : n_(delta + 1), w_(static_cast<std::size_t>(n_) * n_, 0.0) {}

    // Scatters `val` at point (x,y) of cell [a,a+1]x[b,b+1] onto the cell's
    // four hat corners. The (0,0) entry is pinned to zero by definition, so
    // its (potentially singular) share is dropped at the source.
    void add(int a, int b, double x, double y, double val) {
        const double xi = x - a, eta = y - b;
        scatter(a, b, (1.0 - xi) * (1.0 - eta) * val);
        scatter(a + 1, b, xi * (1.0 - eta) * val);
        scatter(a, b + 1, (1.0 - xi) * eta * val);
        scatter(a + 1, b + 1, xi * eta * val);
    }

    std::vector<double> take() && { return std::move(w_); }

private:
    void scatter(int p, int q, double v) {
        if (p == 0 && q == 0) return;
        w_[static_cast<std::size_t>(p) * n_ + q] += v;
    }

    int n_;
    std::vector<double> w_;
};

struct QuadContext {
    int delta;
    double alpha;
    double knorm;  // kernel prefactor
    int panels;
    WeightAccumulator* acc;
};

// The table is assembled over the half sweep b <= a; every point is mirrored
// across the diagonal so c_{p,q} = c_{q,p} holds by construction. The
// integrand itself is symmetric under (x,y) -> (y,x).
void scatter_pair(QuadContext& ctx, int a, int b, double x, double y, double val) {
    if (a == b) {
        ctx.acc->add(a, b, x, y, 0.5 * val);
        ctx.acc->add(a, b, y, x, 0.5 * val);
    } else {
        ctx.acc->add(a, b, x, y, val);
        ctx.acc->add(b, a, y, x, val);
    }
}

// rho(r) * (x^2+y^2)/(x+y) without the horizon branch; quadrature nodes are
// inside the disk by construction.
double integrand(const QuadContext& ctx, double x, double y) {
    const double r2 = x * x + y * y;
    return ctx.knorm * std::pow(r2, -0.5 * ctx.alpha) * r2 / (x + y);
}

void interior_cell(QuadContext& ctx, int a, int b) {
    composite_gl(a, a + 1.0, ctx.panels, [&](double x, double wx) {
        composite_gl(b, b + 1.0, ctx.panels, [&](double y, double wy) {
            scatter_pair(ctx, a, b, x, y, integrand(ctx, x, y) * wx * wy);
        });
    });
}

// Cell cut by the arc x^2 + y^2 = delta^2. In the swept half (b <= a) the
// arc slope satisfies |dx/dy| <= 1, so rows y = const are clipped at
// x = sqrt(delta^2 - y^2). Row panels split where the arc meets the cell's
// vertical edges to keep each panel smooth.
void crossing_cell(QuadContext& ctx, int a, int b) {
    const double d2 = static_cast<double>(ctx.delta) * ctx.delta;
    const double x0 = a, x1 = a + 1.0, y0 = b, y1 = b + 1.0;
    const double yfull = d2 > x1 * x1 ? std::sqrt(d2 - x1 * x1) : 0.0;
    const double yempty = d2 > x0 * x0 ? std::sqrt(d2 - x0 * x0) : 0.0;
    const double brk1 = std::clamp(yfull, y0, y1);
    const double brk2 = std::clamp(yempty, y0, y1);

    auto row = [&](double y, double wy) {
        const double xm = std::min(x1, std::sqrt(std::max(0.0, d2 - y * y)));
        composite_gl(x0, xm, ctx.panels, [&](double x, double wx) {
            scatter_pair(ctx, a, b, x, y, integrand(ctx, x, y) * wx * wy);
        });
    };
    composite_gl(y0, brk1, ctx.panels, row);
    composite_gl(brk1, brk2, ctx.panels, row);
}

// Unit cell at the origin, where rho is singular. Polar coordinates with the
// grading r = R(theta) u^m keep the rule accurate for every alpha < 4; the
// exponent grows as alpha approaches 4.
void origin_cell(QuadContext& ctx) {
    const int m = std::max(2, static_cast<int>(std::ceil(4.0 / (4.0 - ctx.alpha))));
    auto wedge = [&](double th_lo, double th_hi) {
        composite_gl(th_lo, th_hi, ctx.panels, [&](double th, double wth) {
            const double c = std::cos(th), s = std::sin(th);
            double radius = ctx.delta;
            if (c * radius > 1.0) radius = 1.0 / c;
            if (s * radius > 1.0) radius = 1.0 / s;
            composite_gl(0.0, 1.0, ctx.panels, [&](double u, double wu) {
                const double r = radius * std::pow(u, m);
                // integrand * jacobian reduces to rho(r) r^2/(cos+sin) dr dth
                const double dr = m * radius * std::pow(u, m - 1);
                const double val = ctx.knorm * std::pow(r, 2.0 - ctx.alpha) /
                                   (c + s) * dr * wu * wth;
                scatter_pair(ctx, 0, 0, r * c, r * s, val);
            });
        });
    };
    wedge(0.0, 0.25 * std::numbers::pi);
    wedge(0.25 * std::numbers::pi, 0.5 * std::numbers::pi);
}

std::vector<double> integrate_table(const KernelSpec& spec, int quad_level) {
    WeightAccumulator acc(spec.delta);
    QuadContext ctx{spec.delta, spec.alpha,
                    2.0 * (4.0 - spec.alpha) /
                        (std::numbers::pi * std::pow(spec.delta, 4.0 - spec.alpha)),
                    1 << quad_level, &acc};

    for (int a = 0; a < spec.delta; ++a)
        for (int b = 0; b <= a; ++b) {
            if (a * a + b * b >= spec.delta * spec.delta) continue;  // outside
            if (a == 0 && b == 0) {
                origin_cell(ctx);
                continue;
            }
            const bool inside =
                (a + 1) * (a + 1) + (b + 1) * (b + 1) <= spec.delta * spec.delta;
            if (inside)
                interior_cell(ctx, a, b);
            else
                crossing_cell(ctx, a, b);
        }

    std::vector<double> w = std::move(acc).take();
    for (int p = 0; p <= spec.delta; ++p)
        for (int q = 0; q <= spec.delta; ++q) {
            double& v = w[static_cast<std::size_t>(p) * (spec.delta + 1) + q];
            if (p == 0 && q == 0)
                v = 0.0;
            else
                v *= static_cast<double>(p + q) / static_cast<double>(p * p + q * q);
        }
    return w;
}

void validate_spec(const KernelSpec& spec) {
    if (spec.delta < 1)
        throw std::invalid_argument("kernel: delta must be a positive integer");
    if (!(spec.alpha >= 0.0 && spec.alpha < 4.0))
        throw std::invalid_argument("kernel: alpha must lie in [0,4)");
}

std::string cache_name(const KernelSpec& spec, int quad_level) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "coeff_d%d_a%.6g_q%d.txt", spec.delta,
                  spec.alpha, quad_level);
    return buf;
}

}  // namespace

double kernel_rho(double r, const KernelSpec& spec) {
    validate_spec(spec);
    if (!(r > 0.0)) throw std::domain_error("kernel_rho: r must be positive");
    if (r > spec.delta) return 0.0;
    return 2.0 * (4.0 - spec.alpha) /
           (std::numbers::pi * std::pow(spec.delta, 4.0 - spec.alpha)) *
           std::pow(r, -spec.alpha);
}

CoeffTable::CoeffTable(KernelSpec spec, int quad_level, std::vector<double> weights)
    : spec_(spec), quad_level_(quad_level), weights_(std::move(weights)) {
    const std::size_t n = static_cast<std::size_t>(spec_.delta + 1);
    if (weights_.size() != n * n)
        throw std::invalid_argument("CoeffTable: weight count mismatch");
}

CoeffTable compute_coefficients(const KernelSpec& spec, int quad_level) {
    validate_spec(spec);
    if (quad_level < 1 || quad_level > 10)
        throw std::invalid_argument("compute_coefficients: quad_level must be in [1,10]");

    std::vector<double> w = integrate_table(spec, quad_level);
    if (spec.alpha >= 3.0) {
        // The origin integral converges slowly here; require a settled value.
        const std::vector<double> refined = integrate_table(spec, quad_level + 1);
        double diff = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            diff = std::max(diff, std::abs(w[i] - refined[i]));
        if (diff > kCoeffTolerance)
            throw ConvergenceError(
                "compute_coefficients: quadrature not converged at this quad_level "
                "(alpha >= 3); increase quad_level");
        w = refined;
    }
    return CoeffTable(spec, quad_level, std::move(w));
}

void save_coeff_table(const CoeffTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "acseg-coeff-v1\n";
    out << "delta " << table.delta() << "\n";
    out << "alpha " << std::setprecision(17) << table.alpha() << "\n";
    out << "quad_level " << table.quad_level() << "\n";
    out << "tolerance " << kCoeffTolerance << "\n";
    const int n = table.delta() + 1;
    out << "weights " << n * n << "\n";
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q)
            out << table.at(p, q) << (q + 1 < n ? ' ' : '\n');
    }
    if (!out) throw IoError("write failed: " + path);
}

CoeffTable load_coeff_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    std::getline(in, magic);
    if (magic != "acseg-coeff-v1")
        throw FormatError(path + ": unrecognized coefficient table header");

    KernelSpec spec;
    int quad_level = 0;
    double tolerance = 0.0;
    std::size_t count = 0;
    std::string key;
    while (in >> key) {
        if (key == "delta") in >> spec.delta;
        else if (key == "alpha") in >> spec.alpha;
        else if (key == "quad_level") in >> quad_level;
        else if (key == "tolerance") in >> tolerance;
        else if (key == "weights") {
            in >> count;
            break;
        } else {
            throw FormatError(path + ": unknown field '" + key + "'");
        }
    }
    if (!in) throw FormatError(path + ": truncated header");
    if (spec.delta < 1 || !(spec.alpha >= 0.0 && spec.alpha < 4.0) || quad_level < 1)
        throw FormatError(path + ": invalid table parameters");
    const std::size_t n = static_cast<std::size_t>(spec.delta + 1);
    if (count != n * n) throw FormatError(path + ": weight count mismatch");

    std::vector<double> w(count);
    for (auto& v : w)
        if (!(in >> v)) throw FormatError(path + ": truncated weight data");

    // Structural invariants of a valid table.
    if (w[0] != 0.0) throw FormatError(path + ": c(0,0) must be zero");
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) {
            const double a = w[p * n + q], b = w[q * n + p];
            if (!std::isfinite(a) || std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw FormatError(path + ": weight table is not symmetric");
        }
    return CoeffTable(spec, quad_level, std::move(w));
}

CoeffTable load_or_compute_coefficients(const KernelSpec& spec, int quad_level,
                                        const std::string& cache_dir) {
    validate_spec(spec);
    if (cache_dir.empty()) return compute_coefficients(spec, quad_level);

    namespace fs = std::filesystem;
    const fs::path path = fs::path(cache_dir) / cache_name(spec, quad_level);
    std::error_code ec;
    if (fs::exists(path, ec)) {
        try {
            CoeffTable cached = load_coeff_table(path.string());
            if (cached.delta() == spec.delta && cached.alpha() == spec.alpha &&
                cached.quad_level() == quad_level)
                return cached;
        } catch (const FormatError&) {
            // stale or corrupt cache entry; fall through and rebuild
        }
    }
    CoeffTable table = compute_coefficients(spec, quad_level);
    fs::create_directories(cache_dir, ec);
    save_coeff_table(table, path.string());
    return table;
}

GrayImage apply_nonlocal_laplacian(const GrayImage& img, const CoeffTable& table,
                                   int threads) {
    if (img.empty())
        throw std::invalid_argument("apply_nonlocal_laplacian: empty image");
    const int delta = table.delta();
    const PaddedImage pad = pad_neumann(img, delta);
    const int height = img.height(), width = img.width();
    GrayImage out(width, height);

    auto rows = [&](int r0, int r1) {
        for (int i = r0; i < r1; ++i)
            for (int j = 0; j < width; ++j) {
                const double center4 = 4.0 * pad(i, j);
                double sum = 0.0;
                for (int p = 0; p <= delta; ++p)
                    for (int q = 0; q <= delta; ++q) {
                        const double c = table.at(p, q);
                        if (c == 0.0) continue;
                        sum += c * (pad(i + p, j + q) + pad(i - p, j + q) +
                                    pad(i + p, j - q) + pad(i - p, j - q) - center4);
                    }
                out(i, j) = sum;
            }
    };

    const int nt = std::clamp(threads, 1, height);
    if (nt == 1) {
        rows(0, height);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (height + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const int r0 = t * chunk, r1 = std::min(height, r0 + chunk);
            if (r0 < r1) pool.emplace_back(rows, r0, r1);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

EdgeMap detect_edges(const GrayImage& img, const CoeffTable& table, double sigma,
                     int threads) {
    const GrayImage lap = apply_nonlocal_laplacian(img, table, threads);
    return EdgeMap::from_field(lap, sigma);
}

EdgeMap detect_edges(const GrayImage& img, const KernelSpec& spec, double sigma,
                     int quad_level, int threads) {
    return detect_edges(img, compute_coefficients(spec, quad_level), sigma, threads);
}

}  // namespace acseg
