#include "acseg/etd.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "acseg/errors.hpp"

namespace acseg {

namespace {

constexpr double kPi = std::numbers::pi;

// fftw's planner is not thread-safe; executing plans on distinct arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void check_same_shape(const GrayImage& a, const GrayImage& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

void check_solver_params(const SolverParams& p) {
    if (!(p.epsilon > 0.0))
        throw std::invalid_argument("SolverParams: epsilon must be positive");
    if (!(p.epsilon1 > 0.0 && p.epsilon1 <= 0.5))
        throw std::invalid_argument("SolverParams: epsilon1 must lie in (0, 1/2]");
    if (p.lambda1 < 0.0 || p.lambda2 < 0.0)
        throw std::invalid_argument("SolverParams: fitting weights must be nonnegative");
    if (p.effective_stabilizer() < 0.0)
        throw std::invalid_argument("SolverParams: stabilizer must be nonnegative");
}

}  // namespace

double SolverParams::effective_stabilizer() const {
    if (stabilizer) return *stabilizer;
    return stabilizer_bound(epsilon, epsilon1, lambda1, lambda2);
}

double potential_W(double u) {
    const double s = std::sin(kPi * u);
    return s * s;
}

double potential_w(double u) { return kPi * std::sin(2.0 * kPi * u); }

double heaviside_reg(double u, double eps1) {
    if (!(eps1 > 0.0)) throw std::invalid_argument("heaviside_reg: eps1 must be positive");
    if (u > eps1) return 1.0;
    if (u < -eps1) return 0.0;
    return 0.5 / eps1 * (u + eps1 / kPi * std::sin(kPi * u / eps1)) + 0.5;
}

double dirac_reg(double u, double eps1) {
    if (!(eps1 > 0.0)) throw std::invalid_argument("dirac_reg: eps1 must be positive");
    if (std::abs(u) > eps1) return 0.0;
    return 0.5 / eps1 * (1.0 + std::cos(kPi * u / eps1));
}

double stabilizer_bound(double eps, double eps1, double lambda1, double lambda2) {
    if (!(eps > 0.0 && eps1 > 0.0))
        throw std::invalid_argument("stabilizer_bound: eps and eps1 must be positive");
    const double lambda = std::max(lambda1, lambda2);
    return 2.0 * kPi * kPi / eps + 2.0 * lambda * kPi / (eps1 * eps1);
}

double phi(int k, double a) {
    if (k < 0 || k > 2) throw std::domain_error("phi: k must be 0, 1 or 2");
    if (!(a >= 0.0)) throw std::domain_error("phi: a must be nonnegative");
    switch (k) {
        case 0:
            return std::exp(-a);
        case 1:
            // (1 - e^-a)/a via expm1; no cancellation anywhere on a > 0.
            return a == 0.0 ? 1.0 : -std::expm1(-a) / a;
        default: {
            if (a >= 0.5) return (a + std::expm1(-a)) / (a * a);
            // (e^-a - 1 + a)/a^2 cancels below ~0.5; use the series
            // sum_j (-a)^j/(j+2)!, truncation error < 0.5^18/20! ~ 1e-24.
            static constexpr auto series = [] {
                std::array<double, 18> c{};
                double fact = 2.0;
                for (std::size_t j = 0; j < c.size(); ++j) {
                    c[j] = 1.0 / fact;
                    fact *= static_cast<double>(j + 3);
                }
                return c;
            }();
            double r = series.back();
            for (int j = static_cast<int>(series.size()) - 2; j >= 0; --j)
                r = series[j] - a * r;
            return r;
        }
    }
}

FittingField make_fitting_field(const GrayImage& img, double c1, double c2,
                                const SolverParams& params) {
    FittingField f;
    f.fit1 = GrayImage(img.width(), img.height());
    f.fit2 = GrayImage(img.width(), img.height());
    f.values = GrayImage(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = img.values()[i];
        const double a = params.lambda1 * (c1 - v) * (c1 - v);
        const double b = params.lambda2 * (c2 - v) * (c2 - v);
        f.fit1.values()[i] = a;
        f.fit2.values()[i] = b;
        f.values.values()[i] = a - b;
    }
    return f;
}

GrayImage nonlinear_term(const GrayImage& u, const FittingField& fitting,
                         const SolverParams& params) {
    check_same_shape(u, fitting.values, "nonlinear_term");
    const double s = params.effective_stabilizer();
    const double inv_eps = 1.0 / params.epsilon;
    GrayImage out(u.width(), u.height());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u.values()[i];
        out.values()[i] = s * v - inv_eps * potential_w(v) -
                          fitting.values.values()[i] * dirac_reg(v - 0.5, params.epsilon1);
    }
    return out;
}

GrayImage apply_dh(const GrayImage& u) {
    const int w = u.width(), h = u.height();
    GrayImage out(w, h);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const double c = u(i, j);
            const double up = u(mirror_index(i - 1, h), j);
            const double dn = u(mirror_index(i + 1, h), j);
            const double lf = u(i, mirror_index(j - 1, w));
            const double rt = u(i, mirror_index(j + 1, w));
            out(i, j) = up + dn + lf + rt - 4.0 * c;
        }
    return out;
}

// --- spectral plan ----------------------------------------------------------

struct SpectralPlan::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    double* buf_in = nullptr;
    double* buf_out = nullptr;
};

SpectralPlan::SpectralPlan(int width, int height, const SolverParams& params)
    : width_(width), height_(height) {
    if (width < 2 || height < 2)
        throw std::invalid_argument("SpectralPlan: grid must be at least 2x2");
    if (!(params.epsilon > 0.0))
        throw std::invalid_argument("SpectralPlan: epsilon must be positive");
    epsilon_ = params.epsilon;
    stabilizer_ = params.effective_stabilizer();

    eigen_.resize(static_cast<std::size_t>(width) * height);
    for (int l = 0; l < height; ++l) {
        const double sy = std::sin(0.5 * kPi * l / height);
        for (int k = 0; k < width; ++k) {
            const double sx = std::sin(0.5 * kPi * k / width);
            eigen_[static_cast<std::size_t>(l) * width + k] =
                8.0 * epsilon_ * (sx * sx + sy * sy) + stabilizer_;
        }
    }

    const std::size_t n = eigen_.size();
    impl_ = new Impl;
    impl_->buf_in = fftw_alloc_real(n);
    impl_->buf_out = fftw_alloc_real(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // UNALIGNED lets the plan run on arbitrary caller arrays later.
    impl_->fwd = fftw_plan_r2r_2d(height, width, impl_->buf_in, impl_->buf_out,
                                  FFTW_REDFT10, FFTW_REDFT10,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl_->inv = fftw_plan_r2r_2d(height, width, impl_->buf_in, impl_->buf_out,
                                  FFTW_REDFT01, FFTW_REDFT01,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!impl_->fwd || !impl_->inv) throw std::runtime_error("SpectralPlan: fftw planning failed");
}

SpectralPlan::~SpectralPlan() {
    if (!impl_) return;
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->inv) fftw_destroy_plan(impl_->inv);
    fftw_free(impl_->buf_in);
    fftw_free(impl_->buf_out);
    delete impl_;
}

SpectralPlan::SpectralPlan(SpectralPlan&& other) noexcept
    : width_(other.width_), height_(other.height_), epsilon_(other.epsilon_),
      stabilizer_(other.stabilizer_), eigen_(std::move(other.eigen_)),
      impl_(other.impl_) {
    other.impl_ = nullptr;
}

SpectralPlan& SpectralPlan::operator=(SpectralPlan&& other) noexcept {
    if (this != &other) {
        std::swap(width_, other.width_);
        std::swap(height_, other.height_);
        std::swap(epsilon_, other.epsilon_);
        std::swap(stabilizer_, other.stabilizer_);
        eigen_.swap(other.eigen_);
        std::swap(impl_, other.impl_);
    }
    return *this;
}

void SpectralPlan::forward(const GrayImage& in, std::vector<double>& coeffs) const {
    if (in.width() != width_ || in.height() != height_)
        throw std::invalid_argument("SpectralPlan::forward: dimension mismatch");
    coeffs.resize(eigen_.size());
    fftw_execute_r2r(impl_->fwd, const_cast<double*>(in.data()), coeffs.data());
}

void SpectralPlan::inverse(const std::vector<double>& coeffs, GrayImage& out) const {
    if (coeffs.size() != eigen_.size())
        throw std::invalid_argument("SpectralPlan::inverse: coefficient count mismatch");
    if (out.width() != width_ || out.height() != height_)
        out = GrayImage(width_, height_);
    fftw_execute_r2r(impl_->inv, const_cast<double*>(coeffs.data()), out.data());
    const double scale = 1.0 / (4.0 * static_cast<double>(width_) * height_);
    for (auto& v : out.values()) v *= scale;
}

GrayImage SpectralPlan::apply_lh(const GrayImage& u) const {
    std::vector<double> coeffs;
    forward(u, coeffs);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= eigen_[i];
    GrayImage out;
    inverse(coeffs, out);
    return out;
}

// --- steppers ---------------------------------------------------------------

namespace {

struct EtdTables {
    std::vector<double> phi0, dtphi1, dtphi2;
};

EtdTables make_tables(const SpectralPlan& plan, double dt, bool with_phi2) {
    if (!(dt > 0.0)) throw std::invalid_argument("etd step: dt must be positive");
    const auto& ev = plan.eigenvalues();
    EtdTables t;
    t.phi0.resize(ev.size());
    t.dtphi1.resize(ev.size());
    if (with_phi2) t.dtphi2.resize(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) {
        const double a = dt * ev[i];
        t.phi0[i] = phi(0, a);
        t.dtphi1[i] = dt * phi(1, a);
        if (with_phi2) t.dtphi2[i] = dt * phi(2, a);
    }
    return t;
}

struct Workspace {
    std::vector<double> uh, nh, nh2;
    GrayImage nbuf, ubuf;
};

void nonlinear_into(const GrayImage& u, const FittingField& fitting,
                    const SolverParams& params, double s, GrayImage& out) {
    if (!out.same_shape(u)) out = GrayImage(u.width(), u.height());
    const double inv_eps = 1.0 / params.epsilon;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u.values()[i];
        out.values()[i] = s * v - inv_eps * potential_w(v) -
                          fitting.values.values()[i] * dirac_reg(v - 0.5, params.epsilon1);
    }
}

void etd1_into(const GrayImage& u, const FittingField& fitting, const SpectralPlan& plan,
               const SolverParams& params, const EtdTables& t, Workspace& ws,
               GrayImage& out) {
    nonlinear_into(u, fitting, params, plan.stabilizer(), ws.nbuf);
    plan.forward(u, ws.uh);
    plan.forward(ws.nbuf, ws.nh);
    for (std::size_t i = 0; i < ws.uh.size(); ++i)
        ws.uh[i] = t.phi0[i] * ws.uh[i] + t.dtphi1[i] * ws.nh[i];
    plan.inverse(ws.uh, out);
}

void etdrk2_into(const GrayImage& u, const FittingField& fitting, const SpectralPlan& plan,
                 const SolverParams& params, const EtdTables& t, Workspace& ws,
                 GrayImage& out) {
    // predictor by ETD1; ws.uh keeps its transform for the corrector
    etd1_into(u, fitting, plan, params, t, ws, ws.ubuf);
    nonlinear_into(ws.ubuf, fitting, params, plan.stabilizer(), ws.nbuf);
    plan.forward(ws.nbuf, ws.nh2);
    for (std::size_t i = 0; i < ws.uh.size(); ++i)
        ws.uh[i] += t.dtphi2[i] * (ws.nh2[i] - ws.nh[i]);
    plan.inverse(ws.uh, out);
}

void check_plan(const GrayImage& u, const SpectralPlan& plan) {
    if (u.width() != plan.width() || u.height() != plan.height())
        throw std::invalid_argument("etd step: plan does not match field dimensions");
}

}  // namespace

GrayImage etd1_step(const GrayImage& u, const FittingField& fitting,
                    const SpectralPlan& plan, const SolverParams& params) {
    check_plan(u, plan);
    check_same_shape(u, fitting.values, "etd1_step");
    check_solver_params(params);
    const EtdTables t = make_tables(plan, params.dt, false);
    Workspace ws;
    GrayImage out;
    etd1_into(u, fitting, plan, params, t, ws, out);
    return out;
}

GrayImage etdrk2_step(const GrayImage& u, const FittingField& fitting,
                      const SpectralPlan& plan, const SolverParams& params) {
    check_plan(u, plan);
    check_same_shape(u, fitting.values, "etdrk2_step");
    check_solver_params(params);
    const EtdTables t = make_tables(plan, params.dt, true);
    Workspace ws;
    GrayImage out;
    etdrk2_into(u, fitting, plan, params, t, ws, out);
    return out;
}

// --- energy -----------------------------------------------------------------

double discrete_energy(const GrayImage& u, const FittingField& fitting,
                       const SolverParams& params) {
    check_same_shape(u, fitting.values, "discrete_energy");
    const double inv_eps = 1.0 / params.epsilon;
    double pointwise = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u.values()[i];
        const double hv = heaviside_reg(v - 0.5, params.epsilon1);
        pointwise += inv_eps * potential_W(v) + fitting.fit2.values()[i] +
                     fitting.values.values()[i] * hv;
    }
    const GrayImage dhu = apply_dh(u);
    double quad = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) quad += u.values()[i] * dhu.values()[i];
    return pointwise - params.epsilon * quad;
}

double discrete_energy(const GrayImage& u, double c1, double c2, const GrayImage& img,
                       const SolverParams& params) {
    check_same_shape(u, img, "discrete_energy");
    return discrete_energy(u, make_fitting_field(img, c1, c2, params), params);
}

// --- diagnostics ------------------------------------------------------------

double RunDiagnostics::min_over_run() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : steps) m = std::min(m, s.min_u);
    return m;
}

double RunDiagnostics::max_over_run() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : steps) m = std::max(m, s.max_u);
    return m;
}

void RunDiagnostics::write_csv(std::ostream& out) const {
    out << "step,energy,min_u,max_u,linf_change\n";
    char line[160];
    for (const auto& s : steps) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g\n", s.step,
                      s.energy, s.min_u, s.max_u, s.linf_change);
        out << line;
    }
}

void RunDiagnostics::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_csv(out);
    if (!out) throw IoError("write failed: " + path);
}

// --- evolution --------------------------------------------------------------

EvolveResult evolve_to_steady(const GrayImage& u0, const FittingField& fitting,
                              const SpectralPlan& plan, const SolverParams& params,
                              Scheme scheme) {
    check_plan(u0, plan);
    check_same_shape(u0, fitting.values, "evolve_to_steady");
    check_solver_params(params);
    if (params.max_steps < 1)
        throw std::invalid_argument("evolve_to_steady: max_steps must be >= 1");
    const double energy_slack = scheme == Scheme::etd1 ? 1e-9 : 1e-6;

    const auto t0 = std::chrono::steady_clock::now();
    const EtdTables tables = make_tables(plan, params.dt, scheme == Scheme::etdrk2);
    Workspace ws;

    EvolveResult res;
    res.field = u0;
    res.diagnostics.steps.push_back({0, discrete_energy(u0, fitting, params),
                                     u0.min_value(), u0.max_value(), 0.0});

    GrayImage next(u0.width(), u0.height());
    for (int n = 1; n <= params.max_steps; ++n) {
        if (scheme == Scheme::etd1)
            etd1_into(res.field, fitting, plan, params, tables, ws, next);
        else
            etdrk2_into(res.field, fitting, plan, params, tables, ws, next);

        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i)
            change = std::max(change,
                              std::abs(next.values()[i] - res.field.values()[i]));
        res.field.values().swap(next.values());
        res.steps = n;
        res.diagnostics.steps.push_back({n, discrete_energy(res.field, fitting, params),
                                         res.field.min_value(), res.field.max_value(),
                                         change});
        if (params.strict_energy) {
            const auto& st = res.diagnostics.steps;
            if (st[n].energy > st[n - 1].energy + energy_slack)
                throw std::runtime_error("evolve_to_steady: energy rose at step " +
                                         std::to_string(n));
        }
        if (change < params.steady_tol) {
            res.converged = true;
            break;
        }
    }
    res.diagnostics.converged = res.converged;
    res.diagnostics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

double transformed_equivalence_check(const GrayImage& u0, const FittingField& fitting,
                                     const SpectralPlan& plan, const SolverParams& params,
                                     int steps) {
    check_plan(u0, plan);
    check_same_shape(u0, fitting.values, "transformed_equivalence_check");
    check_solver_params(params);
    const EtdTables tables = make_tables(plan, params.dt, false);
    const double s = plan.stabilizer();
    const double inv_eps = 1.0 / params.epsilon;
    Workspace ws, wst;

    GrayImage u = u0;
    GrayImage ut(u0.width(), u0.height());
    for (std::size_t i = 0; i < u0.size(); ++i)
        ut.values()[i] = 2.0 * u0.values()[i] - 1.0;

    // N~(V) = S V - (2/eps) w~(V) - 2 f delta(V/2) with w~(v) = -pi sin(pi v),
    // the double-well derivative after the affine change of variables.
    GrayImage nt(u0.width(), u0.height());
    GrayImage unext, utnext;
    double dev = 0.0;
    for (int n = 1; n <= steps; ++n) {
        etd1_into(u, fitting, plan, params, tables, ws, unext);
        u.values().swap(unext.values());

        for (std::size_t i = 0; i < ut.size(); ++i) {
            const double v = ut.values()[i];
            nt.values()[i] = s * v + 2.0 * inv_eps * kPi * std::sin(kPi * v) -
                             2.0 * fitting.values.values()[i] *
                                 dirac_reg(0.5 * v, params.epsilon1);
        }
        plan.forward(ut, wst.uh);
        plan.forward(nt, wst.nh);
        for (std::size_t i = 0; i < wst.uh.size(); ++i)
            wst.uh[i] = tables.phi0[i] * wst.uh[i] + tables.dtphi1[i] * wst.nh[i];
        plan.inverse(wst.uh, utnext);
        ut.values().swap(utnext.values());

        for (std::size_t i = 0; i < u.size(); ++i)
            dev = std::max(dev,
                           std::abs(ut.values()[i] - (2.0 * u.values()[i] - 1.0)));
    }
    return dev;
}

}  // namespace acseg
