#ifndef ACSEG_ETD_HPP
#define ACSEG_ETD_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "acseg/image.hpp"

namespace acseg {

// Parameters of the phase-field relaxation
//   u_t = 2 eps Lap(u) - (1/eps) w(u) - f delta_{eps1}(u - 1/2).
struct SolverParams {
    double epsilon = 0.1;    // interface scale
    double epsilon1 = 0.5;   // Heaviside/Dirac regularization width, in (0, 1/2]
    double lambda1 = 1.0;    // fitting weights
    double lambda2 = 1.0;
    double dt = 0.1;
    double steady_tol = 1e-6;  // max-norm change declaring steady state
    int max_steps = 10000;
    // Stabilizing shift; defaults to stabilizer_bound of the other fields.
    std::optional<double> stabilizer;
    // Abort evolve_to_steady if the recorded energy ever rises beyond the
    // per-scheme slack (1e-9 for etd1, 1e-6 for etdrk2).
    bool strict_energy = false;

    double effective_stabilizer() const;
};

enum class Scheme { etd1, etdrk2 };

// Double-well potential W(u) = sin^2(pi u) and its derivative.
double potential_W(double u);
double potential_w(double u);

// Smoothed Heaviside/Dirac pair of width eps1.
double heaviside_reg(double u, double eps1);
double dirac_reg(double u, double eps1);

// Lipschitz bound L = 2 pi^2/eps + 2 max(lambda) pi/eps1^2 of the forcing.
// stabilizer >= L preserves the [0,1] bound; >= L/2 keeps ETD1 energy decay.
double stabilizer_bound(double eps, double eps1, double lambda1, double lambda2);

// phi_0(a) = e^-a, phi_1(a) = (1-e^-a)/a, phi_2(a) = (e^-a - 1 + a)/a^2,
// evaluated to full precision for a >= 0 (k in {0,1,2}).
double phi(int k, double a);

// Chan-Vese fitting field f = lambda1 (C1-I)^2 - lambda2 (C2-I)^2 with the
// two one-sided terms kept for energy evaluation.
struct FittingField {
    GrayImage values;  // fit1 - fit2
    GrayImage fit1;    // lambda1 (C1 - I)^2
    GrayImage fit2;    // lambda2 (C2 - I)^2
};
FittingField make_fitting_field(const GrayImage& img, double c1, double c2,
                                const SolverParams& params);

// N(U) = S U - (1/eps) w(U) - f delta_{eps1}(U - 1/2).
GrayImage nonlinear_term(const GrayImage& u, const FittingField& fitting,
                         const SolverParams& params);

// Five-point Laplacian with mirror-ghost Neumann closure (h = 1).
GrayImage apply_dh(const GrayImage& u);

// Diagonalization of L_h = -2 eps D_h + S Id by the even cosine transform.
// Half-sample cosine modes encode the mirror boundary exactly, so forward
// followed by inverse reproduces the field to machine precision.
class SpectralPlan {
public:
    SpectralPlan(int width, int height, const SolverParams& params);
    ~SpectralPlan();
    SpectralPlan(SpectralPlan&&) noexcept;
    SpectralPlan& operator=(SpectralPlan&&) noexcept;
    SpectralPlan(const SpectralPlan&) = delete;
    SpectralPlan& operator=(const SpectralPlan&) = delete;

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double epsilon() const noexcept { return epsilon_; }
    double stabilizer() const noexcept { return stabilizer_; }

    // eigenvalue of L_h for cosine mode (k, l), zero-based
    double eigenvalue(int l, int k) const noexcept {
        return eigen_[static_cast<std::size_t>(l) * width_ + k];
    }
    const std::vector<double>& eigenvalues() const noexcept { return eigen_; }

    void forward(const GrayImage& in, std::vector<double>& coeffs) const;
    void inverse(const std::vector<double>& coeffs, GrayImage& out) const;

    // L_h applied through the transform; used for cross checks.
    GrayImage apply_lh(const GrayImage& u) const;

private:
    int width_ = 0, height_ = 0;
    double epsilon_ = 0.0, stabilizer_ = 0.0;
    std::vector<double> eigen_;
    struct Impl;
    Impl* impl_ = nullptr;  // fftw plans and planning buffers
};

// One exponential step U_t + L_h U = N(U); first order and its two-stage
// Runge-Kutta refinement. Inputs in [0,1] stay in [0,1] when the stabilizer
// dominates the forcing Lipschitz constant.
GrayImage etd1_step(const GrayImage& u, const FittingField& fitting,
                    const SpectralPlan& plan, const SolverParams& params);
GrayImage etdrk2_step(const GrayImage& u, const FittingField& fitting,
                      const SpectralPlan& plan, const SolverParams& params);

// Interface + fitting energy of the segmentation functional on the grid.
double discrete_energy(const GrayImage& u, const FittingField& fitting,
                       const SolverParams& params);
double discrete_energy(const GrayImage& u, double c1, double c2,
                       const GrayImage& img, const SolverParams& params);

struct StepRecord {
    int step;
    double energy;
    double min_u;
    double max_u;
    double linf_change;
};

struct RunDiagnostics {
    std::vector<StepRecord> steps;  // step 0 row holds the initial state
    bool converged = false;
    double wall_seconds = 0.0;

    double min_over_run() const;
    double max_over_run() const;
    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;
};

struct EvolveResult {
    GrayImage field;
    int steps = 0;
    bool converged = false;
    RunDiagnostics diagnostics;
};

// Fixed-point march to steady state: stops when the max-norm step change
// drops below steady_tol or after max_steps (flagged, not fatal).
EvolveResult evolve_to_steady(const GrayImage& u0, const FittingField& fitting,
                              const SpectralPlan& plan, const SolverParams& params,
                              Scheme scheme);

// Runs `steps` ETD1 steps in the native [0,1] variables and in the shifted
// [-1,1] variables (same stabilizer), and returns the largest discrepancy
// max_n |U~^n - (2 U^n - 1)| seen along the way.
double transformed_equivalence_check(const GrayImage& u0, const FittingField& fitting,
                                     const SpectralPlan& plan,
                                     const SolverParams& params, int steps);

}  // namespace acseg

#endif
