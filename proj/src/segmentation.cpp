#include "acseg/segmentation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "acseg/errors.hpp"
#include "acseg/image_io.hpp"

namespace acseg {

namespace {

void validate_config(const SegConfig& c) {
    if (!(c.stage2_epsilon > 0.0) || c.stage1_epsilon < c.stage2_epsilon)
        throw std::invalid_argument("SegConfig: need stage1_epsilon >= stage2_epsilon > 0");
    if (!(c.epsilon1 > 0.0 && c.epsilon1 <= 0.5))
        throw std::invalid_argument("SegConfig: epsilon1 must lie in (0, 1/2]");
    if (!(c.dt > 0.0)) throw std::invalid_argument("SegConfig: dt must be positive");
    if (c.max_steps < 1 || c.max_outer < 1)
        throw std::invalid_argument("SegConfig: iteration limits must be >= 1");
}

SolverParams stage_params(const SegConfig& c, double eps) {
    SolverParams p;
    p.epsilon = eps;
    p.epsilon1 = c.epsilon1;
    p.lambda1 = c.lambda1;
    p.lambda2 = c.lambda2;
    p.dt = c.dt;
    p.steady_tol = c.steady_tol;
    p.max_steps = c.max_steps;
    p.stabilizer = c.stabilizer;
    return p;
}

double outer_change(const GrayImage& a, const GrayImage& b, bool compare_masks) {
    double change = 0.0;
    if (compare_masks) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const bool ma = a.values()[i] >= 0.5, mb = b.values()[i] >= 0.5;
            if (ma != mb) return 1.0;
        }
        return 0.0;
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        change = std::max(change, std::abs(a.values()[i] - b.values()[i]));
    return change;
}

}  // namespace

std::pair<double, double> update_means(const GrayImage& u, const GrayImage& img,
                                       double eps1,
                                       std::pair<double, double> previous) {
    if (!u.same_shape(img))
        throw std::invalid_argument("update_means: dimension mismatch");
    double sum_h = 0.0, sum_hi = 0.0, sum_g = 0.0, sum_gi = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double h = heaviside_reg(u.values()[i] - 0.5, eps1);
        const double v = img.values()[i];
        sum_h += h;
        sum_hi += h * v;
        sum_g += 1.0 - h;
        sum_gi += (1.0 - h) * v;
    }
    constexpr double tol = 1e-12;
    const bool ok1 = sum_h >= tol, ok2 = sum_g >= tol;
    if (!ok1 && !ok2)
        throw std::runtime_error("update_means: both phases empty");
    return {ok1 ? sum_hi / sum_h : previous.first,
            ok2 ? sum_gi / sum_g : previous.second};
}

GrayImage initialize(const GrayImage& img, const SegConfig& config) {
    switch (config.init) {
        case SegConfig::Init::nonlocal: {
            const CoeffTable table = load_or_compute_coefficients(
                config.kernel, config.quad_level, config.coeff_cache_dir);
            return detect_edges(img, table, config.sigma, config.threads).to_field();
        }
        case SegConfig::Init::threshold: {
            GrayImage u0(img.width(), img.height());
            for (std::size_t i = 0; i < img.size(); ++i)
                u0.values()[i] = img.values()[i] >= config.threshold_i0 ? 1.0 : 0.0;
            return u0;
        }
        case SegConfig::Init::mask: {
            const EdgeMap m = load_mask(config.mask_path);
            if (m.width != img.width() || m.height != img.height())
                throw std::invalid_argument("initialize: mask dimensions do not match image");
            return m.to_field();
        }
    }
    throw std::invalid_argument("initialize: unknown init mode");
}

SegmentationResult segment(const GrayImage& img, const SegConfig& config) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();

    SegmentationResult res;
    res.phase = initialize(img, config);
    std::pair<double, double> means{1.0, 0.0};

    auto run_stage = [&](const SpectralPlan& plan, const SolverParams& params) {
        const FittingField fit =
            make_fitting_field(img, means.first, means.second, params);
        EvolveResult ev =
            evolve_to_steady(res.phase, fit, plan, params, config.scheme);
        res.phase = std::move(ev.field);
        res.inner_steps.push_back(ev.steps);
        res.diagnostics.push_back(std::move(ev.diagnostics));
        ++res.outer_loops;
        means = update_means(res.phase, img, config.epsilon1, means);
    };

    {
        const SolverParams p1 = stage_params(config, config.stage1_epsilon);
        const SpectralPlan plan1(img.width(), img.height(), p1);
        run_stage(plan1, p1);
    }

    const SolverParams p2 = stage_params(config, config.stage2_epsilon);
    const SpectralPlan plan2(img.width(), img.height(), p2);
    for (int k = 0; k < config.max_outer; ++k) {
        const GrayImage prev = res.phase;
        run_stage(plan2, p2);
        if (outer_change(res.phase, prev, config.compare_masks) < config.outer_tol) {
            res.converged = true;
            break;
        }
    }

    res.c1 = means.first;
    res.c2 = means.second;
    res.mask = EdgeMap::from_field(res.phase, 0.5);
    res.contour = extract_contour(res.phase);
    res.min_u = std::numeric_limits<double>::infinity();
    res.max_u = -res.min_u;
    for (const auto& d : res.diagnostics) {
        res.min_u = std::min(res.min_u, d.min_over_run());
        res.max_u = std::max(res.max_u, d.max_over_run());
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

Contour extract_contour(const GrayImage& u) {
    Contour out;
    const int w = u.width(), h = u.height();
    auto add = [&](int r1, int c1, int r2, int c2) {
        const bool in1 = u(r1, c1) >= 0.5, in2 = u(r2, c2) >= 0.5;
        if (in1 == in2) return;
        if (in1)
            out.push_back({r1, c1, r2, c2});
        else
            out.push_back({r2, c2, r1, c1});
    };
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            if (j + 1 < w) add(i, j, i, j + 1);
            if (i + 1 < h) add(i, j, i + 1, j);
        }
    return out;
}

GrayImage render_overlay(const GrayImage& img, const Contour& contour) {
    GrayImage out = img;
    for (const auto& p : contour) out(p.in_row, p.in_col) = 1.0;
    return out;
}

void write_summary(std::ostream& out, const SegmentationResult& result) {
    char buf[128];
    out << "converged=" << (result.converged ? "true" : "false") << '\n';
    out << "m=" << result.outer_loops << '\n';
    out << "k=";
    for (std::size_t i = 0; i < result.inner_steps.size(); ++i)
        out << (i ? "," : "") << result.inner_steps[i];
    out << '\n';
    std::snprintf(buf, sizeof buf, "c1=%.12g\nc2=%.12g\n", result.c1, result.c2);
    out << buf;
    std::snprintf(buf, sizeof buf, "min=%.6g\n1-max=%.6g\n", result.min_u,
                  1.0 - result.max_u);
    out << buf;
    std::snprintf(buf, sizeof buf, "cpu_seconds=%.3f\n", result.wall_seconds);
    out << buf;
}

void export_result(const SegmentationResult& result, const GrayImage& img,
                   const std::string& prefix) {
    save_mask(result.mask, prefix + "mask.pgm");
    save_image(render_overlay(img, result.contour), prefix + "overlay.png");

    std::ofstream csv(prefix + "diagnostics.csv");
    if (!csv) throw IoError("cannot open " + prefix + "diagnostics.csv for writing");
    csv << "step,energy,min_u,max_u,linf_change\n";
    char line[160];
    int base = 0;
    for (std::size_t d = 0; d < result.diagnostics.size(); ++d) {
        const auto& steps = result.diagnostics[d].steps;
        for (const auto& s : steps) {
            if (d > 0 && s.step == 0) continue;  // initial state already logged
            std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g\n",
                          base + s.step, s.energy, s.min_u, s.max_u, s.linf_change);
            csv << line;
        }
        if (!steps.empty()) base += steps.back().step;
    }
    if (!csv) throw IoError("write failed: " + prefix + "diagnostics.csv");

    std::ofstream txt(prefix + "summary.txt");
    if (!txt) throw IoError("cannot open " + prefix + "summary.txt for writing");
    write_summary(txt, result);
}

}  // namespace acseg
