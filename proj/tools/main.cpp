#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acseg/baseline.hpp"
#include "acseg/errors.hpp"
#include "acseg/image.hpp"
#include "acseg/image_io.hpp"
#include "acseg/metrics.hpp"
#include "acseg/nonlocal.hpp"
#include "acseg/segmentation.hpp"

using namespace acseg;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct DetectArgs {
    std::string input, out, method = "nonlocal";
    int channel = 0;
    int delta = 4;
    double alpha = 1.0;
    double sigma = 0.05;
    int quad_level = kDefaultQuadLevel;
    std::string cache_dir;
    double threshold = 0.1;
    double varsigma = 1.0;
    double zero_tol = 1e-3;
    double low = 0.04, high = 0.1;
    int threads = 1;
};

int cmd_detect(const DetectArgs& a) {
    std::printf(
        "[detect] input=%s channel=%d method=%s delta=%d alpha=%g sigma=%g "
        "quad_level=%d cache_dir=%s threshold=%g varsigma=%g zero_tol=%g "
        "low=%g high=%g threads=%d out=%s\n",
        a.input.c_str(), a.channel, a.method.c_str(), a.delta, a.alpha, a.sigma,
        a.quad_level, a.cache_dir.c_str(), a.threshold, a.varsigma, a.zero_tol,
        a.low, a.high, a.threads, a.out.c_str());

    const GrayImage img = load_image(a.input, a.channel);
    const auto t0 = std::chrono::steady_clock::now();
    EdgeMap edges;
    if (a.method == "nonlocal") {
        const CoeffTable table = load_or_compute_coefficients(
            {a.delta, a.alpha}, a.quad_level, a.cache_dir);
        edges = detect_edges(img, table, a.sigma, a.threads);
    } else {
        BaselineSpec spec;
        if (a.method == "roberts")
            spec.op = BaselineSpec::Operator::roberts;
        else if (a.method == "prewitt")
            spec.op = BaselineSpec::Operator::prewitt;
        else if (a.method == "sobel")
            spec.op = BaselineSpec::Operator::sobel;
        else if (a.method == "log")
            spec.op = BaselineSpec::Operator::log;
        else if (a.method == "canny")
            spec.op = BaselineSpec::Operator::canny;
        else
            throw std::invalid_argument("unknown method: " + a.method);
        spec.threshold = a.threshold;
        spec.varsigma = a.varsigma;
        spec.zero_tol = a.zero_tol;
        spec.low = a.low;
        spec.high = a.high;
        edges = detect_edges_baseline(img, spec);
    }
    const double secs = seconds_since(t0);
    save_mask(edges, a.out);
    std::printf("edges=%zu pixels=%zu seconds=%.3f\n", edges.count(),
                edges.mask.size(), secs);
    return 0;
}

struct SegmentArgs {
    std::string input, out_prefix = "seg_";
    int channel = 0;
    std::string scheme = "etd1", init = "nonlocal";
    SegConfig cfg;
    double stabilizer = -1.0;  // <0 keeps the per-stage bound
};

int cmd_segment(const SegmentArgs& a) {
    SegConfig cfg = a.cfg;
    cfg.scheme = a.scheme == "etdrk2" ? Scheme::etdrk2 : Scheme::etd1;
    if (a.init == "nonlocal")
        cfg.init = SegConfig::Init::nonlocal;
    else if (a.init == "threshold")
        cfg.init = SegConfig::Init::threshold;
    else
        cfg.init = SegConfig::Init::mask;
    if (a.stabilizer >= 0.0) cfg.stabilizer = a.stabilizer;

    std::printf(
        "[segment] input=%s channel=%d scheme=%s init=%s eps1_stage=%g "
        "eps2_stage=%g epsilon1=%g lambda1=%g lambda2=%g delta=%d alpha=%g "
        "sigma=%g quad_level=%d cache_dir=%s i0=%g mask=%s dt=%g steady_tol=%g "
        "max_steps=%d outer_tol=%g max_outer=%d stabilizer=%s compare_masks=%d "
        "threads=%d out_prefix=%s\n",
        a.input.c_str(), a.channel, a.scheme.c_str(), a.init.c_str(),
        cfg.stage1_epsilon, cfg.stage2_epsilon, cfg.epsilon1, cfg.lambda1,
        cfg.lambda2, cfg.kernel.delta, cfg.kernel.alpha, cfg.sigma,
        cfg.quad_level, cfg.coeff_cache_dir.c_str(), cfg.threshold_i0,
        cfg.mask_path.c_str(), cfg.dt, cfg.steady_tol, cfg.max_steps,
        cfg.outer_tol, cfg.max_outer,
        cfg.stabilizer ? std::to_string(*cfg.stabilizer).c_str() : "bound",
        cfg.compare_masks ? 1 : 0, cfg.threads, a.out_prefix.c_str());

    const GrayImage img = load_image(a.input, a.channel);
    const SegmentationResult res = segment(img, cfg);
    export_result(res, img, a.out_prefix);
    write_summary(std::cout, res);
    return 0;
}

struct SynthArgs {
    std::string shape = "disk", size = "128x128", out, out_truth;
    double noise_std = 0.0;
    double radius = -1.0;  // <0 picks min(w,h)/3
    std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
    int w = 0, h = 0;
    if (std::sscanf(a.size.c_str(), "%dx%d", &w, &h) != 2 || w < 1 || h < 1)
        throw std::invalid_argument("bad --size, expected WxH");
    std::printf("[synth] shape=%s size=%dx%d noise_std=%g seed=%llu out=%s "
                "out_truth=%s\n",
                a.shape.c_str(), w, h, a.noise_std,
                static_cast<unsigned long long>(a.seed), a.out.c_str(),
                a.out_truth.c_str());

    ShapeSpec shape;
    const double r = a.radius > 0.0 ? a.radius : std::min(w, h) / 3.0;
    if (a.shape == "disk") {
        shape = ShapeSpec::make_disk(0.5 * (w - 1), 0.5 * (h - 1), r);
    } else if (a.shape == "rectangle") {
        shape = ShapeSpec::make_rectangle(h / 4, w / 4, 3 * h / 4, 3 * w / 4);
    } else if (a.shape == "blobs") {
        const double s = std::min(w, h);
        shape = ShapeSpec::make_blobs(
            {ShapeSpec::make_disk(0.30 * w, 0.35 * h, 0.18 * s),
             ShapeSpec::make_disk(0.68 * w, 0.30 * h, 0.12 * s),
             ShapeSpec::make_disk(0.55 * w, 0.70 * h, 0.10 * s)});
    } else {
        throw std::invalid_argument("unknown shape: " + a.shape);
    }

    const SyntheticScene scene = synth_two_phase(w, h, shape);
    const GrayImage noisy =
        a.noise_std > 0.0 ? add_gaussian_noise(scene.image, 0.0, a.noise_std, a.seed)
                          : scene.image;
    save_image(noisy, a.out);
    if (!a.out_truth.empty()) save_mask(scene.mask, a.out_truth);
    std::printf("foreground=%zu pixels=%zu\n", scene.mask.count(),
                scene.mask.mask.size());
    return 0;
}

struct CompareArgs {
    std::string truth, out;
    std::vector<std::string> candidates;
};

int cmd_compare(const CompareArgs& a) {
    std::printf("[compare] truth=%s candidates=%zu out=%s\n", a.truth.c_str(),
                a.candidates.size(), a.out.empty() ? "-" : a.out.c_str());
    const EdgeMap truth_mask = load_mask(a.truth);
    const GrayImage truth_field = truth_mask.to_field();

    std::string csv = "method,fpr,fnr,rse,err,cpu_seconds\n";
    char line[256];
    for (const auto& path : a.candidates) {
        const GrayImage cand = load_image(path);
        const auto t0 = std::chrono::steady_clock::now();
        const MetricReport m =
            mask_metrics(truth_mask, EdgeMap::from_field(cand, 0.5));
        const double err = seg_error(cand, truth_field);
        const double secs = seconds_since(t0);
        std::snprintf(line, sizeof line, "%s,%.6g,%.6g,%.6g,%.6g,%.3f\n",
                      path.c_str(), m.fpr, m.fnr, m.rse, err, secs);
        csv += line;
    }
    if (a.out.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream f(a.out);
        if (!f) throw IoError("cannot open " + a.out + " for writing");
        f << csv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal edge detection and Allen-Cahn two-phase segmentation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value configuration file");

    DetectArgs det;
    CLI::App* d = app.add_subcommand("detect", "detect edges and write a mask");
    d->add_option("input", det.input, "input image (PGM or PNG)")->required();
    d->add_option("--channel", det.channel, "color plane for PNG input");
    d->add_option("--method", det.method, "nonlocal|roberts|prewitt|sobel|log|canny")
        ->check(CLI::IsMember(
            {"nonlocal", "roberts", "prewitt", "sobel", "log", "canny"}));
    d->add_option("--delta", det.delta, "nonlocal horizon (pixels)");
    d->add_option("--alpha", det.alpha, "kernel strength in [0,4)");
    d->add_option("--sigma", det.sigma, "nonlocal firing threshold");
    d->add_option("--quad-level", det.quad_level, "quadrature refinement level");
    d->add_option("--cache-dir", det.cache_dir, "coefficient cache directory");
    d->add_option("--threshold", det.threshold, "gradient magnitude threshold");
    d->add_option("--varsigma", det.varsigma, "Gaussian width for log/canny");
    d->add_option("--zero-tol", det.zero_tol, "log zero-crossing jump tolerance");
    d->add_option("--low", det.low, "canny low threshold");
    d->add_option("--high", det.high, "canny high threshold");
    d->add_option("--threads", det.threads, "worker threads")
        ->envname("ACSEG_THREADS");
    d->add_option("--out", det.out, "output mask path")->required();

    SegmentArgs seg;
    CLI::App* s = app.add_subcommand("segment", "two-stage phase-field segmentation");
    s->add_option("input", seg.input, "input image (PGM or PNG)")->required();
    s->add_option("--channel", seg.channel, "color plane for PNG input");
    s->add_option("--scheme", seg.scheme, "etd1|etdrk2")
        ->check(CLI::IsMember({"etd1", "etdrk2"}));
    s->add_option("--init", seg.init, "nonlocal|threshold|mask")
        ->check(CLI::IsMember({"nonlocal", "threshold", "mask"}));
    s->add_option("--eps1-stage", seg.cfg.stage1_epsilon, "Stage-1 epsilon");
    s->add_option("--eps2-stage", seg.cfg.stage2_epsilon, "Stage-2 epsilon");
    s->add_option("--epsilon1", seg.cfg.epsilon1, "Heaviside/Dirac width");
    s->add_option("--lambda1", seg.cfg.lambda1, "inside fitting weight");
    s->add_option("--lambda2", seg.cfg.lambda2, "outside fitting weight");
    s->add_option("--delta", seg.cfg.kernel.delta, "nonlocal horizon for init");
    s->add_option("--alpha", seg.cfg.kernel.alpha, "kernel strength for init");
    s->add_option("--sigma", seg.cfg.sigma, "nonlocal firing threshold for init");
    s->add_option("--quad-level", seg.cfg.quad_level, "quadrature refinement level");
    s->add_option("--cache-dir", seg.cfg.coeff_cache_dir, "coefficient cache directory");
    s->add_option("--i0", seg.cfg.threshold_i0, "threshold-init level");
    s->add_option("--mask", seg.cfg.mask_path, "mask-init file");
    s->add_option("--dt", seg.cfg.dt, "time step");
    s->add_option("--steady-tol", seg.cfg.steady_tol, "inner steady-state tolerance");
    s->add_option("--max-steps", seg.cfg.max_steps, "inner step cap");
    s->add_option("--outer-tol", seg.cfg.outer_tol, "outer convergence tolerance");
    s->add_option("--max-outer", seg.cfg.max_outer, "outer loop cap");
    s->add_option("--stabilizer", seg.stabilizer,
                  "stabilizing constant (default: per-stage bound)");
    s->add_flag("--compare-masks", seg.cfg.compare_masks,
                "outer test on thresholded masks");
    s->add_option("--threads", seg.cfg.threads, "worker threads")
        ->envname("ACSEG_THREADS");
    s->add_option("--out-prefix", seg.out_prefix, "artifact path prefix");

    SynthArgs syn;
    CLI::App* y = app.add_subcommand("synth", "generate a two-phase test scene");
    y->add_option("--shape", syn.shape, "disk|rectangle|blobs")
        ->check(CLI::IsMember({"disk", "rectangle", "blobs"}));
    y->add_option("--size", syn.size, "canvas WxH");
    y->add_option("--radius", syn.radius, "disk radius (default min(W,H)/3)");
    y->add_option("--noise-std", syn.noise_std, "Gaussian noise level");
    y->add_option("--seed", syn.seed, "noise seed");
    y->add_option("--out", syn.out, "output image")->required();
    y->add_option("--out-truth", syn.out_truth, "ground-truth mask output");

    CompareArgs cmp;
    CLI::App* c = app.add_subcommand("compare", "score candidates against a truth mask");
    c->add_option("truth", cmp.truth, "ground-truth mask")->required();
    c->add_option("candidates", cmp.candidates, "candidate masks or fields")
        ->required();
    c->add_option("--out", cmp.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*d) return cmd_detect(det);
        if (*s) return cmd_segment(seg);
        if (*y) return cmd_synth(syn);
        return cmd_compare(cmp);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
