#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "acseg/errors.hpp"
#include "acseg/image.hpp"
#include "acseg/nonlocal.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acseg;

namespace {

GrayImage random_image(int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    GrayImage img(width, height);
    for (auto& v : img.values()) v = dist(rng);
    return img;
}

std::string temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_SUITE("nonlocal") {

TEST_CASE("kernel formula") {
    const KernelSpec unit{1, 0.0};
    CHECK(kernel_rho(0.5, unit) == doctest::Approx(8.0 / oracles::kPi).epsilon(1e-14));
    CHECK(kernel_rho(1.0, unit) == doctest::Approx(8.0 / oracles::kPi).epsilon(1e-14));
    CHECK(kernel_rho(1.0 + 1e-12, unit) == 0.0);
    CHECK(kernel_rho(5.0, KernelSpec{4, 1.0}) == 0.0);

    // 2(4-1) / (pi 4^3 r) at r = 2
    CHECK(kernel_rho(2.0, KernelSpec{4, 1.0}) ==
          doctest::Approx(3.0 / (64.0 * oracles::kPi)).epsilon(1e-14));

    CHECK_THROWS_AS(kernel_rho(0.0, unit), std::domain_error);
    CHECK_THROWS_AS(kernel_rho(-1.0, unit), std::domain_error);
}

TEST_CASE("kernel second moment equals the space dimension times two") {
    for (int delta : {3, 4, 5, 6, 7, 8})
        for (double alpha : {0.0, 1.0, 2.0}) {
            const double m = oracles::kernel_second_moment(KernelSpec{delta, alpha});
            CAPTURE(delta);
            CAPTURE(alpha);
            CHECK(std::abs(m - 4.0) <= 1e-6);
        }
    // Singular end of the admissible range, handled by the graded oracle.
    CHECK(std::abs(oracles::kernel_second_moment(KernelSpec{3, 3.5}) - 4.0) <= 1e-6);
}

TEST_CASE("coefficient table structure") {
    const KernelSpec spec{4, 1.0};
    const CoeffTable t = compute_coefficients(spec);
    CHECK(t.delta() == 4);
    CHECK(t.alpha() == 1.0);
    CHECK(t.quad_level() == kDefaultQuadLevel);
    CHECK(t.weights().size() == 25);

    CHECK(t.at(0, 0) == 0.0);
    for (int p = 0; p <= 4; ++p)
        for (int q = 0; q <= 4; ++q) {
            CHECK(std::isfinite(t.at(p, q)));
            CHECK(t.at(p, q) >= 0.0);
            CHECK(t.at(p, q) == t.at(q, p));
            // The hat at (p,q) covers [p-1,p+1]x[q-1,q+1]; only a hat whose
            // support misses the disk entirely is forced to zero.
            const int bp = std::max(p - 1, 0), bq = std::max(q - 1, 0);
            if (bp * bp + bq * bq >= 16) CHECK(t.at(p, q) == 0.0);
        }
    CHECK(t.at(4, 4) == 0.0);
    CHECK(t.at(4, 3) > 0.0);  // centered outside the disk, support overlaps
    CHECK(t.at(1, 0) > 0.0);
}

TEST_CASE("quadratic consistency") {
    const CoeffTable t = compute_coefficients(KernelSpec{4, 1.0});

    SUBCASE("weight identity") {
        double sum = 0.0;
        for (int p = 0; p <= 4; ++p)
            for (int q = 0; q <= 4; ++q) sum += 2.0 * t.at(p, q) * (p * p + q * q);
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("applied to the reference quadratic on a grid") {
        const int n = 64;
        GrayImage img(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                img(i, j) = 0.5 * (i * i + j * j);
        const GrayImage lap = apply_nonlocal_laplacian(img, t);
        for (int i = 4; i < n - 4; ++i)
            for (int j = 4; j < n - 4; ++j) CHECK(std::abs(lap(i, j) - 2.0) <= 1e-2);
    }
}

TEST_CASE("operator linearity and kernels of constants") {
    const CoeffTable t = compute_coefficients(KernelSpec{3, 1.0});
    const GrayImage u = random_image(20, 15, 11);
    const GrayImage v = random_image(20, 15, 12);

    GrayImage lin(20, 15);
    for (std::size_t k = 0; k < lin.size(); ++k)
        lin.values()[k] = 2.5 * u.values()[k] - 0.75 * v.values()[k];

    const GrayImage a = apply_nonlocal_laplacian(lin, t);
    const GrayImage lu = apply_nonlocal_laplacian(u, t);
    const GrayImage lv = apply_nonlocal_laplacian(v, t);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(a.values()[k] ==
              doctest::Approx(2.5 * lu.values()[k] - 0.75 * lv.values()[k])
                  .epsilon(1e-12));

    const GrayImage zero = apply_nonlocal_laplacian(GrayImage(16, 12, 0.8), t);
    for (double val : zero.values()) CHECK(val == 0.0);

    // Odd parts cancel tap by tap, so a ramp is annihilated away from edges.
    GrayImage ramp(16, 16);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) ramp(i, j) = static_cast<double>(i);
    const GrayImage lr = apply_nonlocal_laplacian(ramp, t);
    for (int i = 3; i < 13; ++i)
        for (int j = 0; j < 16; ++j) CHECK(std::abs(lr(i, j)) <= 1e-12);
}

TEST_CASE("folded operator is symmetric negative semidefinite") {
    const CoeffTable t = compute_coefficients(KernelSpec{3, 1.0});
    auto apply = [&](const GrayImage& f) { return apply_nonlocal_laplacian(f, t); };

    for (auto [w, h] : {std::pair{8, 8}, std::pair{9, 7}}) {
        const oracles::Matrix a = oracles::dense_from_operator(apply, w, h);
        CHECK(oracles::max_asymmetry(a) <= 1e-12);
        const std::vector<double> eig = oracles::jacobi_eigenvalues(a);
        for (double l : eig) CHECK(l <= 1e-10);
    }
}

TEST_CASE("quadrature refinement has settled at the default level") {
    const KernelSpec spec{4, 1.0};
    const CoeffTable a = compute_coefficients(spec, kDefaultQuadLevel);
    const CoeffTable b = compute_coefficients(spec, kDefaultQuadLevel + 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.weights().size(); ++k)
        worst = std::max(worst, std::abs(a.weights()[k] - b.weights()[k]));
    CHECK(worst <= kCoeffTolerance);
}

TEST_CASE("strongly singular kernels demand refinement") {
    CHECK_THROWS_AS(compute_coefficients(KernelSpec{3, 3.9}, 1), ConvergenceError);
    CHECK_THROWS_AS(compute_coefficients(KernelSpec{3, 3.5}, 1), ConvergenceError);
    CHECK_NOTHROW(compute_coefficients(KernelSpec{3, 3.0}, 1));
    const CoeffTable ok = compute_coefficients(KernelSpec{3, 3.9}, kDefaultQuadLevel);
    CHECK(ok.at(1, 0) == doctest::Approx(0.43523282).epsilon(1e-6));

    CHECK_THROWS_AS(compute_coefficients(KernelSpec{0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_coefficients(KernelSpec{4, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(compute_coefficients(KernelSpec{4, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(compute_coefficients(KernelSpec{4, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("coefficient cache") {
    const std::string dir = temp_dir("acseg_cache_test");
    const KernelSpec spec{3, 1.5};

    SUBCASE("save/load round trip") {
        const CoeffTable t = compute_coefficients(spec, 3);
        const std::string path = dir + "/roundtrip.txt";
        save_coeff_table(t, path);
        const CoeffTable back = load_coeff_table(path);
        CHECK(back.delta() == t.delta());
        CHECK(back.alpha() == t.alpha());
        CHECK(back.quad_level() == t.quad_level());
        CHECK(back.weights() == t.weights());
    }

    SUBCASE("corrupt file is rejected") {
        const std::string path = dir + "/corrupt.txt";
        std::ofstream(path) << "delta 3\nnonsense\n";
        CHECK_THROWS_AS(load_coeff_table(path), FormatError);
        CHECK_THROWS_AS(load_coeff_table(dir + "/does_not_exist.txt"), IoError);
    }

    SUBCASE("fetch populates and reuses the cache") {
        std::filesystem::remove_all(dir + "/populate");
        const CoeffTable fresh =
            load_or_compute_coefficients(spec, 3, dir + "/populate");
        bool found = false;
        for (const auto& e :
             std::filesystem::directory_iterator(dir + "/populate"))
            found |= e.is_regular_file();
        CHECK(found);
        const CoeffTable cached =
            load_or_compute_coefficients(spec, 3, dir + "/populate");
        CHECK(cached.weights() == fresh.weights());

        // A trashed entry is silently rebuilt.
        for (const auto& e :
             std::filesystem::directory_iterator(dir + "/populate"))
            std::ofstream(e.path()) << "garbage";
        const CoeffTable rebuilt =
            load_or_compute_coefficients(spec, 3, dir + "/populate");
        CHECK(rebuilt.weights() == fresh.weights());
    }

    SUBCASE("empty cache dir computes directly") {
        const CoeffTable t = load_or_compute_coefficients(spec, 3, "");
        CHECK(t.weights() == compute_coefficients(spec, 3).weights());
    }
}

TEST_CASE("edge detection basics") {
    const CoeffTable t = compute_coefficients(KernelSpec{4, 1.0});
    const EdgeMap none = detect_edges(GrayImage(32, 32, 0.0), t, 0.05);
    CHECK(none.count() == 0);

    const GrayImage img = random_image(32, 32, 99);
    const EdgeMap loose = detect_edges(img, t, 0.02);
    const EdgeMap tight = detect_edges(img, t, 0.08);
    CHECK(tight.count() <= loose.count());
    for (std::size_t k = 0; k < tight.mask.size(); ++k)
        if (tight.mask[k]) CHECK(loose.mask[k]);  // firing set shrinks with sigma

    const EdgeMap direct = detect_edges(img, KernelSpec{4, 1.0}, 0.02);
    CHECK(direct.mask == loose.mask);
}

TEST_CASE("profile response windows") {
    const GrayImage prof = profile_i1();
    const EdgeMap fired = detect_edges(prof, KernelSpec{8, 1.0}, 0.02);

    auto any_in = [&](int lo, int hi) {
        for (int j = lo; j <= hi; ++j)
            if (fired(0, j)) return true;
        return false;
    };
    CHECK(any_in(11, 16));   // jump edge
    CHECK(any_in(18, 21));   // stair edge
    CHECK_FALSE(any_in(0, 3));  // weak edge stays quiet

    for (int i = 0; i < fired.height; ++i)
        for (int j = 0; j < fired.width; ++j) CHECK(fired(i, j) == fired(0, j));
}

TEST_CASE("threaded application matches serial") {
    const CoeffTable t = compute_coefficients(KernelSpec{4, 1.0});
    const GrayImage img = random_image(57, 43, 5);
    const GrayImage serial = apply_nonlocal_laplacian(img, t, 1);
    const GrayImage par = apply_nonlocal_laplacian(img, t, 4);
    CHECK(par.values() == serial.values());
    const GrayImage over = apply_nonlocal_laplacian(img, t, 999);  // clamped
    CHECK(over.values() == serial.values());
}

}  // TEST_SUITE
