#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <png.h>

#include "acseg/errors.hpp"
#include "acseg/image.hpp"
#include "acseg/image_io.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acseg;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Minimal RGB PNG writer so channel extraction can be exercised.
void write_rgb_png(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& rgb) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(height);
    for (int r = 0; r < height; ++r)
        rows[r] = const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(r) * width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

TEST_SUITE("image") {

TEST_CASE("gray image construction and validation") {
    GrayImage img(3, 2, 0.25);
    CHECK(img.width() == 3);
    CHECK(img.height() == 2);
    CHECK(img.size() == 6);
    for (double v : img.values()) CHECK(v == 0.25);
    img(1, 2) = 0.5;
    CHECK(img.values()[5] == 0.5);

    CHECK(GrayImage().empty());
    CHECK_THROWS_AS(GrayImage(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(4, -1), std::invalid_argument);
    CHECK_THROWS_AS(EdgeMap(0, 3), std::invalid_argument);
}

TEST_CASE("edge map count and field conversions") {
    EdgeMap m(4, 3);
    CHECK(m.count() == 0);
    m(0, 0) = 1;
    m(2, 3) = 1;
    CHECK(m.count() == 2);

    const GrayImage f = m.to_field();
    CHECK(f(0, 0) == 1.0);
    CHECK(f(0, 1) == 0.0);
    CHECK(f(2, 3) == 1.0);

    const EdgeMap back = EdgeMap::from_field(f, 0.5);
    CHECK(back.mask == m.mask);

    GrayImage g(2, 1);
    g(0, 0) = 0.5;
    g(0, 1) = 0.4999;
    const EdgeMap t = EdgeMap::from_field(g, 0.5);  // threshold is inclusive
    CHECK(t(0, 0) == 1);
    CHECK(t(0, 1) == 0);
}

TEST_CASE("pgm byte mapping") {
    // 3x1 P5, maxval 255, samples 0 128 255.
    const std::string path = temp_path("acseg_bytes.pgm");
    write_bytes(path, std::string("P5\n3 1\n255\n") + '\0' + char(128) + char(255));
    const GrayImage img = load_image(path);
    CHECK(img.width() == 3);
    CHECK(img.height() == 1);
    CHECK(img(0, 0) == 0.0);
    CHECK(img(0, 1) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
    CHECK(img(0, 2) == 1.0);
}

TEST_CASE("save/load round trip stays within half a quantization step") {
    GrayImage img(13, 9);
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j)
            img(i, j) = 0.5 + 0.5 * std::sin(0.7 * i + 1.3 * j);

    for (const char* name : {"acseg_rt.pgm", "acseg_rt.png"}) {
        const std::string path = temp_path(name);
        save_image(img, path);
        const GrayImage back = load_image(path);
        REQUIRE(back.same_shape(img));
        double worst = 0.0;
        for (std::size_t k = 0; k < img.size(); ++k)
            worst = std::max(worst, std::abs(back.values()[k] - img.values()[k]));
        CHECK(worst <= 0.5 / 255.0 + 1e-12);
    }
}

TEST_CASE("rgb png channel extraction") {
    const std::string path = temp_path("acseg_rgb.png");
    // 2x1: pixel 0 = (255, 0, 64), pixel 1 = (0, 128, 255)
    write_rgb_png(path, 2, 1, {255, 0, 64, 0, 128, 255});
    CHECK(load_image(path, 0)(0, 0) == 1.0);
    CHECK(load_image(path, 1)(0, 1) == doctest::Approx(128.0 / 255.0));
    CHECK(load_image(path, 2)(0, 0) == doctest::Approx(64.0 / 255.0));
    CHECK_THROWS_AS(load_image(path, 4), std::invalid_argument);

    // Grayscale files only expose channel 0.
    GrayImage g(2, 2, 0.5);
    const std::string gray = temp_path("acseg_gray.png");
    save_image(g, gray);
    CHECK_NOTHROW(load_image(gray, 0));
    CHECK_THROWS_AS(load_image(gray, 1), std::invalid_argument);
}

TEST_CASE("io failure modes") {
    CHECK_THROWS_AS(load_image(temp_path("acseg_missing_file.pgm")), IoError);
    const std::string junk = temp_path("acseg_junk.pgm");
    write_bytes(junk, "not an image at all");
    CHECK_THROWS_AS(load_image(junk), FormatError);
    GrayImage img(2, 2, 0.5);
    CHECK_THROWS_AS(save_image(img, "/nonexistent_dir_zz/x.pgm"), IoError);
    CHECK_THROWS_AS(save_image(img, temp_path("acseg_bad.tiff")), FormatError);
}

TEST_CASE("mask io round trip") {
    EdgeMap m(5, 4);
    m(0, 0) = 1;
    m(3, 4) = 1;
    m(2, 2) = 1;
    const std::string path = temp_path("acseg_mask.pgm");
    save_mask(m, path);
    const EdgeMap back = load_mask(path);
    CHECK(back.mask == m.mask);

    // Loading maps >=128 to 1, below to 0.
    const std::string soft = temp_path("acseg_soft.pgm");
    write_bytes(soft, std::string("P5\n3 1\n255\n") + char(127) + char(128) + char(255));
    const EdgeMap sm = load_mask(soft);
    CHECK(sm(0, 0) == 0);
    CHECK(sm(0, 1) == 1);
    CHECK(sm(0, 2) == 1);
}

TEST_CASE("neumann padding follows the mirror rule") {
    GrayImage row(3, 1);
    row(0, 0) = 1.0;
    row(0, 1) = 2.0;
    row(0, 2) = 3.0;
    const PaddedImage p = pad_neumann(row, 1);
    CHECK(p.halo() == 1);
    CHECK(p(0, -1) == 1.0);
    CHECK(p(0, 0) == 1.0);
    CHECK(p(0, 1) == 2.0);
    CHECK(p(0, 2) == 3.0);
    CHECK(p(0, 3) == 3.0);

    SUBCASE("width zero is the identity") {
        const PaddedImage q = pad_neumann(row, 0);
        CHECK(q.core_width() == 3);
        CHECK(q.full().width() == 3);
        CHECK(q(0, 1) == 2.0);
    }

    SUBCASE("constant images pad to the same constant") {
        GrayImage c(4, 3, 0.7);
        const PaddedImage q = pad_neumann(c, 3);
        for (double v : q.full().values()) CHECK(v == 0.7);
    }

    SUBCASE("deep halo mirrors back across the whole core") {
        GrayImage sq(2, 2);
        sq(0, 0) = 5.0;
        sq(0, 1) = 9.0;
        sq(1, 0) = 2.0;
        sq(1, 1) = 4.0;
        const PaddedImage q = pad_neumann(sq, 2);
        CHECK(q(0, -2) == 9.0);
        CHECK(q(0, -1) == 5.0);
        CHECK(q(0, 2) == 9.0);
        CHECK(q(0, 3) == 5.0);
        CHECK(q(-2, 0) == 2.0);
        CHECK(q(3, 1) == 9.0);
    }

    CHECK_THROWS_AS(pad_neumann(row, 2), std::invalid_argument);  // 2 > height
    CHECK_THROWS_AS(pad_neumann(row, -1), std::invalid_argument);
}

TEST_CASE("mirror index") {
    CHECK(mirror_index(0, 5) == 0);
    CHECK(mirror_index(4, 5) == 4);
    CHECK(mirror_index(-1, 5) == 0);
    CHECK(mirror_index(-3, 5) == 2);
    CHECK(mirror_index(5, 5) == 4);
    CHECK(mirror_index(7, 5) == 2);
}

TEST_CASE("normalize") {
    GrayImage img(2, 2);
    img(0, 0) = -1.0;
    img(0, 1) = 0.0;
    img(1, 0) = 1.0;
    img(1, 1) = 3.0;
    const GrayImage n = normalize(img);
    CHECK(n(0, 0) == 0.0);
    CHECK(n(0, 1) == doctest::Approx(0.25));
    CHECK(n(1, 0) == doctest::Approx(0.5));
    CHECK(n(1, 1) == 1.0);

    const GrayImage flat = normalize(GrayImage(3, 3, 0.4));
    for (double v : flat.values()) CHECK(v == 0.0);
}

TEST_CASE("gaussian noise is deterministic and degenerate at zero std") {
    GrayImage img(17, 11);
    for (std::size_t k = 0; k < img.size(); ++k)
        img.values()[k] = 0.5 + 0.3 * std::sin(0.11 * static_cast<double>(k));

    const GrayImage same = add_gaussian_noise(img, 0.0, 0.0, 7);
    CHECK(same.values() == img.values());

    const GrayImage a = add_gaussian_noise(img, 0.0, 0.2, 42);
    const GrayImage b = add_gaussian_noise(img, 0.0, 0.2, 42);
    CHECK(a.values() == b.values());
    const GrayImage c = add_gaussian_noise(img, 0.0, 0.2, 43);
    CHECK(a.values() != c.values());

    CHECK_THROWS_AS(add_gaussian_noise(img, 0.0, -0.1, 1), std::invalid_argument);
}

TEST_CASE("gaussian sample statistics match the requested moments") {
    const int n = 400 * 300;  // 1.2e5 samples
    const GrayImage field = gaussian_field(400, 300, 0.0, 0.2, 1234);
    double sum = 0.0, sq = 0.0;
    for (double v : field.values()) {
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double std_dev = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 0.2 * 0.05);
    CHECK(std::abs(std_dev - 0.2) < 0.2 * 0.05);
}

TEST_CASE("synthetic scenes") {
    SUBCASE("zero radius disk is empty") {
        const SyntheticScene s =
            synth_two_phase(16, 16, ShapeSpec::make_disk(8.0, 8.0, 0.0));
        CHECK(s.mask.count() == 0);
        CHECK(s.image.max_value() == 0.0);
    }

    SUBCASE("full rectangle fills the canvas") {
        const SyntheticScene s =
            synth_two_phase(8, 6, ShapeSpec::make_rectangle(0, 0, 6, 8));
        CHECK(s.mask.count() == 48);
        CHECK(s.image.min_value() == 1.0);
    }

    SUBCASE("disk pixel count is within a perimeter of the area") {
        const double r = 20.0;
        const SyntheticScene s =
            synth_two_phase(64, 64, ShapeSpec::make_disk(31.5, 31.5, r));
        const double area = oracles::kPi * r * r;
        const double perimeter = 2.0 * oracles::kPi * r;
        CHECK(std::abs(static_cast<double>(s.mask.count()) - area) <= perimeter);
    }

    SUBCASE("image equals mask exactly") {
        const SyntheticScene s = synth_two_phase(
            32, 32,
            ShapeSpec::make_blobs({ShapeSpec::make_disk(10, 10, 5),
                                   ShapeSpec::make_disk(22, 20, 6)}));
        CHECK(s.mask.count() > 0);
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j)
                CHECK(s.image(i, j) == (s.mask(i, j) ? 1.0 : 0.0));
    }

    SUBCASE("shapes exceeding the canvas are rejected") {
        CHECK_THROWS_AS(synth_two_phase(16, 16, ShapeSpec::make_disk(8, 8, 9)),
                        std::invalid_argument);
        CHECK_THROWS_AS(synth_two_phase(16, 16, ShapeSpec::make_rectangle(0, 0, 17, 4)),
                        std::invalid_argument);
        CHECK_THROWS_AS(synth_two_phase(16, 16, ShapeSpec::make_disk(8, 8, -1)),
                        std::invalid_argument);
    }
}

TEST_CASE("calibration profile") {
    const GrayImage p = profile_i1();
    CHECK(p.width() == 24);
    CHECK(p.height() == 32);
    CHECK(p(0, 0) == 0.5);
    CHECK(p(0, 7) == 0.7);
    CHECK(p(0, 2) == 0.45);
    CHECK(p(0, 12) == 0.2);
    CHECK(p(0, 13) == 0.5);
    CHECK(p(0, 20) == 0.7);
    for (int i = 1; i < p.height(); ++i)
        for (int j = 0; j < p.width(); ++j) CHECK(p(i, j) == p(0, j));

    const GrayImage q = profile_i1(3);
    CHECK(q.height() == 3);
    CHECK_THROWS_AS(profile_i1(0), std::invalid_argument);
}

}  // TEST_SUITE
