#include "acseg/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <vector>

namespace acseg {

namespace {

// --- PGM ------------------------------------------------------------------

// Next whitespace-delimited token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (!std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            while ((ch = in.peek()) != EOF && !std::isspace(ch) && ch != '#')
                tok.push_back(static_cast<char>(in.get()));
            return tok;
        }
    }
    throw FormatError("pgm: truncated header");
}

int pgm_int(std::istream& in) {
    const std::string tok = pgm_token(in);
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw FormatError("pgm: bad integer '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("pgm: bad integer '" + tok + "'");
    }
}

GrayImage load_pgm(std::istream& in, const std::string& path, int channel) {
    if (channel != 0)
        throw std::invalid_argument("load_image: PGM has a single channel");
    const std::string magic = pgm_token(in);
    if (magic != "P5") throw FormatError(path + ": unsupported PGM magic " + magic);
    const int width = pgm_int(in);
    const int height = pgm_int(in);
    const int maxval = pgm_int(in);
    if (width < 1 || height < 1) throw FormatError(path + ": bad PGM dimensions");
    if (maxval < 1 || maxval > 255)
        throw FormatError(path + ": only 8-bit PGM is supported");
    in.get();  // single whitespace after maxval

    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw FormatError(path + ": truncated PGM data");

    GrayImage img(width, height);
    const double inv = 1.0 / maxval;
    for (std::size_t i = 0; i < raw.size(); ++i) img.values()[i] = raw[i] * inv;
    return img;
}

void save_pgm(const std::vector<unsigned char>& bytes, int width, int height,
              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

// --- PNG ------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

GrayImage load_png(const std::string& path, int channel) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw IoError("cannot open " + path);
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    r.info = png_create_info_struct(r.png);
    if (!r.png || !r.info) throw IoError("png: allocation failure");
    if (setjmp(png_jmpbuf(r.png))) throw FormatError(path + ": corrupt PNG");

    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);
    if (bit_depth == 16)
        throw FormatError(path + ": 16-bit PNG is not supported");
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    png_read_update_info(r.png, r.info);

    const int width = static_cast<int>(png_get_image_width(r.png, r.info));
    const int height = static_cast<int>(png_get_image_height(r.png, r.info));
    const int channels = png_get_channels(r.png, r.info);
    if (channel < 0 || channel >= channels)
        throw std::invalid_argument("load_image: channel out of range");

    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * channels);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = raw.data() + static_cast<std::size_t>(y) * width * channels;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    GrayImage img(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img(y, x) =
                raw[(static_cast<std::size_t>(y) * width + x) * channels + channel] / 255.0;
    return img;
}

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const std::vector<unsigned char>& bytes, int width, int height,
              const std::string& path) {
    PngWriter w;
    w.fp = std::fopen(path.c_str(), "wb");
    if (!w.fp) throw IoError("cannot open " + path + " for writing");
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    w.info = png_create_info_struct(w.png);
    if (!w.png || !w.info) throw IoError("png: allocation failure");
    if (setjmp(png_jmpbuf(w.png))) throw IoError("png: write failed: " + path);

    png_init_io(w.png, w.fp);
    png_set_IHDR(w.png, w.info, width, height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_const_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = bytes.data() + static_cast<std::size_t>(y) * width;
    for (int y = 0; y < height; ++y)
        png_write_row(w.png, const_cast<png_bytep>(rows[y]));
    png_write_end(w.png, nullptr);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void save_bytes(const std::vector<unsigned char>& bytes, int width, int height,
                const std::string& path) {
    if (has_suffix(path, ".pgm") || has_suffix(path, ".pnm"))
        save_pgm(bytes, width, height, path);
    else if (has_suffix(path, ".png"))
        save_png(bytes, width, height, path);
    else
        throw FormatError("save_image: unsupported extension in " + path);
}

}  // namespace

GrayImage load_image(const std::string& path, int channel) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    unsigned char sig[8] = {0};
    probe.read(reinterpret_cast<char*>(sig), 8);
    const std::streamsize got = probe.gcount();
    probe.seekg(0);

    if (got >= 2 && sig[0] == 'P' && sig[1] == '5') return load_pgm(probe, path, channel);
    if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) {
        probe.close();
        return load_png(path, channel);
    }
    throw FormatError(path + ": not a P5 PGM or PNG file");
}

void save_image(const GrayImage& img, const std::string& path) {
    if (img.empty()) throw std::invalid_argument("save_image: empty image");
    std::vector<unsigned char> bytes(img.size());
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = img.values()[i];
        if (v < 0.0 || v > 1.0) ++clamped;
        bytes[i] = static_cast<unsigned char>(std::lround(clamp01(v) * 255.0));
    }
    if (clamped > 0)
        std::cerr << "warning: " << clamped << " sample(s) outside [0,1] clamped while writing "
                  << path << "\n";
    save_bytes(bytes, img.width(), img.height(), path);
}

void save_mask(const EdgeMap& mask, const std::string& path) {
    if (mask.mask.empty()) throw std::invalid_argument("save_mask: empty mask");
    std::vector<unsigned char> bytes(mask.mask.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.mask[i] ? 255 : 0;
    save_bytes(bytes, mask.width, mask.height, path);
}

EdgeMap load_mask(const std::string& path) {
    const GrayImage img = load_image(path);
    return EdgeMap::from_field(img, 128.0 / 255.0);
}

}  // namespace acseg
