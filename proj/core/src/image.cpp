#include "wildfire/data/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace wildfire::data {
namespace {

// Consumes PGM header whitespace, including '#' comment lines.
void skip_pgm_space(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

int read_pgm_int(std::istream& in, const std::string& path) {
    skip_pgm_space(in);
    int v = 0;
    if (!(in >> v)) throw ParseError("malformed PGM header in " + path);
    return v;
}

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open image file " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw ParseError("unsupported PGM magic in " + path + " (expected P5)");
    GrayImage img;
    img.width = read_pgm_int(in, path);
    img.height = read_pgm_int(in, path);
    const int maxval = read_pgm_int(in, path);
    if (img.width <= 0 || img.height <= 0)
        throw ParseError("non-positive PGM dimensions in " + path);
    if (maxval != 255)
        throw ParseError("unsupported PGM maxval " + std::to_string(maxval) +
                         " in " + path + " (expected 255)");
    in.get();  // single whitespace byte after the header
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw ParseError("truncated PGM pixel data in " + path);
    img.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = raw[i] / 255.0;
    return img;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

GrayImage read_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ParseError("cannot open image file " + path);

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ParseError("libpng initialization failed for " + path);
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ParseError("libpng initialization failed for " + path);
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<unsigned char> raw;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("corrupt PNG data in " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize every input to 8-bit gray or RGB without alpha.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    GrayImage img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("unsupported PNG channel count " +
                         std::to_string(channels) + " in " + path);
    }
    const std::size_t stride = static_cast<std::size_t>(img.width) * channels;
    raw.resize(stride * img.height);
    row_ptrs.resize(img.height);
    for (int y = 0; y < img.height; ++y) row_ptrs[y] = raw.data() + stride * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (channels == 1) {
            img.pixels[i] = raw[i] / 255.0;
        } else {
            const unsigned char* px = raw.data() + 3 * i;
            img.pixels[i] = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
        }
    }
    return img;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

GrayImage read_gray(const std::string& path) {
    if (has_suffix(path, ".png") || has_suffix(path, ".PNG")) return read_png(path);
    if (has_suffix(path, ".pgm") || has_suffix(path, ".PGM")) return read_pgm(path);
    throw ParseError("unrecognized image extension for " + path +
                     " (expected .pgm or .png)");
}

GrayImage load_gray_image(const std::string& path) {
    GrayImage img = read_gray(path);
    if (img.width != 100 || img.height != 100)
        throw DimensionError("image " + path + " is " + std::to_string(img.width) +
                             "x" + std::to_string(img.height) +
                             ", model input must be 100x100");
    return img;
}

void write_pgm(const std::string& path, int width, int height,
               const std::vector<double>& values) {
    if (width <= 0 || height <= 0)
        throw DimensionError("write_pgm: non-positive raster size");
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw DimensionError("write_pgm: value count " +
                             std::to_string(values.size()) + " does not match " +
                             std::to_string(width) + "x" + std::to_string(height));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write image file " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> raw(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        raw[i] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("short write on image file " + path);
}

}  // namespace wildfire::data
