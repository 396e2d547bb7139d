#include "slr/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "slr/errors.hpp"

namespace slr {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return out;
    }
}

void put_double(std::ostream& os, double d) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

double get_double(const char* p) {
    std::uint64_t bits;
    std::memcpy(&bits, p, sizeof bits);
    return std::bit_cast<double>(to_little_endian(bits));
}

std::string label(const std::filesystem::path& path) { return "'" + path.string() + "'"; }

}  // namespace

void write_array(const std::filesystem::path& path, const ComplexImage& img) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + label(path) + " for writing");
    os << "SLR1 " << img.grid().rows() << ' ' << img.grid().cols() << ' ' << to_string(img.domain()) << '\n';
    for (const auto& v : img.values()) {
        put_double(os, v.real());
        put_double(os, v.imag());
    }
    if (!os) throw IoError("failed writing " + label(path));
}

ComplexImage read_array(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + label(path));
    std::string header;
    if (!std::getline(is, header)) throw ParseError("missing header in " + label(path));
    std::istringstream hs(header);
    std::string magic, tag;
    long long rows = 0, cols = 0;
    if (!(hs >> magic >> rows >> cols >> tag) || magic != "SLR1") {
        throw ParseError("corrupt header in " + label(path) + ": '" + header + "'");
    }
    std::string extra;
    if (hs >> extra) throw ParseError("corrupt header in " + label(path) + ": trailing '" + extra + "'");
    Domain domain;
    std::optional<KGrid> grid;
    try {
        domain = parse_domain(tag);
        if (rows > std::numeric_limits<int>::max() || cols > std::numeric_limits<int>::max()) {
            throw ParameterError("dimensions too large");
        }
        grid.emplace(static_cast<int>(rows), static_cast<int>(cols));
    } catch (const Error& e) {
        throw ParseError("corrupt header in " + label(path) + ": " + e.what());
    }
    const std::size_t bytes = grid->size() * 16;
    std::vector<char> buf(bytes);
    is.read(buf.data(), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(is.gcount()) != bytes) {
        throw ParseError("truncated payload in " + label(path) + ": expected " + std::to_string(bytes) + " bytes");
    }
    if (is.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in " + label(path));
    CVector values(grid->size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = {get_double(buf.data() + 16 * i), get_double(buf.data() + 16 * i + 8)};
    }
    return ComplexImage(*grid, domain, std::move(values));
}

void write_mask(const std::filesystem::path& path, const SamplingMask& mask) {
    ComplexImage img(mask.grid, Domain::fourier);
    for (std::size_t i = 0; i < mask.sampled.size(); ++i) img[i] = mask.sampled[i] ? 1.0 : 0.0;
    write_array(path, img);
}

SamplingMask read_mask(const std::filesystem::path& path) {
    const ComplexImage img = read_array(path);
    SamplingMask mask{img.grid(), std::vector<std::uint8_t>(img.grid().size())};
    for (std::size_t i = 0; i < mask.sampled.size(); ++i) {
        const cdouble v = img[i];
        if (v == cdouble(1.0, 0.0)) {
            mask.sampled[i] = 1;
        } else if (v != cdouble(0.0, 0.0)) {
            throw ParseError("mask " + label(path) + " has a value other than 0 or 1 at offset " + std::to_string(i));
        }
    }
    return mask;
}

namespace {

// No C++ objects with destructors may live in this frame: libpng reports
// errors by longjmp.
bool encode_png(FILE* fp, const png_byte* pixels, int rows, int cols) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < rows; ++r) png_write_row(png, pixels + static_cast<std::size_t>(r) * cols);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

PngRange write_png(const std::filesystem::path& path, const ComplexImage& img) {
    const KGrid& g = img.grid();
    PngRange range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    std::vector<double> mag(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        mag[i] = std::abs(img[i]);
        range.min = std::min(range.min, mag[i]);
        range.max = std::max(range.max, mag[i]);
    }
    const double span = range.max - range.min;
    std::vector<png_byte> pixels(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = span > 0.0 ? (mag[i] - range.min) / span : 0.0;
        pixels[i] = static_cast<png_byte>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
    }

    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot open " + label(path) + " for writing");
    if (!encode_png(fp.get(), pixels.data(), g.rows(), g.cols())) {
        throw IoError("libpng failed writing " + label(path));
    }
    return range;
}

}  // namespace slr
