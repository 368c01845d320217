#include "chromafix/error.hpp"
#include "chromafix/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

namespace chromafix {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept
    {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_extension(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::uint8_t quantize8(double v) noexcept
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// ---- PNG -------------------------------------------------------------------

// libpng reports errors by longjmp. Each setjmp frame below touches only
// objects owned by its caller so nothing in the frame is left indeterminate.
struct PngErrorSlot {
    char message[256] = "libpng error";
};

void png_error_handler(png_structp png, png_const_charp message)
{
    auto* slot = static_cast<PngErrorSlot*>(png_get_error_ptr(png));
    if (slot && message) {
        std::snprintf(slot->message, sizeof slot->message, "%s", message);
    }
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngReadState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int channels = 0;
    std::size_t rowbytes = 0;

    ~PngReadState()
    {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

bool png_read_header(PngReadState& st, std::FILE* file)
{
    if (setjmp(png_jmpbuf(st.png))) return false;
    png_init_io(st.png, file);
    png_read_info(st.png, st.info);
    const int color_type = png_get_color_type(st.png, st.info);
    const int depth = png_get_bit_depth(st.png, st.info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(st.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(st.png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(st.png);
    if (png_get_valid(st.png, st.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(st.png);
    png_set_strip_alpha(st.png);
    png_read_update_info(st.png, st.info);
    st.width = png_get_image_width(st.png, st.info);
    st.height = png_get_image_height(st.png, st.info);
    st.bit_depth = png_get_bit_depth(st.png, st.info);
    st.channels = png_get_channels(st.png, st.info);
    st.rowbytes = png_get_rowbytes(st.png, st.info);
    return true;
}

bool png_read_pixels(PngReadState& st, png_bytepp rows)
{
    if (setjmp(png_jmpbuf(st.png))) return false;
    png_read_image(st.png, rows);
    png_read_end(st.png, nullptr);
    return true;
}

RgbImage decode_png(std::FILE* file, const std::filesystem::path& path)
{
    PngErrorSlot slot;
    PngReadState st;
    st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot, png_error_handler, png_warning_handler);
    if (!st.png) throw Error(ErrorKind::Format, "cannot initialise PNG decoder");
    st.info = png_create_info_struct(st.png);
    if (!st.info) throw Error(ErrorKind::Format, "cannot initialise PNG decoder");

    if (!png_read_header(st, file)) throw Error(ErrorKind::Format, path.string() + ": " + slot.message);
    if (st.width == 0 || st.height == 0) throw Error(ErrorKind::Format, path.string() + ": zero dimensions");
    if (st.channels != 3 || (st.bit_depth != 8 && st.bit_depth != 16)) {
        throw Error(ErrorKind::Format, path.string() + ": unsupported PNG layout");
    }

    std::vector<png_byte> pixels(st.rowbytes * st.height);
    std::vector<png_bytep> rows(st.height);
    for (png_uint_32 y = 0; y < st.height; ++y) rows[y] = pixels.data() + y * st.rowbytes;
    if (!png_read_pixels(st, rows.data())) throw Error(ErrorKind::Format, path.string() + ": " + slot.message);

    const int w = static_cast<int>(st.width);
    const int h = static_cast<int>(st.height);
    const bool wide = st.bit_depth == 16;
    ScalarField r(w, h), g(w, h), b(w, h);
    ScalarField* planes[3] = {&r, &g, &b};
    for (int y = 0; y < h; ++y) {
        const png_byte* src = rows[y];
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const std::size_t i = static_cast<std::size_t>(x) * 3 + c;
                planes[c]->at(x, y) = wide ? ((src[2 * i] << 8) | src[2 * i + 1]) / 65535.0 : src[i] / 255.0;
            }
        }
    }
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

struct PngWriteState {
    png_structp png = nullptr;
    png_infop info = nullptr;

    ~PngWriteState()
    {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

bool png_write_all(PngWriteState& st, std::FILE* file, int w, int h, png_bytepp rows)
{
    if (setjmp(png_jmpbuf(st.png))) return false;
    png_init_io(st.png, file);
    png_set_IHDR(st.png, st.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(st.png, st.info);
    png_write_image(st.png, rows);
    png_write_end(st.png, nullptr);
    return true;
}

void encode_png(const RgbImage& image, std::FILE* file, const std::filesystem::path& path)
{
    const int w = image.width();
    const int h = image.height();
    std::vector<png_byte> pixels(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            png_byte* dst = pixels.data() + (static_cast<std::size_t>(y) * w + x) * 3;
            dst[0] = quantize8(image.red().at(x, y));
            dst[1] = quantize8(image.green().at(x, y));
            dst[2] = quantize8(image.blue().at(x, y));
        }
    }
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * 3;

    PngErrorSlot slot;
    PngWriteState st;
    st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &slot, png_error_handler, png_warning_handler);
    if (!st.png) throw Error(ErrorKind::Io, "cannot initialise PNG encoder");
    st.info = png_create_info_struct(st.png);
    if (!st.info) throw Error(ErrorKind::Io, "cannot initialise PNG encoder");
    if (!png_write_all(st, file, w, h, rows.data())) throw Error(ErrorKind::Io, path.string() + ": " + slot.message);
}

// ---- PPM -------------------------------------------------------------------

class PpmReader {
public:
    explicit PpmReader(std::string bytes) : bytes_(std::move(bytes)) {}

    // Skips whitespace and '#' comments, then parses a decimal integer.
    long header_int()
    {
        for (;;) {
            while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
            if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
                continue;
            }
            break;
        }
        if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            throw Error(ErrorKind::Format, "malformed PPM header");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1L << 30)) throw Error(ErrorKind::Format, "PPM header value too large");
            ++pos_;
        }
        return value;
    }

    void expect_single_whitespace()
    {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw Error(ErrorKind::Format, "malformed PPM header");
        }
        ++pos_;
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    const unsigned char* cursor() const noexcept { return reinterpret_cast<const unsigned char*>(bytes_.data() + pos_); }

private:
    std::string bytes_;
    std::size_t pos_ = 2;
};

RgbImage decode_ppm(std::string bytes)
{
    PpmReader reader(std::move(bytes));
    const long w = reader.header_int();
    const long h = reader.header_int();
    const long maxval = reader.header_int();
    reader.expect_single_whitespace();
    if (w < 1 || h < 1) throw Error(ErrorKind::Format, "PPM has zero dimensions");
    if (maxval < 1 || maxval > 65535) throw Error(ErrorKind::Format, "PPM maxval out of range");

    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const std::size_t needed = static_cast<std::size_t>(w) * h * 3 * sample_bytes;
    if (reader.remaining() < needed) throw Error(ErrorKind::Format, "PPM pixel data truncated");

    const unsigned char* data = reader.cursor();
    const int iw = static_cast<int>(w);
    const int ih = static_cast<int>(h);
    ScalarField r(iw, ih), g(iw, ih), b(iw, ih);
    ScalarField* planes[3] = {&r, &g, &b};
    const double max_value = static_cast<double>(maxval);
    std::size_t i = 0;
    for (int y = 0; y < ih; ++y) {
        for (int x = 0; x < iw; ++x) {
            for (int c = 0; c < 3; ++c) {
                unsigned value = data[i++];
                if (sample_bytes == 2) value = (value << 8) | data[i++];
                planes[c]->at(x, y) = std::min(1.0, value / max_value);
            }
        }
    }
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

void encode_ppm(const RgbImage& image, std::FILE* file, const std::filesystem::path& path)
{
    const int w = image.width();
    const int h = image.height();
    const std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<unsigned char> data(static_cast<std::size_t>(w) * h * 3);
    std::size_t i = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            data[i++] = quantize8(image.red().at(x, y));
            data[i++] = quantize8(image.green().at(x, y));
            data[i++] = quantize8(image.blue().at(x, y));
        }
    }
    if (std::fwrite(header.data(), 1, header.size(), file) != header.size() ||
        std::fwrite(data.data(), 1, data.size(), file) != data.size()) {
        throw Error(ErrorKind::Io, "short write to " + path.string());
    }
}

}  // namespace

RgbImage load_image(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorKind::Io, "cannot read " + path.string());

    static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
        FilePtr file(std::fopen(path.string().c_str(), "rb"));
        if (!file) throw Error(ErrorKind::Io, "cannot open " + path.string());
        return decode_png(file.get(), path);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
        try {
            return decode_ppm(std::move(bytes));
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ": " + e.detail());
        }
    }
    throw Error(ErrorKind::Format, path.string() + ": not a PNG or binary PPM file");
}

void save_image(const RgbImage& image, const std::filesystem::path& path)
{
    FilePtr file(std::fopen(path.string().c_str(), "wb"));
    if (!file) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    if (lower_extension(path) == ".ppm") {
        encode_ppm(image, file.get(), path);
    } else {
        encode_png(image, file.get(), path);
    }
    if (std::fflush(file.get()) != 0) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace chromafix
