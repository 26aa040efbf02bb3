#include "quanvnet/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "quanvnet/errors.h"

namespace quanvnet {

namespace {

using Bytes = std::vector<unsigned char>;

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw IngestionError("cannot load image '" + path.string() + "': " + what);
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(path, "file not found or unreadable");
    }
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

double luma(double r, double g, double b) { return std::round(0.299 * r + 0.587 * g + 0.114 * b); }

/// Collapses interleaved 8-bit samples with `channels` per pixel (1 gray, 2 gray+alpha, 3 rgb, 4 rgba).
GrayImage collapse(std::size_t height, std::size_t width, std::size_t channels, const unsigned char* data) {
    std::vector<double> pixels(height * width);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const unsigned char* p = data + i * channels;
        pixels[i] = channels >= 3 ? luma(p[0], p[1], p[2]) : static_cast<double>(p[0]);
    }
    return GrayImage(height, width, std::move(pixels));
}

GrayImage decode_png(const std::filesystem::path& path, const Bytes& bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        fail(path, std::string("corrupt PNG: ") + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t channels = color ? 3 : 1;
    Bytes buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        fail(path, "corrupt PNG: " + message);
    }
    return collapse(image.height, image.width, channels, buffer.data());
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

GrayImage decode_jpeg(const std::filesystem::path& path, const Bytes& bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    Bytes buffer;
    std::size_t height = 0, width = 0, channels = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        fail(path, std::string("corrupt JPEG: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);
    height = cinfo.output_height;
    width = cinfo.output_width;
    channels = static_cast<std::size_t>(cinfo.output_components);
    buffer.resize(height * width * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return collapse(height, width, channels, buffer.data());
}

GrayImage decode_pnm(const std::filesystem::path& path, const Bytes& bytes) {
    const char kind = static_cast<char>(bytes[1]);
    const bool color = kind == '3' || kind == '6';
    const bool ascii = kind == '2' || kind == '3';
    std::size_t pos = 2;
    auto next_token = [&]() -> std::size_t {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t value = 0;
        bool any = false;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            value = value * 10 + (bytes[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) {
            fail(path, "malformed PNM header");
        }
        return value;
    };
    const std::size_t width = next_token();
    const std::size_t height = next_token();
    const std::size_t maxval = next_token();
    if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
        fail(path, "unsupported PNM dimensions or depth");
    }
    const std::size_t channels = color ? 3 : 1;
    Bytes samples(width * height * channels);
    if (ascii) {
        for (auto& s : samples) {
            s = static_cast<unsigned char>(next_token());
        }
    } else {
        ++pos;  // single whitespace after maxval
        if (bytes.size() < pos + samples.size()) {
            fail(path, "truncated PNM data");
        }
        std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), samples.size(), samples.begin());
    }
    GrayImage img = collapse(height, width, channels, samples.data());
    if (maxval != 255) {
        for (auto& p : img.pixels()) {
            p = std::round(p * 255.0 / static_cast<double>(maxval));
        }
    }
    return img;
}

Bytes to_bytes(const GrayImage& img) {
    Bytes out(img.pixels().size());
    std::transform(img.pixels().begin(), img.pixels().end(), out.begin(), [](double v) {
        return static_cast<unsigned char>(std::clamp(std::round(v), 0.0, 255.0));
    });
    return out;
}

}  // namespace

GrayImage::GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (pixels_.size() != height * width) {
        throw InputError("pixel count does not match " + std::to_string(height) + "x" + std::to_string(width));
    }
}

GrayImage::GrayImage(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), pixels_(height * width, fill) {}

GrayImage load_image(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) {
        return decode_png(path, bytes);
    }
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
        return decode_jpeg(path, bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '2' && bytes[1] <= '6' && bytes[1] != '4') {
        return decode_pnm(path, bytes);
    }
    fail(path, "unrecognized image format");
}

GrayImage resize_to(const GrayImage& img, std::size_t height, std::size_t width) {
    if (img.height() == 0 || img.width() == 0 || height == 0 || width == 0) {
        throw InputError("resize requires non-empty source and target");
    }
    if (img.height() == height && img.width() == width) {
        return img;
    }
    const double sy = static_cast<double>(img.height()) / static_cast<double>(height);
    const double sx = static_cast<double>(img.width()) / static_cast<double>(width);
    const auto max_y = static_cast<double>(img.height() - 1);
    const auto max_x = static_cast<double>(img.width() - 1);
    GrayImage out(height, width);
    for (std::size_t r = 0; r < height; ++r) {
        const double fy = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_y);
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t c = 0; c < width; ++c) {
            const double fx = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, max_x);
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
            const double wx = fx - static_cast<double>(x0);
            const double top = img.at(y0, x0) * (1 - wx) + img.at(y0, x1) * wx;
            const double bottom = img.at(y1, x0) * (1 - wx) + img.at(y1, x1) * wx;
            out.at(r, c) = top * (1 - wy) + bottom * wy;
        }
    }
    return out;
}

GrayImage normalize(const GrayImage& img, double divisor) {
    if (!(divisor > 0)) {
        throw ConfigError("normalization divisor must be positive");
    }
    GrayImage out = img;
    for (auto& p : out.pixels()) {
        p = std::clamp(p / divisor, 0.0, 1.0);
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IngestionError("cannot write '" + path.string() + "'");
    }
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    const Bytes bytes = to_bytes(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    const Bytes bytes = to_bytes(img);
    if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        throw IngestionError("cannot write PNG '" + path.string() + "': " + image.message);
    }
}

}  // namespace quanvnet
