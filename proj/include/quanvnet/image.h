#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace quanvnet {

/// Single-channel raster. Pixels are row-major; after load_image they hold 0-255
/// intensities, after normalize they lie in [0, 1].
class GrayImage {
   public:
    GrayImage() = default;
    GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels);
    GrayImage(std::size_t height, std::size_t width, double fill = 0.0);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::span<const double> pixels() const { return pixels_; }
    std::span<double> pixels() { return pixels_; }

    double at(std::size_t r, std::size_t c) const { return pixels_[r * width_ + c]; }
    double& at(std::size_t r, std::size_t c) { return pixels_[r * width_ + c]; }

    bool operator==(const GrayImage&) const = default;

   private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> pixels_;
};

/// Decodes PNG, JPEG or binary/ASCII PGM/PPM. Color images are collapsed with
/// Rec.601 luma weights and rounded to the nearest integer intensity.
GrayImage load_image(const std::filesystem::path& path);

/// Bilinear resize with half-pixel centers (edge samples are clamped).
GrayImage resize_to(const GrayImage& img, std::size_t height, std::size_t width);

/// Divides every pixel by `divisor` and clamps into [0, 1].
GrayImage normalize(const GrayImage& img, double divisor = 255.0);

/// Writes an 8-bit binary PGM. Values are rounded and clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
/// Writes an 8-bit grayscale PNG. Values are rounded and clamped to [0, 255].
void write_png(const std::filesystem::path& path, const GrayImage& img);

}  // namespace quanvnet
