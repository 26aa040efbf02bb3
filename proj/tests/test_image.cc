#include <gtest/gtest.h>

#include <jpeglib.h>
#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quanvnet/errors.h"
#include "quanvnet/image.h"

namespace fs = std::filesystem;
using quanvnet::GrayImage;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "quanvnet_test_image";
    fs::create_directories(dir);
    return dir / name;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
    std::ofstream(path, std::ios::binary) << bytes;
}

GrayImage gradient(std::size_t h, std::size_t w) {
    GrayImage img(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) img.at(r, c) = static_cast<double>((r * 17 + c * 5) % 256);
    return img;
}

}  // namespace

TEST(Image, PgmAndPngRoundTrip) {
    const GrayImage img = gradient(9, 13);
    quanvnet::write_pgm(scratch("g.pgm"), img);
    quanvnet::write_png(scratch("g.png"), img);
    EXPECT_EQ(quanvnet::load_image(scratch("g.pgm")), img);
    EXPECT_EQ(quanvnet::load_image(scratch("g.png")), img);
}

TEST(Image, AsciiPgmWithComments) {
    write_bytes(scratch("a.pgm"), "P2\n# comment\n2 2\n15\n0 15\n5 10\n");
    const GrayImage img = quanvnet::load_image(scratch("a.pgm"));
    ASSERT_EQ(img.height(), 2u);
    EXPECT_DOUBLE_EQ(img.at(0, 1), 255.0);
    EXPECT_DOUBLE_EQ(img.at(1, 0), 85.0);
}

TEST(Image, ColourCollapsesWithRec601Luma) {
    write_bytes(scratch("c.ppm"), std::string("P6\n3 1\n255\n") + std::string("\xff\x00\x00\x00\xff\x00\x00\x00\xff", 9));
    const GrayImage img = quanvnet::load_image(scratch("c.ppm"));
    EXPECT_DOUBLE_EQ(img.at(0, 0), 76.0);   // 0.299 * 255
    EXPECT_DOUBLE_EQ(img.at(0, 1), 150.0);  // 0.587 * 255
    EXPECT_DOUBLE_EQ(img.at(0, 2), 29.0);   // 0.114 * 255

    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = 1;
    png.height = 1;
    png.format = PNG_FORMAT_RGB;
    const unsigned char green[] = {0, 255, 0};
    ASSERT_TRUE(png_image_write_to_file(&png, scratch("c.png").c_str(), 0, green, 0, nullptr));
    EXPECT_DOUBLE_EQ(quanvnet::load_image(scratch("c.png")).at(0, 0), 150.0);
}

TEST(Image, JpegGrayscaleDecodes) {
    const fs::path path = scratch("g.jpg");
    FILE* f = std::fopen(path.c_str(), "wb");
    ASSERT_NE(f, nullptr);
    jpeg_compress_struct cinfo{};
    jpeg_error_mgr err{};
    cinfo.err = jpeg_std_error(&err);
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, f);
    cinfo.image_width = 16;
    cinfo.image_height = 16;
    cinfo.input_components = 1;
    cinfo.in_color_space = JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, 100, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    std::vector<unsigned char> row(16, 128);
    while (cinfo.next_scanline < 16) {
        JSAMPROW p = row.data();
        jpeg_write_scanlines(&cinfo, &p, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(f);

    const GrayImage img = quanvnet::load_image(path);
    ASSERT_EQ(img.width(), 16u);
    for (double v : img.pixels()) EXPECT_NEAR(v, 128.0, 2.0);
}

TEST(Image, BadInputsThrowIngestionError) {
    write_bytes(scratch("junk.png"), "not an image");
    write_bytes(scratch("short.pgm"), "P5\n4 4\n255\nab");
    EXPECT_THROW(quanvnet::load_image(scratch("junk.png")), quanvnet::IngestionError);
    EXPECT_THROW(quanvnet::load_image(scratch("short.pgm")), quanvnet::IngestionError);
    EXPECT_THROW(quanvnet::load_image(scratch("missing.png")), quanvnet::IngestionError);
}

TEST(Image, BilinearResizeWithHalfPixelCentres) {
    const GrayImage src(1, 2, std::vector<double>{0.0, 100.0});
    const GrayImage out = quanvnet::resize_to(src, 1, 4);
    EXPECT_DOUBLE_EQ(out.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(out.at(0, 1), 25.0);
    EXPECT_DOUBLE_EQ(out.at(0, 2), 75.0);
    EXPECT_DOUBLE_EQ(out.at(0, 3), 100.0);

    const GrayImage flat(40, 33, 77.0);
    for (double v : quanvnet::resize_to(flat, 28, 28).pixels()) EXPECT_NEAR(v, 77.0, 1e-12);
    const GrayImage g = gradient(28, 28);
    EXPECT_EQ(quanvnet::resize_to(g, 28, 28), g);
    EXPECT_THROW(quanvnet::resize_to(g, 0, 28), quanvnet::InputError);
}

TEST(Image, NormalizeDividesAndClamps) {
    const GrayImage img(1, 3, std::vector<double>{0.0, 125.0, 255.0});
    const GrayImage n = quanvnet::normalize(img, 250.0);
    EXPECT_DOUBLE_EQ(n.at(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(n.at(0, 2), 1.0);
    EXPECT_DOUBLE_EQ(quanvnet::normalize(img).at(0, 2), 1.0);
    EXPECT_THROW(quanvnet::normalize(img, 0.0), quanvnet::ConfigError);
}
