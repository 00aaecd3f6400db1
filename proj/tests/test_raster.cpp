#include <catch2/catch.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "texclass/raster.hpp"
#include "texclass/synth.hpp"

using namespace texclass;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("texclass_raster_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Raster random_raster(int w, int h, int depth, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Raster r(w, h, depth);
    for (auto& p : r.pixels)
        p = static_cast<std::uint16_t>(rng.next() & (depth == 8 ? 0xffu : 0xffffu));
    return r;
}

} // namespace

TEST_CASE("load_pgm reads 8-bit P5 payloads byte for byte") {
    auto p = temp_file("basic.pgm");
    write_bytes(p, std::string("P5\n2 2\n255\n") + std::string("\x00\x55\xaa\xff", 4));
    Raster r = load_pgm(p.string());
    CHECK(r.width == 2);
    CHECK(r.height == 2);
    CHECK(r.depth == 8);
    CHECK(r.pixels == std::vector<std::uint16_t>{0, 85, 170, 255});
}

TEST_CASE("load_pgm reads 16-bit samples big-endian") {
    auto p = temp_file("deep.pgm");
    write_bytes(p, std::string("P5\n1 1\n65535\n") + std::string("\x01\x00", 2));
    Raster r = load_pgm(p.string());
    CHECK(r.depth == 16);
    CHECK(r.pixels == std::vector<std::uint16_t>{256});
}

TEST_CASE("load_pgm rejects bad files with distinct errors") {
    auto p6 = temp_file("color.ppm");
    write_bytes(p6, "P6\n1 1\n255\n\0\0\0");
    CHECK_THROWS_WITH(load_pgm(p6.string()), Catch::Contains("unsupported magic"));

    auto truncated = temp_file("short.pgm");
    write_bytes(truncated, std::string("P5\n2 2\n255\n") + std::string("\x01\x02", 2));
    CHECK_THROWS_WITH(load_pgm(truncated.string()), Catch::Contains("truncated"));

    auto garbled = temp_file("garbled.pgm");
    write_bytes(garbled, "P5\nnotanumber 2\n255\n");
    CHECK_THROWS_WITH(load_pgm(garbled.string()), Catch::Contains("malformed header"));

    auto huge = temp_file("huge.pgm");
    write_bytes(huge, "P5\n99999999999999999999 2\n255\n");
    CHECK_THROWS_WITH(load_pgm(huge.string()), Catch::Contains("malformed header"));

    CHECK_THROWS_WITH(load_pgm(temp_file("missing.pgm").string()), Catch::Contains("cannot open"));
}

TEST_CASE("pgm comments and whitespace are tolerated") {
    auto p = temp_file("comments.pgm");
    write_bytes(p, std::string("P5\n# a comment\n 2 # inline\n2\n255\n") +
                       std::string("\x01\x02\x03\x04", 4));
    Raster r = load_pgm(p.string());
    CHECK(r.width == 2);
    CHECK(r.pixels == std::vector<std::uint16_t>{1, 2, 3, 4});
}

TEST_CASE("save_pgm round-trips both depths and writes full-range maxval") {
    for (int depth : {8, 16}) {
        Raster r = random_raster(13, 7, depth, 99 + depth);
        auto p = temp_file("roundtrip" + std::to_string(depth) + ".pgm");
        save_pgm(r, p.string());
        CHECK(load_pgm(p.string()) == r);
    }
    auto p = temp_file("roundtrip8.pgm");
    std::ifstream in(p, std::ios::binary);
    std::string header(16, '\0');
    in.read(header.data(), 16);
    CHECK(header.substr(0, 3) == "P5\n");
    CHECK(header.find("255") != std::string::npos);
}

TEST_CASE("save_pgm reports unwritable paths") {
    Raster r(2, 2, 8);
    CHECK_THROWS_WITH(save_pgm(r, "/nonexistent-dir/x.pgm"), Catch::Contains("cannot open"));
}

TEST_CASE("label masks travel as 8-bit PGM") {
    LabelMask m(5, 4);
    for (std::size_t i = 0; i < m.labels.size(); ++i)
        m.labels[i] = static_cast<std::uint8_t>(i % 4);
    auto p = temp_file("mask.pgm");
    save_mask_pgm(m, p.string());
    CHECK(load_mask_pgm(p.string()) == m);
}

TEST_CASE("load_raw reads headerless payloads") {
    auto p8 = temp_file("raw8.bin");
    write_bytes(p8, std::string("\x05\x06\x07\x08", 4));
    Raster r8 = load_raw(p8.string(), 2, 2, 8);
    CHECK(r8.pixels == std::vector<std::uint16_t>{5, 6, 7, 8});

    auto p16 = temp_file("raw16.bin");
    write_bytes(p16, std::string("\x01\x00\x00\x02", 4));
    Raster r16 = load_raw(p16.string(), 2, 1, 16);
    CHECK(r16.pixels == std::vector<std::uint16_t>{256, 2});

    CHECK_THROWS_WITH(load_raw(p8.string(), 3, 3, 8), Catch::Contains("truncated"));
}

TEST_CASE("crop copies the requested rectangle") {
    Raster r = random_raster(10, 8, 8, 4);
    SECTION("full extent is the identity") { CHECK(crop(r, {0, 0, 10, 8}) == r); }
    SECTION("1x1 crop picks the source pixel") {
        Raster c = crop(r, {3, 5, 1, 1});
        CHECK(c.width == 1);
        CHECK(c.at(0, 0) == r.at(3, 5));
    }
    SECTION("general window") {
        Raster c = crop(r, {2, 1, 4, 3});
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x) CHECK(c.at(x, y) == r.at(2 + x, 1 + y));
    }
    SECTION("out-of-bounds rect is rejected") {
        CHECK_THROWS_WITH(crop(r, {7, 0, 4, 4}), Catch::Contains("out of bounds"));
        CHECK_THROWS_WITH(crop(r, {-1, 0, 2, 2}), Catch::Contains("out of bounds"));
    }
}

TEST_CASE("sample_circular on a flat raster returns P copies of the value") {
    Raster r(16, 16, 8, 77);
    for (auto [p, rad] : {std::pair{8, 1.0}, {16, 2.0}, {24, 3.0}, {12, 2.5}}) {
        auto s = sample_circular(r, 8, 8, p, rad);
        REQUIRE(s.size() == static_cast<std::size_t>(p));
        for (double v : s) CHECK(v == 77.0);
    }
}

TEST_CASE("P=8,R=1 samples are the 8 neighbors clockwise from the upper-left") {
    Raster r(3, 3, 8);
    // 3x3 patch laid out as 10 20 30 / 80 0 40 / 70 60 50
    std::uint16_t vals[9] = {10, 20, 30, 80, 0, 40, 70, 60, 50};
    for (int i = 0; i < 9; ++i) r.pixels[i] = vals[i];
    auto s = sample_circular(r, 1, 1, 8, 1.0);
    CHECK(s == std::vector<double>{10, 20, 30, 40, 50, 60, 70, 80});
}

TEST_CASE("interpolated sampling is exact on a linear ramp") {
    Raster r(32, 32, 8);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) r.at(x, y) = static_cast<std::uint16_t>(x);
    auto s = sample_circular(r, 16, 16, 16, 2.0);
    for (int p = 0; p < 16; ++p) {
        double angle = 2.0 * M_PI * p / 16;
        CHECK(s[p] == Approx(16.0 + 2.0 * std::cos(angle)).margin(1e-9));
    }
}

TEST_CASE("bilinear sampling reproduces bilinear functions at arbitrary points") {
    // f(x,y) = a + b x + c y + d x y with integer-valued coefficients
    int a = 7, b = 3, c = 2, d = 1;
    Raster r(20, 20, 16);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x)
            r.at(x, y) = static_cast<std::uint16_t>(a + b * x + c * y + d * x * y);
    SplitMix64 rng(5);
    for (int i = 0; i < 200; ++i) {
        double x = 0.5 + rng.next_unit() * 18.0;
        double y = 0.5 + rng.next_unit() * 18.0;
        double expect = a + b * x + c * y + d * x * y;
        CHECK(bilinear_sample(r, x, y) == Approx(expect).margin(1e-9));
    }
}

TEST_CASE("adding a constant shifts every circular sample by that constant") {
    Raster r = random_raster(24, 24, 8, 12);
    Raster shifted = r;
    for (auto& p : shifted.pixels) p = static_cast<std::uint16_t>(p / 2 + 100); // stay in range
    Raster base = r;
    for (auto& p : base.pixels) p = static_cast<std::uint16_t>(p / 2);

    for (auto [p, rad] : {std::pair{8, 1.0}, {16, 2.0}}) {
        auto s0 = sample_circular(base, 12, 12, p, rad);
        auto s1 = sample_circular(shifted, 12, 12, p, rad);
        for (int i = 0; i < p; ++i) CHECK(s1[i] - s0[i] == Approx(100.0).margin(1e-9));
    }
    // the 8-neighbor special case reads integers, so the shift is exact
    auto e0 = sample_circular(base, 5, 5, 8, 1.0);
    auto e1 = sample_circular(shifted, 5, 5, 8, 1.0);
    for (int i = 0; i < 8; ++i) CHECK(e1[i] - e0[i] == 100.0);
}

TEST_CASE("sample_circular rejects circles leaving the raster") {
    Raster r(8, 8, 8);
    CHECK_THROWS_WITH(sample_circular(r, 0, 4, 8, 1.0), Catch::Contains("outside"));
    CHECK_THROWS_WITH(sample_circular(r, 4, 6, 16, 2.0), Catch::Contains("outside"));
}
