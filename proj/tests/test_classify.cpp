#include <catch2/catch.hpp>

#include <cmath>

#include "oracles.hpp"
#include "texclass/classify.hpp"
#include "texclass/synth.hpp"

using namespace texclass;

namespace {

Raster noise_raster(int w, int h, std::uint64_t seed, int depth = 8) {
    SplitMix64 rng(seed);
    Raster r(w, h, depth);
    for (auto& p : r.pixels)
        p = static_cast<std::uint16_t>(rng.next() & (depth == 8 ? 0xffu : 0xffffu));
    return r;
}

Histogram dense_histogram(const std::vector<double>& bins, std::uint64_t lid = 7) {
    Histogram h;
    h.layout_id = lid;
    h.bin_count = bins.size();
    for (std::size_t i = 0; i < bins.size(); ++i)
        if (bins[i] > 0.0) h.entries.push_back({static_cast<std::uint32_t>(i), bins[i]});
    return h;
}

std::vector<double> densify(const Histogram& h) {
    std::vector<double> d(h.bin_count, 0.0);
    for (const auto& e : h.entries) d[e.first] = e.second;
    return d;
}

Histogram random_histogram(SplitMix64& rng, std::size_t bins, std::uint64_t lid = 7) {
    std::vector<double> raw(bins, 0.0);
    double sum = 0.0;
    for (auto& v : raw) {
        if (rng.next() % 3 == 0) v = rng.next_unit();
        sum += v;
    }
    if (sum == 0.0) {
        raw[rng.next() % bins] = 1.0;
        sum = 1.0;
    }
    for (auto& v : raw) v /= sum;
    return dense_histogram(raw, lid);
}

// two-texture model fixture used by several tests
struct SmallScene {
    Raster img;
    ModelSet models;
};

SmallScene two_class_scene(std::uint64_t seed, DescriptorKind kind,
                           std::vector<ScalePair> scales, int window) {
    SmallScene sc{Raster(64, 64, 8), {}};
    SplitMix64 rng(seed);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            if (x < 32)
                sc.img.at(x, y) = static_cast<std::uint16_t>(rng.next() % 256); // rough
            else
                sc.img.at(x, y) = static_cast<std::uint16_t>(120 + (rng.next() % 17)); // calm
        }
    DescriptorConfig cfg;
    cfg.kind = kind;
    cfg.scales = std::move(scales);
    std::vector<Rect> ra{{4, 4, 24, 24}}, rb{{36, 4, 24, 24}};
    if (cfg.uses_var()) {
        std::vector<Rect> all{ra[0], rb[0]};
        train_var_boundaries_for(cfg, sc.img, all);
    }
    sc.models.config = cfg;
    sc.models.window = window;
    sc.models.classes.push_back(build_class_model(sc.img, ra, cfg, 1));
    sc.models.classes.push_back(build_class_model(sc.img, rb, cfg, 2));
    sc.models.validate();
    return sc;
}

} // namespace

TEST_CASE("bhattacharyya spec cases") {
    SECTION("identical histograms are at distance ~0") {
        Histogram h = dense_histogram({0.25, 0.25, 0.5});
        CHECK(bhattacharyya(h, h) >= 0.0);
        CHECK(bhattacharyya(h, h) <= 1e-12);
    }
    SECTION("disjoint supports hit the floored cap") {
        Histogram a = dense_histogram({1.0, 0.0});
        Histogram b = dense_histogram({0.0, 1.0});
        CHECK(bhattacharyya(a, b) == Approx(-std::log(1e-12)).epsilon(1e-12));
        CHECK(bhattacharyya(a, b) == Approx(27.631).margin(1e-3));
    }
    SECTION("half overlap") {
        Histogram a = dense_histogram({1.0, 0.0});
        Histogram b = dense_histogram({0.5, 0.5});
        CHECK(bhattacharyya(a, b) == Approx(-std::log(std::sqrt(0.5))).epsilon(1e-12));
        CHECK(bhattacharyya(a, b) == Approx(0.34657).margin(1e-5));
    }
    SECTION("length mismatch and empty histograms are rejected") {
        Histogram a = dense_histogram({1.0});
        Histogram b = dense_histogram({0.5, 0.5});
        CHECK_THROWS_WITH(bhattacharyya(a, b), Catch::Contains("length mismatch"));
        Histogram empty;
        empty.bin_count = 1;
        CHECK_THROWS_WITH(bhattacharyya(a, empty), Catch::Contains("empty"));
    }
    SECTION("unnormalized input is rejected") {
        Histogram a = dense_histogram({0.5, 0.1});
        Histogram b = dense_histogram({0.5, 0.5});
        CHECK_THROWS_WITH(bhattacharyya(a, b), Catch::Contains("not normalized"));
    }
}

TEST_CASE("bhattacharyya properties on random histograms") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t bins = 2 + rng.next() % 64;
        Histogram h1 = random_histogram(rng, bins);
        Histogram h2 = random_histogram(rng, bins);
        double d12 = bhattacharyya(h1, h2);
        CHECK(d12 >= 0.0);
        CHECK(d12 == bhattacharyya(h2, h1)); // merge order is symmetric
        CHECK(bhattacharyya(h1, h1) <= 1e-12);
        CHECK(d12 == Approx(oracle::bhattacharyya(densify(h1), densify(h2))).margin(1e-9));
    }
}

TEST_CASE("classify_pixel picks the nearest class, ties to the lowest id") {
    DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
    std::uint64_t lid = layout_id(cfg);
    auto mk = [&](std::vector<double> bins) {
        std::vector<double> full(bin_count(cfg), 0.0);
        for (std::size_t i = 0; i < bins.size(); ++i) full[i] = bins[i];
        return dense_histogram(full, lid);
    };
    ModelSet ms;
    ms.config = cfg;
    ms.window = 8;
    ms.classes = {{1, "a", mk({1.0}), 10},
                  {2, "b", mk({0.0, 1.0}), 10},
                  {3, "c", mk({0.0, 0.0, 1.0}), 10}};

    SECTION("exact match wins with distance ~0") {
        auto [id, d] = classify_pixel(mk({0.0, 1.0}), ms);
        CHECK(id == 2);
        CHECK(d <= 1e-12);
    }
    SECTION("equidistant tie goes to the lower id") {
        auto [id, d] = classify_pixel(mk({0.5, 0.0, 0.5}), ms);
        CHECK(id == 1); // classes 1 and 3 tie exactly
        CHECK(d == Approx(-std::log(std::sqrt(0.5))));
    }
    SECTION("layout mismatch is rejected") {
        CHECK_THROWS_WITH(classify_pixel(dense_histogram({1.0}, 123), ms),
                          Catch::Contains("layout mismatch"));
    }
    SECTION("random histograms match an exhaustive scan") {
        SplitMix64 rng(88);
        for (int trial = 0; trial < 200; ++trial) {
            Histogram h = random_histogram(rng, bin_count(cfg), lid);
            auto [id, d] = classify_pixel(h, ms);
            int best = 0;
            double bd = 0.0;
            for (const auto& c : ms.classes) {
                double dd = oracle::bhattacharyya(densify(h), densify(c.histogram));
                if (best == 0 || dd < bd) {
                    best = c.class_id;
                    bd = dd;
                }
            }
            CHECK(id == best);
            CHECK(d == Approx(bd).margin(1e-9));
        }
    }
}

TEST_CASE("build_class_model pools training rect codes") {
    SECTION("flat training area gives a delta at bin 8 for LBPRIU(8,1)") {
        Raster flat(40, 40, 8, 90);
        DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
        ClassModel m = build_class_model(flat, {{4, 4, 20, 20}}, cfg, 1, "flatland");
        REQUIRE(m.histogram.entries.size() == 1);
        CHECK(m.histogram.entries[0].first == 8u);
        CHECK(m.histogram.entries[0].second == 1.0);
        CHECK(m.pixel_count == 400u);
        CHECK(m.name == "flatland");
    }
    SECTION("two equal-area rects with disjoint constant codes pool to 0.5/0.5") {
        // left: flat (code 8); right: horizontal ramp (code 5)
        Raster img(60, 30, 8);
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 60; ++x)
                img.at(x, y) = x < 30 ? 100 : static_cast<std::uint16_t>(4 * (x - 30) + 60);
        DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
        ClassModel m = build_class_model(img, {{4, 4, 10, 10}, {40, 4, 10, 10}}, cfg, 1);
        REQUIRE(m.histogram.entries.size() == 2);
        CHECK(m.histogram.at(8) == 0.5);
        CHECK(m.histogram.at(5) == 0.5);
    }
    SECTION("pooling equals a brute-force recount with independent kernels") {
        Raster img = noise_raster(48, 48, 7);
        DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
        std::vector<Rect> rects{{2, 2, 10, 10}, {20, 20, 14, 9}, {33, 5, 8, 20}};
        ClassModel m = build_class_model(img, rects, cfg, 1);

        std::vector<std::uint64_t> counts(bin_count(cfg), 0);
        std::uint64_t total = 0;
        for (const Rect& rc : rects)
            for (int y = std::max(rc.y, 1); y < std::min(rc.y + rc.h, 47); ++y)
                for (int x = std::max(rc.x, 1); x < std::min(rc.x + rc.w, 47); ++x) {
                    auto s = sample_circular(img, x, y, 8, 1.0);
                    ++counts[oracle::lbpriu(s, img.at(x, y))];
                    ++total;
                }
        CHECK(m.pixel_count == total);
        for (std::size_t b = 0; b < counts.size(); ++b)
            CHECK(m.histogram.at(static_cast<std::uint32_t>(b)) ==
                  Approx(static_cast<double>(counts[b]) / total).margin(1e-15));
    }
    SECTION("error cases") {
        Raster img = noise_raster(32, 32, 8);
        DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
        CHECK_THROWS_WITH(build_class_model(img, {}, cfg, 1), Catch::Contains("no training rects"));
        CHECK_THROWS_WITH(build_class_model(img, {{30, 30, 10, 10}}, cfg, 1),
                          Catch::Contains("out of bounds"));
        DescriptorConfig vcfg{DescriptorKind::var, {{8, 1.0}}};
        CHECK_THROWS_WITH(build_class_model(img, {{2, 2, 8, 8}}, vcfg, 1),
                          Catch::Contains("boundaries not trained"));
        // rect entirely inside the border band leaves nothing usable
        DescriptorConfig big{DescriptorKind::lbpriu, {{24, 3.0}}};
        CHECK_THROWS_WITH(build_class_model(img, {{0, 0, 2, 2}}, big, 1),
                          Catch::Contains("no usable pixels"));
    }
}

TEST_CASE("classify_image: flat raster with a one-class model labels the whole interior") {
    Raster flat(40, 40, 8, 77);
    DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
    ModelSet ms;
    ms.config = cfg;
    ms.window = 8; // before=3, after=4, border=1
    ms.classes.push_back(build_class_model(flat, {{4, 4, 20, 20}}, cfg, 1));

    LabelMask naive = classify_image_naive(flat, ms);
    LabelMask fast = classify_image_fast(flat, ms);
    CHECK(naive == fast);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            bool interior = x >= 4 && x <= 40 - 1 - 5 && y >= 4 && y <= 40 - 1 - 5;
            CHECK(naive.at(x, y) == (interior ? 1 : 0));
        }
}

TEST_CASE("fast path is bit-identical to naive for every kind (randomized)") {
    int idx = 0;
    for (auto kind : {DescriptorKind::lbp, DescriptorKind::lbpriu, DescriptorKind::var,
                      DescriptorKind::wld, DescriptorKind::lbpriu_var, DescriptorKind::wld_var}) {
        std::vector<ScalePair> scales = (idx % 2 == 0)
                                            ? std::vector<ScalePair>{{8, 1.0}}
                                            : std::vector<ScalePair>{{8, 1.0}, {16, 2.0}};
        SmallScene sc = two_class_scene(1000 + idx, kind, scales, idx % 2 ? 9 : 8);
        LabelMask naive = classify_image_naive(sc.img, sc.models, 1);
        LabelMask fast = classify_image_fast(sc.img, sc.models, 2);
        REQUIRE(naive == fast);
        ++idx;
    }
}

TEST_CASE("classification output is independent of the worker count and repeatable") {
    SmallScene sc = two_class_scene(5, DescriptorKind::wld, {{8, 1.0}}, 10);
    LabelMask a = classify_image_fast(sc.img, sc.models, 1);
    LabelMask b = classify_image_fast(sc.img, sc.models, 3);
    LabelMask c = classify_image_fast(sc.img, sc.models, 8);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(classify_image_fast(sc.img, sc.models, 2) == a);
    CHECK(classify_image_naive(sc.img, sc.models, 2) == a);
}

TEST_CASE("deep interior of a two-texture mosaic is classified correctly") {
    SmallScene sc = two_class_scene(17, DescriptorKind::wld, {{8, 1.0}}, 12);
    LabelMask mask = classify_image_fast(sc.img, sc.models, 2);
    // stay a full window away from the seam at x=32 and from the margins
    for (int y = 16; y < 48; ++y) {
        for (int x = 10; x < 20; ++x) CHECK(mask.at(x, y) == 1);
        for (int x = 44; x < 54; ++x) CHECK(mask.at(x, y) == 2);
    }
}

TEST_CASE("monotonic remap leaves LBP/LBPRIU classification masks unchanged") {
    SmallScene sc = two_class_scene(23, DescriptorKind::lbpriu, {{8, 1.0}}, 8);
    // apply the same strictly increasing remap to the raster, retrain, reclassify
    SplitMix64 rng(9);
    std::vector<std::uint16_t> remap(256);
    std::uint16_t acc = 0;
    for (int i = 0; i < 256; ++i) {
        acc = static_cast<std::uint16_t>(acc + 1 + (rng.next() % 3));
        remap[i] = acc;
    }
    Raster remapped(64, 64, 16);
    for (std::size_t i = 0; i < sc.img.pixels.size(); ++i)
        remapped.pixels[i] = remap[sc.img.pixels[i]];

    DescriptorConfig cfg = sc.models.config;
    ModelSet ms2;
    ms2.config = cfg;
    ms2.window = sc.models.window;
    ms2.classes.push_back(build_class_model(remapped, {{4, 4, 24, 24}}, cfg, 1));
    ms2.classes.push_back(build_class_model(remapped, {{36, 4, 24, 24}}, cfg, 2));

    CHECK(classify_image_fast(remapped, ms2, 2) == classify_image_fast(sc.img, sc.models, 2));
}

TEST_CASE("scaling all training counts uniformly does not change the decision") {
    Raster img = noise_raster(64, 64, 77);
    DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
    std::vector<Rect> ra{{4, 4, 20, 20}}, rb{{40, 4, 20, 20}};
    // doubling the rect list doubles every raw count
    std::vector<Rect> ra2{ra[0], ra[0]}, rb2{rb[0], rb[0]};

    ModelSet m1, m2;
    m1.config = m2.config = cfg;
    m1.window = m2.window = 8;
    m1.classes = {build_class_model(img, ra, cfg, 1), build_class_model(img, rb, cfg, 2)};
    m2.classes = {build_class_model(img, ra2, cfg, 1), build_class_model(img, rb2, cfg, 2)};
    CHECK(classify_image_fast(img, m1, 2) == classify_image_fast(img, m2, 2));
}

TEST_CASE("classify_image rejects rasters smaller than window plus margins") {
    Raster tiny(10, 10, 8, 5);
    DescriptorConfig cfg{DescriptorKind::lbpriu, {{8, 1.0}}};
    ModelSet ms;
    ms.config = cfg;
    ms.window = 12;
    Raster train(32, 32, 8, 5);
    ms.classes.push_back(build_class_model(train, {{4, 4, 20, 20}}, cfg, 1));
    CHECK_THROWS_WITH(classify_image_fast(tiny, ms), Catch::Contains("too small"));
    CHECK_THROWS_WITH(classify_image_naive(tiny, ms), Catch::Contains("too small"));
}

TEST_CASE("window histogram through the public path matches the classifier view") {
    // the histogram materialized by descriptor_window_histogram is the exact
    // normalized form of the counts the image paths slide around
    SmallScene sc = two_class_scene(3, DescriptorKind::lbpriu, {{8, 1.0}}, 9);
    auto planes = code_planes(sc.img, sc.models.config);
    Histogram h = descriptor_window_histogram(planes, sc.models.config, 20, 20, 9);
    auto [id, d] = classify_pixel(h, sc.models);
    LabelMask mask = classify_image_fast(sc.img, sc.models);
    CHECK(id == mask.at(20, 20));
}
