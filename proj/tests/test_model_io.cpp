#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "texclass/model_io.hpp"
#include "texclass/synth.hpp"

using namespace texclass;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("texclass_model_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

Raster noise_raster(int w, int h, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Raster r(w, h, 8);
    for (auto& p : r.pixels) p = static_cast<std::uint16_t>(rng.next() % 256);
    return r;
}

ModelSet sample_models() {
    Raster img = noise_raster(64, 64, 2718);
    DescriptorConfig cfg{DescriptorKind::wld_var, {{8, 1.0}, {16, 2.0}}};
    std::vector<Rect> ra{{4, 4, 24, 24}}, rb{{34, 34, 24, 24}};
    train_var_boundaries_for(cfg, img, {ra[0], rb[0]});
    ModelSet ms;
    ms.config = cfg;
    ms.window = 19;
    ms.classes.push_back(build_class_model(img, ra, cfg, 1, "speckle east"));
    ms.classes.push_back(build_class_model(img, rb, cfg, 2, "speckle west"));
    ms.validate();
    return ms;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

} // namespace

TEST_CASE("model save/load round-trips losslessly") {
    ModelSet ms = sample_models();
    auto path = temp_file("td.model");
    save_model(ms, path.string());
    ModelSet back = load_model(path.string());

    CHECK(back.config == ms.config);
    CHECK(back.window == ms.window);
    REQUIRE(back.classes.size() == ms.classes.size());
    for (std::size_t i = 0; i < ms.classes.size(); ++i) {
        CHECK(back.classes[i].class_id == ms.classes[i].class_id);
        CHECK(back.classes[i].name == ms.classes[i].name);
        CHECK(back.classes[i].pixel_count == ms.classes[i].pixel_count);
        // bit-exact histograms, including layout id recomputed from config
        CHECK(back.classes[i].histogram == ms.classes[i].histogram);
    }
    CHECK(model_file_type(path.string()) == "td");

    // a second save of the loaded model reproduces identical bytes
    auto path2 = temp_file("td2.model");
    save_model(back, path2.string());
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("model files with an unknown version are rejected") {
    ModelSet ms = sample_models();
    auto path = temp_file("ver.model");
    save_model(ms, path.string());
    std::string text = slurp(path);
    auto pos = text.find("texclass-model 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 16, "texclass-model 9");
    spit(path, text);
    CHECK_THROWS_WITH(load_model(path.string()), Catch::Contains("version"));
    CHECK_THROWS_WITH(model_file_type(path.string()), Catch::Contains("version"));
}

TEST_CASE("corrupt model files fail with diagnostics") {
    ModelSet ms = sample_models();
    auto path = temp_file("corrupt.model");

    SECTION("truncated file") {
        save_model(ms, path.string());
        std::string text = slurp(path);
        spit(path, text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(load_model(path.string()), error);
    }
    SECTION("histogram length inconsistent with config") {
        save_model(ms, path.string());
        std::string text = slurp(path);
        auto pos = text.find("\nbins ");
        REQUIRE(pos != std::string::npos);
        auto end = text.find('\n', pos + 1);
        text.replace(pos, end - pos, "\nbins 12345");
        spit(path, text);
        CHECK_THROWS_WITH(load_model(path.string()), Catch::Contains("inconsistent"));
    }
    SECTION("unknown descriptor kind") {
        save_model(ms, path.string());
        std::string text = slurp(path);
        auto pos = text.find("kind wld_var");
        text.replace(pos, 12, "kind banana!");
        spit(path, text);
        CHECK_THROWS_WITH(load_model(path.string()), Catch::Contains("unknown descriptor"));
    }
    SECTION("glcm loader refuses td files and vice versa") {
        save_model(ms, path.string());
        CHECK_THROWS_WITH(load_glcm_model(path.string()), Catch::Contains("expected a glcm"));
    }
}

TEST_CASE("glcm model save/load round-trips losslessly") {
    Raster img = noise_raster(48, 48, 11);
    GlcmConfig cfg;
    cfg.window = 7;
    cfg.levels = 16;
    cfg.distances = {1, 2};
    GlcmModel model = glcm_train(
        img, {{1, {{4, 4, 12, 12}}}, {2, {{30, 30, 12, 12}}}}, cfg, {"alpha", "beta gamma"});
    auto path = temp_file("glcm.model");
    save_glcm_model(model, path.string());
    GlcmModel back = load_glcm_model(path.string());

    CHECK(back.config == model.config);
    CHECK(back.norm_mean == model.norm_mean);
    CHECK(back.norm_std == model.norm_std);
    REQUIRE(back.classes.size() == 2);
    CHECK(back.classes[0].mean == model.classes[0].mean);
    CHECK(back.classes[1].mean == model.classes[1].mean);
    CHECK(back.classes[1].name == "beta gamma");
    CHECK(model_file_type(path.string()) == "glcm");
}
