// texclass command-line front end: corpus synthesis, training, classification,
// evaluation, and benchmarking.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "texclass/texclass.hpp"

namespace {

using namespace texclass;

constexpr const char* cli_version = "texclass 1.0";

struct RawFlags {
    bool raw = false;
    int width = 0;
    int height = 0;
    int depth = 8;
};

Raster load_image(const std::string& path, const RawFlags& rf) {
    if (rf.raw) {
        if (rf.width <= 0 || rf.height <= 0)
            throw error("raw input needs --width and --height");
        return load_raw(path, rf.width, rf.height, rf.depth);
    }
    return load_pgm(path);
}

void add_raw_flags(CLI::App* cmd, RawFlags& rf) {
    cmd->add_flag("--raw", rf.raw, "treat the image as headerless raw grayscale");
    cmd->add_option("--width", rf.width, "raw image width");
    cmd->add_option("--height", rf.height, "raw image height");
    cmd->add_option("--depth", rf.depth, "raw bits per pixel (8 or 16)")
        ->check(CLI::IsMember({8, 16}));
}

std::vector<std::pair<int, std::vector<Rect>>> load_rect_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open rect list '" + path + "'");
    std::vector<std::pair<int, std::vector<Rect>>> classes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line.substr(0, line.find('#'));
        std::istringstream ls(stripped);
        int cid;
        Rect rc;
        if (!(ls >> cid)) continue; // blank or comment line
        if (!(ls >> rc.x >> rc.y >> rc.w >> rc.h))
            throw error("rect list line " + std::to_string(lineno) +
                        ": expected 'class_id x y w h'");
        if (cid < 1) throw error("rect list: class ids start at 1");
        auto it = std::find_if(classes.begin(), classes.end(),
                               [&](const auto& c) { return c.first == cid; });
        if (it == classes.end())
            classes.push_back({cid, {rc}});
        else
            it->second.push_back(rc);
    }
    if (classes.empty()) throw error("rect list '" + path + "' holds no rectangles");
    std::sort(classes.begin(), classes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return classes;
}

std::vector<ScalePair> parse_scales(const std::vector<std::string>& raw) {
    std::vector<ScalePair> scales;
    for (const auto& s : raw) {
        auto comma = s.find(',');
        if (comma == std::string::npos)
            throw error("--scale takes P,R (e.g. --scale 8,1)");
        try {
            scales.push_back({std::stoi(s.substr(0, comma)), std::stod(s.substr(comma + 1))});
        } catch (const std::exception&) {
            throw error("bad --scale value '" + s + "'");
        }
    }
    return scales;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stoi(part));
    return out;
}

int run_synth(const std::string& recipe_path, const std::string& prefix,
              std::optional<std::uint64_t> seed) {
    Recipe recipe = load_recipe(recipe_path);
    if (seed) recipe.seed = *seed;
    auto [img, mask] = generate_mosaic(recipe);
    save_pgm(img, prefix + ".pgm");
    save_mask_pgm(mask, prefix + "_mask.pgm");
    std::cout << "wrote " << prefix << ".pgm and " << prefix << "_mask.pgm ("
              << recipe.width << "x" << recipe.height << ", " << recipe.tiles.size()
              << " tiles, seed " << recipe.seed << ")\n";
    return 0;
}

int run_train_td(const Raster& img, const std::string& rects_path, const std::string& mask_path,
                 DescriptorConfig cfg, int window, const std::string& out_path) {
    cfg.validate();
    ModelSet models;
    models.window = window;

    if (!rects_path.empty()) {
        auto classes = load_rect_list(rects_path);
        std::vector<Rect> all;
        for (const auto& [cid, rects] : classes)
            all.insert(all.end(), rects.begin(), rects.end());
        if (cfg.uses_var()) train_var_boundaries_for(cfg, img, all);
        models.config = cfg;
        for (const auto& [cid, rects] : classes)
            models.classes.push_back(build_class_model(img, rects, cfg, cid));
    } else {
        LabelMask mask = load_mask_pgm(mask_path);
        if (cfg.uses_var()) train_var_boundaries_for_mask(cfg, img, mask);
        models.config = cfg;
        int k = mask.max_label();
        if (k < 1) throw error("training mask holds no labels");
        for (int cid = 1; cid <= k; ++cid)
            models.classes.push_back(build_class_model_from_mask(img, mask, cfg, cid));
    }
    models.validate();
    save_model(models, out_path);
    std::cout << "trained " << models.classes.size() << " classes, "
              << bin_count(models.config) << " bins -> " << out_path << "\n";
    return 0;
}

int run_train_glcm(const Raster& img, const std::string& rects_path, GlcmConfig cfg,
                   const std::string& out_path) {
    if (rects_path.empty()) throw error("GLCM training needs --rects");
    GlcmModel model = glcm_train(img, load_rect_list(rects_path), cfg);
    save_glcm_model(model, out_path);
    std::cout << "trained GLCM model, " << model.classes.size() << " classes -> " << out_path
              << "\n";
    return 0;
}

int run_classify(const Raster& img, const std::string& model_path, bool naive, int workers,
                 const std::string& out_path, const std::string& dump_prefix) {
    std::string type = model_file_type(model_path);
    LabelMask mask;
    if (type == "td") {
        ModelSet models = load_model(model_path);
        if (!dump_prefix.empty()) {
            auto planes = code_planes(img, models.config);
            for (std::size_t i = 0; i < planes.size(); ++i) {
                Raster dump(img.width, img.height, img.depth);
                for (std::size_t j = 0; j < planes[i].codes.size(); ++j) {
                    std::uint32_t c = planes[i].codes[j];
                    dump.pixels[j] = c == CodePlane::invalid
                                         ? 0
                                         : static_cast<std::uint16_t>(
                                               std::min<std::uint32_t>(c, dump.maxval()));
                }
                save_pgm(dump, dump_prefix + "_plane" + std::to_string(i) + ".pgm");
            }
        }
        mask = naive ? classify_image_naive(img, models, workers)
                     : classify_image_fast(img, models, workers);
    } else if (type == "glcm") {
        GlcmModel model = load_glcm_model(model_path);
        mask = glcm_classify(img, model, model.config, workers);
    } else {
        throw error("unknown model type '" + type + "'");
    }
    save_mask_pgm(mask, out_path);
    std::cout << "classified " << img.width << "x" << img.height << " -> " << out_path << " ("
              << (type == "glcm" ? "glcm" : (naive ? "naive" : "fast")) << " path)\n";
    return 0;
}

int run_eval(const std::string& pred_path, const std::string& ref_path,
             const std::string& exclude_path, const std::string& out_prefix) {
    LabelMask pred = load_mask_pgm(pred_path);
    LabelMask ref = load_mask_pgm(ref_path);
    std::vector<Rect> exclude;
    if (!exclude_path.empty())
        for (const auto& [cid, rects] : load_rect_list(exclude_path))
            exclude.insert(exclude.end(), rects.begin(), rects.end());
    EvalReport rep = evaluate(pred, ref, exclude);
    write_report_text(std::cout, rep);
    if (!out_prefix.empty()) {
        std::ofstream txt(out_prefix + ".txt");
        write_report_text(txt, rep);
        std::ofstream csv(out_prefix + ".csv");
        write_report_csv(csv, rep);
        if (!txt || !csv) throw error("failed to write report files");
    }
    return 0;
}

int run_bench(const std::string& plan_path, const std::string& out_csv) {
    std::ifstream in(plan_path);
    if (!in) throw error("cannot open bench plan '" + plan_path + "'");
    auto conditions = parse_bench_plan(in);
    std::vector<BenchRow> rows;
    for (const auto& c : conditions) {
        std::cout << "bench " << kind_name(c.kind) << " scales=" << format_scales(c.scales)
                  << " window=" << c.window << " size=" << c.size << " ..." << std::flush;
        rows.push_back(run_condition(c));
        const BenchRow& r = rows.back();
        if (r.equivalent)
            std::cout << " naive=" << r.naive_s << "s fast=" << r.fast_s << "s speedup="
                      << r.speedup << "\n";
        else
            std::cout << " EQUIVALENCE FAILURE: " << r.diff << "\n";
    }
    std::ofstream out(out_csv);
    if (!out) throw error("cannot open '" + out_csv + "' for writing");
    write_bench_csv(out, rows);
    std::cout << "wrote " << out_csv << "\n";
    for (const auto& r : rows)
        if (!r.equivalent) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"texture-descriptor classification toolkit"};
    app.set_version_flag("--version",
                         std::string(cli_version) + " (model format " +
                             std::to_string(texclass::model_format_version) + ")");
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic mosaic from a recipe");
    std::string recipe_path, out_prefix;
    std::optional<std::uint64_t> seed_override;
    synth->add_option("recipe", recipe_path, "recipe file")->required();
    synth->add_option("out_prefix", out_prefix, "output prefix")->required();
    synth->add_option("--seed", seed_override, "override the recipe seed");

    // train
    auto* train = app.add_subcommand("train", "build class models from training areas");
    std::string train_image, train_rects, train_mask, train_out, td_name = "lbp";
    std::vector<std::string> scale_args;
    int window = 40, var_bins = 16, wld_t = 8, wld_m = 6, wld_s = 20;
    int glcm_window = 7, glcm_levels = 32;
    std::string glcm_distances = "1,2,3", glcm_stats;
    RawFlags train_raw;
    train->add_option("--image", train_image, "input image (PGM)")->required();
    train->add_option("--rects", train_rects, "training rectangles: 'class_id x y w h' per line");
    train->add_option("--mask", train_mask, "training label mask (PGM)");
    train->add_option("--td", td_name,
                      "descriptor: lbp|lbpriu|var|wld|lbpriu_var|wld_var|glcm");
    train->add_option("--scale", scale_args, "descriptor scale P,R (repeatable)");
    train->add_option("--window", window, "classification window side length");
    train->add_option("--var-bins", var_bins, "VAR histogram bins");
    train->add_option("--wld-t", wld_t, "WLD orientation bins");
    train->add_option("--wld-m", wld_m, "WLD excitation segments");
    train->add_option("--wld-s", wld_s, "WLD sub-bins per segment");
    train->add_option("--glcm-window", glcm_window, "GLCM window size (odd)");
    train->add_option("--glcm-levels", glcm_levels, "GLCM quantization levels");
    train->add_option("--glcm-distances", glcm_distances, "GLCM distances, comma separated");
    train->add_option("--glcm-stats", glcm_stats, "GLCM statistics, comma separated");
    train->add_option("-o,--out", train_out, "output model file")->required();
    add_raw_flags(train, train_raw);

    // classify
    auto* classify = app.add_subcommand("classify", "pixel-wise classification");
    std::string cls_image, cls_model, cls_out, dump_prefix;
    bool naive = false, fast = false;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    RawFlags cls_raw;
    classify->add_option("--image", cls_image, "input image (PGM)")->required();
    classify->add_option("--model", cls_model, "model file")->required();
    classify->add_flag("--naive", naive, "reference path (recompute everything per pixel)");
    classify->add_flag("--fast", fast, "optimized path (default)");
    classify->add_option("--workers", workers, "worker threads (output is independent of this)");
    classify->add_option("--dump-codes", dump_prefix, "debug: dump code planes as PGM");
    classify->add_option("-o,--out", cls_out, "output mask (PGM)")->required();
    add_raw_flags(classify, cls_raw);

    // eval
    auto* eval = app.add_subcommand("eval", "accuracy of a predicted mask vs reference");
    std::string pred_path, ref_path, exclude_path, report_prefix;
    eval->add_option("--pred", pred_path, "predicted mask (PGM)")->required();
    eval->add_option("--ref", ref_path, "reference mask (PGM)")->required();
    eval->add_option("--exclude", exclude_path, "rect list to exclude (training areas)");
    eval->add_option("-o,--out", report_prefix, "report prefix (.txt/.csv)");

    // bench
    auto* bench = app.add_subcommand("bench", "naive-vs-fast timing harness");
    std::string plan_path, bench_out = "bench.csv";
    bench->add_option("plan", plan_path, "bench plan file")->required();
    bench->add_option("-o,--out", bench_out, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(recipe_path, out_prefix, seed_override);

        if (train->parsed()) {
            if (train_rects.empty() == train_mask.empty())
                throw error("train needs exactly one of --rects or --mask");
            Raster img = load_image(train_image, train_raw);
            if (td_name == "glcm") {
                GlcmConfig gc;
                gc.window = glcm_window;
                gc.levels = glcm_levels;
                gc.distances = parse_int_list(glcm_distances);
                if (!glcm_stats.empty()) {
                    gc.stats.clear();
                    std::istringstream ss(glcm_stats);
                    std::string part;
                    while (std::getline(ss, part, ',')) gc.stats.push_back(glcm_stat_from_name(part));
                }
                return run_train_glcm(img, train_rects, gc, train_out);
            }
            DescriptorConfig cfg;
            cfg.kind = kind_from_name(td_name);
            if (!scale_args.empty()) cfg.scales = parse_scales(scale_args);
            cfg.var_bins = var_bins;
            cfg.wld = {wld_t, wld_m, wld_s};
            return run_train_td(img, train_rects, train_mask, cfg, window, train_out);
        }

        if (classify->parsed()) {
            if (naive && fast) throw error("choose one of --naive or --fast");
            if (workers < 1) workers = 1;
            Raster img = load_image(cls_image, cls_raw);
            return run_classify(img, cls_model, naive, workers, cls_out, dump_prefix);
        }

        if (eval->parsed()) return run_eval(pred_path, ref_path, exclude_path, report_prefix);

        if (bench->parsed()) return run_bench(plan_path, bench_out);
    } catch (const texclass::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
