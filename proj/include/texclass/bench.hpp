#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "texclass/classify.hpp"
#include "texclass/synth.hpp"

namespace texclass {

struct BenchCondition {
    DescriptorKind kind = DescriptorKind::wld;
    std::vector<ScalePair> scales = {{8, 1.0}};
    int window = 40;
    int size = 256;
    int classes = 3;
    int reps = 3;
    std::uint64_t seed = 1;
    int workers = 1;
};

struct BenchRow {
    BenchCondition cond;
    bool equivalent = false;
    std::string diff;     // first differing pixel when the check fails
    double naive_s = 0.0; // medians over reps
    double fast_s = 0.0;
    double speedup = 0.0;
};

struct EquivalenceCheck {
    bool ok = false;
    std::string diff;
};

inline EquivalenceCheck check_equivalence(const LabelMask& naive, const LabelMask& fast) {
    if (naive.width != fast.width || naive.height != fast.height)
        return {false, "mask dimensions differ"};
    for (int y = 0; y < naive.height; ++y)
        for (int x = 0; x < naive.width; ++x)
            if (naive.at(x, y) != fast.at(x, y)) {
                std::ostringstream os;
                os << "first difference at (" << x << "," << y << "): naive="
                   << int(naive.at(x, y)) << " fast=" << int(fast.at(x, y));
                return {false, os.str()};
            }
    return {true, {}};
}

namespace detail {

// Standard benchmark scene: horizontal texture bands, one class per band,
// with training rects taken from each band's center line.
inline Recipe bench_recipe(int size, int classes, std::uint64_t seed) {
    if (classes < 1 || classes > 8) throw error("bench: classes must be in 1..8");
    Recipe r;
    r.width = r.height = size;
    r.seed = seed;
    std::vector<TextureSpec> pool(8);
    pool[0].kind = TextureSpec::Kind::grating;
    pool[0].freq = 0.24; pool[0].orient_deg = 0; pool[0].amplitude = 55; pool[0].mean = 128;
    pool[1].kind = TextureSpec::Kind::noise;
    pool[1].mean = 128; pool[1].stddev = 35;
    pool[2].kind = TextureSpec::Kind::checker;
    pool[2].cell = 3; pool[2].level_a = 90; pool[2].level_b = 170;
    pool[3].kind = TextureSpec::Kind::grating;
    pool[3].freq = 0.11; pool[3].orient_deg = 60; pool[3].amplitude = 45; pool[3].mean = 120;
    pool[4].kind = TextureSpec::Kind::noise;
    pool[4].mean = 128; pool[4].stddev = 10;
    pool[5].kind = TextureSpec::Kind::grating;
    pool[5].freq = 0.35; pool[5].orient_deg = 30; pool[5].amplitude = 40; pool[5].mean = 140;
    pool[6].kind = TextureSpec::Kind::checker;
    pool[6].cell = 6; pool[6].level_a = 60; pool[6].level_b = 200;
    pool[7].kind = TextureSpec::Kind::noise;
    pool[7].mean = 100; pool[7].stddev = 22;

    int y = 0;
    for (int k = 0; k < classes; ++k) {
        int h = (size - y) / (classes - k);
        Tile t;
        t.class_id = k + 1;
        t.rect = {0, y, size, h};
        t.spec = pool[k];
        r.tiles.push_back(t);
        y += h;
    }
    return r;
}

inline std::vector<Rect> bench_training_rects(const Recipe& r, int band, int side) {
    const Rect& rc = r.tiles[band].rect;
    int cx = rc.x + rc.w / 2, cy = rc.y + rc.h / 2;
    side = std::min({side, rc.w - 2, rc.h - 2});
    return {Rect{cx - side / 2, cy - side / 2, side, side}};
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

// Times one condition. The fast path is only timed after a bit-exactness
// check against the naive path on a centered subregion; model preparation and
// image synthesis stay outside the timed section.
inline BenchRow run_condition(const BenchCondition& cond) {
    BenchRow row;
    row.cond = cond;

    Recipe recipe = detail::bench_recipe(cond.size, cond.classes, cond.seed);
    auto [img, mask] = generate_mosaic(recipe);

    DescriptorConfig cfg;
    cfg.kind = cond.kind;
    cfg.scales = cond.scales;

    std::vector<std::vector<Rect>> rects;
    std::vector<Rect> all;
    for (int k = 0; k < cond.classes; ++k) {
        rects.push_back(detail::bench_training_rects(recipe, k, 40));
        all.insert(all.end(), rects.back().begin(), rects.back().end());
    }
    if (cfg.uses_var()) train_var_boundaries_for(cfg, img, all);

    ModelSet models;
    models.config = cfg;
    models.window = cond.window;
    for (int k = 0; k < cond.classes; ++k)
        models.classes.push_back(build_class_model(img, rects[k], cfg, k + 1));
    models.validate();

    // equivalence gate on a subsampled region
    int border = max_border(cfg);
    int min_side = cond.window + 2 * border + 2;
    int cs = std::min(cond.size, std::max(128, min_side));
    Rect crop_rect{(img.width - cs) / 2, (img.height - cs) / 2, cs, cs};
    Raster sub = crop(img, crop_rect);
    LabelMask sub_naive = classify_image_naive(sub, models, cond.workers);
    LabelMask sub_fast = classify_image_fast(sub, models, cond.workers);
    EquivalenceCheck eq = check_equivalence(sub_naive, sub_fast);
    row.equivalent = eq.ok;
    row.diff = eq.diff;
    if (!eq.ok) return row; // aborted: no timings for a non-equivalent pair

    using clock = std::chrono::steady_clock;
    std::vector<double> naive_times, fast_times;
    for (int rep = 0; rep < std::max(1, cond.reps); ++rep) {
        auto t0 = clock::now();
        LabelMask mn = classify_image_naive(img, models, cond.workers);
        auto t1 = clock::now();
        LabelMask mf = classify_image_fast(img, models, cond.workers);
        auto t2 = clock::now();
        naive_times.push_back(std::chrono::duration<double>(t1 - t0).count());
        fast_times.push_back(std::chrono::duration<double>(t2 - t1).count());
        if (!check_equivalence(mn, mf).ok) {
            row.equivalent = false;
            row.diff = check_equivalence(mn, mf).diff;
            return row;
        }
    }
    row.naive_s = detail::median(naive_times);
    row.fast_s = detail::median(fast_times);
    row.speedup = row.fast_s > 0.0 ? row.naive_s / row.fast_s : 0.0;
    return row;
}

inline std::vector<BenchRow> run_benchmark(const std::vector<BenchCondition>& conditions) {
    std::vector<BenchRow> rows;
    for (const auto& c : conditions) rows.push_back(run_condition(c));
    return rows;
}

inline std::string format_scales(const std::vector<ScalePair>& scales) {
    std::ostringstream os;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (i) os << ";";
        os << scales[i].p << "," << scales[i].r;
    }
    return os.str();
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "kind,scales,window,size,classes,workers,reps,naive_s,fast_s,speedup,equivalent,diff\n";
    for (const auto& r : rows) {
        out << kind_name(r.cond.kind) << "," << format_scales(r.cond.scales) << ","
            << r.cond.window << "," << r.cond.size << "," << r.cond.classes << ","
            << r.cond.workers << "," << r.cond.reps << ",";
        if (r.equivalent) {
            out << std::fixed << std::setprecision(3) << r.naive_s << "," << r.fast_s << ","
                << std::setprecision(2) << r.speedup << ",yes,\n";
            out.unsetf(std::ios::fixed);
        } else {
            out << ",,,no," << r.diff << "\n";
        }
    }
}

// Plan files: one condition per line, `key=value` tokens.
//   condition td=wld scales=8,1 window=40 size=256 classes=3 reps=3 seed=1 workers=1
// Multi-scale: scales=8,1;16,2;24,3
inline std::vector<BenchCondition> parse_bench_plan(std::istream& in) {
    std::vector<BenchCondition> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line.substr(0, line.find('#'));
        std::istringstream ls(stripped);
        std::string word;
        if (!(ls >> word)) continue;
        if (word != "condition")
            throw error("bench plan: expected 'condition' at line " + std::to_string(lineno));
        BenchCondition c;
        std::string kv;
        while (ls >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw error("bench plan: expected key=value, got '" + kv + "'");
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            try {
                if (key == "td") c.kind = kind_from_name(val);
                else if (key == "scales") {
                    c.scales.clear();
                    std::istringstream ss(val);
                    std::string part;
                    while (std::getline(ss, part, ';')) {
                        auto comma = part.find(',');
                        if (comma == std::string::npos) throw error("bench plan: scale wants P,R");
                        c.scales.push_back({std::stoi(part.substr(0, comma)),
                                            std::stod(part.substr(comma + 1))});
                    }
                    if (c.scales.empty()) throw error("bench plan: empty scales");
                } else if (key == "window") c.window = std::stoi(val);
                else if (key == "size") c.size = std::stoi(val);
                else if (key == "classes") c.classes = std::stoi(val);
                else if (key == "reps") c.reps = std::stoi(val);
                else if (key == "seed") c.seed = std::stoull(val);
                else if (key == "workers") c.workers = std::stoi(val);
                else throw error("bench plan: unknown key '" + key + "'");
            } catch (const std::invalid_argument&) {
                throw error("bench plan: bad value for '" + key + "' at line " + std::to_string(lineno));
            } catch (const std::out_of_range&) {
                throw error("bench plan: bad value for '" + key + "' at line " + std::to_string(lineno));
            }
        }
        out.push_back(c);
    }
    if (out.empty()) throw error("bench plan: no conditions");
    return out;
}

} // namespace texclass
