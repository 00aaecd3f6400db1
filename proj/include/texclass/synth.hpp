#pragma once

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "texclass/common.hpp"
#include "texclass/raster.hpp"

namespace texclass {

// SplitMix64 (Steele, Lea, Flood 2014), fixed constants. Chosen so that
// corpora regenerate byte-identically on any platform.
struct SplitMix64 {
    std::uint64_t state = 0;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1) with 53 random bits
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // approximate standard normal: Irwin-Hall sum of 12 uniforms minus 6.
    // Uses only IEEE additions, so it is platform-independent.
    double next_gaussian() {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += next_unit();
        return s - 6.0;
    }
};

namespace detail {

// Deterministic sine: explicit range reduction plus a fixed Taylor polynomial
// on [-pi/2, pi/2]. Avoids libm so generated corpora do not depend on the
// host's math library. Absolute error is below 1e-7, ample for texture work.
inline double det_sin(double x) {
    const double two_pi = 6.283185307179586476925286766559;
    const double pi = 3.1415926535897932384626433832795;
    double k = std::nearbyint(x / two_pi);
    double r = x - k * two_pi; // r in [-pi, pi] up to rounding
    if (r > pi / 2.0) r = pi - r;
    if (r < -pi / 2.0) r = -pi - r;
    double r2 = r * r;
    // sin(r) = r - r^3/3! + r^5/5! - r^7/7! + r^9/9! - r^11/11!
    double p = 1.0 / 39916800.0;
    p = 1.0 / 362880.0 - r2 * p;
    p = 1.0 / 5040.0 - r2 * p;
    p = 1.0 / 120.0 - r2 * p;
    p = 1.0 / 6.0 - r2 * p;
    return r - r2 * r * p;
}

inline double det_cos(double x) { return det_sin(x + 1.5707963267948966192313216916398); }

// Round to nearest (ties to even, the default FP environment) then clip.
inline std::uint16_t quantize_dn(double v, int depth) {
    double maxv = depth == 8 ? 255.0 : 65535.0;
    double r = std::nearbyint(v);
    if (r < 0.0) r = 0.0;
    if (r > maxv) r = maxv;
    return static_cast<std::uint16_t>(r);
}

} // namespace detail

// One synthetic texture generator. The optional illumination ramp scales the
// generated value by a horizontal gain gradient across the tile, emulating
// within-class illumination change.
struct TextureSpec {
    enum class Kind { grating, noise, checker };
    Kind kind = Kind::noise;

    // grating: mean + amplitude * sin(2*pi*freq*(x cos a + y sin a))
    double freq = 0.1;
    double orient_deg = 0.0;
    double amplitude = 40.0;
    double mean = 128.0;
    // noise: mean + stddev * N(0,1)
    double stddev = 20.0;
    // checker
    int cell = 4;
    int level_a = 80;
    int level_b = 180;
    // illumination ramp wrapper
    bool ramp = false;
    double gain_low = 1.0;
    double gain_high = 1.0;
};

struct Tile {
    int class_id = 0;
    Rect rect;
    TextureSpec spec;
};

struct Recipe {
    int width = 512;
    int height = 512;
    int depth = 8;
    std::uint64_t seed = 1;
    std::vector<Tile> tiles;
};

inline std::pair<Raster, LabelMask> generate_mosaic(const Recipe& recipe) {
    if (recipe.width < 1 || recipe.height < 1) throw error("synth: bad mosaic size");
    if (recipe.tiles.empty()) throw error("synth: recipe has no tiles");

    // the layout must cover the raster exactly once
    std::vector<std::uint8_t> cover(static_cast<std::size_t>(recipe.width) * recipe.height, 0);
    for (const Tile& t : recipe.tiles) {
        const Rect& rc = t.rect;
        if (t.class_id < 1 || t.class_id > 255) throw error("synth: tile class id out of range");
        if (rc.w <= 0 || rc.h <= 0 || rc.x < 0 || rc.y < 0 || rc.x + rc.w > recipe.width ||
            rc.y + rc.h > recipe.height)
            throw error("synth: tile rect out of bounds");
        for (int y = rc.y; y < rc.y + rc.h; ++y)
            for (int x = rc.x; x < rc.x + rc.w; ++x) {
                std::uint8_t& c = cover[static_cast<std::size_t>(y) * recipe.width + x];
                if (c) throw error("synth: tile layout overlaps");
                c = 1;
            }
    }
    for (std::uint8_t c : cover)
        if (!c) throw error("synth: tile layout leaves gaps");

    Raster img(recipe.width, recipe.height, recipe.depth);
    LabelMask mask(recipe.width, recipe.height);

    for (std::size_t ti = 0; ti < recipe.tiles.size(); ++ti) {
        const Tile& t = recipe.tiles[ti];
        const TextureSpec& sp = t.spec;
        // independent, reproducible stream per tile
        SplitMix64 rng(recipe.seed + 0x9e3779b97f4a7c15ull * (ti + 1));
        double ca = 0.0, sa = 0.0;
        if (sp.kind == TextureSpec::Kind::grating) {
            double a = sp.orient_deg * (3.1415926535897932384626433832795 / 180.0);
            ca = detail::det_cos(a);
            sa = detail::det_sin(a);
        }
        for (int y = t.rect.y; y < t.rect.y + t.rect.h; ++y)
            for (int x = t.rect.x; x < t.rect.x + t.rect.w; ++x) {
                double v = 0.0;
                switch (sp.kind) {
                    case TextureSpec::Kind::grating:
                        v = sp.mean + sp.amplitude *
                                          detail::det_sin(2.0 * 3.1415926535897932384626433832795 *
                                                          sp.freq * (x * ca + y * sa));
                        break;
                    case TextureSpec::Kind::noise:
                        v = sp.mean + sp.stddev * rng.next_gaussian();
                        break;
                    case TextureSpec::Kind::checker:
                        v = ((x / sp.cell) + (y / sp.cell)) % 2 == 0 ? sp.level_a : sp.level_b;
                        break;
                }
                if (sp.ramp) {
                    double f = t.rect.w > 1
                                   ? static_cast<double>(x - t.rect.x) / (t.rect.w - 1)
                                   : 0.0;
                    v *= sp.gain_low + (sp.gain_high - sp.gain_low) * f;
                }
                img.at(x, y) = detail::quantize_dn(v, recipe.depth);
                mask.at(x, y) = static_cast<std::uint8_t>(t.class_id);
            }
    }
    return {std::move(img), std::move(mask)};
}

// Horizontal multiplicative illumination gradient over a whole raster.
inline Raster apply_illumination_ramp(const Raster& img, double gain_low, double gain_high) {
    if (gain_low <= 0.0 || gain_high <= 0.0) throw error("ramp: gains must be positive");
    Raster out(img.width, img.height, img.depth);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double f = img.width > 1 ? static_cast<double>(x) / (img.width - 1) : 0.0;
            double g = gain_low + (gain_high - gain_low) * f;
            out.at(x, y) = detail::quantize_dn(img.at(x, y) * g, img.depth);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Recipe files: plain text, one `tile` line per region.
//
//   size 512 512
//   depth 8
//   seed 41
//   tile <class> <x> <y> <w> <h> grating freq=0.2 orient=30 amp=50 mean=128 [ramp=0.8,1.2]
//   tile <class> <x> <y> <w> <h> noise mean=128 stddev=25 [ramp=...]
//   tile <class> <x> <y> <w> <h> checker cell=3 a=90 b=170 [ramp=...]

namespace detail {

inline double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw error("recipe: bad " + what + " value '" + s + "'");
    }
}

} // namespace detail

inline Recipe parse_recipe(std::istream& in) {
    Recipe r;
    bool saw_size = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line.substr(0, line.find('#'));
        std::istringstream ls(stripped);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "size") {
            if (!(ls >> r.width >> r.height)) throw error("recipe: malformed size line");
            saw_size = true;
        } else if (word == "depth") {
            if (!(ls >> r.depth) || (r.depth != 8 && r.depth != 16))
                throw error("recipe: depth must be 8 or 16");
        } else if (word == "seed") {
            if (!(ls >> r.seed)) throw error("recipe: malformed seed line");
        } else if (word == "tile") {
            Tile t;
            std::string kind;
            if (!(ls >> t.class_id >> t.rect.x >> t.rect.y >> t.rect.w >> t.rect.h >> kind))
                throw error("recipe: malformed tile line " + std::to_string(lineno));
            if (kind == "grating")
                t.spec.kind = TextureSpec::Kind::grating;
            else if (kind == "noise")
                t.spec.kind = TextureSpec::Kind::noise;
            else if (kind == "checker")
                t.spec.kind = TextureSpec::Kind::checker;
            else
                throw error("recipe: unknown texture kind '" + kind + "'");
            std::string kv;
            while (ls >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw error("recipe: expected key=value, got '" + kv + "'");
                std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "freq") t.spec.freq = detail::parse_num(val, key);
                else if (key == "orient") t.spec.orient_deg = detail::parse_num(val, key);
                else if (key == "amp") t.spec.amplitude = detail::parse_num(val, key);
                else if (key == "mean") t.spec.mean = detail::parse_num(val, key);
                else if (key == "stddev") t.spec.stddev = detail::parse_num(val, key);
                else if (key == "cell") t.spec.cell = static_cast<int>(detail::parse_num(val, key));
                else if (key == "a") t.spec.level_a = static_cast<int>(detail::parse_num(val, key));
                else if (key == "b") t.spec.level_b = static_cast<int>(detail::parse_num(val, key));
                else if (key == "ramp") {
                    auto comma = val.find(',');
                    if (comma == std::string::npos) throw error("recipe: ramp wants lo,hi");
                    t.spec.ramp = true;
                    t.spec.gain_low = detail::parse_num(val.substr(0, comma), "ramp");
                    t.spec.gain_high = detail::parse_num(val.substr(comma + 1), "ramp");
                } else {
                    throw error("recipe: unknown key '" + key + "'");
                }
            }
            if (t.spec.cell < 1) throw error("recipe: checker cell must be >= 1");
            r.tiles.push_back(t);
        } else {
            throw error("recipe: unknown directive '" + word + "'");
        }
    }
    if (!saw_size) throw error("recipe: missing size line");
    if (r.tiles.empty()) throw error("recipe: no tiles");
    return r;
}

inline Recipe load_recipe(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("recipe: cannot open '" + path + "'");
    return parse_recipe(in);
}

} // namespace texclass
