#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "texclass/classify.hpp"
#include "texclass/raster.hpp"

namespace texclass {

enum class GlcmStat { entropy, energy, homogeneity, dissimilarity, variance, shade, correlation, contrast };

inline const char* glcm_stat_name(GlcmStat s) {
    switch (s) {
        case GlcmStat::entropy: return "entropy";
        case GlcmStat::energy: return "energy";
        case GlcmStat::homogeneity: return "homogeneity";
        case GlcmStat::dissimilarity: return "dissimilarity";
        case GlcmStat::variance: return "variance";
        case GlcmStat::shade: return "shade";
        case GlcmStat::correlation: return "correlation";
        case GlcmStat::contrast: return "contrast";
    }
    return "?";
}

inline GlcmStat glcm_stat_from_name(const std::string& s) {
    for (int i = 0; i < 8; ++i)
        if (s == glcm_stat_name(static_cast<GlcmStat>(i))) return static_cast<GlcmStat>(i);
    throw error("unknown GLCM statistic '" + s + "'");
}

inline std::vector<GlcmStat> all_glcm_stats() {
    return {GlcmStat::entropy,       GlcmStat::energy,   GlcmStat::homogeneity,
            GlcmStat::dissimilarity, GlcmStat::variance, GlcmStat::shade,
            GlcmStat::correlation,   GlcmStat::contrast};
}

struct GlcmConfig {
    int window = 7;
    int levels = 32;
    std::vector<int> distances = {1, 2, 3};
    std::vector<GlcmStat> stats = all_glcm_stats();

    std::size_t feature_dim() const { return stats.size() * distances.size(); }

    void validate() const {
        if (window < 3 || window % 2 == 0) throw error("glcm: window must be odd and >= 3");
        if (levels < 2) throw error("glcm: levels must be >= 2");
        if (distances.empty()) throw error("glcm: need at least one distance");
        for (int d : distances)
            if (d < 1) throw error("glcm: distances must be >= 1");
        if (stats.empty()) throw error("glcm: need at least one statistic");
    }

    friend bool operator==(const GlcmConfig&, const GlcmConfig&) = default;
};

// Offsets for the four standard angles 0, 45, 90, 135 degrees at distance d.
// Symmetric counting makes the opposite directions equivalent.
inline std::array<std::pair<int, int>, 4> glcm_angle_offsets(int d) {
    return {{{d, 0}, {d, -d}, {0, -d}, {-d, -d}}};
}

// Uniform quantization of the raster's theoretical DN range into G levels.
inline int glcm_quantize(std::uint16_t value, int levels, int depth) {
    return static_cast<int>((static_cast<std::uint32_t>(value) * levels) >> depth);
}

namespace detail {

// Sparse co-occurrence accumulation reused across per-pixel windows.
struct GlcmAccum {
    int levels = 0;
    std::vector<std::uint32_t> cells; // G*G counts
    std::vector<int> touched;
    std::uint64_t total = 0;

    void init(int g) {
        levels = g;
        cells.assign(static_cast<std::size_t>(g) * g, 0);
        touched.clear();
        total = 0;
    }
    void reset() {
        for (int c : touched) cells[c] = 0;
        touched.clear();
        total = 0;
    }
    void add_pair(int a, int b) {
        int ia = a * levels + b;
        int ib = b * levels + a;
        if (cells[ia]++ == 0) touched.push_back(ia);
        if (cells[ib]++ == 0) touched.push_back(ib);
        total += 2;
    }
};

// Stats from the nonzero cells of a normalized co-occurrence matrix.
// `entries` are (row*G+col, weight) pairs with positive weight.
inline void glcm_stats_from_entries(const std::vector<std::pair<int, double>>& entries, int g,
                                    const std::vector<GlcmStat>& stats, double* out) {
    double mean_a = 0.0, mean_b = 0.0;
    for (const auto& e : entries) {
        int a = e.first / g, b = e.first % g;
        mean_a += e.second * a;
        mean_b += e.second * b;
    }
    double var_a = 0.0, var_b = 0.0, cross = 0.0;
    double entropy = 0.0, energy = 0.0, homog = 0.0, dissim = 0.0, contrast = 0.0, shade = 0.0,
           variance = 0.0;
    for (const auto& e : entries) {
        int a = e.first / g, b = e.first % g;
        double p = e.second;
        double diff = a - b;
        entropy -= p * std::log(p);
        energy += p * p;
        homog += p / (1.0 + diff * diff);
        dissim += p * std::abs(diff);
        contrast += p * diff * diff;
        variance += p * (a - mean_a) * (a - mean_a);
        double sh = a + b - mean_a - mean_b;
        shade += p * sh * sh * sh;
        var_a += p * (a - mean_a) * (a - mean_a);
        var_b += p * (b - mean_b) * (b - mean_b);
        cross += p * a * b;
    }
    double correlation = 0.0;
    double sd = std::sqrt(var_a) * std::sqrt(var_b);
    if (sd > 0.0) correlation = (cross - mean_a * mean_b) / sd;

    for (std::size_t i = 0; i < stats.size(); ++i) {
        switch (stats[i]) {
            case GlcmStat::entropy: out[i] = entropy; break;
            case GlcmStat::energy: out[i] = energy; break;
            case GlcmStat::homogeneity: out[i] = homog; break;
            case GlcmStat::dissimilarity: out[i] = dissim; break;
            case GlcmStat::variance: out[i] = variance; break;
            case GlcmStat::shade: out[i] = shade; break;
            case GlcmStat::correlation: out[i] = correlation; break;
            case GlcmStat::contrast: out[i] = contrast; break;
        }
    }
}

} // namespace detail

// Symmetric normalized co-occurrence matrix of a window for one offset.
// Pairs whose second endpoint leaves the window are skipped.
inline std::vector<double> glcm_matrix(const Raster& window, std::pair<int, int> offset, int levels) {
    if (levels < 2) throw error("glcm: levels must be >= 2");
    detail::GlcmAccum acc;
    acc.init(levels);
    for (int y = 0; y < window.height; ++y)
        for (int x = 0; x < window.width; ++x) {
            int nx = x + offset.first, ny = y + offset.second;
            if (nx < 0 || ny < 0 || nx >= window.width || ny >= window.height) continue;
            acc.add_pair(glcm_quantize(window.at(x, y), levels, window.depth),
                         glcm_quantize(window.at(nx, ny), levels, window.depth));
        }
    if (acc.total == 0) throw error("glcm: window smaller than offset reach");
    std::vector<double> m(static_cast<std::size_t>(levels) * levels, 0.0);
    double inv = 1.0 / static_cast<double>(acc.total);
    for (int c : acc.touched) m[c] = acc.cells[c] * inv;
    return m;
}

// Textbook statistics of a normalized co-occurrence matrix, in `stats` order.
inline std::vector<double> glcm_features(const std::vector<double>& matrix, int levels,
                                         const std::vector<GlcmStat>& stats) {
    if (matrix.size() != static_cast<std::size_t>(levels) * levels)
        throw error("glcm: matrix size does not match levels");
    std::vector<std::pair<int, double>> entries;
    for (std::size_t i = 0; i < matrix.size(); ++i)
        if (matrix[i] > 0.0) entries.push_back({static_cast<int>(i), matrix[i]});
    std::vector<double> out(stats.size(), 0.0);
    detail::glcm_stats_from_entries(entries, levels, stats, out.data());
    return out;
}

// ---------------------------------------------------------------------------
// Minimum-Euclidean-distance classification over z-scored, angle-averaged
// feature vectors, mirroring the histogram minimum-distance scheme.

struct GlcmClass {
    int class_id = 0;
    std::string name;
    std::vector<double> mean; // raw (not z-scored) feature means
    std::uint64_t pixel_count = 0;
};

struct GlcmModel {
    GlcmConfig config;
    std::vector<double> norm_mean; // per-dimension training statistics
    std::vector<double> norm_std;
    std::vector<GlcmClass> classes;

    void validate() const {
        config.validate();
        std::size_t dim = config.feature_dim();
        if (norm_mean.size() != dim || norm_std.size() != dim)
            throw error("glcm model: normalization size mismatch");
        if (classes.empty()) throw error("glcm model: no classes");
        for (std::size_t i = 0; i < classes.size(); ++i) {
            if (classes[i].class_id != static_cast<int>(i) + 1)
                throw error("glcm model: class ids must be contiguous from 1");
            if (classes[i].mean.size() != dim) throw error("glcm model: feature size mismatch");
            if (classes[i].pixel_count == 0) throw error("glcm model: class with zero pixels");
        }
    }
};

namespace detail {

struct GlcmPixelContext {
    const GlcmConfig* cfg = nullptr;
    std::vector<std::uint8_t> quantized; // full-image quantized plane
    int width = 0, height = 0;
    GlcmAccum acc;
    std::vector<std::pair<int, double>> entries;
    std::vector<double> angle_stats;

    void init(const Raster& img, const GlcmConfig& c) {
        cfg = &c;
        width = img.width;
        height = img.height;
        quantized.resize(img.pixels.size());
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            quantized[i] = static_cast<std::uint8_t>(
                glcm_quantize(img.pixels[i], c.levels, img.depth));
        acc.init(c.levels);
        angle_stats.assign(c.stats.size(), 0.0);
    }

    int q(int x, int y) const { return quantized[static_cast<std::size_t>(y) * width + x]; }

    // Angle-averaged feature vector for the window centered at (cx, cy).
    // The caller guarantees the window fits inside the image.
    void features(int cx, int cy, double* out) {
        const GlcmConfig& c = *cfg;
        int half = (c.window - 1) / 2;
        int x0 = cx - half, y0 = cy - half, x1 = cx + half, y1 = cy + half;
        std::size_t di = 0;
        for (int d : c.distances) {
            for (std::size_t s = 0; s < c.stats.size(); ++s) out[di * c.stats.size() + s] = 0.0;
            for (const auto& off : glcm_angle_offsets(d)) {
                acc.reset();
                for (int y = y0; y <= y1; ++y)
                    for (int x = x0; x <= x1; ++x) {
                        int nx = x + off.first, ny = y + off.second;
                        if (nx < x0 || ny < y0 || nx > x1 || ny > y1) continue;
                        acc.add_pair(q(x, y), q(nx, ny));
                    }
                if (acc.total == 0) throw error("glcm: window smaller than offset reach");
                entries.clear();
                std::sort(acc.touched.begin(), acc.touched.end());
                double inv = 1.0 / static_cast<double>(acc.total);
                for (int cell : acc.touched) entries.push_back({cell, acc.cells[cell] * inv});
                glcm_stats_from_entries(entries, c.levels, c.stats, angle_stats.data());
                for (std::size_t s = 0; s < c.stats.size(); ++s)
                    out[di * c.stats.size() + s] += angle_stats[s];
            }
            for (std::size_t s = 0; s < c.stats.size(); ++s) out[di * c.stats.size() + s] /= 4.0;
            ++di;
        }
    }
};

} // namespace detail

inline GlcmModel glcm_train(const Raster& img,
                            const std::vector<std::pair<int, std::vector<Rect>>>& class_rects,
                            const GlcmConfig& cfg,
                            const std::vector<std::string>& names = {}) {
    cfg.validate();
    if (class_rects.empty()) throw error("glcm train: no classes");
    int half = (cfg.window - 1) / 2;
    int reach = half; // pairs never leave the window
    std::size_t dim = cfg.feature_dim();

    detail::GlcmPixelContext ctx;
    ctx.init(img, cfg);

    GlcmModel model;
    model.config = cfg;
    std::vector<double> feat(dim);
    std::vector<double> pool_sum(dim, 0.0), pool_sq(dim, 0.0);
    std::uint64_t pool_n = 0;

    for (std::size_t k = 0; k < class_rects.size(); ++k) {
        const auto& [cid, rects] = class_rects[k];
        if (rects.empty()) throw error("glcm train: class without rects");
        GlcmClass gc;
        gc.class_id = cid;
        gc.name = k < names.size() ? names[k] : ("class" + std::to_string(cid));
        gc.mean.assign(dim, 0.0);
        for (const Rect& rc : rects) {
            if (rc.x < 0 || rc.y < 0 || rc.x + rc.w > img.width || rc.y + rc.h > img.height)
                throw error("glcm train: rect out of bounds");
            int y0 = std::max(rc.y, reach), y1 = std::min(rc.y + rc.h, img.height - reach);
            int x0 = std::max(rc.x, reach), x1 = std::min(rc.x + rc.w, img.width - reach);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    ctx.features(x, y, feat.data());
                    for (std::size_t i = 0; i < dim; ++i) {
                        gc.mean[i] += feat[i];
                        pool_sum[i] += feat[i];
                        pool_sq[i] += feat[i] * feat[i];
                    }
                    ++gc.pixel_count;
                    ++pool_n;
                }
        }
        if (gc.pixel_count == 0) throw error("glcm train: rects leave no usable pixels");
        for (std::size_t i = 0; i < dim; ++i) gc.mean[i] /= static_cast<double>(gc.pixel_count);
        model.classes.push_back(std::move(gc));
    }

    model.norm_mean.resize(dim);
    model.norm_std.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double mu = pool_sum[i] / static_cast<double>(pool_n);
        double var = pool_sq[i] / static_cast<double>(pool_n) - mu * mu;
        model.norm_mean[i] = mu;
        model.norm_std[i] = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    model.validate();
    return model;
}

inline LabelMask glcm_classify(const Raster& img, const GlcmModel& model, const GlcmConfig& cfg,
                               int workers = 1) {
    model.validate();
    if (!(cfg == model.config)) throw error("glcm: config mismatch between model and request");
    int half = (cfg.window - 1) / 2;
    if (img.width < cfg.window || img.height < cfg.window)
        throw error("glcm: raster too small for window");
    std::size_t dim = cfg.feature_dim();

    // z-scored class means; dimensions with zero training spread are dropped
    std::vector<std::vector<double>> zmeans;
    for (const auto& c : model.classes) {
        std::vector<double> z(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            if (model.norm_std[i] > 0.0) z[i] = (c.mean[i] - model.norm_mean[i]) / model.norm_std[i];
        zmeans.push_back(std::move(z));
    }

    LabelMask out(img.width, img.height, 0);
    struct WorkerState {
        detail::GlcmPixelContext ctx;
        std::vector<double> feat;
    };
    detail::run_rows(
        half, img.height - 1 - half, workers,
        [&] {
            WorkerState st;
            st.ctx.init(img, cfg);
            st.feat.resize(dim);
            return st;
        },
        [&](WorkerState& st, int y) {
            for (int x = half; x <= img.width - 1 - half; ++x) {
                st.ctx.features(x, y, st.feat.data());
                int best = 0;
                double best_d = 0.0;
                for (std::size_t k = 0; k < model.classes.size(); ++k) {
                    double d = 0.0;
                    for (std::size_t i = 0; i < dim; ++i) {
                        if (model.norm_std[i] <= 0.0) continue;
                        double z = (st.feat[i] - model.norm_mean[i]) / model.norm_std[i];
                        double diff = z - zmeans[k][i];
                        d += diff * diff;
                    }
                    if (best == 0 || d < best_d) {
                        best = model.classes[k].class_id;
                        best_d = d;
                    }
                }
                out.at(x, y) = static_cast<std::uint8_t>(best);
            }
        });
    return out;
}

} // namespace texclass
