#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "texclass/code_plane.hpp"
#include "texclass/descriptors.hpp"
#include "texclass/histogram.hpp"
#include "texclass/raster.hpp"

namespace texclass {

// Training signature of one texture class.
struct ClassModel {
    int class_id = 0;
    std::string name;
    Histogram histogram;
    std::uint64_t pixel_count = 0;
};

// The classifier's a-priori knowledge: descriptor layout, window size, and
// one pooled histogram per class.
struct ModelSet {
    DescriptorConfig config;
    int window = 40;
    std::vector<ClassModel> classes;

    void validate() const {
        config.validate();
        if (window < 1) throw error("model: window must be >= 1");
        if (classes.empty()) throw error("model: no classes");
        std::size_t bins = bin_count(config);
        std::uint64_t lid = layout_id(config);
        for (std::size_t i = 0; i < classes.size(); ++i) {
            const ClassModel& c = classes[i];
            if (c.class_id != static_cast<int>(i) + 1)
                throw error("model: class ids must be contiguous from 1");
            if (c.pixel_count == 0) throw error("model: class with zero training pixels");
            if (c.histogram.bin_count != bins)
                throw error("model: histogram length inconsistent with config");
            if (c.histogram.layout_id != lid)
                throw error("model: histogram layout inconsistent with config");
            double s = c.histogram.sum();
            if (s < 1.0 - 1e-6 || s > 1.0 + 1e-6)
                throw error("model: class histogram not normalized");
        }
    }
};

// ---------------------------------------------------------------------------
// Bhattacharyya distance. The coefficient is clamped to [1e-12, 1] before the
// logarithm: the floor caps the distance of disjoint histograms at about
// 27.631, the ceiling keeps rounding noise from producing negative distances.

inline constexpr double bd_coeff_floor = 1e-12;

inline double bd_from_coefficient(double coeff) {
    if (coeff < bd_coeff_floor) coeff = bd_coeff_floor;
    if (coeff > 1.0) coeff = 1.0;
    return -std::log(coeff);
}

inline double bhattacharyya(const Histogram& h1, const Histogram& h2) {
    if (h1.bin_count != h2.bin_count) throw error("bhattacharyya: histogram length mismatch");
    if (h1.entries.empty() || h2.entries.empty())
        throw error("bhattacharyya: empty histogram");
    double s1 = h1.sum(), s2 = h2.sum();
    if (s1 < 1.0 - 1e-6 || s1 > 1.0 + 1e-6 || s2 < 1.0 - 1e-6 || s2 > 1.0 + 1e-6)
        throw error("bhattacharyya: histogram not normalized");

    double coeff = 0.0;
    auto i1 = h1.entries.begin();
    auto i2 = h2.entries.begin();
    while (i1 != h1.entries.end() && i2 != h2.entries.end()) {
        if (i1->first < i2->first) {
            ++i1;
        } else if (i2->first < i1->first) {
            ++i2;
        } else {
            coeff += std::sqrt(i1->second * i2->second);
            ++i1;
            ++i2;
        }
    }
    return bd_from_coefficient(coeff);
}

struct PixelClassification {
    int class_id = 0;
    double distance = 0.0;
};

// Nearest class by Bhattacharyya distance; ties go to the lowest class id.
inline PixelClassification classify_pixel(const Histogram& h, const ModelSet& models) {
    if (h.bin_count != bin_count(models.config) || h.layout_id != layout_id(models.config))
        throw error("classify_pixel: histogram layout mismatch");
    PixelClassification best{0, 0.0};
    for (const ClassModel& c : models.classes) {
        double d = bhattacharyya(h, c.histogram);
        if (best.class_id == 0 || d < best.distance) best = {c.class_id, d};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Model training.

// Variance pool for quantile training: VAR values of every usable training
// pixel, across all classes' rectangles and all configured scales.
inline std::vector<double> collect_var_values(const Raster& img, const std::vector<Rect>& rects,
                                              const DescriptorConfig& cfg) {
    int border = max_border(cfg);
    std::vector<double> pool;
    for (const auto& s : cfg.scales) {
        CircleSampler sampler(s.p, s.r);
        std::vector<double> scratch(static_cast<std::size_t>(s.p));
        for (const Rect& rc : rects) {
            if (rc.w <= 0 || rc.h <= 0 || rc.x < 0 || rc.y < 0 || rc.x + rc.w > img.width ||
                rc.y + rc.h > img.height)
                throw error("training rect out of bounds");
            for (int y = std::max(rc.y, border); y < std::min(rc.y + rc.h, img.height - border); ++y)
                for (int x = std::max(rc.x, border); x < std::min(rc.x + rc.w, img.width - border); ++x) {
                    sampler.sample(img, x, y, scratch.data());
                    pool.push_back(var_value(scratch.data(), s.p));
                }
        }
    }
    if (pool.empty()) throw error("no usable training pixels for VAR boundaries");
    return pool;
}

inline void train_var_boundaries_for(DescriptorConfig& cfg, const Raster& img,
                                     const std::vector<Rect>& all_class_rects) {
    cfg.var_boundaries = train_var_boundaries(collect_var_values(img, all_class_rects, cfg),
                                              cfg.var_bins);
}

// Pools the per-pixel codes of every usable pixel in the training rectangles
// into one histogram per component, then concatenates. A pixel is usable when
// its neighborhood stays inside the raster for every component.
inline ClassModel build_class_model(const Raster& img, const std::vector<Rect>& rects,
                                    const DescriptorConfig& cfg, int class_id,
                                    const std::string& name = {}) {
    cfg.validate();
    if (rects.empty()) throw error("build_class_model: no training rects");
    if (cfg.uses_var() && cfg.var_boundaries.empty())
        throw error("build_class_model: VAR boundaries not trained");
    int border = max_border(cfg);
    auto comps = components(cfg);

    std::vector<Histogram> parts;
    std::uint64_t pixel_count = 0;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const Component& comp = comps[ci];
        CircleSampler sampler(comp.scale.p, comp.scale.r);
        std::vector<double> scratch(static_cast<std::size_t>(comp.scale.p));
        std::vector<std::uint32_t> codes;
        for (const Rect& rc : rects) {
            if (rc.w <= 0 || rc.h <= 0 || rc.x < 0 || rc.y < 0 || rc.x + rc.w > img.width ||
                rc.y + rc.h > img.height)
                throw error("training rect out of bounds");
            int y0 = std::max(rc.y, border), y1 = std::min(rc.y + rc.h, img.height - border);
            int x0 = std::max(rc.x, border), x1 = std::min(rc.x + rc.w, img.width - border);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    codes.push_back(component_code(img, x, y, cfg, comp, sampler, scratch.data()));
        }
        if (codes.empty())
            throw error("build_class_model: training rects leave no usable pixels");
        if (ci == 0) pixel_count = codes.size();
        parts.push_back(histogram_from_codes(codes, component_bins(cfg, comp),
                                             component_layout_id(cfg, comp)));
    }

    ClassModel m;
    m.class_id = class_id;
    m.name = name.empty() ? ("class" + std::to_string(class_id)) : name;
    m.histogram = concat(parts);
    m.histogram.layout_id = layout_id(cfg);
    m.pixel_count = pixel_count;
    return m;
}

// Mask-based variants: training pixels are all pixels carrying the class
// label whose neighborhood stays inside the raster.

inline void train_var_boundaries_for_mask(DescriptorConfig& cfg, const Raster& img,
                                          const LabelMask& mask) {
    if (mask.width != img.width || mask.height != img.height)
        throw error("training mask dimensions do not match the image");
    int border = max_border(cfg);
    std::vector<double> pool;
    for (const auto& s : cfg.scales) {
        CircleSampler sampler(s.p, s.r);
        std::vector<double> scratch(static_cast<std::size_t>(s.p));
        for (int y = border; y < img.height - border; ++y)
            for (int x = border; x < img.width - border; ++x) {
                if (mask.at(x, y) == 0) continue;
                sampler.sample(img, x, y, scratch.data());
                pool.push_back(var_value(scratch.data(), s.p));
            }
    }
    if (pool.empty()) throw error("no usable training pixels for VAR boundaries");
    cfg.var_boundaries = train_var_boundaries(pool, cfg.var_bins);
}

inline ClassModel build_class_model_from_mask(const Raster& img, const LabelMask& mask,
                                              const DescriptorConfig& cfg, int class_id,
                                              const std::string& name = {}) {
    cfg.validate();
    if (mask.width != img.width || mask.height != img.height)
        throw error("training mask dimensions do not match the image");
    if (cfg.uses_var() && cfg.var_boundaries.empty())
        throw error("build_class_model: VAR boundaries not trained");
    int border = max_border(cfg);
    auto comps = components(cfg);

    std::vector<Histogram> parts;
    std::uint64_t pixel_count = 0;
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const Component& comp = comps[ci];
        CircleSampler sampler(comp.scale.p, comp.scale.r);
        std::vector<double> scratch(static_cast<std::size_t>(comp.scale.p));
        std::vector<std::uint32_t> codes;
        for (int y = border; y < img.height - border; ++y)
            for (int x = border; x < img.width - border; ++x) {
                if (mask.at(x, y) != class_id) continue;
                codes.push_back(component_code(img, x, y, cfg, comp, sampler, scratch.data()));
            }
        if (codes.empty())
            throw error("build_class_model: mask leaves no usable pixels for class " +
                        std::to_string(class_id));
        if (ci == 0) pixel_count = codes.size();
        parts.push_back(histogram_from_codes(codes, component_bins(cfg, comp),
                                             component_layout_id(cfg, comp)));
    }

    ClassModel m;
    m.class_id = class_id;
    m.name = name.empty() ? ("class" + std::to_string(class_id)) : name;
    m.histogram = concat(parts);
    m.histogram.layout_id = layout_id(cfg);
    m.pixel_count = pixel_count;
    return m;
}

// ---------------------------------------------------------------------------
// Image classification. Both paths share every piece of floating-point
// arithmetic (the distance evaluation below); they differ only in how the
// integer window counts are produced, so their outputs are bit-identical.

namespace detail {

// Components with at most this many bins are evaluated by a dense dot product
// over the whole bin range; larger layouts (LBP at high P) go through a
// sparse walk of the window's distinct codes.
inline constexpr std::size_t dense_bin_limit = 4096;

// sqrt(c) for every possible window count c in [0, W*W].
inline std::vector<double> make_sqrt_count_table(int window) {
    std::vector<double> tab(static_cast<std::size_t>(window) * window + 1);
    for (std::size_t c = 0; c < tab.size(); ++c)
        tab[c] = std::sqrt(static_cast<double>(c));
    return tab;
}

[[gnu::noinline]] inline void counts_to_sqrt(const std::uint32_t* counts, std::size_t n,
                                             const double* tab, double* hw) {
    for (std::size_t i = 0; i < n; ++i) hw[i] = tab[counts[i]];
}

// Four independent accumulators; the summation order is fixed by this source,
// not by the optimizer, so every caller gets the identical rounding.
[[gnu::noinline]] inline double sqrt_dot(const double* a, const double* b, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += a[i] * b[i];
        a1 += a[i + 1] * b[i + 1];
        a2 += a[i + 2] * b[i + 2];
        a3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) a0 += a[i] * b[i];
    return (a0 + a1) + (a2 + a3);
}

[[gnu::noinline]] inline double sparse_coeff(const std::uint32_t* counts, const double* tab,
                                             const std::uint32_t* codes, std::size_t ncodes,
                                             const std::uint32_t* midx, const double* ms,
                                             std::size_t mn) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ncodes; ++i) {
        std::uint32_t code = codes[i];
        // binary search the model's sorted entry indices
        std::size_t lo = 0, hi = mn;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (midx[mid] < code)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < mn && midx[lo] == code) acc += tab[counts[code]] * ms[lo];
    }
    return acc;
}

struct PreparedComponent {
    std::size_t bins = 0;
    std::size_t offset = 0; // position of this component in the global layout
    bool dense = false;
};

// Per class, per component: sqrt(m_i * factor) where factor folds the window
// normalization (1/W^2) and the concatenation weight (1/n_parts) so that
// sqrt(count) * value reproduces sqrt(h_i * m_i).
struct PreparedClass {
    int class_id = 0;
    std::vector<std::vector<double>> dense_s;        // per component (dense ones)
    std::vector<std::vector<std::uint32_t>> sp_idx;  // per component (sparse ones)
    std::vector<std::vector<double>> sp_s;
};

struct PreparedModels {
    std::vector<PreparedComponent> comps;
    std::vector<PreparedClass> classes;
    std::vector<double> tab;
    int window = 0;
};

inline PreparedModels prepare_models(const ModelSet& models) {
    models.validate();
    const DescriptorConfig& cfg = models.config;
    auto comps = components(cfg);
    double inv_area = 1.0 / (static_cast<double>(models.window) * models.window);
    double factor = comps.size() > 1 ? inv_area / static_cast<double>(comps.size()) : inv_area;

    PreparedModels pm;
    pm.window = models.window;
    pm.tab = make_sqrt_count_table(models.window);
    std::size_t off = 0;
    for (const auto& c : comps) {
        PreparedComponent pc;
        pc.bins = component_bins(cfg, c);
        pc.offset = off;
        pc.dense = pc.bins <= dense_bin_limit;
        off += pc.bins;
        pm.comps.push_back(pc);
    }
    for (const ClassModel& cm : models.classes) {
        PreparedClass pcl;
        pcl.class_id = cm.class_id;
        pcl.dense_s.resize(pm.comps.size());
        pcl.sp_idx.resize(pm.comps.size());
        pcl.sp_s.resize(pm.comps.size());
        auto it = cm.histogram.entries.begin();
        auto end = cm.histogram.entries.end();
        for (std::size_t ci = 0; ci < pm.comps.size(); ++ci) {
            const PreparedComponent& pc = pm.comps[ci];
            std::uint64_t lo = pc.offset, hi = pc.offset + pc.bins;
            if (pc.dense) pcl.dense_s[ci].assign(pc.bins, 0.0);
            while (it != end && it->first < hi) {
                if (it->first < lo) throw error("model: entry outside component range");
                std::uint32_t local = static_cast<std::uint32_t>(it->first - lo);
                double s = std::sqrt(it->second * factor);
                if (pc.dense) {
                    pcl.dense_s[ci][local] = s;
                } else {
                    pcl.sp_idx[ci].push_back(local);
                    pcl.sp_s[ci].push_back(s);
                }
                ++it;
            }
        }
        pm.classes.push_back(std::move(pcl));
    }
    return pm;
}

// Mutable per-component window state owned by one worker.
struct ComponentWindow {
    std::vector<std::uint32_t> counts;   // dense bin counts, exact integers
    std::vector<std::uint32_t> touched;  // bins possibly nonzero (reset list)
    std::vector<double> hw;              // sqrt(counts[i]) scratch, dense comps
    std::vector<std::uint32_t> uniq;     // sorted distinct window codes, sparse comps

    void init(std::size_t bins, bool dense) {
        counts.assign(bins, 0);
        if (dense) hw.assign(bins, 0.0);
    }
    void reset() {
        for (std::uint32_t b : touched) counts[b] = 0;
        touched.clear();
    }
    void add(std::uint32_t code) {
        if (counts[code]++ == 0) touched.push_back(code);
    }
    void remove(std::uint32_t code) { --counts[code]; }
};

// Distance evaluation shared verbatim by the naive and the optimized path.
inline int classify_window(const PreparedModels& pm, std::vector<ComponentWindow>& wins) {
    for (std::size_t ci = 0; ci < pm.comps.size(); ++ci)
        if (pm.comps[ci].dense)
            counts_to_sqrt(wins[ci].counts.data(), pm.comps[ci].bins, pm.tab.data(),
                           wins[ci].hw.data());
    int best_id = 0;
    double best_d = 0.0;
    for (const PreparedClass& cl : pm.classes) {
        double coeff = 0.0;
        for (std::size_t ci = 0; ci < pm.comps.size(); ++ci) {
            if (pm.comps[ci].dense) {
                coeff += sqrt_dot(wins[ci].hw.data(), cl.dense_s[ci].data(), pm.comps[ci].bins);
            } else {
                coeff += sparse_coeff(wins[ci].counts.data(), pm.tab.data(),
                                      wins[ci].uniq.data(), wins[ci].uniq.size(),
                                      cl.sp_idx[ci].data(), cl.sp_s[ci].data(),
                                      cl.sp_idx[ci].size());
            }
        }
        double d = bd_from_coefficient(coeff);
        if (best_id == 0 || d < best_d) {
            best_id = cl.class_id;
            best_d = d;
        }
    }
    return best_id;
}

inline void sorted_unique(const std::vector<std::uint32_t>& codes, std::vector<std::uint32_t>& out) {
    out = codes;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

struct InteriorBounds {
    int x0, x1, y0, y1; // inclusive interior pixel range
    WindowSpan span;
};

inline InteriorBounds interior_bounds(const Raster& img, const ModelSet& models) {
    WindowSpan span(models.window);
    int border = max_border(models.config);
    InteriorBounds b{span.before + border, img.width - 1 - (span.after + border),
                     span.before + border, img.height - 1 - (span.after + border), span};
    if (b.x0 > b.x1 || b.y0 > b.y1)
        throw error("classify: raster too small for window and radius");
    return b;
}

// Rows are processed independently (each starts from a full window rebuild),
// so any worker count yields the identical mask. Worker-local state is built
// once per thread and reused across its rows.
template <typename StateFactory, typename RowFn>
inline void run_rows(int y0, int y1, int workers, StateFactory&& make_state, RowFn&& fn) {
    int nrows = y1 - y0 + 1;
    if (workers <= 1 || nrows <= 1) {
        auto state = make_state();
        for (int y = y0; y <= y1; ++y) fn(state, y);
        return;
    }
    std::atomic<int> next{y0};
    auto body = [&] {
        auto state = make_state();
        for (;;) {
            int y = next.fetch_add(1);
            if (y > y1) break;
            fn(state, y);
        }
    };
    std::vector<std::thread> pool;
    int n = std::min(workers, nrows);
    for (int i = 0; i < n - 1; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

} // namespace detail

// Reference path: for every interior pixel the window histogram is recomputed
// from scratch, coding each window member with the per-pixel kernels.
inline LabelMask classify_image_naive(const Raster& img, const ModelSet& models, int workers = 1) {
    detail::PreparedModels pm = detail::prepare_models(models);
    detail::InteriorBounds ib = detail::interior_bounds(img, models);
    const DescriptorConfig& cfg = models.config;
    auto comps = components(cfg);

    struct WorkerState {
        std::vector<detail::ComponentWindow> wins;
        std::vector<CircleSampler> samplers;
        std::vector<std::vector<double>> scratch;
        std::vector<std::uint32_t> member_codes;
    };

    LabelMask out(img.width, img.height, 0);
    detail::run_rows(
        ib.y0, ib.y1, workers,
        [&] {
            WorkerState st;
            st.wins.resize(comps.size());
            for (std::size_t ci = 0; ci < comps.size(); ++ci) {
                st.wins[ci].init(pm.comps[ci].bins, pm.comps[ci].dense);
                st.samplers.emplace_back(comps[ci].scale.p, comps[ci].scale.r);
                st.scratch.emplace_back(static_cast<std::size_t>(comps[ci].scale.p));
            }
            return st;
        },
        [&](WorkerState& st, int y) {
            for (int x = ib.x0; x <= ib.x1; ++x) {
                for (std::size_t ci = 0; ci < comps.size(); ++ci) {
                    detail::ComponentWindow& w = st.wins[ci];
                    w.reset();
                    st.member_codes.clear();
                    for (int wy = y - ib.span.before; wy <= y + ib.span.after; ++wy)
                        for (int wx = x - ib.span.before; wx <= x + ib.span.after; ++wx) {
                            std::uint32_t code =
                                component_code(img, wx, wy, cfg, comps[ci], st.samplers[ci],
                                               st.scratch[ci].data());
                            w.add(code);
                            st.member_codes.push_back(code);
                        }
                    if (!pm.comps[ci].dense) detail::sorted_unique(st.member_codes, w.uniq);
                }
                out.at(x, y) = static_cast<std::uint8_t>(detail::classify_window(pm, st.wins));
            }
        });
    return out;
}

// Optimized path: per-scale code planes are computed once, and the window
// counts slide incrementally along each row (subtract the leaving column, add
// the entering one); rows start from a full rebuild. Produces bit-identical
// output to classify_image_naive.
inline LabelMask classify_image_fast(const Raster& img, const ModelSet& models, int workers = 1) {
    detail::PreparedModels pm = detail::prepare_models(models);
    detail::InteriorBounds ib = detail::interior_bounds(img, models);
    const DescriptorConfig& cfg = models.config;
    auto comps = components(cfg);
    std::vector<CodePlane> planes = code_planes(img, cfg);

    struct WorkerState {
        std::vector<detail::ComponentWindow> wins;
        std::vector<std::uint32_t> window_codes;
    };

    LabelMask out(img.width, img.height, 0);
    detail::run_rows(
        ib.y0, ib.y1, workers,
        [&] {
            WorkerState st;
            st.wins.resize(comps.size());
            for (std::size_t ci = 0; ci < comps.size(); ++ci)
                st.wins[ci].init(pm.comps[ci].bins, pm.comps[ci].dense);
            return st;
        },
        [&](WorkerState& st, int y) {
            int wy0 = y - ib.span.before, wy1 = y + ib.span.after;
            for (int x = ib.x0; x <= ib.x1; ++x) {
                for (std::size_t ci = 0; ci < comps.size(); ++ci) {
                    detail::ComponentWindow& w = st.wins[ci];
                    const CodePlane& plane = planes[ci];
                    if (x == ib.x0) {
                        w.reset();
                        for (int wy = wy0; wy <= wy1; ++wy) {
                            const std::uint32_t* row =
                                plane.codes.data() + static_cast<std::size_t>(wy) * plane.width;
                            for (int wx = x - ib.span.before; wx <= x + ib.span.after; ++wx)
                                w.add(row[wx]);
                        }
                    } else {
                        int leave = x - 1 - ib.span.before;
                        int enter = x + ib.span.after;
                        for (int wy = wy0; wy <= wy1; ++wy) {
                            const std::uint32_t* row =
                                plane.codes.data() + static_cast<std::size_t>(wy) * plane.width;
                            w.remove(row[leave]);
                            w.add(row[enter]);
                        }
                    }
                    if (!pm.comps[ci].dense) {
                        st.window_codes.clear();
                        for (int wy = wy0; wy <= wy1; ++wy) {
                            const std::uint32_t* row =
                                plane.codes.data() + static_cast<std::size_t>(wy) * plane.width;
                            for (int wx = x - ib.span.before; wx <= x + ib.span.after; ++wx)
                                st.window_codes.push_back(row[wx]);
                        }
                        detail::sorted_unique(st.window_codes, w.uniq);
                    }
                }
                out.at(x, y) = static_cast<std::uint8_t>(detail::classify_window(pm, st.wins));
            }
        });
    return out;
}

} // namespace texclass
