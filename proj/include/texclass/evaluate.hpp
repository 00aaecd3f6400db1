#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <vector>

#include "texclass/common.hpp"
#include "texclass/raster.hpp"

namespace texclass {

// Class-by-class agreement counts; rows index the reference class, columns
// the predicted class (1..K map to 0..K-1).
struct ConfusionMatrix {
    int k = 0;
    std::vector<std::uint64_t> counts;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int classes)
        : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

    std::uint64_t& at(int ref, int pred) { return counts[static_cast<std::size_t>(ref) * k + pred]; }
    std::uint64_t at(int ref, int pred) const {
        return counts[static_cast<std::size_t>(ref) * k + pred];
    }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
    std::uint64_t trace() const {
        std::uint64_t t = 0;
        for (int i = 0; i < k; ++i) t += at(i, i);
        return t;
    }
    std::uint64_t row_sum(int r) const {
        std::uint64_t t = 0;
        for (int c = 0; c < k; ++c) t += at(r, c);
        return t;
    }
    std::uint64_t col_sum(int c) const {
        std::uint64_t t = 0;
        for (int r = 0; r < k; ++r) t += at(r, c);
        return t;
    }
};

// Counts pixels that carry both a reference and a predicted label and lie
// outside every excluded rectangle (training areas).
inline ConfusionMatrix confusion(const LabelMask& predicted, const LabelMask& reference,
                                 const std::vector<Rect>& exclude = {}) {
    if (predicted.width != reference.width || predicted.height != reference.height)
        throw error("confusion: mask dimension mismatch");
    int k = std::max(predicted.max_label(), reference.max_label());
    ConfusionMatrix m(k);
    for (int y = 0; y < reference.height; ++y)
        for (int x = 0; x < reference.width; ++x) {
            int r = reference.at(x, y);
            int p = predicted.at(x, y);
            if (r == 0 || p == 0) continue;
            bool skip = false;
            for (const Rect& rc : exclude)
                if (rc.contains(x, y)) {
                    skip = true;
                    break;
                }
            if (!skip) ++m.at(r - 1, p - 1);
        }
    return m;
}

inline double overall_accuracy(const ConfusionMatrix& m) {
    std::uint64_t t = m.total();
    if (t == 0) throw error("overall_accuracy: empty confusion matrix");
    return static_cast<double>(m.trace()) / static_cast<double>(t);
}

// Cohen's kappa; undefined when the expected agreement p_e reaches 1 (all
// mass in a single cell).
inline double kappa(const ConfusionMatrix& m) {
    std::uint64_t t = m.total();
    if (t == 0) throw error("kappa: empty confusion matrix");
    double total = static_cast<double>(t);
    double po = static_cast<double>(m.trace()) / total;
    double pe = 0.0;
    for (int i = 0; i < m.k; ++i)
        pe += (static_cast<double>(m.row_sum(i)) / total) *
              (static_cast<double>(m.col_sum(i)) / total);
    if (pe >= 1.0) throw error("kappa: undefined (expected agreement is 1)");
    return (po - pe) / (1.0 - pe);
}

// Full evaluation of a predicted mask against a reference mask.
struct EvalReport {
    ConfusionMatrix matrix;
    double oa = 0.0;
    double kappa_value = 0.0;
    bool kappa_defined = false;
    // among non-excluded reference pixels: how many the classifier labeled
    std::uint64_t reference_pixels = 0;
    std::uint64_t classified_pixels = 0;
    double coverage = 0.0;
    std::vector<double> omission;   // per class, 1 - diag/row
    std::vector<double> commission; // per class, 1 - diag/col
};

inline EvalReport evaluate(const LabelMask& predicted, const LabelMask& reference,
                           const std::vector<Rect>& exclude = {}) {
    EvalReport rep;
    rep.matrix = confusion(predicted, reference, exclude);
    for (int y = 0; y < reference.height; ++y)
        for (int x = 0; x < reference.width; ++x) {
            if (reference.at(x, y) == 0) continue;
            bool skip = false;
            for (const Rect& rc : exclude)
                if (rc.contains(x, y)) {
                    skip = true;
                    break;
                }
            if (skip) continue;
            ++rep.reference_pixels;
            if (predicted.at(x, y) != 0) ++rep.classified_pixels;
        }
    rep.coverage = rep.reference_pixels
                       ? static_cast<double>(rep.classified_pixels) / rep.reference_pixels
                       : 0.0;
    rep.oa = overall_accuracy(rep.matrix);
    try {
        rep.kappa_value = kappa(rep.matrix);
        rep.kappa_defined = true;
    } catch (const error&) {
        rep.kappa_defined = false;
    }
    for (int i = 0; i < rep.matrix.k; ++i) {
        std::uint64_t rs = rep.matrix.row_sum(i), cs = rep.matrix.col_sum(i);
        rep.omission.push_back(rs ? 1.0 - static_cast<double>(rep.matrix.at(i, i)) / rs : 0.0);
        rep.commission.push_back(cs ? 1.0 - static_cast<double>(rep.matrix.at(i, i)) / cs : 0.0);
    }
    return rep;
}

inline void write_report_text(std::ostream& out, const EvalReport& rep) {
    out << "confusion matrix (rows = reference, cols = predicted)\n";
    for (int r = 0; r < rep.matrix.k; ++r) {
        out << "  class " << (r + 1) << ":";
        for (int c = 0; c < rep.matrix.k; ++c) out << " " << rep.matrix.at(r, c);
        out << "\n";
    }
    out << std::fixed << std::setprecision(4);
    out << "overall_accuracy " << rep.oa << "\n";
    if (rep.kappa_defined)
        out << "kappa " << rep.kappa_value << "\n";
    else
        out << "kappa undefined\n";
    out << "coverage " << rep.coverage << " (" << rep.classified_pixels << "/"
        << rep.reference_pixels << " reference pixels classified)\n";
    for (int i = 0; i < rep.matrix.k; ++i)
        out << "class " << (i + 1) << " omission " << rep.omission[i] << " commission "
            << rep.commission[i] << "\n";
}

inline void write_report_csv(std::ostream& out, const EvalReport& rep) {
    out << "metric,class,value\n";
    out << std::setprecision(17);
    for (int r = 0; r < rep.matrix.k; ++r)
        for (int c = 0; c < rep.matrix.k; ++c)
            out << "count_ref" << (r + 1) << "_pred" << (c + 1) << ",," << rep.matrix.at(r, c)
                << "\n";
    out << "overall_accuracy,," << rep.oa << "\n";
    if (rep.kappa_defined) out << "kappa,," << rep.kappa_value << "\n";
    out << "coverage,," << rep.coverage << "\n";
    for (int i = 0; i < rep.matrix.k; ++i) {
        out << "omission," << (i + 1) << "," << rep.omission[i] << "\n";
        out << "commission," << (i + 1) << "," << rep.commission[i] << "\n";
    }
}

} // namespace texclass
