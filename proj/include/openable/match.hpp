#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "openable/error.hpp"
#include "openable/rle.hpp"

namespace openable {

// Pixel box [x, y, width, height], origin top-left.
using BoxXYWH = std::array<double, 4>;

inline double box_area(const BoxXYWH& b) { return b[2] * b[3]; }

inline double box_iou(const BoxXYWH& a, const BoxXYWH& b) {
    const double ix = std::min(a[0] + a[2], b[0] + b[2]) - std::max(a[0], b[0]);
    const double iy = std::min(a[1] + a[3], b[1] + b[3]) - std::max(a[1], b[1]);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = box_area(a) + box_area(b) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Generalized IoU: IoU minus the fraction of the enclosing box not covered
// by the union. Ranges over [-1, 1].
inline double giou(const BoxXYWH& a, const BoxXYWH& b) {
    const double ix = std::min(a[0] + a[2], b[0] + b[2]) - std::max(a[0], b[0]);
    const double iy = std::min(a[1] + a[3], b[1] + b[3]) - std::max(a[1], b[1]);
    const double inter = (ix > 0.0 && iy > 0.0) ? ix * iy : 0.0;
    const double uni = box_area(a) + box_area(b) - inter;
    const double ex = std::max(a[0] + a[2], b[0] + b[2]) - std::min(a[0], b[0]);
    const double ey = std::max(a[1] + a[3], b[1] + b[3]) - std::min(a[1], b[1]);
    const double enclosing = ex * ey;
    const double iou = uni > 0.0 ? inter / uni : 0.0;
    if (enclosing <= 0.0) return iou;
    return iou - (enclosing - uni) / enclosing;
}

// IoU of two RLE masks of equal size, computed by walking the runs without
// decoding. Two empty masks give 0.
inline double mask_iou(const MaskRLE& a, const MaskRLE& b) {
    require(a.height == b.height && a.width == b.width,
            "mask_iou: size mismatch");
    a.validate();
    b.validate();
    std::uint64_t inter = 0;
    std::uint64_t uni = 0;
    size_t ia = 0, ib = 0;
    std::uint64_t ca = ia < a.counts.size() ? a.counts[ia] : 0;
    std::uint64_t cb = ib < b.counts.size() ? b.counts[ib] : 0;
    bool va = false, vb = false;
    std::uint64_t remaining = a.pixel_count();
    while (remaining > 0) {
        while (ca == 0 && ia + 1 < a.counts.size()) {
            ca = a.counts[++ia];
            va = !va;
        }
        while (cb == 0 && ib + 1 < b.counts.size()) {
            cb = b.counts[++ib];
            vb = !vb;
        }
        const std::uint64_t step = std::min(ca, cb);
        if (va || vb) uni += step;
        if (va && vb) inter += step;
        ca -= step;
        cb -= step;
        remaining -= step;
    }
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// Class-wise greedy NMS. Items are (score, box, class); iterate by
// descending score (ties keep input order) and drop boxes overlapping an
// already kept box of the same class with IoU strictly above the threshold.
// Returns kept indices in input order.
template <typename GetBox, typename GetScore, typename GetClass>
std::vector<size_t> greedy_nms_indices(size_t count, GetBox&& box,
                                       GetScore&& score, GetClass&& cls,
                                       double iou_thresh = 0.5) {
    std::vector<size_t> order(count);
    for (size_t i = 0; i < count; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t l, size_t r) {
        return score(l) > score(r);
    });

    std::vector<size_t> kept;
    for (size_t cand : order) {
        bool suppressed = false;
        for (size_t k : kept) {
            if (cls(k) != cls(cand)) continue;
            if (box_iou(box(k), box(cand)) > iou_thresh) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(cand);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

struct MatchResult {
    std::vector<std::pair<int, int>> pairs;  // (det_index, gt_index)
    std::vector<int> unmatched_detections;
    std::vector<int> unmatched_gt;

    // gt index matched to detection d, or -1.
    std::vector<int> det_to_gt;
};

// One-to-one greedy matching. Detections must already be sorted by
// descending score; each detection takes the unmatched GT with the highest
// IoU among those the predicate accepts (ties to the lowest GT index).
// The predicate returns the IoU for an admissible (det, gt) pair, or
// nullopt when the pair fails any criterion.
template <typename Pred>
MatchResult greedy_match(size_t n_gt, size_t n_det, Pred&& predicate) {
    MatchResult result;
    result.det_to_gt.assign(n_det, -1);
    std::vector<char> gt_taken(n_gt, 0);

    for (size_t d = 0; d < n_det; ++d) {
        double best_iou = -1.0;
        int best_gt = -1;
        for (size_t g = 0; g < n_gt; ++g) {
            if (gt_taken[g]) continue;
            const std::optional<double> iou = predicate(d, g);
            if (!iou) continue;
            if (*iou > best_iou) {
                best_iou = *iou;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            gt_taken[static_cast<size_t>(best_gt)] = 1;
            result.det_to_gt[d] = best_gt;
            result.pairs.emplace_back(static_cast<int>(d), best_gt);
        } else {
            result.unmatched_detections.push_back(static_cast<int>(d));
        }
    }
    for (size_t g = 0; g < n_gt; ++g)
        if (!gt_taken[g]) result.unmatched_gt.push_back(static_cast<int>(g));
    return result;
}

struct CostMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    static CostMatrix zeros(size_t rows, size_t cols) {
        CostMatrix c;
        c.rows = rows;
        c.cols = cols;
        c.data.assign(rows * cols, 0.0);
        return c;
    }

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }

    void validate() const {
        require(data.size() == rows * cols, "cost matrix: bad shape");
        for (double v : data)
            require(std::isfinite(v), "cost matrix: non-finite entry");
    }
};

struct Assignment {
    std::vector<int> row_to_col;  // -1 when a row is unassigned
    double total_cost = 0.0;
};

namespace detail {

// Hungarian algorithm with potentials (Jonker-Volgenant style shortest
// augmenting paths). Requires n_rows <= n_cols; assigns every row.
inline std::vector<int> hungarian_core(const CostMatrix& a) {
    const size_t n = a.rows;
    const size_t m = a.cols;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<size_t> p(m + 1, 0), way(m + 1, 0);

    for (size_t i = 1; i <= n; ++i) {
        p[0] = i;
        size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const size_t i0 = p[j0];
            double delta = kInf;
            size_t j1 = 0;
            for (size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (size_t j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    return row_to_col;
}

// Pads columns with zero-cost dummies so every real column gets used and
// rows beyond the column count come back unassigned.
inline CostMatrix pad_cols(const CostMatrix& c) {
    if (c.cols >= c.rows) return c;
    CostMatrix out = CostMatrix::zeros(c.rows, c.rows);
    for (size_t r = 0; r < c.rows; ++r)
        for (size_t j = 0; j < c.cols; ++j) out.at(r, j) = c.at(r, j);
    return out;
}

inline double assignment_cost(const CostMatrix& c, const std::vector<int>& rtc) {
    double total = 0.0;
    for (size_t r = 0; r < rtc.size(); ++r)
        if (rtc[r] >= 0 && static_cast<size_t>(rtc[r]) < c.cols)
            total += c.at(r, static_cast<size_t>(rtc[r]));
    return total;
}

inline double solve_padded(const CostMatrix& padded) {
    const auto rtc = hungarian_core(padded);
    double total = 0.0;
    for (size_t r = 0; r < rtc.size(); ++r)
        total += padded.at(r, static_cast<size_t>(rtc[r]));
    return total;
}

}  // namespace detail

// Minimum-cost assignment over a rectangular cost matrix. min(rows, cols)
// pairs are produced. Among equal-cost optima the row_to_col vector is the
// lexicographically smallest (unassigned rows sort after every real
// column), which pins a deterministic result.
inline Assignment hungarian(const CostMatrix& cost) {
    cost.validate();
    Assignment out;
    out.row_to_col.assign(cost.rows, -1);
    if (cost.rows == 0 || cost.cols == 0) return out;

    const CostMatrix padded = detail::pad_cols(cost);
    const double best = detail::solve_padded(padded);
    const double tol = 1e-9 * std::max(1.0, std::abs(best));

    // Fix rows one by one to the smallest column that still admits an
    // optimal completion. A column index >= cost.cols stands for "leave
    // this row unassigned" and is tried last.
    const size_t n = padded.rows;
    const size_t m = padded.cols;
    std::vector<char> col_used(m, 0);
    double prefix = 0.0;

    for (size_t r = 0; r < n; ++r) {
        std::vector<size_t> candidates;
        for (size_t j = 0; j < cost.cols; ++j)
            if (!col_used[j]) candidates.push_back(j);
        for (size_t j = cost.cols; j < m; ++j) {
            if (!col_used[j]) {
                candidates.push_back(j);  // one dummy is enough, all equal
                break;
            }
        }

        size_t chosen = candidates.front();
        double chosen_total = std::numeric_limits<double>::infinity();
        for (size_t j : candidates) {
            // Remaining subproblem: rows r+1..n-1 over unused columns.
            std::vector<size_t> free_cols;
            for (size_t c = 0; c < m; ++c)
                if (!col_used[c] && c != j) free_cols.push_back(c);
            CostMatrix sub = CostMatrix::zeros(n - r - 1, free_cols.size());
            for (size_t rr = r + 1; rr < n; ++rr)
                for (size_t cc = 0; cc < free_cols.size(); ++cc)
                    sub.at(rr - r - 1, cc) = padded.at(rr, free_cols[cc]);
            const double rest =
                sub.rows == 0 ? 0.0 : detail::solve_padded(sub);
            const double total = prefix + padded.at(r, j) + rest;
            if (total <= best + tol) {
                chosen = j;
                chosen_total = total;
                break;
            }
            if (total < chosen_total) {
                chosen = j;
                chosen_total = total;
            }
        }
        col_used[chosen] = 1;
        prefix += padded.at(r, chosen);
        if (chosen < cost.cols) out.row_to_col[r] = static_cast<int>(chosen);
    }

    out.total_cost = detail::assignment_cost(cost, out.row_to_col);
    return out;
}

}  // namespace openable
