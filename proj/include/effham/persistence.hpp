#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "effham/cubical.hpp"

namespace effham {

namespace detail {

struct RankedCells {
    std::vector<SublevelComplex::Cell> cells;  // sorted by (value, id)
    std::vector<double> values;                // aligned with cells
    std::vector<SublevelComplex::Cell> by_id;  // sorted by id
    std::vector<uint32_t> rank_of_sorted;      // rank aligned with by_id

    static RankedCells build(const SublevelComplex& cx, int r) {
        RankedCells rc;
        rc.cells = cx.cells_of_dim(r);
        std::vector<std::pair<double, SublevelComplex::Cell>> order;
        order.reserve(rc.cells.size());
        for (auto c : rc.cells) order.emplace_back(cx.cell_value(c), c);
        std::sort(order.begin(), order.end());
        rc.cells.clear();
        rc.values.reserve(order.size());
        for (auto& [v, c] : order) {
            rc.cells.push_back(c);
            rc.values.push_back(v);
        }
        rc.by_id = rc.cells;
        std::sort(rc.by_id.begin(), rc.by_id.end());
        rc.rank_of_sorted.resize(rc.by_id.size());
        for (uint32_t i = 0; i < rc.cells.size(); ++i) {
            auto it = std::lower_bound(rc.by_id.begin(), rc.by_id.end(), rc.cells[i]);
            rc.rank_of_sorted[it - rc.by_id.begin()] = i;
        }
        return rc;
    }

    uint32_t rank(SublevelComplex::Cell c) const {
        auto it = std::lower_bound(by_id.begin(), by_id.end(), c);
        return rank_of_sorted[it - by_id.begin()];
    }

    size_t size() const { return cells.size(); }
};

inline void symmetric_difference(std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    a.swap(out);
}

} // namespace detail

/// Birth value of the distinguished class in the lower-star filtration of
/// the pair (complex, negative end).  The boundary space one dimension up is
/// reduced in filtration order; the explicit representative cycle is then
/// reduced greedily against it, and the filtration value of the last cell
/// that cannot be eliminated is the birth.  Ties between equal values are
/// broken by lexicographic cell index.
inline double c_value(const SublevelComplex& cx, ClassKind cls) {
    int r = class_degree(cx, cls);

    // Top-degree fast path: when every fiber axis is negative, the only
    // relative cycle in the fundamental class is the sum of all top cells,
    // so its birth is the largest vertex value.
    bool has_periodic = false;
    for (const auto& a : cx.axes()) has_periodic |= a.periodic;
    if (cls == ClassKind::Fundamental && has_periodic && r == cx.dim()) {
        double m = -std::numeric_limits<double>::infinity();
        for (uint64_t v = 0; v < cx.n_vertices(); ++v) m = std::max(m, cx.vertex_value(v));
        return m;
    }

    auto rows = detail::RankedCells::build(cx, r);
    if (rows.size() == 0) throw ClassNotFound("no cells in the class dimension");

    // cycle in row ranks
    std::vector<uint32_t> z;
    for (auto c : class_cycle(cx, cls)) z.push_back(rows.rank(c));
    std::sort(z.begin(), z.end());

    // boundary matrix of (r+1)-cells, columns in filtration order
    auto cols = detail::RankedCells::build(cx, r + 1);
    std::vector<int32_t> pivot(rows.size(), -1);
    std::vector<std::vector<uint32_t>> stored;
    stored.reserve(cols.size());
    std::vector<uint32_t> col;
    for (size_t j = 0; j < cols.size(); ++j) {
        col.clear();
        cx.boundary(cols.cells[j], [&](SublevelComplex::Cell f) { col.push_back(rows.rank(f)); });
        std::sort(col.begin(), col.end());
        // faces appearing twice cancel over Z/2 (wrapped periodic intervals)
        {
            std::vector<uint32_t> dedup;
            for (size_t i = 0; i < col.size();) {
                size_t i2 = i;
                while (i2 < col.size() && col[i2] == col[i]) ++i2;
                if ((i2 - i) % 2) dedup.push_back(col[i]);
                i = i2;
            }
            col.swap(dedup);
        }
        while (!col.empty() && pivot[col.back()] >= 0)
            detail::symmetric_difference(col, stored[pivot[col.back()]]);
        if (!col.empty()) {
            pivot[col.back()] = static_cast<int32_t>(stored.size());
            stored.push_back(col);
        }
    }

    while (!z.empty()) {
        uint32_t low = z.back();
        if (pivot[low] < 0) return rows.values[low];
        detail::symmetric_difference(z, stored[pivot[low]]);
    }
    throw ClassNotFound("class reduces to zero; fiber box too small");
}

/// Exhaustive oracle for small complexes: insert cells in value order and
/// report the first threshold at which the class is supported in the
/// sublevel filtration.  Uses dense Z/2 elimination per candidate threshold
/// with a binary search over thresholds; entirely independent of c_value's
/// reduction-in-filtration-order algorithm.
inline double brute_cycle_oracle(const SublevelComplex& cx, ClassKind cls) {
    if (cx.cell_count() > 100000) throw ResolutionBudget("oracle limited to small complexes");
    int r = class_degree(cx, cls);
    auto rcells = cx.cells_of_dim(r);
    std::sort(rcells.begin(), rcells.end());
    std::unordered_map<SublevelComplex::Cell, uint32_t> row_index;
    row_index.reserve(rcells.size());
    for (uint32_t i = 0; i < rcells.size(); ++i) row_index[rcells[i]] = i;
    std::vector<double> rvalues(rcells.size());
    for (uint32_t i = 0; i < rcells.size(); ++i) rvalues[i] = cx.cell_value(rcells[i]);

    auto bcells = cx.cells_of_dim(r + 1);
    std::vector<std::vector<uint32_t>> bnd(bcells.size());
    for (size_t j = 0; j < bcells.size(); ++j) {
        std::vector<uint32_t> faces;
        cx.boundary(bcells[j], [&](SublevelComplex::Cell f) { faces.push_back(row_index.at(f)); });
        std::sort(faces.begin(), faces.end());
        std::vector<uint32_t> dedup;
        for (size_t i = 0; i < faces.size();) {
            size_t i2 = i;
            while (i2 < faces.size() && faces[i2] == faces[i]) ++i2;
            if ((i2 - i) % 2) dedup.push_back(faces[i]);
            i = i2;
        }
        bnd[j] = std::move(dedup);
    }

    std::vector<uint32_t> zc;
    for (auto c : class_cycle(cx, cls)) zc.push_back(row_index.at(c));
    std::sort(zc.begin(), zc.end());

    // candidate thresholds: sorted distinct r-cell values
    std::vector<double> thresholds = rvalues;
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    // feasible(t): can z be moved by boundaries so that it is supported on
    // cells of value <= t?  Linear feasibility over Z/2 on the rows above t.
    auto feasible = [&](double t) {
        std::vector<int32_t> restricted(rcells.size(), -1);
        uint32_t nrows = 0;
        for (uint32_t i = 0; i < rcells.size(); ++i)
            if (rvalues[i] > t) restricted[i] = nrows++;
        if (nrows == 0) return true;
        size_t words = (nrows + 63) / 64;
        std::vector<uint64_t> rhs(words, 0);
        bool any_rhs = false;
        for (uint32_t i : zc)
            if (restricted[i] >= 0) {
                rhs[restricted[i] / 64] ^= uint64_t(1) << (restricted[i] % 64);
                any_rhs = true;
            }
        if (!any_rhs) return true;
        std::vector<std::vector<uint64_t>> pivots;   // reduced columns
        std::vector<int32_t> pivot_at(nrows, -1);    // row -> index into pivots
        auto top_bit = [&](const std::vector<uint64_t>& v) -> int64_t {
            for (int64_t w = static_cast<int64_t>(words) - 1; w >= 0; --w)
                if (v[w]) return w * 64 + (63 - __builtin_clzll(v[w]));
            return -1;
        };
        auto reduce = [&](std::vector<uint64_t>& v) {
            int64_t t2;
            while ((t2 = top_bit(v)) >= 0) {
                int32_t k = pivot_at[t2];
                if (k < 0) return t2;
                for (size_t w = 0; w < words; ++w) v[w] ^= pivots[k][w];
            }
            return int64_t(-1);
        };
        std::vector<uint64_t> colbits(words);
        for (const auto& faces : bnd) {
            std::fill(colbits.begin(), colbits.end(), 0);
            bool nonzero = false;
            for (uint32_t f : faces)
                if (restricted[f] >= 0) {
                    colbits[restricted[f] / 64] ^= uint64_t(1) << (restricted[f] % 64);
                    nonzero = true;
                }
            if (!nonzero) continue;
            int64_t piv = reduce(colbits);
            if (piv >= 0) {
                pivot_at[piv] = static_cast<int32_t>(pivots.size());
                pivots.push_back(colbits);
            }
        }
        return reduce(rhs) < 0;
    };

    size_t lo = 0, hi = thresholds.size() - 1;
    if (!feasible(thresholds[hi])) throw ClassNotFound("class not supported at the top");
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (feasible(thresholds[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return thresholds[lo];
}

} // namespace effham
