#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "effham/errors.hpp"

namespace effham {

/// One axis of a cubical grid.  Periodic axes wrap (torus base); negative
/// axes carry the downward directions of the quadratic form, and the box
/// boundary faces orthogonal to them form the declared negative end.
struct Axis {
    int n = 2;             // vertex count
    bool periodic = false;
    bool negative = false;
    double lo = 0.0;
    double hi = 1.0;

    int positions() const { return periodic ? 2 * n : 2 * n - 1; }
    int intervals() const { return periodic ? n : n - 1; }
    double node(int j) const {
        return periodic ? lo + (hi - lo) * j / n : lo + (hi - lo) * j / (n - 1);
    }
};

/// Cubical complex over a grid of axes with vertex values, filtered by
/// lower stars (cell value = max over its vertices).  Cells lying in the
/// negative end are treated as present from the start: the chain complex is
/// taken relative to them, which computes H(K, N) exactly.
class SublevelComplex {
public:
    using Cell = uint64_t;

    SublevelComplex(std::vector<Axis> axes, std::vector<double> vertex_values)
        : axes_(std::move(axes)), values_(std::move(vertex_values)) {
        strides_.resize(axes_.size());
        vstrides_.resize(axes_.size());
        uint64_t s = 1, vs = 1;
        for (size_t i = 0; i < axes_.size(); ++i) {
            strides_[i] = s;
            vstrides_[i] = vs;
            s *= axes_[i].positions();
            vs *= axes_[i].n;
        }
        n_vertices_ = vs;
        if (values_.size() != n_vertices_) throw InvalidField("vertex value table size mismatch");
    }

    /// Build by evaluating a function at every vertex.
    static SublevelComplex from_function(
        std::vector<Axis> axes, const std::function<double(std::span<const double>)>& fn) {
        uint64_t total = 1;
        for (const auto& a : axes) total *= a.n;
        std::vector<double> vals(total);
        std::vector<int> idx(axes.size(), 0);
        std::vector<double> coords(axes.size());
        for (uint64_t v = 0; v < total; ++v) {
            for (size_t i = 0; i < axes.size(); ++i) coords[i] = axes[i].node(idx[i]);
            vals[v] = fn(coords);
            for (size_t i = 0; i < axes.size(); ++i) {
                if (++idx[i] < axes[i].n) break;
                idx[i] = 0;
            }
        }
        return SublevelComplex(std::move(axes), std::move(vals));
    }

    const std::vector<Axis>& axes() const { return axes_; }
    int dim() const { return static_cast<int>(axes_.size()); }
    uint64_t n_vertices() const { return n_vertices_; }
    double vertex_value(uint64_t v) const { return values_[v]; }

    int negative_axis_count() const {
        int m = 0;
        for (const auto& a : axes_) m += a.negative;
        return m;
    }

    uint64_t cell_count() const {
        uint64_t total = 1;
        for (const auto& a : axes_) total *= a.positions();
        return total;
    }

    int cell_dim(Cell c) const {
        int d = 0;
        for (size_t i = 0; i < axes_.size(); ++i) d += (pos(c, i) & 1);
        return d;
    }

    int pos(Cell c, size_t axis) const {
        return static_cast<int>((c / strides_[axis]) % axes_[axis].positions());
    }

    Cell make_cell(std::span<const int> positions) const {
        Cell c = 0;
        for (size_t i = 0; i < axes_.size(); ++i) c += strides_[i] * positions[i];
        return c;
    }

    /// A cell lies in the negative end when it is contained in a boundary
    /// face orthogonal to a negative axis.
    bool in_negative_end(Cell c) const {
        for (size_t i = 0; i < axes_.size(); ++i) {
            const auto& a = axes_[i];
            if (!a.negative) continue;
            int p = pos(c, i);
            if (p == 0 || p == a.positions() - 1) return true;
        }
        return false;
    }

    /// Lower-star filtration value: max over the cell's vertices.
    double cell_value(Cell c) const {
        double m = -std::numeric_limits<double>::infinity();
        corners(c, [&](uint64_t v) { m = std::max(m, values_[v]); });
        return m;
    }

    /// Visit the vertex ids of a cell.
    template <class F>
    void corners(Cell c, F&& visit) const {
        std::vector<size_t> odd;
        uint64_t base = 0;
        for (size_t i = 0; i < axes_.size(); ++i) {
            int p = pos(c, i);
            if (p & 1)
                odd.push_back(i);
            else
                base += vstrides_[i] * (p / 2);
        }
        uint64_t combos = uint64_t(1) << odd.size();
        for (uint64_t m = 0; m < combos; ++m) {
            uint64_t v = base;
            for (size_t b = 0; b < odd.size(); ++b) {
                size_t i = odd[b];
                int p = pos(c, i);
                int j = (p / 2 + ((m >> b) & 1)) % axes_[i].n;  // wraps only if periodic
                if (!axes_[i].periodic && p / 2 + ((m >> b) & 1) >= axes_[i].n)
                    throw InvalidField("interval out of range");
                v += vstrides_[i] * j;
            }
            visit(v);
        }
    }

    /// Visit boundary faces, skipping those in the negative end (relative
    /// chain complex of the pair).
    template <class F>
    void boundary(Cell c, F&& visit) const {
        for (size_t i = 0; i < axes_.size(); ++i) {
            int p = pos(c, i);
            if (!(p & 1)) continue;
            int P = axes_[i].positions();
            int lo_pos = p - 1;
            int hi_pos = axes_[i].periodic ? (p + 1) % P : p + 1;
            for (int fp : {lo_pos, hi_pos}) {
                Cell f = c + strides_[i] * (static_cast<int64_t>(fp) - p);
                if (!in_negative_end(f)) visit(f);
            }
        }
    }

    /// Enumerate all cells of a given dimension outside the negative end.
    std::vector<Cell> cells_of_dim(int r) const {
        std::vector<Cell> out;
        int d = dim();
        for (uint32_t mask = 0; mask < (1u << d); ++mask) {
            if (__builtin_popcount(mask) != r) continue;
            std::vector<int> p(d, 0);
            bool nonempty = true;
            for (int i = 0; i < d; ++i)
                if ((mask >> i) & 1 && axes_[i].intervals() == 0) nonempty = false;
            if (!nonempty) continue;
            // iterate product: set axes run over intervals, others over vertices
            std::vector<int> counts(d);
            for (int i = 0; i < d; ++i)
                counts[i] = ((mask >> i) & 1) ? axes_[i].intervals() : axes_[i].n;
            std::vector<int> idx(d, 0);
            uint64_t total = 1;
            for (int i = 0; i < d; ++i) total *= counts[i];
            for (uint64_t c = 0; c < total; ++c) {
                for (int i = 0; i < d; ++i)
                    p[i] = ((mask >> i) & 1) ? 2 * idx[i] + 1 : 2 * idx[i];
                Cell cell = make_cell(p);
                if (!in_negative_end(cell)) out.push_back(cell);
                for (int i = 0; i < d; ++i) {
                    if (++idx[i] < counts[i]) break;
                    idx[i] = 0;
                }
            }
        }
        return out;
    }

private:
    std::vector<Axis> axes_;
    std::vector<double> values_;
    std::vector<uint64_t> strides_;
    std::vector<uint64_t> vstrides_;
    uint64_t n_vertices_ = 0;
};

/// The two distinguished relative homology classes.
enum class ClassKind { Unit, Fundamental };

/// Explicit product-cycle representative of a class, as a set of cells:
/// intervals across every negative axis, the center vertex on positive
/// axes, and (for the fundamental class) all intervals of the periodic base.
inline std::vector<SublevelComplex::Cell> class_cycle(const SublevelComplex& cx, ClassKind cls) {
    const auto& axes = cx.axes();
    int d = cx.dim();
    int base_axis = -1;
    for (int i = 0; i < d; ++i)
        if (axes[i].periodic) {
            base_axis = i;
            break;
        }
    if (cls == ClassKind::Fundamental && base_axis < 0)
        throw ClassNotFound("fundamental class needs a periodic base axis");

    std::vector<int> counts(d);
    for (int i = 0; i < d; ++i) {
        if (axes[i].negative)
            counts[i] = axes[i].intervals();
        else if (cls == ClassKind::Fundamental && i == base_axis)
            counts[i] = axes[i].intervals();
        else
            counts[i] = 1;
    }
    std::vector<SublevelComplex::Cell> cells;
    std::vector<int> idx(d, 0);
    uint64_t total = 1;
    for (int i = 0; i < d; ++i) total *= counts[i];
    std::vector<int> p(d);
    for (uint64_t c = 0; c < total; ++c) {
        for (int i = 0; i < d; ++i) {
            if (axes[i].negative)
                p[i] = 2 * idx[i] + 1;
            else if (cls == ClassKind::Fundamental && i == base_axis)
                p[i] = 2 * idx[i] + 1;
            else if (i == base_axis)
                p[i] = 0;                      // anchor vertex of the base circle
            else
                p[i] = 2 * ((axes[i].n - 1) / 2);  // center vertex of positive axes
        }
        cells.push_back(cx.make_cell(p));
        for (int i = 0; i < d; ++i) {
            if (++idx[i] < counts[i]) break;
            idx[i] = 0;
        }
    }
    return cells;
}

inline int class_degree(const SublevelComplex& cx, ClassKind cls) {
    return cx.negative_axis_count() + (cls == ClassKind::Fundamental ? 1 : 0);
}

} // namespace effham
