#pragma once

#include <cmath>
#include <vector>

#include "effham/errors.hpp"

namespace effham {

/// Wrap a real coordinate into [0,1).
inline double wrap_unit(double q) {
    double r = q - std::floor(q);
    if (r >= 1.0) r -= 1.0;
    return r;
}

/// Uniform grid on the period-1 circle.  Nodes are j/n for 0 <= j < n;
/// index arithmetic wraps mod n, so spacing * n_nodes == 1 holds exactly
/// in the stored rational form (numerator 1, denominator n_nodes).
class TorusGrid {
public:
    explicit TorusGrid(int n_nodes) : n_(n_nodes) {
        if (n_nodes < 1) throw InvalidField("TorusGrid needs at least one node");
    }

    int n_nodes() const { return n_; }
    double spacing() const { return 1.0 / n_; }

    int wrap(int j) const {
        int r = j % n_;
        return r < 0 ? r + n_ : r;
    }

    double node(int j) const { return static_cast<double>(wrap(j)) / n_; }

    /// Index of the node at or below q, plus the fractional offset in [0,1).
    std::pair<int, double> locate(double q) const {
        double s = wrap_unit(q) * n_;
        int j = static_cast<int>(std::floor(s));
        if (j >= n_) j = n_ - 1;
        return {j, s - j};
    }

private:
    int n_;
};

/// Uniform momentum grid, endpoints included.
class MomentumGrid {
public:
    MomentumGrid(double p_min, double p_max, int n_nodes)
        : p_min_(p_min), p_max_(p_max), n_(n_nodes) {
        if (!(p_min < p_max)) throw InvalidField("MomentumGrid needs p_min < p_max");
        if (n_nodes < 2) throw InvalidField("MomentumGrid needs at least two nodes");
    }

    int n_nodes() const { return n_; }
    double p_min() const { return p_min_; }
    double p_max() const { return p_max_; }
    double spacing() const { return (p_max_ - p_min_) / (n_ - 1); }
    double node(int i) const { return p_min_ + spacing() * i; }
    bool contains(double p) const { return p >= p_min_ && p <= p_max_; }

    /// Index of the cell containing p plus fractional offset; clamps to the
    /// boundary cells so that callers can interpolate right up to the edge.
    std::pair<int, double> locate(double p) const {
        double s = (p - p_min_) / spacing();
        int i = static_cast<int>(std::floor(s));
        if (i < 0) i = 0;
        if (i > n_ - 2) i = n_ - 2;
        return {i, s - i};
    }

    std::vector<double> nodes() const {
        std::vector<double> out(n_);
        for (int i = 0; i < n_; ++i) out[i] = node(i);
        return out;
    }

private:
    double p_min_, p_max_;
    int n_;
};

/// Plain uniform grid on a closed interval (velocity grids and fiber boxes).
class UniformGrid {
public:
    UniformGrid(double lo, double hi, int n_nodes) : lo_(lo), hi_(hi), n_(n_nodes) {
        if (!(lo < hi)) throw InvalidField("UniformGrid needs lo < hi");
        if (n_nodes < 2) throw InvalidField("UniformGrid needs at least two nodes");
    }

    int n_nodes() const { return n_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double spacing() const { return (hi_ - lo_) / (n_ - 1); }
    double node(int i) const { return lo_ + spacing() * i; }

    std::pair<int, double> locate(double x) const {
        double s = (x - lo_) / spacing();
        int i = static_cast<int>(std::floor(s));
        if (i < 0) i = 0;
        if (i > n_ - 2) i = n_ - 2;
        return {i, s - i};
    }

private:
    double lo_, hi_;
    int n_;
};

} // namespace effham
