#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "effham/io.hpp"

namespace effham {

/// Minimal self-contained SVG line plots; no external plotting contract.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel)
        : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

    void add_curve(const std::string& label, const std::vector<double>& x,
                   const std::vector<double>& y) {
        curves_.push_back({label, x, y});
    }

    std::string render(int width = 720, int height = 480) const {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& c : curves_)
            for (size_t i = 0; i < c.x.size(); ++i) {
                xmin = std::min(xmin, c.x[i]);
                xmax = std::max(xmax, c.x[i]);
                ymin = std::min(ymin, c.y[i]);
                ymax = std::max(ymax, c.y[i]);
            }
        if (!(xmin < xmax)) {
            xmin = 0;
            xmax = 1;
        }
        if (!(ymin < ymax)) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        double pad_y = 0.05 * (ymax - ymin);
        ymin -= pad_y;
        ymax += pad_y;
        int ml = 60, mr = 16, mt = 36, mb = 44;
        double pw = width - ml - mr, ph = height - mt - mb;
        auto X = [&](double v) { return ml + pw * (v - xmin) / (xmax - xmin); };
        auto Y = [&](double v) { return mt + ph * (1 - (v - ymin) / (ymax - ymin)); };

        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
        std::ostringstream s;
        s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
          << "' viewBox='0 0 " << width << ' ' << height << "'>\n";
        s << "<rect width='100%' height='100%' fill='white'/>\n";
        s << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='15'>" << title_
          << "</text>\n";
        s << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
          << "' fill='none' stroke='#444'/>\n";
        for (int i = 0; i <= 4; ++i) {
            double xv = xmin + (xmax - xmin) * i / 4, yv = ymin + (ymax - ymin) * i / 4;
            s << "<text x='" << X(xv) << "' y='" << height - mb + 16
              << "' text-anchor='middle' font-size='11'>" << fmt(xv) << "</text>\n";
            s << "<text x='" << ml - 6 << "' y='" << Y(yv) + 4
              << "' text-anchor='end' font-size='11'>" << fmt(yv) << "</text>\n";
            s << "<line x1='" << X(xv) << "' y1='" << mt << "' x2='" << X(xv) << "' y2='"
              << mt + ph << "' stroke='#ddd'/>\n";
            s << "<line x1='" << ml << "' y1='" << Y(yv) << "' x2='" << ml + pw << "' y2='"
              << Y(yv) << "' stroke='#ddd'/>\n";
        }
        s << "<text x='" << width / 2 << "' y='" << height - 8
          << "' text-anchor='middle' font-size='12'>" << xlabel_ << "</text>\n";
        s << "<text x='14' y='" << mt + ph / 2 << "' font-size='12' transform='rotate(-90 14 "
          << mt + ph / 2 << ")' text-anchor='middle'>" << ylabel_ << "</text>\n";
        for (size_t ci = 0; ci < curves_.size(); ++ci) {
            const auto& c = curves_[ci];
            s << "<polyline fill='none' stroke='" << palette[ci % 8]
              << "' stroke-width='1.6' points='";
            for (size_t i = 0; i < c.x.size(); ++i) s << X(c.x[i]) << ',' << Y(c.y[i]) << ' ';
            s << "'/>\n";
            s << "<text x='" << ml + 10 << "' y='" << mt + 16 + 15 * ci << "' font-size='12' fill='"
              << palette[ci % 8] << "'>" << c.label << "</text>\n";
        }
        s << "</svg>\n";
        return s.str();
    }

    void save(const std::filesystem::path& path, int width = 720, int height = 480) const {
        write_text(path, render(width, height));
    }

private:
    struct Curve {
        std::string label;
        std::vector<double> x, y;
    };
    std::string title_, xlabel_, ylabel_;
    std::vector<Curve> curves_;
};

} // namespace effham
