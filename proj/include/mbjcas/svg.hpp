#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mbjcas/csv.hpp"
#include "mbjcas/types.hpp"

namespace mbjcas {

/// Minimal deterministic SVG quick-look plots for the experiment runners.
class SvgPlot {
public:
    SvgPlot(double x_min, double x_max, double y_min, double y_max)
        : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max) {}

    void polyline(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& color) {
        std::string points;
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            points += csv_number(px(x[i])) + "," + csv_number(py(y[i])) + " ";
        }
        body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" points=\"" + points + "\"/>\n";
    }

    void scatter(const std::vector<double>& x, const std::vector<double>& y,
                 const std::string& color) {
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
            body_ += "<circle cx=\"" + csv_number(px(x[i])) + "\" cy=\"" + csv_number(py(y[i])) +
                     "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }

    void save(const std::filesystem::path& path, const std::string& title) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write file: " + path.string());
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
            << kHeight << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<text x=\"10\" y=\"16\" font-size=\"12\">" << title << "</text>\n"
            << body_ << "</svg>\n";
    }

private:
    static constexpr int kWidth = 640;
    static constexpr int kHeight = 400;
    static constexpr int kMargin = 30;

    double px(double x) const {
        return kMargin + (x - x_min_) / (x_max_ - x_min_) * (kWidth - 2 * kMargin);
    }
    double py(double y) const {
        const double clamped = std::clamp(y, y_min_, y_max_);
        return kHeight - kMargin - (clamped - y_min_) / (y_max_ - y_min_) * (kHeight - 2 * kMargin);
    }

    double x_min_, x_max_, y_min_, y_max_;
    std::string body_;
};

} // namespace mbjcas
