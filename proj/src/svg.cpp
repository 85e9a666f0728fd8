#include "tg/svg.hpp"

#include "tg/format.hpp"

namespace tg {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

std::string num(double v) { return format_double(v); }

void open_svg(std::string& svg, int width, int height) {
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
    svg += std::to_string(width);
    svg += "\" height=\"";
    svg += std::to_string(height);
    svg += "\" viewBox=\"0 0 " + std::to_string(width) + " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string render_simplex_svg(const std::vector<SimplexPoint>& points) {
    const int width = 640;
    const int height = 600;
    const double margin = 60.0;
    const double scale = width - 2.0 * margin;
    // Data space: x in [0,1], y in [0, sqrt(3)/2], y axis flipped for SVG.
    const auto px = [&](double x) { return margin + x * scale; };
    const auto py = [&](double y) { return height - margin - y * scale; };

    std::string svg;
    open_svg(svg, width, height);

    svg += "<polygon points=\"";
    svg += num(px(0.0)) + "," + num(py(0.0)) + " ";
    svg += num(px(1.0)) + "," + num(py(0.0)) + " ";
    svg += num(px(0.5)) + "," + num(py(kSqrt3 / 2.0));
    svg += "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";

    svg += "<text x=\"" + num(px(0.0) - 10.0) + "\" y=\"" + num(py(0.0) + 24.0) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">No</text>\n";
    svg += "<text x=\"" + num(px(1.0) + 10.0) + "\" y=\"" + num(py(0.0) + 24.0) +
           "\" font-family=\"sans-serif\" font-size=\"14\" "
           "text-anchor=\"middle\">Problematic</text>\n";
    svg += "<text x=\"" + num(px(0.5)) + "\" y=\"" + num(py(kSqrt3 / 2.0) - 12.0) +
           "\" font-family=\"sans-serif\" font-size=\"14\" "
           "text-anchor=\"middle\">Abusive</text>\n";

    for (const auto& pt : points) {
        svg += "<circle cx=\"" + num(px(pt.x_jittered)) + "\" cy=\"" + num(py(pt.y_jittered)) +
               "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.45\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_pr_curve_svg(const PRCurve& curve) {
    const int width = 640;
    const int height = 480;
    const double margin = 60.0;
    const double plot_w = width - 2.0 * margin;
    const double plot_h = height - 2.0 * margin;
    const auto px = [&](double recall) { return margin + recall * plot_w; };
    const auto py = [&](double precision) { return height - margin - precision * plot_h; };

    std::string svg;
    open_svg(svg, width, height);

    svg += "<rect x=\"" + num(margin) + "\" y=\"" + num(margin) + "\" width=\"" + num(plot_w) +
           "\" height=\"" + num(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = i * 0.25;
        svg += "<text x=\"" + num(px(v)) + "\" y=\"" + num(height - margin + 20.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               num(v) + "</text>\n";
        svg += "<text x=\"" + num(margin - 8.0) + "\" y=\"" + num(py(v) + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" + num(v) +
               "</text>\n";
    }
    svg += "<text x=\"" + num(margin + plot_w / 2.0) + "\" y=\"" + num(height - margin + 42.0) +
           "\" font-family=\"sans-serif\" font-size=\"14\" "
           "text-anchor=\"middle\">Recall</text>\n";
    svg += "<text x=\"18\" y=\"" + num(margin + plot_h / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 " +
           num(margin + plot_h / 2.0) + ")\">Precision</text>\n";

    if (!curve.points.empty()) {
        // Step line: precision holds flat between successive recall levels.
        std::string path = "M" + num(px(curve.points.front().recall)) + " " +
                           num(py(curve.points.front().precision));
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            path += " H" + num(px(curve.points[i].recall));
            path += " V" + num(py(curve.points[i].precision));
        }
        svg += "<path d=\"" + path +
               "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
        for (const auto& point : curve.points) {
            svg += "<circle cx=\"" + num(px(point.recall)) + "\" cy=\"" +
                   num(py(point.precision)) + "\" r=\"3\" fill=\"#d62728\"/>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace tg
