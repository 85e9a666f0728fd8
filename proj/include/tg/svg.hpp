#pragma once

#include <string>
#include <vector>

#include "tg/evaluation.hpp"
#include "tg/simplex.hpp"

namespace tg {

// Self-contained deterministic SVG documents. Points are drawn at their
// jittered coordinates; an empty input still renders the frame.
std::string render_simplex_svg(const std::vector<SimplexPoint>& points);
std::string render_pr_curve_svg(const PRCurve& curve);

}  // namespace tg
