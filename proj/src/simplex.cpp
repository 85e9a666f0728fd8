#include "tg/simplex.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "tg/corpus_io.hpp"
#include "tg/error.hpp"
#include "tg/format.hpp"
#include "tg/rng.hpp"

namespace tg {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kApexY = kSqrt3 / 2.0;

void barycentric_to_cartesian(const std::array<double, 3>& b, double& x, double& y) {
    x = b[1] + 0.5 * b[2];
    y = kApexY * b[2];
}

std::array<double, 3> cartesian_to_barycentric(double x, double y) {
    const double b_ab = y / kApexY;
    const double b_pr = x - 0.5 * b_ab;
    return {1.0 - b_pr - b_ab, b_pr, b_ab};
}

// Clip by clamping negative barycentric components to zero and renormalizing.
// Not the Euclidean projection, but deterministic and always inside.
void clip_to_triangle(double& x, double& y) {
    auto b = cartesian_to_barycentric(x, y);
    if (b[0] >= 0.0 && b[1] >= 0.0 && b[2] >= 0.0) return;
    double total = 0.0;
    for (double& v : b) {
        if (v < 0.0) v = 0.0;
        total += v;
    }
    for (double& v : b) v /= total;
    barycentric_to_cartesian(b, x, y);
}

void validate_distribution(const std::array<double, 3>& p) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorKind::domain, "class distribution has a negative or non-finite entry");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw Error(ErrorKind::domain, "class distribution sums to " + format_double(total) +
                                           ", expected 1");
    }
}

int draw_class(const std::array<double, 3>& p, Rng& rng) {
    const double u = rng.next_double();
    double cum = 0.0;
    for (int c = 0; c < 3; ++c) {
        cum += p[c];
        if (u < cum) return c;
    }
    return 2;  // guards the p-sums-to-slightly-under-1 rounding edge
}

}  // namespace

SimplexPoint to_simplex(const AnnotationCounts& counts, double jitter_magnitude,
                        std::uint64_t seed) {
    const std::uint32_t n = counts.n_raters();
    if (n == 0) {
        throw Error(ErrorKind::domain,
                    "tweet '" + counts.tweet_guid + "' has no annotations to place");
    }
    if (jitter_magnitude < 0.0) {
        throw Error(ErrorKind::domain, "jitter magnitude must be non-negative");
    }

    SimplexPoint point;
    point.id = counts.tweet_guid;
    point.counts = counts.a;
    for (int c = 0; c < 3; ++c) {
        point.barycentric[c] = static_cast<double>(counts.a[c]) / static_cast<double>(n);
    }
    barycentric_to_cartesian(point.barycentric, point.x, point.y);

    point.x_jittered = point.x;
    point.y_jittered = point.y;
    if (jitter_magnitude > 0.0) {
        Rng rng(seed, "jitter:" + counts.tweet_guid);
        const double angle = 2.0 * 3.141592653589793 * rng.next_double();
        const double radius = jitter_magnitude * std::sqrt(rng.next_double());
        point.x_jittered += radius * std::cos(angle);
        point.y_jittered += radius * std::sin(angle);
        clip_to_triangle(point.x_jittered, point.y_jittered);
    }
    return point;
}

std::vector<SimplexPoint> to_simplex_many(const std::vector<AnnotationCounts>& counts,
                                          double jitter_magnitude, std::uint64_t seed) {
    std::vector<SimplexPoint> points;
    points.reserve(counts.size());
    for (const auto& c : counts) points.push_back(to_simplex(c, jitter_magnitude, seed));
    return points;
}

std::vector<AnnotationCounts> simulate_perfect(const std::array<double, 3>& p,
                                               std::size_t n_tweets, std::uint32_t n_raters,
                                               std::uint64_t seed) {
    validate_distribution(p);
    if (n_tweets == 0) throw Error(ErrorKind::domain, "simulation needs at least 1 tweet");
    if (n_raters == 0) throw Error(ErrorKind::domain, "simulation needs at least 1 rater");

    std::vector<AnnotationCounts> out;
    out.reserve(n_tweets);
    char id[32];
    for (std::size_t i = 0; i < n_tweets; ++i) {
        std::snprintf(id, sizeof id, "perfect-%06zu", i + 1);
        AnnotationCounts counts;
        counts.tweet_guid = id;
        Rng rng(seed, std::string("perfect:") + std::to_string(i + 1));
        counts.a[draw_class(p, rng)] = n_raters;
        out.push_back(std::move(counts));
    }
    return out;
}

std::vector<AnnotationCounts> simulate_chance(const std::array<double, 3>& p,
                                              std::size_t n_tweets, std::uint32_t n_raters,
                                              std::uint64_t seed) {
    validate_distribution(p);
    if (n_tweets == 0) throw Error(ErrorKind::domain, "simulation needs at least 1 tweet");
    if (n_raters == 0) throw Error(ErrorKind::domain, "simulation needs at least 1 rater");

    std::vector<AnnotationCounts> out;
    out.reserve(n_tweets);
    char id[32];
    for (std::size_t i = 0; i < n_tweets; ++i) {
        std::snprintf(id, sizeof id, "chance-%06zu", i + 1);
        AnnotationCounts counts;
        counts.tweet_guid = id;
        Rng rng(seed, std::string("chance:") + std::to_string(i + 1));
        for (std::uint32_t j = 0; j < n_raters; ++j) {
            ++counts.a[draw_class(p, rng)];
        }
        out.push_back(std::move(counts));
    }
    return out;
}

void save_simplex_csv(const std::string& path, const std::vector<SimplexPoint>& points,
                      const ArtifactMeta* meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    if (meta) out << meta->to_comment() << "\n";
    out << "id,x,y,x_jittered,y_jittered,a_no,a_pr,a_ab\n";
    for (const auto& pt : points) {
        out << csv_field(pt.id) << "," << format_double(pt.x) << "," << format_double(pt.y)
            << "," << format_double(pt.x_jittered) << "," << format_double(pt.y_jittered)
            << "," << pt.counts[0] << "," << pt.counts[1] << "," << pt.counts[2] << "\n";
    }
}

std::vector<SimplexPoint> load_simplex_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    std::vector<SimplexPoint> points;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || is_comment_line(line)) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"id", "x", "y", "x_jittered", "y_jittered",
                                                   "a_no", "a_pr", "a_ab"}) {
                throw Error(ErrorKind::parse,
                            path + ":" + std::to_string(lineno) +
                                ": expected header "
                                "'id,x,y,x_jittered,y_jittered,a_no,a_pr,a_ab'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 8) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 8 fields");
        }
        SimplexPoint pt;
        pt.id = fields[0];
        try {
            pt.x = parse_double(fields[1], "x");
            pt.y = parse_double(fields[2], "y");
            pt.x_jittered = parse_double(fields[3], "x_jittered");
            pt.y_jittered = parse_double(fields[4], "y_jittered");
            for (int c = 0; c < 3; ++c) {
                pt.counts[c] =
                    static_cast<std::uint32_t>(parse_u64(fields[5 + c], "count"));
            }
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::uint32_t n = pt.counts[0] + pt.counts[1] + pt.counts[2];
        if (n > 0) {
            for (int c = 0; c < 3; ++c) {
                pt.barycentric[c] = static_cast<double>(pt.counts[c]) / n;
            }
        }
        points.push_back(std::move(pt));
    }
    if (!header_seen) {
        throw Error(ErrorKind::parse,
                    path + ": missing header 'id,x,y,x_jittered,y_jittered,a_no,a_pr,a_ab'");
    }
    return points;
}

}  // namespace tg
