#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tg/annotation.hpp"

namespace tg {

// A count vector mapped into the fixed triangle with vertices
// No=(0,0), Problematic=(1,0), Abusive=(0.5, sqrt(3)/2).
struct SimplexPoint {
    std::string id;
    std::array<double, 3> barycentric{};  // counts / N, sums to 1
    double x = 0.0;
    double y = 0.0;
    double x_jittered = 0.0;  // equal to (x, y) when magnitude is 0
    double y_jittered = 0.0;
    std::array<std::uint32_t, 3> counts{};
};

// Jitter is a uniform draw from the disc of the given radius, clipped back
// into the triangle; its stream is derived from (seed, id) so points are
// independent of processing order.
SimplexPoint to_simplex(const AnnotationCounts& counts, double jitter_magnitude,
                        std::uint64_t seed);

std::vector<SimplexPoint> to_simplex_many(const std::vector<AnnotationCounts>& counts,
                                          double jitter_magnitude, std::uint64_t seed);

// Every tweet draws one class from p and gives it all N votes.
std::vector<AnnotationCounts> simulate_perfect(const std::array<double, 3>& p,
                                               std::size_t n_tweets, std::uint32_t n_raters,
                                               std::uint64_t seed);

// Every tweet draws its counts from Multinomial(N, p), one inverse-CDF trial
// at a time from the tweet's own stream.
std::vector<AnnotationCounts> simulate_chance(const std::array<double, 3>& p,
                                              std::size_t n_tweets, std::uint32_t n_raters,
                                              std::uint64_t seed);

struct ArtifactMeta;

void save_simplex_csv(const std::string& path, const std::vector<SimplexPoint>& points,
                      const ArtifactMeta* meta = nullptr);
std::vector<SimplexPoint> load_simplex_csv(const std::string& path);

}  // namespace tg
