#include "tg/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>
#include <utility>

#include "tg/corpus_io.hpp"
#include "tg/error.hpp"
#include "tg/format.hpp"

namespace tg {

const char* contain_abuse_name(ContainAbuse c) {
    switch (c) {
        case ContainAbuse::no: return "no";
        case ContainAbuse::problematic: return "problematic";
        case ContainAbuse::abusive: return "abusive";
    }
    return "?";
}

ContainAbuse parse_contain_abuse(std::string_view s) {
    if (s == "no") return ContainAbuse::no;
    if (s == "problematic") return ContainAbuse::problematic;
    if (s == "abusive") return ContainAbuse::abusive;
    throw Error(ErrorKind::parse, "unknown contain_abuse value '" + std::string(s) + "'");
}

const char* cohort_name(Cohort c) {
    return c == Cohort::crowd ? "crowd" : "expert";
}

Cohort parse_cohort(std::string_view s) {
    if (s == "crowd") return Cohort::crowd;
    if (s == "expert") return Cohort::expert;
    throw Error(ErrorKind::parse, "unknown rater_cohort value '" + std::string(s) + "'");
}

const char* abuse_type_name(AbuseType t) {
    switch (t) {
        case AbuseType::sexism_or_misogyny: return "sexism_or_misogyny";
        case AbuseType::racism: return "racism";
        case AbuseType::homophobia_or_transphobia: return "homophobia_or_transphobia";
        case AbuseType::ethnic_or_religious_slur: return "ethnic_or_religious_slur";
        case AbuseType::physical_threat: return "physical_threat";
        case AbuseType::sexual_threat: return "sexual_threat";
        case AbuseType::other: return "other";
    }
    return "?";
}

std::vector<std::string> default_medium_categories() {
    return {"text", "image", "video", "other"};
}

bool Annotation::has_type(AbuseType t) const {
    return std::find(types.begin(), types.end(), t) != types.end();
}

namespace {

AbuseType parse_abuse_type(std::string_view s) {
    for (int i = 0; i < kNumAbuseTypes; ++i) {
        const auto t = static_cast<AbuseType>(i);
        if (s == abuse_type_name(t)) return t;
    }
    throw Error(ErrorKind::validation, "unknown abuse type token '" + std::string(s) + "'");
}

}  // namespace

Annotation validate_annotation(const RawAnnotation& raw,
                               const std::vector<std::string>& medium_categories) {
    Annotation out;
    out.tweet_guid = raw.tweet_guid;
    out.rater_id = raw.rater_id;
    out.cohort = raw.cohort;
    out.contain_abuse = raw.contain_abuse;

    if (raw.contain_abuse == ContainAbuse::no) {
        if (!raw.types.empty()) {
            throw Error(ErrorKind::validation,
                        "annotation for '" + raw.tweet_guid +
                            "' answers No but lists abuse types (skip-logic violation)");
        }
        if (raw.medium.has_value()) {
            throw Error(ErrorKind::validation,
                        "annotation for '" + raw.tweet_guid +
                            "' answers No but names a medium (skip-logic violation)");
        }
        return out;
    }

    if (raw.types.empty()) {
        throw Error(ErrorKind::validation,
                    "annotation for '" + raw.tweet_guid + "' answers " +
                        contain_abuse_name(raw.contain_abuse) +
                        " but lists no abuse type (at least one required)");
    }
    std::set<AbuseType> seen;
    for (const auto& token : raw.types) seen.insert(parse_abuse_type(token));
    out.types.assign(seen.begin(), seen.end());

    if (raw.medium.has_value()) {
        const bool known = std::find(medium_categories.begin(), medium_categories.end(),
                                     *raw.medium) != medium_categories.end();
        if (!known) {
            throw Error(ErrorKind::validation,
                        "unknown medium token '" + *raw.medium + "' for '" + raw.tweet_guid + "'");
        }
        out.medium = raw.medium;
    }
    return out;
}

AnnotationCounts tally_counts(std::span<const Annotation> annotations) {
    if (annotations.empty()) {
        throw Error(ErrorKind::domain, "cannot tally an empty annotation set");
    }
    AnnotationCounts counts;
    counts.tweet_guid = annotations.front().tweet_guid;
    std::set<std::string> raters;
    for (const auto& ann : annotations) {
        if (ann.tweet_guid != counts.tweet_guid) {
            throw Error(ErrorKind::domain, "mixed tweet guids in tally: '" + counts.tweet_guid +
                                               "' vs '" + ann.tweet_guid + "'");
        }
        if (!raters.insert(ann.rater_id).second) {
            throw Error(ErrorKind::domain, "rater '" + ann.rater_id +
                                               "' labeled tweet '" + ann.tweet_guid + "' twice");
        }
        counts[ann.contain_abuse] += 1;
    }
    return counts;
}

AnnotationCounts tally_counts(std::string_view guid, std::span<const ContainAbuse> labels) {
    if (labels.empty()) throw Error(ErrorKind::domain, "cannot tally an empty label set");
    AnnotationCounts counts;
    counts.tweet_guid = std::string(guid);
    for (ContainAbuse c : labels) counts[c] += 1;
    return counts;
}

ContainAbuse majority_three_class(const AnnotationCounts& counts) {
    const std::uint32_t n = counts.n_raters();
    if (n == 0) throw Error(ErrorKind::domain, "majority vote over zero raters");

    const std::uint32_t top = std::max({counts.a[0], counts.a[1], counts.a[2]});
    std::vector<ContainAbuse> tied;
    for (int c = 0; c < kNumClasses; ++c) {
        if (counts.a[static_cast<std::size_t>(c)] == top) tied.push_back(static_cast<ContainAbuse>(c));
    }
    if (tied.size() == 1) return tied.front();
    if (tied.size() == 3) return ContainAbuse::problematic;  // ordinal median

    // Two-way tie: the class nearer the ordinal mean of the votes wins,
    // with lower severity breaking an equidistant pair.
    const double mean = (1.0 * counts.a[1] + 2.0 * counts.a[2]) / n;
    const double d0 = std::abs(static_cast<double>(static_cast<int>(tied[0])) - mean);
    const double d1 = std::abs(static_cast<double>(static_cast<int>(tied[1])) - mean);
    if (d0 == d1) return std::min(tied[0], tied[1]);
    return d0 < d1 ? tied[0] : tied[1];
}

bool majority_binary(const AnnotationCounts& counts, BinaryOrder order) {
    const std::uint32_t n = counts.n_raters();
    if (n == 0) throw Error(ErrorKind::domain, "majority vote over zero raters");

    if (order == BinaryOrder::conflate_then_vote) {
        const std::uint32_t positive = counts.a[1] + counts.a[2];
        return 2 * positive > n;  // even split resolves negative
    }

    // vote_then_conflate: naive three-class plurality, ties toward lower
    // severity, then conflate the winner.
    std::uint32_t top = 0;
    int winner = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        if (counts.a[static_cast<std::size_t>(c)] > top) {
            top = counts.a[static_cast<std::size_t>(c)];
            winner = c;
        }
    }
    return winner != 0;
}

std::string majority_label(const AnnotationCounts& counts, MajorityMode mode, BinaryOrder order) {
    if (mode == MajorityMode::three_class) {
        return contain_abuse_name(majority_three_class(counts));
    }
    return majority_binary(counts, order) ? "positive" : "negative";
}

double crowd_score(const AnnotationCounts& counts) {
    const std::uint32_t n = counts.n_raters();
    if (n == 0) throw Error(ErrorKind::domain, "crowd score over zero raters");
    return static_cast<double>(counts.a[1] + counts.a[2]) / n;
}

const char* majority_mode_name(MajorityMode mode) {
    return mode == MajorityMode::three_class ? "three_class" : "binary_conflated";
}

MajorityMode parse_majority_mode(std::string_view s) {
    if (s == "three_class") return MajorityMode::three_class;
    if (s == "binary_conflated") return MajorityMode::binary_conflated;
    throw Error(ErrorKind::parse, "unknown majority mode '" + std::string(s) + "'");
}

void save_aggregated_labels(const std::string& path,
                            const std::vector<AggregatedLabel>& labels,
                            const ArtifactMeta* meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    if (meta) out << meta->to_comment() << "\n";
    out << "guid,cohort,mode,label,crowd_score,N\n";
    for (const auto& row : labels) {
        out << csv_field(row.guid) << "," << cohort_name(row.cohort) << ","
            << majority_mode_name(row.mode) << "," << row.label << ","
            << format_double(row.crowd_score) << "," << row.n_raters << "\n";
    }
}

std::vector<AggregatedLabel> load_aggregated_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    std::vector<AggregatedLabel> labels;
    std::set<std::tuple<std::string, Cohort, MajorityMode>> seen;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || is_comment_line(line)) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"guid", "cohort", "mode", "label",
                                                   "crowd_score", "N"}) {
                throw Error(ErrorKind::parse,
                            path + ":" + std::to_string(lineno) +
                                ": expected header 'guid,cohort,mode,label,crowd_score,N'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 6) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 6 fields");
        }
        AggregatedLabel row;
        row.guid = fields[0];
        try {
            row.cohort = parse_cohort(fields[1]);
            row.mode = parse_majority_mode(fields[2]);
            row.crowd_score = parse_double(fields[4], "crowd_score");
            row.n_raters = static_cast<std::uint32_t>(parse_u64(fields[5], "N"));
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        row.label = fields[3];
        const bool valid_label =
            row.mode == MajorityMode::three_class
                ? (row.label == "no" || row.label == "problematic" || row.label == "abusive")
                : (row.label == "negative" || row.label == "positive");
        if (!valid_label) {
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                              ": label '" + row.label +
                                              "' does not match mode '" + fields[2] + "'");
        }
        if (!(row.crowd_score >= 0.0 && row.crowd_score <= 1.0)) {
            throw Error(ErrorKind::validation, path + ":" + std::to_string(lineno) +
                                                   ": crowd_score outside [0,1]");
        }
        if (!seen.emplace(row.guid, row.cohort, row.mode).second) {
            throw Error(ErrorKind::validation, path + ":" + std::to_string(lineno) +
                                                   ": duplicate (guid, cohort, mode) row '" +
                                                   row.guid + "'");
        }
        labels.push_back(std::move(row));
    }
    if (!header_seen) {
        throw Error(ErrorKind::parse,
                    path + ": missing header 'guid,cohort,mode,label,crowd_score,N'");
    }
    return labels;
}

}  // namespace tg
