#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tg {

/// Ordinal severity answer: No < Problematic < Abusive.
enum class ContainAbuse : int { no = 0, problematic = 1, abusive = 2 };

enum class Cohort { crowd, expert };

/// Follow-up taxonomy, multi-select.
enum class AbuseType : int {
    sexism_or_misogyny = 0,
    racism,
    homophobia_or_transphobia,
    ethnic_or_religious_slur,
    physical_threat,
    sexual_threat,
    other,
};

inline constexpr int kNumAbuseTypes = 7;
inline constexpr int kNumClasses = 3;

const char* contain_abuse_name(ContainAbuse c);
ContainAbuse parse_contain_abuse(std::string_view s);  // throws Error(parse)
const char* cohort_name(Cohort c);
Cohort parse_cohort(std::string_view s);  // throws Error(parse)
const char* abuse_type_name(AbuseType t);

/// Default answer list for the optional medium question; replaceable via
/// configuration.
std::vector<std::string> default_medium_categories();

/// As parsed from annotations.jsonl: enums for the closed fields, raw
/// strings for the taxonomy answers. Schema and skip-logic checks happen
/// in validate_annotation, not at load time.
struct RawAnnotation {
    std::string tweet_guid;
    std::string rater_id;
    Cohort cohort = Cohort::crowd;
    ContainAbuse contain_abuse = ContainAbuse::no;
    std::vector<std::string> types;
    std::optional<std::string> medium;
    std::string timestamp;

    bool operator==(const RawAnnotation&) const = default;
};

/// Validated label. types is canonically ordered and deduplicated.
struct Annotation {
    std::string tweet_guid;
    std::string rater_id;
    Cohort cohort = Cohort::crowd;
    ContainAbuse contain_abuse = ContainAbuse::no;
    std::vector<AbuseType> types;
    std::optional<std::string> medium;

    bool has_type(AbuseType t) const;
};

/// Per-tweet class counts a = (a_No, a_Pr, a_Ab) from N raters.
struct AnnotationCounts {
    std::string tweet_guid;
    std::array<std::uint32_t, 3> a = {0, 0, 0};

    std::uint32_t n_raters() const { return a[0] + a[1] + a[2]; }
    std::uint32_t& operator[](ContainAbuse c) { return a[static_cast<std::size_t>(c)]; }
    std::uint32_t operator[](ContainAbuse c) const { return a[static_cast<std::size_t>(c)]; }
};

/// Schema enforcement: answer No forbids follow-ups, any other answer
/// requires at least one type; medium must come from the configured list.
/// Throws Error(validation) naming the offending rule.
Annotation validate_annotation(const RawAnnotation& raw,
                               const std::vector<std::string>& medium_categories);

/// Counts for one tweet. All annotations must share the guid and raters
/// must be distinct.
AnnotationCounts tally_counts(std::span<const Annotation> annotations);
AnnotationCounts tally_counts(std::string_view guid, std::span<const ContainAbuse> labels);

/// Three-class plurality with deterministic tie handling: a full
/// three-way tie resolves to the ordinal median (Problematic); a two-way
/// tie resolves toward the class nearer the ordinal mean of the votes,
/// then toward lower severity.
ContainAbuse majority_three_class(const AnnotationCounts& counts);

enum class BinaryOrder {
    /// Map each vote through No -> negative, {Problematic, Abusive} ->
    /// positive, then take the majority; an even split is negative.
    conflate_then_vote,
    /// Plurality over the three classes first (ties toward lower
    /// severity), then conflate the winner. Diverges from the default at
    /// (1,1,1), where the discarded three-way tie hides a 2-of-3 positive
    /// signal.
    vote_then_conflate,
};

bool majority_binary(const AnnotationCounts& counts,
                     BinaryOrder order = BinaryOrder::conflate_then_vote);

enum class MajorityMode { three_class, binary_conflated };

/// Canonical label token for CSV emission: "no|problematic|abusive" or
/// "negative|positive".
std::string majority_label(const AnnotationCounts& counts, MajorityMode mode,
                           BinaryOrder order = BinaryOrder::conflate_then_vote);

/// Fraction of raters that saw anything wrong: (a_Pr + a_Ab) / N.
double crowd_score(const AnnotationCounts& counts);

const char* majority_mode_name(MajorityMode mode);
MajorityMode parse_majority_mode(std::string_view s);  // throws Error(parse)

/// One row of aggregated_labels.csv.
struct AggregatedLabel {
    std::string guid;
    Cohort cohort = Cohort::crowd;
    MajorityMode mode = MajorityMode::three_class;
    std::string label;  // canonical token for the chosen mode
    double crowd_score = 0.0;
    std::uint32_t n_raters = 0;
};

struct ArtifactMeta;

void save_aggregated_labels(const std::string& path,
                            const std::vector<AggregatedLabel>& labels,
                            const ArtifactMeta* meta = nullptr);
std::vector<AggregatedLabel> load_aggregated_labels(const std::string& path);

}  // namespace tg
