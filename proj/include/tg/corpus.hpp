#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tg/date.hpp"

namespace tg {

/// Set memberships a record can carry. C is the retrieved corpus, B the
/// day-stratified representative sample, F the prefilter-enriched sample,
/// A = B ∪ F the study set, E the expert subsample.
enum class SetTag : std::uint8_t { C, B, F, A, E };

const char* set_tag_name(SetTag t);
SetTag parse_set_tag(std::string_view s);  // throws Error(parse)

/// One corpus observation: an opaque tweet id, its UTC day, the boolean
/// prefilter flag, and optional payload. Text may be withheld; nothing in
/// the toolkit reads it.
struct TweetRecord {
    std::string guid;
    Date day;
    bool k = false;
    std::optional<std::string> text;
    std::vector<std::string> mentions;
    std::set<SetTag> set_tags;

    bool has_tag(SetTag t) const { return set_tags.count(t) != 0; }

    bool operator==(const TweetRecord&) const = default;
};

using TweetCollection = std::vector<TweetRecord>;

/// Per-record consistency: B and F are disjoint, F implies the prefilter
/// flag, E implies A. Throws Error(validation).
void check_record_tags(const TweetRecord& rec);

/// True population volume per day. The corpus is a per-day subsample, so
/// n_d must dominate the per-day corpus counts (checked by the operations
/// that see both).
struct VolumeTable {
    std::map<Date, std::uint64_t> entries;
    std::uint64_t total = 0;

    bool covers(const Date& d) const { return entries.count(d) != 0; }
};

struct RosterEntry {
    enum class Category { politician, journalist };

    std::string individual_id;
    Category category = Category::politician;
    std::optional<std::string> organization;
    std::string handle_hash;

    bool operator==(const RosterEntry&) const = default;
};

enum class ScoreKind { probability, unbounded };

/// Classifier outputs keyed by guid, one score per tweet.
struct ScoreTable {
    std::string classifier_name;
    ScoreKind kind = ScoreKind::probability;
    std::map<std::string, double> entries;
};

}  // namespace tg
