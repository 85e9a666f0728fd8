#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tg/annotation.hpp"
#include "tg/corpus.hpp"
#include "tg/date.hpp"

namespace tg {

/// Provenance stamp written as a leading '#' comment into line-oriented
/// artifacts and as a "meta" object into JSON artifacts.
struct ArtifactMeta {
    std::string command;
    std::string config_hash;
    std::optional<std::uint64_t> seed;

    std::string to_comment() const;
};

// ---- tweets.jsonl ----
// {"guid": str, "day": "YYYY-MM-DD", "k": bool, "text": str|null,
//  "mentions": [str], "set_tags": [str]}

TweetCollection load_tweets(const std::string& path, const DateRange& window);
void save_tweets(const std::string& path, const TweetCollection& tweets,
                 const ArtifactMeta* meta = nullptr);

// ---- volumes.csv: header day,n_d ----

VolumeTable load_volumes(const std::string& path);
void save_volumes(const std::string& path, const VolumeTable& volumes,
                  const ArtifactMeta* meta = nullptr);

// ---- annotations.jsonl ----

struct LoadedAnnotations {
    std::vector<RawAnnotation> records;
    std::size_t crowd_count = 0;
    std::size_t expert_count = 0;
};

LoadedAnnotations load_annotations(const std::string& path);
void save_annotations(const std::string& path, const std::vector<RawAnnotation>& records,
                      const ArtifactMeta* meta = nullptr);

// ---- roster.csv: header individual_id,category,organization,handle_hash ----

std::vector<RosterEntry> load_roster(const std::string& path);
void save_roster(const std::string& path, const std::vector<RosterEntry>& roster,
                 const ArtifactMeta* meta = nullptr);

// ---- scores.csv: header guid,score ----

ScoreTable load_scores_csv(const std::string& path, const std::string& classifier_name,
                           ScoreKind kind = ScoreKind::probability);
void save_scores_csv(const std::string& path, const ScoreTable& scores,
                     const ArtifactMeta* meta = nullptr);

// ---- remote scores endpoint ----
// POST {"classifier": str, "guids": [str]} -> {"scores": {guid: number}}

struct ScoreBatchRequest {
    std::string classifier;
    std::vector<std::string> guids;
};

/// Transport seam so batching and retry logic stay testable without a
/// live endpoint.
class ScoreTransport {
public:
    virtual ~ScoreTransport() = default;
    /// One POST round trip. Throws Error(network) on transient transport
    /// failures and Error(parse) on malformed responses.
    virtual std::map<std::string, double> post_batch(const ScoreBatchRequest& request) = 0;
};

/// Talks to a real endpoint, e.g. "http://host:port/scores".
std::unique_ptr<ScoreTransport> make_http_transport(const std::string& endpoint_url);

struct RetryPolicy {
    int attempts = 3;
    int base_backoff_ms = 500;  // doubles per retry
    std::function<void(int)> sleep_fn;  // default: real sleep
};

/// Fetches one score per guid in batches of at most batch_size, retrying
/// transient failures per the policy. The result is independent of batch
/// completion order.
ScoreTable fetch_scores(ScoreTransport& transport, const std::string& classifier_name,
                        const std::vector<std::string>& guids, std::size_t batch_size,
                        ScoreKind kind = ScoreKind::probability,
                        const RetryPolicy& policy = {});

}  // namespace tg
