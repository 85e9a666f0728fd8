#include "tg/corpus_io.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "tg/error.hpp"
#include "tg/format.hpp"

namespace tg {

using nlohmann::json;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    return out;
}

json parse_json_line(const std::string& line, const std::string& path, std::size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorKind::parse,
                    path + ":" + std::to_string(lineno) + ": malformed JSON record");
    }
    return j;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& path, std::size_t lineno) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                              ": unknown key '" + it.key() + "'");
        }
    }
}

const json& require_key(const json& j, const char* key, const std::string& path,
                        std::size_t lineno) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                          ": missing key '" + std::string(key) + "'");
    }
    return *it;
}

std::string require_string(const json& j, const char* key, const std::string& path,
                           std::size_t lineno) {
    const json& v = require_key(j, key, path, lineno);
    if (!v.is_string()) {
        throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": key '" +
                                          std::string(key) + "' must be a string");
    }
    return v.get<std::string>();
}

bool looks_like_rfc3339(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS[.fff...](Z|±HH:MM)
    if (s.size() < 20 || s[10] != 'T') return false;
    try {
        (void)Date::parse(s.substr(0, 10));
    } catch (const Error&) {
        return false;
    }
    auto two_digits = [&](std::size_t i) {
        return s[i] >= '0' && s[i] <= '9' && s[i + 1] >= '0' && s[i + 1] <= '9';
    };
    if (!two_digits(11) || s[13] != ':' || !two_digits(14) || s[16] != ':' || !two_digits(17))
        return false;
    std::size_t i = 19;
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++digits;
        if (digits == 0) return false;
    }
    if (i >= s.size()) return false;
    if (s[i] == 'Z') return i + 1 == s.size();
    if (s[i] != '+' && s[i] != '-') return false;
    return s.size() == i + 6 && two_digits(i + 1) && s[i + 3] == ':' && two_digits(i + 4);
}

}  // namespace

std::string ArtifactMeta::to_comment() const {
    std::string line = "# command=" + command + " config_hash=" + config_hash;
    if (seed) line += " seed=" + std::to_string(*seed);
    return line;
}

TweetCollection load_tweets(const std::string& path, const DateRange& window) {
    static const std::set<std::string> allowed = {"guid", "day", "k",
                                                  "text", "mentions", "set_tags"};
    const auto lines = read_lines(path);
    TweetCollection tweets;
    std::unordered_map<std::string, std::size_t> seen;  // guid -> first line
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (lines[i].empty() || is_comment_line(lines[i])) continue;
        const json j = parse_json_line(lines[i], path, lineno);
        reject_unknown_keys(j, allowed, path, lineno);

        TweetRecord rec;
        rec.guid = require_string(j, "guid", path, lineno);
        if (rec.guid.empty()) {
            throw Error(ErrorKind::validation,
                        path + ":" + std::to_string(lineno) + ": empty guid");
        }
        const auto [it, inserted] = seen.emplace(rec.guid, lineno);
        if (!inserted) {
            throw Error(ErrorKind::validation,
                        path + ": duplicate guid '" + rec.guid + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(lineno));
        }
        try {
            rec.day = Date::parse(require_string(j, "day", path, lineno));
        } catch (const Error& e) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!window.contains(rec.day)) {
            throw Error(ErrorKind::validation,
                        path + ":" + std::to_string(lineno) + ": day " + rec.day.to_string() +
                            " outside campaign window [" + window.start.to_string() + ", " +
                            window.end.to_string() + "]");
        }
        const json& k = require_key(j, "k", path, lineno);
        if (!k.is_boolean()) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": key 'k' must be a boolean");
        }
        rec.k = k.get<bool>();
        if (auto it2 = j.find("text"); it2 != j.end() && !it2->is_null()) {
            if (!it2->is_string()) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": key 'text' must be a string or null");
            }
            rec.text = it2->get<std::string>();
        }
        if (auto it2 = j.find("mentions"); it2 != j.end()) {
            if (!it2->is_array()) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": key 'mentions' must be an array");
            }
            for (const auto& m : *it2) rec.mentions.push_back(m.get<std::string>());
        }
        if (auto it2 = j.find("set_tags"); it2 != j.end()) {
            if (!it2->is_array()) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": key 'set_tags' must be an array");
            }
            try {
                for (const auto& t : *it2) rec.set_tags.insert(parse_set_tag(t.get<std::string>()));
            } catch (const Error& e) {
                throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        try {
            check_record_tags(rec);
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        tweets.push_back(std::move(rec));
    }
    return tweets;
}

void save_tweets(const std::string& path, const TweetCollection& tweets,
                 const ArtifactMeta* meta) {
    auto out = open_out(path);
    if (meta) out << meta->to_comment() << "\n";
    for (const auto& rec : tweets) {
        json j;
        j["guid"] = rec.guid;
        j["day"] = rec.day.to_string();
        j["k"] = rec.k;
        j["text"] = rec.text.has_value() ? json(*rec.text) : json(nullptr);
        j["mentions"] = rec.mentions;
        json tags = json::array();
        for (SetTag t : rec.set_tags) tags.push_back(set_tag_name(t));
        j["set_tags"] = std::move(tags);
        out << j.dump() << "\n";
    }
}

VolumeTable load_volumes(const std::string& path) {
    const auto lines = read_lines(path);
    VolumeTable table;
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (lines[i].empty() || is_comment_line(lines[i])) continue;
        const auto fields = split_csv_line(lines[i]);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"day", "n_d"}) {
                throw Error(ErrorKind::parse,
                            path + ":" + std::to_string(lineno) + ": expected header 'day,n_d'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 2) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 2 fields");
        }
        Date day;
        try {
            day = Date::parse(fields[0]);
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        std::uint64_t count = 0;
        try {
            count = parse_u64(fields[1], "volume count");
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!table.entries.emplace(day, count).second) {
            throw Error(ErrorKind::validation,
                        path + ":" + std::to_string(lineno) + ": duplicate day " + day.to_string());
        }
        table.total += count;
    }
    if (!header_seen) {
        throw Error(ErrorKind::parse, path + ": missing header 'day,n_d'");
    }
    return table;
}

void save_volumes(const std::string& path, const VolumeTable& volumes,
                  const ArtifactMeta* meta) {
    auto out = open_out(path);
    if (meta) out << meta->to_comment() << "\n";
    out << "day,n_d\n";
    for (const auto& [day, count] : volumes.entries) {
        out << day.to_string() << "," << count << "\n";
    }
}

LoadedAnnotations load_annotations(const std::string& path) {
    static const std::set<std::string> allowed = {
        "tweet_guid", "rater_id", "rater_cohort", "contain_abuse",
        "types",      "medium",   "timestamp"};
    const auto lines = read_lines(path);
    LoadedAnnotations result;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (lines[i].empty() || is_comment_line(lines[i])) continue;
        const json j = parse_json_line(lines[i], path, lineno);
        reject_unknown_keys(j, allowed, path, lineno);

        RawAnnotation raw;
        raw.tweet_guid = require_string(j, "tweet_guid", path, lineno);
        raw.rater_id = require_string(j, "rater_id", path, lineno);
        try {
            raw.cohort = parse_cohort(require_string(j, "rater_cohort", path, lineno));
            raw.contain_abuse = parse_contain_abuse(require_string(j, "contain_abuse", path, lineno));
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const json& types = require_key(j, "types", path, lineno);
        if (!types.is_array()) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": key 'types' must be an array");
        }
        for (const auto& t : types) raw.types.push_back(t.get<std::string>());
        if (auto it = j.find("medium"); it != j.end() && !it->is_null()) {
            if (!it->is_string()) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": key 'medium' must be a string or null");
            }
            raw.medium = it->get<std::string>();
        }
        raw.timestamp = require_string(j, "timestamp", path, lineno);
        if (!looks_like_rfc3339(raw.timestamp)) {
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                              ": timestamp '" + raw.timestamp +
                                              "' is not RFC-3339");
        }
        if (raw.cohort == Cohort::crowd) ++result.crowd_count;
        else ++result.expert_count;
        result.records.push_back(std::move(raw));
    }
    return result;
}

void save_annotations(const std::string& path, const std::vector<RawAnnotation>& records,
                      const ArtifactMeta* meta) {
    auto out = open_out(path);
    if (meta) out << meta->to_comment() << "\n";
    for (const auto& raw : records) {
        json j;
        j["tweet_guid"] = raw.tweet_guid;
        j["rater_id"] = raw.rater_id;
        j["rater_cohort"] = cohort_name(raw.cohort);
        j["contain_abuse"] = contain_abuse_name(raw.contain_abuse);
        j["types"] = raw.types;
        j["medium"] = raw.medium.has_value() ? json(*raw.medium) : json(nullptr);
        j["timestamp"] = raw.timestamp;
        out << j.dump() << "\n";
    }
}

std::vector<RosterEntry> load_roster(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<RosterEntry> roster;
    std::unordered_set<std::string> ids;
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (lines[i].empty() || is_comment_line(lines[i])) continue;
        const auto fields = split_csv_line(lines[i]);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"individual_id", "category", "organization",
                                                   "handle_hash"}) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": expected header "
                                                  "'individual_id,category,organization,"
                                                  "handle_hash'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 4 fields");
        }
        RosterEntry entry;
        entry.individual_id = fields[0];
        if (entry.individual_id.empty() || !ids.insert(entry.individual_id).second) {
            throw Error(ErrorKind::validation, path + ":" + std::to_string(lineno) +
                                                   ": empty or duplicate individual_id '" +
                                                   fields[0] + "'");
        }
        if (fields[1] == "politician") entry.category = RosterEntry::Category::politician;
        else if (fields[1] == "journalist") entry.category = RosterEntry::Category::journalist;
        else
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                              ": unknown category '" + fields[1] + "'");
        if (!fields[2].empty()) entry.organization = fields[2];
        entry.handle_hash = fields[3];
        roster.push_back(std::move(entry));
    }
    if (!header_seen) {
        throw Error(ErrorKind::parse,
                    path + ": missing header 'individual_id,category,organization,handle_hash'");
    }
    return roster;
}

void save_roster(const std::string& path, const std::vector<RosterEntry>& roster,
                 const ArtifactMeta* meta) {
    auto out = open_out(path);
    if (meta) out << meta->to_comment() << "\n";
    out << "individual_id,category,organization,handle_hash\n";
    for (const auto& entry : roster) {
        out << csv_field(entry.individual_id) << ","
            << (entry.category == RosterEntry::Category::politician ? "politician" : "journalist")
            << "," << csv_field(entry.organization.value_or("")) << ","
            << csv_field(entry.handle_hash) << "\n";
    }
}

namespace {

void check_score_range(const std::string& guid, double score, ScoreKind kind) {
    if (kind == ScoreKind::probability && !(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorKind::validation, "score " + format_double(score) + " for guid '" +
                                               guid + "' outside [0,1]");
    }
}

}  // namespace

ScoreTable load_scores_csv(const std::string& path, const std::string& classifier_name,
                           ScoreKind kind) {
    const auto lines = read_lines(path);
    ScoreTable table;
    table.classifier_name = classifier_name;
    table.kind = kind;
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (lines[i].empty() || is_comment_line(lines[i])) continue;
        const auto fields = split_csv_line(lines[i]);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"guid", "score"}) {
                throw Error(ErrorKind::parse,
                            path + ":" + std::to_string(lineno) + ": expected header 'guid,score'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 2) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 2 fields");
        }
        double score = 0;
        try {
            score = parse_double(fields[1], "score");
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        check_score_range(fields[0], score, kind);
        if (!table.entries.emplace(fields[0], score).second) {
            throw Error(ErrorKind::validation, path + ":" + std::to_string(lineno) +
                                                   ": duplicate guid '" + fields[0] + "'");
        }
    }
    if (!header_seen) throw Error(ErrorKind::parse, path + ": missing header 'guid,score'");
    return table;
}

void save_scores_csv(const std::string& path, const ScoreTable& scores,
                     const ArtifactMeta* meta) {
    auto out = open_out(path);
    if (meta) out << meta->to_comment() << "\n";
    out << "guid,score\n";
    for (const auto& [guid, score] : scores.entries) {
        out << csv_field(guid) << "," << format_double(score) << "\n";
    }
}

namespace {

class HttpScoreTransport final : public ScoreTransport {
public:
    explicit HttpScoreTransport(const std::string& endpoint_url) {
        // Split "scheme://host[:port]/path" into client base and request path.
        const auto scheme_end = endpoint_url.find("://");
        if (scheme_end == std::string::npos) {
            throw Error(ErrorKind::validation, "endpoint '" + endpoint_url + "' has no scheme");
        }
        const auto path_start = endpoint_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = endpoint_url;
            path_ = "/";
        } else {
            base_ = endpoint_url.substr(0, path_start);
            path_ = endpoint_url.substr(path_start);
        }
    }

    std::map<std::string, double> post_batch(const ScoreBatchRequest& request) override {
        json body;
        body["classifier"] = request.classifier;
        body["guids"] = request.guids;

        httplib::Client client(base_);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        auto res = client.Post(path_, body.dump(), "application/json");
        if (!res) {
            throw Error(ErrorKind::network, "request to " + base_ + path_ + " failed: " +
                                                httplib::to_string(res.error()));
        }
        if (res->status >= 500) {
            throw Error(ErrorKind::network,
                        "endpoint returned status " + std::to_string(res->status));
        }
        if (res->status != 200) {
            throw Error(ErrorKind::validation,
                        "endpoint returned status " + std::to_string(res->status));
        }
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("scores") ||
            !j["scores"].is_object()) {
            throw Error(ErrorKind::parse, "endpoint response is not {\"scores\": {...}}");
        }
        std::map<std::string, double> out;
        for (auto it = j["scores"].begin(); it != j["scores"].end(); ++it) {
            if (!it.value().is_number()) {
                throw Error(ErrorKind::parse,
                            "score for guid '" + it.key() + "' is not a number");
            }
            out[it.key()] = it.value().get<double>();
        }
        return out;
    }

private:
    std::string base_;
    std::string path_;
};

}  // namespace

std::unique_ptr<ScoreTransport> make_http_transport(const std::string& endpoint_url) {
    return std::make_unique<HttpScoreTransport>(endpoint_url);
}

ScoreTable fetch_scores(ScoreTransport& transport, const std::string& classifier_name,
                        const std::vector<std::string>& guids, std::size_t batch_size,
                        ScoreKind kind, const RetryPolicy& policy) {
    if (batch_size == 0) throw Error(ErrorKind::domain, "batch_size must be positive");

    ScoreTable table;
    table.classifier_name = classifier_name;
    table.kind = kind;

    std::vector<std::string> unique;
    std::unordered_set<std::string> seen;
    for (const auto& g : guids) {
        if (seen.insert(g).second) unique.push_back(g);
    }

    const auto sleep_for = [&](int ms) {
        if (policy.sleep_fn) policy.sleep_fn(ms);
        else std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    };

    for (std::size_t offset = 0; offset < unique.size(); offset += batch_size) {
        ScoreBatchRequest request;
        request.classifier = classifier_name;
        const std::size_t end = std::min(unique.size(), offset + batch_size);
        request.guids.assign(unique.begin() + static_cast<std::ptrdiff_t>(offset),
                             unique.begin() + static_cast<std::ptrdiff_t>(end));

        std::map<std::string, double> batch;
        int backoff = policy.base_backoff_ms;
        for (int attempt = 1;; ++attempt) {
            try {
                batch = transport.post_batch(request);
                break;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::network || attempt >= policy.attempts) throw;
                sleep_for(backoff);
                backoff *= 2;
            }
        }
        for (const auto& guid : request.guids) {
            auto it = batch.find(guid);
            if (it == batch.end()) {
                throw Error(ErrorKind::validation,
                            "endpoint response missing score for guid '" + guid + "'");
            }
            check_score_range(guid, it->second, kind);
            table.entries[guid] = it->second;
        }
    }
    return table;
}

}  // namespace tg
