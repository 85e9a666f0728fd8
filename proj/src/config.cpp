#include "tg/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tg/error.hpp"

namespace tg {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw Error(ErrorKind::parse,
                        "config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) {
        throw Error(ErrorKind::parse, "config: '" + std::string(key) + "' must be a string");
    }
    return it->get<std::string>();
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned()) {
        throw Error(ErrorKind::parse,
                    "config: '" + std::string(key) + "' must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) {
        throw Error(ErrorKind::parse, "config: '" + std::string(key) + "' must be a boolean");
    }
    return it->get<bool>();
}

double get_double(const json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) {
        throw Error(ErrorKind::parse, "config: '" + std::string(key) + "' must be a number");
    }
    return it->get<double>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j = json::parse(buffer.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorKind::parse, "config '" + path + "' is not a JSON object");
    }

    reject_unknown(j,
                   {"paths", "window", "seed", "sampling", "n_target", "conflation_mode",
                    "jitter", "medium_categories", "compat", "classifier", "simulate",
                    "reference_cohort"},
                   "the top level");

    RunConfig config;
    config.medium_categories = default_medium_categories();

    if (const auto it = j.find("paths"); it != j.end()) {
        if (!it->is_object()) throw Error(ErrorKind::parse, "config: 'paths' must be an object");
        reject_unknown(*it, {"tweets", "volumes", "annotations", "scores", "roster", "out_dir"},
                       "'paths'");
        config.paths.tweets = get_string(*it, "tweets", "");
        config.paths.volumes = get_string(*it, "volumes", "");
        config.paths.annotations = get_string(*it, "annotations", "");
        config.paths.scores = get_string(*it, "scores", "");
        config.paths.roster = get_string(*it, "roster", "");
        config.paths.out_dir = get_string(*it, "out_dir", "out");
    }

    if (const auto it = j.find("window"); it != j.end()) {
        if (!it->is_object()) throw Error(ErrorKind::parse, "config: 'window' must be an object");
        reject_unknown(*it, {"start", "end"}, "'window'");
        config.window.start = Date::parse(get_string(*it, "start", "0001-01-01"));
        config.window.end = Date::parse(get_string(*it, "end", "9999-12-31"));
        if (config.window.end < config.window.start) {
            throw Error(ErrorKind::validation, "config: window end precedes window start");
        }
    } else {
        config.window.start = Date{1, 1, 1};
        config.window.end = Date{9999, 12, 31};
    }

    if (const auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) {
            throw Error(ErrorKind::parse, "config: 'seed' must be a non-negative integer");
        }
        config.seed = it->get<std::uint64_t>();
    }

    if (const auto it = j.find("sampling"); it != j.end()) {
        if (!it->is_object()) {
            throw Error(ErrorKind::parse, "config: 'sampling' must be an object");
        }
        reject_unknown(*it,
                       {"target_size_b", "target_size_f", "expert_pos", "expert_neg",
                        "expert_flag"},
                       "'sampling'");
        config.sampling.target_size_b = get_u64(*it, "target_size_b", 0);
        config.sampling.target_size_f = get_u64(*it, "target_size_f", 0);
        config.sampling.expert_pos = get_u64(*it, "expert_pos", 0);
        config.sampling.expert_neg = get_u64(*it, "expert_neg", 0);
        config.sampling.expert_flag = get_string(*it, "expert_flag", "k");
    }

    config.n_target = static_cast<std::uint32_t>(get_u64(j, "n_target", 3));
    config.conflation = parse_conflation(get_string(j, "conflation_mode", "non_no_positive"));
    config.jitter = get_double(j, "jitter", 0.02);
    if (config.jitter < 0.0) {
        throw Error(ErrorKind::validation, "config: 'jitter' must be non-negative");
    }

    if (const auto it = j.find("medium_categories"); it != j.end()) {
        if (!it->is_array()) {
            throw Error(ErrorKind::parse, "config: 'medium_categories' must be an array");
        }
        config.medium_categories.clear();
        for (const auto& v : *it) {
            if (!v.is_string()) {
                throw Error(ErrorKind::parse,
                            "config: 'medium_categories' entries must be strings");
            }
            config.medium_categories.push_back(v.get<std::string>());
        }
    }

    if (const auto it = j.find("compat"); it != j.end()) {
        if (!it->is_object()) throw Error(ErrorKind::parse, "config: 'compat' must be an object");
        reject_unknown(*it, {"eq19_as_printed", "vote_then_conflate", "weighted_agreement"},
                       "'compat'");
        config.compat.eq19_as_printed = get_bool(*it, "eq19_as_printed", false);
        config.compat.vote_then_conflate = get_bool(*it, "vote_then_conflate", false);
        config.compat.weighted_agreement = get_bool(*it, "weighted_agreement", false);
    }

    if (const auto it = j.find("classifier"); it != j.end()) {
        if (!it->is_object()) {
            throw Error(ErrorKind::parse, "config: 'classifier' must be an object");
        }
        reject_unknown(*it, {"name", "kind", "batch_size"}, "'classifier'");
        config.classifier.name = get_string(*it, "name", "classifier");
        const std::string kind = get_string(*it, "kind", "probability");
        if (kind == "probability") config.classifier.kind = ScoreKind::probability;
        else if (kind == "unbounded") config.classifier.kind = ScoreKind::unbounded;
        else
            throw Error(ErrorKind::parse, "config: classifier kind '" + kind +
                                              "' is not 'probability' or 'unbounded'");
        config.classifier.batch_size = get_u64(*it, "batch_size", 500);
        if (config.classifier.batch_size == 0) {
            throw Error(ErrorKind::validation, "config: 'batch_size' must be positive");
        }
    }

    if (const auto it = j.find("simulate"); it != j.end()) {
        if (!it->is_object()) {
            throw Error(ErrorKind::parse, "config: 'simulate' must be an object");
        }
        reject_unknown(*it, {"p", "n_tweets", "n_raters"}, "'simulate'");
        if (const auto p_it = it->find("p"); p_it != it->end()) {
            if (!p_it->is_array() || p_it->size() != 3) {
                throw Error(ErrorKind::parse,
                            "config: 'simulate.p' must be an array of 3 numbers");
            }
            for (int c = 0; c < 3; ++c) {
                if (!(*p_it)[c].is_number()) {
                    throw Error(ErrorKind::parse,
                                "config: 'simulate.p' must be an array of 3 numbers");
                }
                config.simulate.p[c] = (*p_it)[c].get<double>();
            }
        }
        config.simulate.n_tweets = get_u64(*it, "n_tweets", 1000);
        config.simulate.n_raters = static_cast<std::uint32_t>(get_u64(*it, "n_raters", 3));
    }

    config.reference_cohort = parse_cohort(get_string(j, "reference_cohort", "crowd"));
    return config;
}

std::string canonical_config_json(const RunConfig& config) {
    json j;
    j["paths"] = {{"tweets", config.paths.tweets},       {"volumes", config.paths.volumes},
                  {"annotations", config.paths.annotations},
                  {"scores", config.paths.scores},       {"roster", config.paths.roster},
                  {"out_dir", config.paths.out_dir}};
    j["window"] = {{"start", config.window.start.to_string()},
                   {"end", config.window.end.to_string()}};
    j["sampling"] = {{"target_size_b", config.sampling.target_size_b},
                     {"target_size_f", config.sampling.target_size_f},
                     {"expert_pos", config.sampling.expert_pos},
                     {"expert_neg", config.sampling.expert_neg},
                     {"expert_flag", config.sampling.expert_flag}};
    j["n_target"] = config.n_target;
    j["conflation_mode"] = conflation_name(config.conflation);
    j["jitter"] = config.jitter;
    j["medium_categories"] = config.medium_categories;
    j["compat"] = {{"eq19_as_printed", config.compat.eq19_as_printed},
                   {"vote_then_conflate", config.compat.vote_then_conflate},
                   {"weighted_agreement", config.compat.weighted_agreement}};
    j["classifier"] = {{"name", config.classifier.name},
                       {"kind", config.classifier.kind == ScoreKind::probability
                                    ? "probability"
                                    : "unbounded"},
                       {"batch_size", config.classifier.batch_size}};
    j["simulate"] = {{"p", config.simulate.p},
                     {"n_tweets", config.simulate.n_tweets},
                     {"n_raters", config.simulate.n_raters}};
    j["reference_cohort"] = cohort_name(config.reference_cohort);
    return j.dump();
}

std::string config_hash(const RunConfig& config) {
    const std::string canonical = canonical_config_json(config);
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

}  // namespace tg
