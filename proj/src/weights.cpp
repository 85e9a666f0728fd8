#include "tg/weights.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "tg/corpus_io.hpp"
#include "tg/error.hpp"
#include "tg/format.hpp"

namespace tg {

using nlohmann::json;

namespace {

struct DayCounts {
    std::uint64_t total = 0;
    std::uint64_t by_k[2] = {0, 0};
};

std::map<Date, DayCounts> count_by_day(const TweetCollection& records) {
    std::map<Date, DayCounts> counts;
    for (const auto& rec : records) {
        auto& cell = counts[rec.day];
        ++cell.total;
        ++cell.by_k[rec.k ? 1 : 0];
    }
    return counts;
}

}  // namespace

WeightTables estimate_weight_tables(const TweetCollection& corpus,
                                    const TweetCollection& study, const VolumeTable& volumes,
                                    bool flag_conditional_by_flag_marginal) {
    if (volumes.total == 0) {
        throw Error(ErrorKind::domain, "volume table sums to zero");
    }

    const auto corpus_counts = count_by_day(corpus);
    const auto study_counts = count_by_day(study);

    for (const auto& [day, cell] : corpus_counts) {
        (void)cell;
        if (!volumes.entries.count(day)) {
            throw Error(ErrorKind::domain,
                        "corpus day " + day.to_string() + " missing from the volume table");
        }
    }

    WeightTables tables;
    tables.flag_conditional_by_flag_marginal = flag_conditional_by_flag_marginal;

    for (const auto& [day, volume] : volumes.entries) {
        tables.p_w_d[day] =
            static_cast<double>(volume) / static_cast<double>(volumes.total);
    }

    std::uint64_t corpus_k_marginal[2] = {0, 0};
    for (const auto& [day, cell] : corpus_counts) {
        (void)day;
        corpus_k_marginal[0] += cell.by_k[0];
        corpus_k_marginal[1] += cell.by_k[1];
    }
    for (const auto& [day, cell] : corpus_counts) {
        std::array<double, 2> conditional{};
        for (int k = 0; k < 2; ++k) {
            const std::uint64_t denom =
                flag_conditional_by_flag_marginal ? corpus_k_marginal[k] : cell.total;
            conditional[k] = denom == 0 ? 0.0
                                        : static_cast<double>(cell.by_k[k]) /
                                              static_cast<double>(denom);
        }
        tables.p_w_k_given_d[day] = conditional;
    }

    const auto study_size = static_cast<double>(study.size());
    for (const auto& [day, cell] : study_counts) {
        const auto corpus_it = corpus_counts.find(day);
        if (corpus_it == corpus_counts.end()) {
            throw Error(ErrorKind::domain, "study set reaches day " + day.to_string() +
                                               " that has no corpus records");
        }
        for (int k = 0; k < 2; ++k) {
            if (cell.by_k[k] > 0 && corpus_it->second.by_k[k] == 0) {
                throw Error(ErrorKind::domain,
                            "study set reaches cell (k=" + std::string(k ? "true" : "false") +
                                ", " + day.to_string() + ") that is empty in the corpus");
            }
        }
        tables.p_a_d[day] = static_cast<double>(cell.total) / study_size;
        tables.p_a_k_given_d[day] = {
            static_cast<double>(cell.by_k[0]) / static_cast<double>(cell.total),
            static_cast<double>(cell.by_k[1]) / static_cast<double>(cell.total),
        };
        tables.covered_mass += tables.p_w_d.at(day);
    }
    return tables;
}

WeightAssignment importance_weights(const TweetCollection& study,
                                    const WeightTables& tables) {
    WeightAssignment assignment;
    for (const auto& rec : study) {
        const int k = rec.k ? 1 : 0;
        const auto pad_it = tables.p_a_d.find(rec.day);
        const auto pak_it = tables.p_a_k_given_d.find(rec.day);
        if (pad_it == tables.p_a_d.end() || pak_it == tables.p_a_k_given_d.end() ||
            pak_it->second[k] == 0.0) {
            throw Error(ErrorKind::domain, "record '" + rec.guid +
                                               "' falls in a (k, day) cell with zero "
                                               "study-set density");
        }
        const auto pwd_it = tables.p_w_d.find(rec.day);
        const auto pwk_it = tables.p_w_k_given_d.find(rec.day);
        if (pwd_it == tables.p_w_d.end() || pwk_it == tables.p_w_k_given_d.end()) {
            throw Error(ErrorKind::domain, "record '" + rec.guid +
                                               "' falls on day " + rec.day.to_string() +
                                               " with no target density");
        }
        const double weight = (pwk_it->second[k] * pwd_it->second) /
                              (pak_it->second[k] * pad_it->second);
        if (!(weight > 0.0) || !std::isfinite(weight)) {
            throw Error(ErrorKind::domain,
                        "non-positive or non-finite weight for record '" + rec.guid + "'");
        }
        WeightAssignment::Entry entry;
        entry.k = rec.k;
        entry.day = rec.day;
        entry.weight = weight;
        if (!assignment.entries.emplace(rec.guid, entry).second) {
            throw Error(ErrorKind::validation,
                        "duplicate guid '" + rec.guid + "' in the study set");
        }
    }
    for (const auto& [guid, entry] : assignment.entries) {
        (void)guid;
        assignment.normalizer += entry.weight;
    }
    return assignment;
}

WeightedEstimate weighted_expectation(const std::map<std::string, double>& values,
                                      const WeightAssignment& weights) {
    // Ratio-of-sums form: for f identically 1 the numerator and denominator
    // are the same floating-point sum, so the estimate is exactly 1.0.
    double weighted_sum = 0.0;
    double weight_sum = 0.0;
    double weight_sq_sum = 0.0;
    for (const auto& [guid, value] : values) {
        const auto it = weights.entries.find(guid);
        if (it == weights.entries.end()) {
            throw Error(ErrorKind::domain, "no weight for guid '" + guid + "'");
        }
        const double w = it->second.weight;
        weighted_sum += w * value;
        weight_sum += w;
        weight_sq_sum += w * w;
    }
    if (weight_sum <= 0.0) {
        throw Error(ErrorKind::domain, "weighted expectation over an empty value set");
    }
    WeightedEstimate out;
    out.estimate = weighted_sum / weight_sum;
    out.effective_sample_size = (weight_sum * weight_sum) / weight_sq_sum;
    out.total_weight = weight_sum;
    return out;
}

void save_weights_csv(const std::string& path, const WeightAssignment& assignment,
                      const ArtifactMeta* meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    if (meta) out << meta->to_comment() << "\n";
    out << "guid,k,day,weight\n";
    for (const auto& [guid, entry] : assignment.entries) {
        out << csv_field(guid) << "," << (entry.k ? "true" : "false") << ","
            << entry.day.to_string() << "," << format_double(entry.weight) << "\n";
    }
}

WeightAssignment load_weights_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
    WeightAssignment assignment;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || is_comment_line(line)) continue;
        const auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"guid", "k", "day", "weight"}) {
                throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                                  ": expected header 'guid,k,day,weight'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw Error(ErrorKind::parse,
                        path + ":" + std::to_string(lineno) + ": expected 4 fields");
        }
        WeightAssignment::Entry entry;
        if (fields[1] == "true") entry.k = true;
        else if (fields[1] == "false") entry.k = false;
        else
            throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                              ": k must be 'true' or 'false'");
        try {
            entry.day = Date::parse(fields[2]);
            entry.weight = parse_double(fields[3], "weight");
        } catch (const Error& e) {
            throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!(entry.weight > 0.0) || !std::isfinite(entry.weight)) {
            throw Error(ErrorKind::validation, path + ":" + std::to_string(lineno) +
                                                   ": weight must be positive and finite");
        }
        if (!assignment.entries.emplace(fields[0], entry).second) {
            throw Error(ErrorKind::validation, path + ":" + std::to_string(lineno) +
                                                   ": duplicate guid '" + fields[0] + "'");
        }
    }
    if (!header_seen) {
        throw Error(ErrorKind::parse, path + ": missing header 'guid,k,day,weight'");
    }
    for (const auto& [guid, entry] : assignment.entries) {
        (void)guid;
        assignment.normalizer += entry.weight;
    }
    return assignment;
}

void save_weight_tables_json(const std::string& path, const WeightTables& tables,
                             const ArtifactMeta* meta) {
    json j;
    if (meta) {
        j["command"] = meta->command;
        j["config_hash"] = meta->config_hash;
    }
    auto day_map = [](const std::map<Date, double>& m) {
        json out = json::object();
        for (const auto& [day, p] : m) out[day.to_string()] = p;
        return out;
    };
    auto cond_map = [](const std::map<Date, std::array<double, 2>>& m) {
        json out = json::object();
        for (const auto& [day, probs] : m) {
            out[day.to_string()] = {{"false", probs[0]}, {"true", probs[1]}};
        }
        return out;
    };
    j["p_w_d"] = day_map(tables.p_w_d);
    j["p_w_k_given_d"] = cond_map(tables.p_w_k_given_d);
    j["p_a_d"] = day_map(tables.p_a_d);
    j["p_a_k_given_d"] = cond_map(tables.p_a_k_given_d);
    j["flag_conditional_by_flag_marginal"] = tables.flag_conditional_by_flag_marginal;
    j["covered_mass"] = tables.covered_mass;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

}  // namespace tg
