// rwvote - majority-voting ransomware artefact detection
// Vote aggregation, run configuration and per-sample classification

#include <rwvote/voting.hpp>

#include <rwvote/cryptoscan.hpp>
#include <rwvote/error.hpp>

#include "io_util.hpp"

#include <nlohmann/json.hpp>

#include <charconv>

namespace rwvote {

namespace {

std::size_t parse_count(std::string_view key, std::string_view value) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw error(error_code::invalid_config, std::string(key) + " expects a non-negative integer");
    }
    return out;
}

double parse_weight(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw error(error_code::invalid_config, std::string(key) + " expects a number");
    }
    return out;
}

truth parse_tie(std::string_view value) {
    const auto t = parse_truth(value);
    if (!t) {
        throw error(error_code::invalid_config, "tie_breaks_to expects Benign or Malicious");
    }
    return *t;
}

} // namespace

double vote_policy::weight(test_id id) const {
    const auto it = weights.find(id);
    return it == weights.end() ? 1.0 : it->second;
}

void vote_policy::validate() const {
    for (const auto& [id, w] : weights) {
        if (!(w > 0.0)) {
            throw error(error_code::invalid_config, "weight for " + std::string(to_string(id)) + " must be > 0");
        }
    }
}

void to_json(nlohmann::json& j, const vote_policy& policy) {
    nlohmann::json weights = nlohmann::json::object();
    for (auto id : all_tests) {
        weights[std::string(to_string(id))] = policy.weight(id);
    }
    j = nlohmann::json{
        {"weights", weights},
        {"tie_breaks_to", to_string(policy.tie_breaks_to)},
        {"min_effective_votes", policy.min_effective_votes},
    };
}

void from_json(const nlohmann::json& j, vote_policy& policy) {
    try {
        if (j.contains("weights")) {
            policy.weights.clear();
            for (const auto& [name, w] : j.at("weights").items()) {
                const auto id = parse_test_id(name);
                if (!id) {
                    throw error(error_code::invalid_config, "unknown test '" + name + "' in weights");
                }
                policy.weights[*id] = w.get<double>();
            }
        }
        if (j.contains("tie_breaks_to")) {
            policy.tie_breaks_to = parse_tie(j.at("tie_breaks_to").get<std::string>());
        }
        if (j.contains("min_effective_votes")) {
            policy.min_effective_votes = j.at("min_effective_votes").get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(error_code::invalid_config, e.what());
    }
    policy.validate();
}

void to_json(nlohmann::json& j, const score_card& card) {
    nlohmann::json votes = nlohmann::json::array();
    for (const auto& v : card.votes) {
        nlohmann::json jv{
            {"test", to_string(v.test)},
            {"verdict", to_string(v.result)},
            {"evidence", v.evidence},
        };
        jv["measured"] = v.measured ? nlohmann::json(*v.measured) : nlohmann::json(nullptr);
        votes.push_back(std::move(jv));
    }
    j = nlohmann::json{
        {"sample_id", card.sample_id},
        {"votes", votes},
        {"benign_count", card.benign_count},
        {"malicious_count", card.malicious_count},
        {"abstain_count", card.abstain_count},
        {"benign_score", card.benign_score},
        {"malicious_score", card.malicious_score},
        {"classification", to_string(card.classification)},
        {"tie", card.tie},
        {"insufficient_evidence", card.insufficient_evidence},
    };
}

score_card aggregate(std::vector<vote> votes, const vote_policy& policy, std::string sample_id) {
    if (votes.empty()) {
        throw error(error_code::no_votes, sample_id.empty() ? "empty vote list" : sample_id);
    }
    score_card card;
    card.sample_id = std::move(sample_id);
    for (const auto& v : votes) {
        switch (v.result) {
        case verdict::benign:
            ++card.benign_count;
            card.benign_score += policy.weight(v.test);
            break;
        case verdict::malicious:
            ++card.malicious_count;
            card.malicious_score += policy.weight(v.test);
            break;
        case verdict::abstain:
            ++card.abstain_count;
            break;
        }
    }
    card.votes = std::move(votes);

    if (card.benign_count + card.malicious_count < policy.min_effective_votes) {
        card.insufficient_evidence = true;
        card.classification = truth::malicious;
    } else if (card.malicious_score > card.benign_score) {
        card.classification = truth::malicious;
    } else if (card.benign_score > card.malicious_score) {
        card.classification = truth::benign;
    } else {
        card.tie = true;
        card.classification = policy.tie_breaks_to;
    }
    return card;
}

void to_json(nlohmann::json& j, const run_config& cfg) {
    to_json(j, cfg.detection);
    j["policy"] = cfg.policy;
}

void from_json(const nlohmann::json& j, run_config& cfg) {
    if (!j.is_object()) {
        throw error(error_code::invalid_config, "configuration must be a JSON object");
    }
    from_json(j, cfg.detection);
    if (j.contains("policy")) {
        from_json(j.at("policy"), cfg.policy);
    }
}

run_config parse_run_config(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(error_code::invalid_config, e.what());
    }
    run_config cfg;
    from_json(j, cfg);
    return cfg;
}

run_config load_run_config(const std::filesystem::path& path) {
    return parse_run_config(detail::read_text_file(path));
}

void apply_run_override(run_config& cfg, std::string_view key, std::string_view value) {
    constexpr std::string_view weight_prefix = "policy.weight.";
    if (key == "policy.tie_breaks_to") {
        cfg.policy.tie_breaks_to = parse_tie(value);
    } else if (key == "policy.min_effective_votes") {
        cfg.policy.min_effective_votes = parse_count(key, value);
    } else if (key.starts_with(weight_prefix)) {
        const auto id = parse_test_id(key.substr(weight_prefix.size()));
        if (!id) {
            throw error(error_code::invalid_config, "unknown test in '" + std::string(key) + "'");
        }
        cfg.policy.weights[*id] = parse_weight(key, value);
        cfg.policy.validate();
    } else {
        apply_override(cfg.detection, key, value);
    }
}

detection_assets load_assets(const std::optional<std::filesystem::path>& signatures,
                             const std::optional<std::filesystem::path>& curve,
                             const std::optional<std::filesystem::path>& api_names) {
    detection_assets a{
        load_signature_db(signatures),
        curve ? stats::control_curve_from_json(detail::read_text_file(*curve)) : stats::bundled_control_curve(),
        load_api_dictionary(api_names),
    };
    a.curve.validate();
    return a;
}

score_card classify_sample(const file_sample& sample, const detection_assets& assets, const detection_config& config,
                           const vote_policy& policy, timestamp now, unsigned crypto_threads) {
    const bool executable = is_executable(sample);
    std::vector<vote> votes;
    votes.reserve(all_tests.size());
    for (auto id : all_tests) {
        if (!config.enabled(id) || (id == test_id::crypto_artifacts && !executable)) {
            continue;
        }
        try {
            switch (id) {
            case test_id::bitbyte: votes.push_back(test_bitbyte(sample, assets.curve, config)); break;
            case test_id::crypto_artifacts: {
                const auto body = sample.body();
                votes.push_back(cryptoscan::test_crypto_artifacts(body, crypto_threads));
                break;
            }
            case test_id::extension_entropy: votes.push_back(test_extension_entropy(sample, config)); break;
            case test_id::file_age: votes.push_back(test_file_age(sample, now, config)); break;
            case test_id::file_entropy: votes.push_back(test_file_entropy(sample, config)); break;
            case test_id::filename_entropy: votes.push_back(test_filename_entropy(sample, config)); break;
            case test_id::known_extension: votes.push_back(test_known_extension(sample, assets.signatures, config)); break;
            case test_id::magic_number: votes.push_back(test_magic_number(sample, assets.signatures, config)); break;
            case test_id::printable: votes.push_back(test_printable(sample, assets.signatures, config)); break;
            case test_id::ransom_note: votes.push_back(test_ransom_note(sample, config)); break;
            }
        } catch (const std::exception& e) {
            votes.push_back(vote{id, verdict::abstain, std::nullopt, std::string("error: ") + e.what()});
        }
    }
    if (votes.empty()) {
        throw error(error_code::no_votes, sample.id() + ": no tests enabled");
    }
    return aggregate(std::move(votes), policy, sample.id());
}

} // namespace rwvote
