// rwvote - majority-voting ransomware artefact detection
// Vote aggregation into score cards

#ifndef RWVOTE_VOTING_HPP
#define RWVOTE_VOTING_HPP

#include <rwvote/corpus.hpp>
#include <rwvote/signatures.hpp>
#include <rwvote/stats.hpp>
#include <rwvote/votetests.hpp>

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rwvote {

struct vote_policy {
    /// Missing tests weigh 1.0.
    std::map<test_id, double> weights;
    truth tie_breaks_to = truth::malicious;
    std::size_t min_effective_votes = 3;

    [[nodiscard]] double weight(test_id id) const;
    /// Throws invalid_config for non-positive weights.
    void validate() const;
};

void to_json(nlohmann::json& j, const vote_policy& policy);
void from_json(const nlohmann::json& j, vote_policy& policy);

struct score_card {
    std::string sample_id;
    std::vector<vote> votes;
    std::size_t benign_count = 0;
    std::size_t malicious_count = 0;
    std::size_t abstain_count = 0;
    double benign_score = 0.0;
    double malicious_score = 0.0;
    truth classification = truth::malicious;
    bool tie = false;
    /// Fewer than min_effective_votes non-abstaining votes; classified malicious.
    bool insufficient_evidence = false;
};

/// Key order is alphabetical, so dumps are byte-stable.
void to_json(nlohmann::json& j, const score_card& card);

/// Throws no_votes for an empty list.
[[nodiscard]] score_card aggregate(std::vector<vote> votes, const vote_policy& policy, std::string sample_id = {});

/// Detection thresholds plus the voting policy, stored as one JSON object
/// with the policy under "policy".
struct run_config {
    detection_config detection;
    vote_policy policy;
};

void to_json(nlohmann::json& j, const run_config& cfg);
void from_json(const nlohmann::json& j, run_config& cfg);

[[nodiscard]] run_config parse_run_config(std::string_view json_text);
[[nodiscard]] run_config load_run_config(const std::filesystem::path& path);

/// "policy.tie_breaks_to", "policy.min_effective_votes" and
/// "policy.weight.<test>" address the policy; other keys go to the detection
/// config. Throws invalid_config.
void apply_run_override(run_config& cfg, std::string_view key, std::string_view value);

struct detection_assets {
    signature_db signatures;
    stats::control_curve curve;
    api_dictionary api_names;
};

/// Bundled assets unless a path is given. Throws on unreadable or invalid files.
[[nodiscard]] detection_assets load_assets(const std::optional<std::filesystem::path>& signatures = {},
                                           const std::optional<std::filesystem::path>& curve = {},
                                           const std::optional<std::filesystem::path>& api_names = {});

/// Runs every enabled test on the sample in canonical order and aggregates.
/// The crypto-artefact scan only runs on executables. Errors inside a test
/// turn into an abstention carrying the error message.
[[nodiscard]] score_card classify_sample(const file_sample& sample, const detection_assets& assets,
                                         const detection_config& config, const vote_policy& policy, timestamp now,
                                         unsigned crypto_threads = 1);

} // namespace rwvote

#endif // RWVOTE_VOTING_HPP
