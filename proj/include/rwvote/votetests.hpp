// rwvote - majority-voting ransomware artefact detection
// Discrete benign/malicious tests over file content, names and metadata

#ifndef RWVOTE_VOTETESTS_HPP
#define RWVOTE_VOTETESTS_HPP

#include <rwvote/corpus.hpp>
#include <rwvote/signatures.hpp>
#include <rwvote/stats.hpp>

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

namespace rwvote {

/// Declaration order is the canonical (alphabetical) vote order.
enum class test_id {
    bitbyte,
    crypto_artifacts,
    extension_entropy,
    file_age,
    file_entropy,
    filename_entropy,
    known_extension,
    magic_number,
    printable,
    ransom_note,
};

inline constexpr std::array<test_id, 10> all_tests = {
    test_id::bitbyte,         test_id::crypto_artifacts, test_id::extension_entropy, test_id::file_age,
    test_id::file_entropy,    test_id::filename_entropy, test_id::known_extension,   test_id::magic_number,
    test_id::printable,       test_id::ransom_note,
};

[[nodiscard]] std::string_view to_string(test_id id);
[[nodiscard]] std::optional<test_id> parse_test_id(std::string_view s);

enum class verdict { benign, malicious, abstain };

[[nodiscard]] std::string_view to_string(verdict v);

struct vote {
    test_id test = test_id::bitbyte;
    verdict result = verdict::abstain;
    std::optional<double> measured;
    std::string evidence;

    friend bool operator==(const vote&, const vote&) = default;
};

struct detection_config {
    double printable_min = 0.98;
    double chi_p_threshold = 0.01;
    double bitbyte_threshold = 56.0;
    double name_entropy_max_bits = 6.0;
    double ext_entropy_max_bits = 6.0;
    std::size_t ransom_note_max_bytes = 1024;
    double min_age_seconds = 86400.0;
    std::size_t chi_min_bytes = 1024;
    /// Chi-square over the whole file instead of the 4096-byte head.
    bool chi_whole_file = false;
    keyword_set keywords = bundled_keyword_set();
    std::set<test_id> enabled_tests{all_tests.begin(), all_tests.end()};

    [[nodiscard]] bool enabled(test_id id) const { return enabled_tests.count(id) != 0; }
    /// Throws invalid_config when a threshold is not strictly positive or
    /// printable_min lies outside (0, 1].
    void validate() const;
};

void to_json(nlohmann::json& j, const detection_config& cfg);
/// Reads the known keys present in `j`, leaving the others at their defaults.
void from_json(const nlohmann::json& j, detection_config& cfg);

/// Applies one "key=value" override (CLI --set). Throws invalid_config.
void apply_override(detection_config& cfg, std::string_view key, std::string_view value);

/// Fraction of bytes in 32..126 or 9..13.
[[nodiscard]] double printable_ratio(std::span<const std::uint8_t> data);

/// Extension exe/dll, or a PE ("MZ") or ELF head.
[[nodiscard]] bool is_executable(const file_sample& sample);

vote test_magic_number(const file_sample& sample, const signature_db& db, const detection_config& cfg);
vote test_printable(const file_sample& sample, const signature_db& db, const detection_config& cfg);
vote test_file_entropy(const file_sample& sample, const detection_config& cfg);
vote test_bitbyte(const file_sample& sample, const stats::control_curve& curve, const detection_config& cfg);
vote test_ransom_note(const file_sample& sample, const detection_config& cfg);
vote test_filename_entropy(const file_sample& sample, const detection_config& cfg);
vote test_known_extension(const file_sample& sample, const signature_db& db, const detection_config& cfg);
vote test_extension_entropy(const file_sample& sample, const detection_config& cfg);
vote test_file_age(const file_sample& sample, timestamp now, const detection_config& cfg);

} // namespace rwvote

#endif // RWVOTE_VOTETESTS_HPP
