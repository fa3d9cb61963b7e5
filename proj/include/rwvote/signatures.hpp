// rwvote - majority-voting ransomware artefact detection
// Static data assets: magic-number signatures, keyword sets, API dictionary

#ifndef RWVOTE_SIGNATURES_HPP
#define RWVOTE_SIGNATURES_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rwvote {

/// Largest head any signature may inspect.
inline constexpr std::size_t head_size = 4096;

struct magic_pattern {
    std::size_t offset = 0;
    std::vector<std::uint8_t> bytes;

    [[nodiscard]] std::size_t end() const { return offset + bytes.size(); }
    friend bool operator==(const magic_pattern&, const magic_pattern&) = default;
};

/**
 * One known extension. Patterns are alternatives: any one matching is enough.
 *
 * Plain-text entries carry no patterns. A non-plain-text entry may also have
 * none (raw binary such as "bin"), in which case no magic check is possible.
 */
struct signature_entry {
    std::string extension;
    std::vector<magic_pattern> patterns;
    bool plain_text = false;

    [[nodiscard]] bool has_magic() const { return !patterns.empty(); }
};

class signature_db {
public:
    signature_db() = default;
    /// Throws duplicate_extension or parse_error on invariant violations.
    explicit signature_db(std::vector<signature_entry> entries);

    /// Exact match after ASCII lowercasing; nullptr for unknown or empty.
    [[nodiscard]] const signature_entry* lookup(std::string_view ext) const;
    [[nodiscard]] bool known(std::string_view ext) const { return lookup(ext) != nullptr; }

    [[nodiscard]] const std::vector<signature_entry>& entries() const { return entries_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

private:
    std::vector<signature_entry> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

[[nodiscard]] signature_db parse_signature_db(std::string_view json_text);
/// Loads `path`, or the bundled asset when no path is given.
[[nodiscard]] signature_db load_signature_db(const std::optional<std::filesystem::path>& path = {});
[[nodiscard]] const signature_db& bundled_signature_db();

/// True iff some pattern's bytes equal head[offset, offset + len). Patterns
/// whose span exceeds the head count as non-matching.
[[nodiscard]] bool match_magic(std::span<const std::uint8_t> head, const signature_entry& entry);

/// True iff at least one pattern fits inside a head of `head_len` bytes.
[[nodiscard]] bool head_covers_any_pattern(std::size_t head_len, const signature_entry& entry);

struct keyword_set {
    std::set<std::string> content_keywords;
    std::set<std::string> filename_triggers;
};

[[nodiscard]] keyword_set parse_keyword_set(std::string_view json_text);
[[nodiscard]] keyword_set load_keyword_set(const std::optional<std::filesystem::path>& path = {});
[[nodiscard]] const keyword_set& bundled_keyword_set();

struct api_dictionary {
    std::vector<std::string> names; // sorted, unique
};

/// One name per line; '#' starts a comment. Names must be ASCII, no
/// whitespace, at least 4 characters.
[[nodiscard]] api_dictionary parse_api_dictionary(std::string_view text);
[[nodiscard]] api_dictionary load_api_dictionary(const std::optional<std::filesystem::path>& path = {});
[[nodiscard]] const api_dictionary& bundled_api_dictionary();

/// NapierOne benign file types, upper case as published.
[[nodiscard]] std::span<const std::string_view> napierone_file_types();
/// NapierOne ransomware strain names, upper case as published.
[[nodiscard]] std::span<const std::string_view> napierone_strains();
/// Extension used for a NapierOne type name ("7ZIP" -> "7z", "GZIP" -> "gz").
[[nodiscard]] std::string extension_for_file_type(std::string_view type);

[[nodiscard]] bool is_napierone_strain(std::string_view name);
[[nodiscard]] bool is_napierone_file_type(std::string_view name);

[[nodiscard]] std::string ascii_lower(std::string_view s);

} // namespace rwvote

#endif // RWVOTE_SIGNATURES_HPP
