// rwvote - majority-voting ransomware artefact detection
// File ingestion, labeled corpora and seeded synthetic corpus generation

#ifndef RWVOTE_CORPUS_HPP
#define RWVOTE_CORPUS_HPP

#include <rwvote/signatures.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rwvote {

using timestamp = std::chrono::system_clock::time_point;

/// Suffix segments kept in an extension chain; longer chains keep the last four.
inline constexpr std::size_t max_extension_chain = 4;

/**
 * Extension chain of a base file name: the lowercased dot-separated segments
 * after the stem. Leading dots belong to the stem (".bashrc" has no
 * extension) and empty segments are dropped.
 *
 *   "report.docx"  -> ["docx"]
 *   "a.docx.h8Jx"  -> ["docx", "h8jx"]
 *   "README"       -> []
 */
[[nodiscard]] std::vector<std::string> extension_chain_of(std::string_view name);

/// A file under test. Immutable once built; copies share the content buffer.
class file_sample {
public:
    /// Reads metadata and the head from disk. Throws not_found, not_a_file, io_error.
    static file_sample ingest(const std::filesystem::path& path);

    /// Builds a sample from memory, for tests and blob pipelines.
    static file_sample from_bytes(std::string name, std::vector<std::uint8_t> content,
                                  timestamp created = {}, timestamp modified = {});

    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] const std::vector<std::string>& extension_chain() const { return extension_chain_; }
    [[nodiscard]] std::string last_extension() const {
        return extension_chain_.empty() ? std::string() : extension_chain_.back();
    }
    [[nodiscard]] std::uint64_t size_bytes() const { return size_bytes_; }
    [[nodiscard]] timestamp created_at() const { return created_at_; }
    [[nodiscard]] timestamp modified_at() const { return modified_at_; }
    [[nodiscard]] const std::vector<std::uint8_t>& head() const { return head_; }

    /// Full content; reads the file again for ingested samples.
    [[nodiscard]] std::vector<std::uint8_t> body() const;

    void set_id(std::string id) { id_ = std::move(id); }

private:
    file_sample() = default;

    std::string id_;
    std::filesystem::path path_;
    std::string name_;
    std::vector<std::string> extension_chain_;
    std::uint64_t size_bytes_ = 0;
    timestamp created_at_{};
    timestamp modified_at_{};
    std::vector<std::uint8_t> head_;
    std::shared_ptr<const std::vector<std::uint8_t>> content_;
};

enum class truth { benign, malicious };

[[nodiscard]] std::string_view to_string(truth t);
[[nodiscard]] std::optional<truth> parse_truth(std::string_view s);

struct corpus_label {
    std::string sample_id;
    truth label = truth::benign;
    std::optional<std::string> family;
};

struct labeled_sample {
    file_sample sample;
    corpus_label label;
};

struct manifest_row {
    std::string path; // relative to the corpus root unless absolute
    truth label = truth::benign;
    std::string family;
};

inline constexpr std::string_view manifest_header = "path,truth,family";
inline constexpr std::string_view default_manifest_name = "manifest.csv";

/// Throws manifest_parse_error with the offending line number.
[[nodiscard]] std::vector<manifest_row> parse_manifest(std::string_view csv);
[[nodiscard]] std::vector<manifest_row> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<manifest_row>& rows);

struct load_options {
    /// Explicit manifest. When unset, `<root>/manifest.csv` is used if present.
    std::optional<std::filesystem::path> manifest;
    /// Reject samples whose label cannot be inferred from a known directory name.
    bool strict = false;
};

struct ingest_failure {
    std::filesystem::path path;
    std::string message;
};

struct corpus {
    std::vector<labeled_sample> samples; // sorted by path
    std::vector<ingest_failure> failures;
};

/**
 * Walks `root` recursively. Manifest rows take precedence; remaining files are
 * labeled from their parent directory: a NapierOne strain name (any case)
 * marks the file malicious with that family, anything else is benign with the
 * directory name as family. Throws empty_corpus when nothing was ingested.
 */
[[nodiscard]] corpus load_corpus(const std::filesystem::path& root, const load_options& options = {});

/// Label inferred from the directory layout alone.
[[nodiscard]] corpus_label infer_label(const std::filesystem::path& root, const std::filesystem::path& file,
                                       bool strict);

struct synthetic_spec {
    std::size_t plaintext_benign = 0;
    std::size_t structured_benign = 0;
    std::size_t compressed_like = 0;
    std::size_t encrypted_like = 0;
    std::size_t ransom_notes = 0;
    std::uint64_t seed = 0;
    std::filesystem::path output_root;

    [[nodiscard]] std::size_t total() const {
        return plaintext_benign + structured_benign + compressed_like + encrypted_like + ransom_notes;
    }
};

/// Counts from JSON {"plaintext_benign": n, ...}; seed and output root are
/// taken from the JSON only when present. Throws invalid_spec.
[[nodiscard]] synthetic_spec synthetic_spec_from_json(std::string_view json_text);

/// The desk-scale evaluation corpus: 500/500/100/500/100, seed 42.
[[nodiscard]] synthetic_spec default_synthetic_spec(std::filesystem::path output_root);

/**
 * Writes one subdirectory per class plus `manifest.csv` under output_root and
 * returns the manifest rows. Identical (spec, seed) pairs produce
 * byte-identical trees. Throws invalid_spec or io_error.
 */
std::vector<manifest_row> generate_synthetic_corpus(const synthetic_spec& spec);

/// The bundled word list used for English-like text.
[[nodiscard]] const std::vector<std::string>& bundled_word_list();

/// mt19937_64 with distribution code that is identical on every platform.
class deterministic_rng {
public:
    explicit deterministic_rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [lo, hi], by rejection sampling.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    void fill(std::span<std::uint8_t> out);
    [[nodiscard]] std::vector<std::uint8_t> bytes(std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// Lowercase word stream with sentence punctuation and line breaks, exactly
/// `size` bytes of printable ASCII.
[[nodiscard]] std::string english_like_text(deterministic_rng& rng, std::size_t size);

} // namespace rwvote

#endif // RWVOTE_CORPUS_HPP
