// rwvote - majority-voting ransomware artefact detection
// Offline blob scanning: key material, ransom-note strings and API profiles

#ifndef RWVOTE_CRYPTOSCAN_HPP
#define RWVOTE_CRYPTOSCAN_HPP

#include <rwvote/signatures.hpp>
#include <rwvote/votetests.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace rwvote::cryptoscan {

enum class blob_kind { executable, memory_dump, unknown };

struct blob {
    std::string source;
    std::vector<std::uint8_t> bytes;
    blob_kind kind = blob_kind::unknown;
};

enum class key_algorithm { aes128, aes192, aes256, salsa20, rsa };

[[nodiscard]] std::string_view to_string(key_algorithm a);

struct key_hit {
    key_algorithm algorithm = key_algorithm::aes128;
    std::size_t offset = 0;
    /// Bytes of evidence starting at offset (schedule, state or DER element).
    std::size_t span = 0;
    std::vector<std::uint8_t> key_bytes;
    std::string detail;

    friend bool operator==(const key_hit&, const key_hit&) = default;
};

// ---------------------------------------------------------------------------
// AES

/// Round-key schedule length in bytes for a 16, 24 or 32 byte key.
[[nodiscard]] constexpr std::size_t aes_schedule_bytes(std::size_t key_len) {
    return key_len == 16 ? 176 : key_len == 24 ? 208 : key_len == 32 ? 240 : 0;
}

inline constexpr std::size_t aes_min_blob = 176;

/// FIPS-197 key expansion. Throws invalid_config for other key lengths.
[[nodiscard]] std::vector<std::uint8_t> aes_expand_key(std::span<const std::uint8_t> key);

struct aes_scan_options {
    /// Bit errors tolerated in the expanded remainder. Zero means exact match.
    std::size_t max_bit_errors = 0;
    /// Worker threads; the blob is split into chunks overlapping by 240 bytes.
    unsigned threads = 1;
    bool aes128 = true;
    bool aes192 = true;
    bool aes256 = true;
};

/**
 * Treats every byte offset as a candidate key of 16, 24 and 32 bytes, expands
 * it and reports a hit when the following bytes equal the expanded schedule.
 * Hits are ordered by offset, then key length. Throws blob_too_small below
 * 176 bytes.
 */
[[nodiscard]] std::vector<key_hit> find_aes_key_schedules(std::span<const std::uint8_t> data,
                                                          const aes_scan_options& options = {});

// ---------------------------------------------------------------------------
// Salsa20 and RSA

/// "expand 32-byte k" either contiguous or spread over state words 0, 5, 10, 15.
[[nodiscard]] std::vector<key_hit> find_salsa20_state(std::span<const std::uint8_t> data);

/// DER RSAPrivateKey (version 0 plus at least 8 more INTEGERs) or RSAPublicKey
/// (exactly two INTEGERs, modulus >= 1024 bits). Malformed candidates are skipped.
[[nodiscard]] std::vector<key_hit> find_rsa_der_keys(std::span<const std::uint8_t> data);

// ---------------------------------------------------------------------------
// Strings and API profiles

struct extracted_string {
    std::size_t offset = 0;
    std::string text;

    friend bool operator==(const extracted_string&, const extracted_string&) = default;
};

/// Maximal runs of bytes in 32..126 at least `min_len` long, in offset order.
[[nodiscard]] std::vector<extracted_string> extract_strings(std::span<const std::uint8_t> data,
                                                            std::size_t min_len = 5);

struct api_profile {
    std::size_t total_hits = 0;
    std::size_t blob_size_bytes = 0;
    double hits_per_kb = 0.0;
    std::map<std::string, std::size_t> per_name_counts; // names with count > 0
};

/// Counts, per dictionary name, the extracted strings containing it.
[[nodiscard]] api_profile count_api_strings(std::span<const std::uint8_t> data, const api_dictionary& dict);

struct keyword_cluster {
    std::size_t offset = 0; // first keyword occurrence
    std::size_t end = 0;    // one past the last keyword occurrence
    std::set<std::string> keywords;

    friend bool operator==(const keyword_cluster&, const keyword_cluster&) = default;
};

/// Places where at least two distinct content keywords occur within `window`
/// bytes of each other, merged when they overlap. Case-insensitive, searched
/// within extracted strings.
[[nodiscard]] std::vector<keyword_cluster> scan_ransom_keywords(std::span<const std::uint8_t> data,
                                                                const keyword_set& keywords,
                                                                std::size_t window = 512);

struct crypto_scan_result {
    std::vector<key_hit> aes;
    std::vector<key_hit> salsa20;
    std::vector<key_hit> rsa;

    [[nodiscard]] bool any() const { return !aes.empty() || !salsa20.empty() || !rsa.empty(); }
};

[[nodiscard]] crypto_scan_result scan_crypto(std::span<const std::uint8_t> data, unsigned threads = 1);

/// Malicious iff any key scanner reports a hit.
[[nodiscard]] vote test_crypto_artifacts(std::span<const std::uint8_t> data, unsigned threads = 1);

} // namespace rwvote::cryptoscan

#endif // RWVOTE_CRYPTOSCAN_HPP
