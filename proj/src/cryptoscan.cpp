// rwvote - majority-voting ransomware artefact detection
// Key-schedule carving, DER parsing and string scanning over raw blobs

#include <rwvote/cryptoscan.hpp>

#include <rwvote/error.hpp>

#include <algorithm>
#include <bit>
#include <cstring>
#include <optional>
#include <thread>

namespace rwvote::cryptoscan {

namespace {

constexpr std::array<std::uint8_t, 256> sbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

constexpr std::array<std::uint8_t, 10> rcon = {0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36};

// Produces schedule word `k` (4 bytes) from the preceding words in `w`.
inline void next_schedule_word(std::uint8_t* w, std::size_t k, std::size_t nk) {
    std::uint8_t t[4] = {w[4 * (k - 1)], w[4 * (k - 1) + 1], w[4 * (k - 1) + 2], w[4 * (k - 1) + 3]};
    if (k % nk == 0) {
        const std::uint8_t first = t[0];
        t[0] = static_cast<std::uint8_t>(sbox[t[1]] ^ rcon[k / nk - 1]);
        t[1] = sbox[t[2]];
        t[2] = sbox[t[3]];
        t[3] = sbox[first];
    } else if (nk > 6 && k % nk == 4) {
        for (auto& b : t) b = sbox[b];
    }
    for (int b = 0; b < 4; ++b) {
        w[4 * k + b] = static_cast<std::uint8_t>(w[4 * (k - nk) + b] ^ t[b]);
    }
}

key_algorithm aes_algorithm(std::size_t key_len) {
    return key_len == 16 ? key_algorithm::aes128 : key_len == 24 ? key_algorithm::aes192 : key_algorithm::aes256;
}

// True when data[offset..] holds a key of `key_len` bytes followed by its schedule.
bool schedule_at(std::span<const std::uint8_t> data, std::size_t offset, std::size_t key_len, std::size_t max_bit_errors,
                 std::size_t& bit_errors) {
    const std::size_t sched_len = aes_schedule_bytes(key_len);
    const std::uint8_t* src = data.data() + offset;
    std::uint8_t w[240];
    std::memcpy(w, src, key_len);
    const std::size_t nk = key_len / 4;
    const std::size_t words = sched_len / 4;
    bit_errors = 0;
    for (std::size_t k = nk; k < words; ++k) {
        next_schedule_word(w, k, nk);
        if (max_bit_errors == 0) {
            if (std::memcmp(w + 4 * k, src + 4 * k, 4) != 0) {
                return false;
            }
        } else {
            for (int b = 0; b < 4; ++b) {
                bit_errors += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(w[4 * k + b] ^ src[4 * k + b])));
            }
            if (bit_errors > max_bit_errors) {
                return false;
            }
        }
    }
    return true;
}

void scan_aes_range(std::span<const std::uint8_t> data, std::size_t begin, std::size_t end,
                    const aes_scan_options& options, std::vector<key_hit>& out) {
    const std::array<std::pair<std::size_t, bool>, 3> lengths = {
        std::pair{std::size_t{16}, options.aes128}, std::pair{std::size_t{24}, options.aes192},
        std::pair{std::size_t{32}, options.aes256}};
    for (std::size_t i = begin; i < end; ++i) {
        for (const auto& [key_len, enabled] : lengths) {
            const std::size_t sched_len = aes_schedule_bytes(key_len);
            if (!enabled || i + sched_len > data.size()) {
                continue;
            }
            std::size_t errors = 0;
            if (schedule_at(data, i, key_len, options.max_bit_errors, errors)) {
                key_hit hit;
                hit.algorithm = aes_algorithm(key_len);
                hit.offset = i;
                hit.span = sched_len;
                hit.key_bytes.assign(data.begin() + static_cast<std::ptrdiff_t>(i),
                                     data.begin() + static_cast<std::ptrdiff_t>(i + key_len));
                hit.detail = std::to_string(key_len * 8) + "-bit key schedule";
                if (errors > 0) {
                    hit.detail += ", " + std::to_string(errors) + " bit errors";
                }
                out.push_back(std::move(hit));
            }
        }
    }
}

bool bytes_equal(std::span<const std::uint8_t> data, std::size_t offset, std::string_view text) {
    return offset + text.size() <= data.size() && std::memcmp(data.data() + offset, text.data(), text.size()) == 0;
}

struct tlv {
    std::uint8_t tag = 0;
    std::size_t header = 0;
    std::size_t length = 0;

    [[nodiscard]] std::size_t total() const { return header + length; }
};

// DER tag-length header at `pos` whose content fits before `limit`.
std::optional<tlv> read_tlv(std::span<const std::uint8_t> data, std::size_t pos, std::size_t limit) {
    if (pos + 2 > limit) {
        return std::nullopt;
    }
    tlv t;
    t.tag = data[pos];
    const std::uint8_t first = data[pos + 1];
    if (first < 0x80) {
        t.header = 2;
        t.length = first;
    } else {
        const std::size_t n = first & 0x7F;
        if (n == 0 || n > 4 || pos + 2 + n > limit || data[pos + 2] == 0) {
            return std::nullopt; // indefinite, oversized or non-minimal
        }
        std::size_t len = 0;
        for (std::size_t k = 0; k < n; ++k) {
            len = (len << 8) | data[pos + 2 + k];
        }
        if (len < 0x80) {
            return std::nullopt;
        }
        t.header = 2 + n;
        t.length = len;
    }
    if (pos + t.total() > limit) {
        return std::nullopt;
    }
    return t;
}

std::size_t integer_bits(std::span<const std::uint8_t> data, std::size_t pos, const tlv& t) {
    std::size_t i = pos + t.header;
    const std::size_t end = pos + t.total();
    while (i < end && data[i] == 0) ++i;
    if (i == end) return 0;
    return (end - i - 1) * 8 + static_cast<std::size_t>(std::bit_width(static_cast<unsigned>(data[i])));
}

std::optional<key_hit> rsa_at(std::span<const std::uint8_t> data, std::size_t pos) {
    const auto seq = read_tlv(data, pos, data.size());
    if (!seq || seq->tag != 0x30 || seq->length == 0) {
        return std::nullopt;
    }
    const std::size_t end = pos + seq->total();
    std::vector<std::pair<std::size_t, tlv>> elements;
    for (std::size_t p = pos + seq->header; p < end;) {
        const auto e = read_tlv(data, p, end);
        if (!e || e->length == 0) {
            return std::nullopt;
        }
        elements.emplace_back(p, *e);
        p += e->total();
    }
    std::size_t leading_ints = 0;
    while (leading_ints < elements.size() && elements[leading_ints].second.tag == 0x02) ++leading_ints;

    key_hit hit;
    hit.algorithm = key_algorithm::rsa;
    hit.offset = pos;
    hit.span = seq->total();

    const auto& [p0, e0] = elements.front();
    const bool version_zero = e0.tag == 0x02 && e0.length == 1 && data[p0 + e0.header] == 0;
    if (version_zero && leading_ints >= 9) {
        hit.detail = std::to_string(integer_bits(data, elements[1].first, elements[1].second)) + "-bit, private";
        return hit;
    }
    if (elements.size() == 2 && leading_ints == 2) {
        const std::size_t bits = integer_bits(data, p0, e0);
        if (bits >= 1024) {
            hit.detail = std::to_string(bits) + "-bit, public";
            return hit;
        }
    }
    return std::nullopt;
}

bool is_string_byte(std::uint8_t b) { return b >= 32 && b <= 126; }

} // namespace

std::string_view to_string(key_algorithm a) {
    switch (a) {
    case key_algorithm::aes128: return "AES128";
    case key_algorithm::aes192: return "AES192";
    case key_algorithm::aes256: return "AES256";
    case key_algorithm::salsa20: return "Salsa20";
    case key_algorithm::rsa: return "RSA";
    }
    return "unknown";
}

std::vector<std::uint8_t> aes_expand_key(std::span<const std::uint8_t> key) {
    const std::size_t sched_len = aes_schedule_bytes(key.size());
    if (sched_len == 0) {
        throw error(error_code::invalid_config, "AES key must be 16, 24 or 32 bytes");
    }
    std::vector<std::uint8_t> w(sched_len);
    std::copy(key.begin(), key.end(), w.begin());
    for (std::size_t k = key.size() / 4; k < sched_len / 4; ++k) {
        next_schedule_word(w.data(), k, key.size() / 4);
    }
    return w;
}

std::vector<key_hit> find_aes_key_schedules(std::span<const std::uint8_t> data, const aes_scan_options& options) {
    if (data.size() < aes_min_blob) {
        throw error(error_code::blob_too_small,
                    std::to_string(data.size()) + " bytes, need " + std::to_string(aes_min_blob));
    }
    const std::size_t last_start = data.size() - aes_min_blob + 1;
    const unsigned threads = std::max(1u, options.threads);
    std::vector<key_hit> hits;
    if (threads == 1 || last_start < 65536) {
        scan_aes_range(data, 0, last_start, options, hits);
        return hits;
    }
    // Workers own disjoint ranges of start offsets and read up to 240 bytes
    // past their range, so no hit is seen twice.
    std::vector<std::vector<key_hit>> parts(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (last_start + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = std::min<std::size_t>(t * chunk, last_start);
        const std::size_t e = std::min<std::size_t>(b + chunk, last_start);
        pool.emplace_back([&, t, b, e] { scan_aes_range(data, b, e, options, parts[t]); });
    }
    for (auto& th : pool) th.join();
    for (auto& p : parts) {
        hits.insert(hits.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    return hits;
}

std::vector<key_hit> find_salsa20_state(std::span<const std::uint8_t> data) {
    static constexpr std::string_view sigma = "expand 32-byte k";
    std::vector<key_hit> hits;
    for (std::size_t i = 0; i + 4 <= data.size(); ++i) {
        if (data[i] != 'e') {
            continue;
        }
        if (bytes_equal(data, i, sigma)) {
            hits.push_back({key_algorithm::salsa20, i, sigma.size(), {}, "sigma constant, contiguous"});
        } else if (bytes_equal(data, i, sigma.substr(0, 4)) && bytes_equal(data, i + 20, sigma.substr(4, 4)) &&
                   bytes_equal(data, i + 40, sigma.substr(8, 4)) && bytes_equal(data, i + 60, sigma.substr(12, 4))) {
            key_hit hit{key_algorithm::salsa20, i, 64, {}, "sigma words at state positions 0/5/10/15"};
            hit.key_bytes.assign(data.begin() + static_cast<std::ptrdiff_t>(i + 4),
                                 data.begin() + static_cast<std::ptrdiff_t>(i + 20));
            hit.key_bytes.insert(hit.key_bytes.end(), data.begin() + static_cast<std::ptrdiff_t>(i + 44),
                                 data.begin() + static_cast<std::ptrdiff_t>(i + 60));
            hits.push_back(std::move(hit));
        }
    }
    return hits;
}

std::vector<key_hit> find_rsa_der_keys(std::span<const std::uint8_t> data) {
    std::vector<key_hit> hits;
    for (std::size_t i = 0; i + 2 <= data.size(); ++i) {
        if (data[i] != 0x30) {
            continue;
        }
        if (auto hit = rsa_at(data, i)) {
            hits.push_back(std::move(*hit));
        }
    }
    return hits;
}

std::vector<extracted_string> extract_strings(std::span<const std::uint8_t> data, std::size_t min_len) {
    std::vector<extracted_string> out;
    std::size_t i = 0;
    while (i < data.size()) {
        if (!is_string_byte(data[i])) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < data.size() && is_string_byte(data[i])) ++i;
        if (i - start >= std::max<std::size_t>(min_len, 1)) {
            out.push_back({start, std::string(data.begin() + static_cast<std::ptrdiff_t>(start),
                                              data.begin() + static_cast<std::ptrdiff_t>(i))});
        }
    }
    return out;
}

api_profile count_api_strings(std::span<const std::uint8_t> data, const api_dictionary& dict) {
    api_profile profile;
    profile.blob_size_bytes = data.size();
    for (const auto& s : extract_strings(data)) {
        for (const auto& name : dict.names) {
            if (name.size() <= s.text.size() && s.text.find(name) != std::string::npos) {
                ++profile.per_name_counts[name];
                ++profile.total_hits;
            }
        }
    }
    profile.hits_per_kb =
        data.empty() ? 0.0 : static_cast<double>(profile.total_hits) / (static_cast<double>(data.size()) / 1024.0);
    return profile;
}

std::vector<keyword_cluster> scan_ransom_keywords(std::span<const std::uint8_t> data, const keyword_set& keywords,
                                                  std::size_t window) {
    struct occurrence {
        std::size_t offset;
        std::size_t end;
        const std::string* keyword;
    };
    std::size_t shortest = SIZE_MAX;
    for (const auto& k : keywords.content_keywords) shortest = std::min(shortest, k.size());
    if (shortest == SIZE_MAX) {
        return {};
    }

    std::vector<occurrence> occ;
    for (const auto& s : extract_strings(data, shortest)) {
        const std::string lower = ascii_lower(s.text);
        for (const auto& k : keywords.content_keywords) {
            for (std::size_t p = lower.find(k); p != std::string::npos; p = lower.find(k, p + 1)) {
                occ.push_back({s.offset + p, s.offset + p + k.size(), &k});
            }
        }
    }
    std::sort(occ.begin(), occ.end(), [](const occurrence& a, const occurrence& b) {
        return a.offset != b.offset ? a.offset < b.offset : *a.keyword < *b.keyword;
    });

    std::vector<keyword_cluster> clusters;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        keyword_cluster c{occ[i].offset, occ[i].end, {*occ[i].keyword}};
        for (std::size_t j = i + 1; j < occ.size() && occ[j].offset - occ[i].offset <= window; ++j) {
            c.keywords.insert(*occ[j].keyword);
            c.end = std::max(c.end, occ[j].end);
        }
        if (c.keywords.size() < 2) {
            continue;
        }
        if (!clusters.empty() && c.offset < clusters.back().end) {
            clusters.back().end = std::max(clusters.back().end, c.end);
            clusters.back().keywords.insert(c.keywords.begin(), c.keywords.end());
        } else {
            clusters.push_back(std::move(c));
        }
    }
    return clusters;
}

crypto_scan_result scan_crypto(std::span<const std::uint8_t> data, unsigned threads) {
    crypto_scan_result r;
    if (data.size() >= aes_min_blob) {
        aes_scan_options opts;
        opts.threads = threads;
        r.aes = find_aes_key_schedules(data, opts);
    }
    r.salsa20 = find_salsa20_state(data);
    r.rsa = find_rsa_der_keys(data);
    return r;
}

vote test_crypto_artifacts(std::span<const std::uint8_t> data, unsigned threads) {
    const auto r = scan_crypto(data, threads);
    vote v;
    v.test = test_id::crypto_artifacts;
    const std::size_t total = r.aes.size() + r.salsa20.size() + r.rsa.size();
    v.measured = static_cast<double>(total);
    if (!r.any()) {
        v.result = verdict::benign;
        v.evidence = "no key material found";
        return v;
    }
    std::set<std::string_view> algorithms;
    for (const auto* list : {&r.aes, &r.salsa20, &r.rsa}) {
        for (const auto& h : *list) algorithms.insert(to_string(h.algorithm));
    }
    v.result = verdict::malicious;
    v.evidence = "key material:";
    for (auto a : algorithms) {
        v.evidence += ' ';
        v.evidence += a;
    }
    return v;
}

} // namespace rwvote::cryptoscan
