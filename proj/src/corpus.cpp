// rwvote - majority-voting ransomware artefact detection
// File ingestion, corpus loading and synthetic corpus generation

#include <rwvote/corpus.hpp>

#include <rwvote/error.hpp>

#include "bundled_assets.hpp"
#include "io_util.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <sys/stat.h>
#include <fcntl.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace rwvote {

namespace {

timestamp from_statx(const struct statx_timestamp& ts) {
    using namespace std::chrono;
    return timestamp(duration_cast<system_clock::duration>(seconds(ts.tv_sec) + nanoseconds(ts.tv_nsec)));
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return std::string(s);
}

std::string generic_relative(const fs::path& root, const fs::path& file) {
    return file.lexically_relative(root).generic_string();
}

} // namespace

std::vector<std::string> extension_chain_of(std::string_view name) {
    std::size_t stem_end = 0;
    while (stem_end < name.size() && name[stem_end] == '.') {
        ++stem_end;
    }
    const std::size_t first_dot = name.find('.', stem_end);
    std::vector<std::string> chain;
    if (first_dot == std::string_view::npos) {
        return chain;
    }
    std::size_t pos = first_dot + 1;
    while (pos <= name.size()) {
        const std::size_t next = std::min(name.find('.', pos), name.size());
        if (next > pos) {
            chain.push_back(ascii_lower(name.substr(pos, next - pos)));
        }
        pos = next + 1;
    }
    if (chain.size() > max_extension_chain) {
        chain.erase(chain.begin(), chain.end() - static_cast<std::ptrdiff_t>(max_extension_chain));
    }
    return chain;
}

file_sample file_sample::ingest(const fs::path& path) {
    std::error_code ec;
    const auto status = fs::status(path, ec);
    if (ec || !fs::exists(status)) {
        throw error(error_code::not_found, path.string());
    }
    if (!fs::is_regular_file(status)) {
        throw error(error_code::not_a_file, path.string());
    }

    struct statx stx {};
    if (::statx(AT_FDCWD, path.c_str(), AT_STATX_SYNC_AS_STAT, STATX_BASIC_STATS | STATX_BTIME, &stx) != 0) {
        throw error(error_code::io_error, "stat failed: " + path.string());
    }

    file_sample s;
    s.path_ = path;
    s.id_ = path.generic_string();
    s.name_ = path.filename().string();
    s.extension_chain_ = extension_chain_of(s.name_);
    s.modified_at_ = from_statx(stx.stx_mtime);
    // Filesystems without birth time fall back to the modification time.
    s.created_at_ = (stx.stx_mask & STATX_BTIME) ? from_statx(stx.stx_btime) : s.modified_at_;

    s.head_ = detail::read_binary_file(path, head_size);
    s.size_bytes_ = stx.stx_size;
    if (s.head_.size() != std::min<std::uint64_t>(s.size_bytes_, head_size)) {
        throw error(error_code::io_error, "short read: " + path.string());
    }
    return s;
}

file_sample file_sample::from_bytes(std::string name, std::vector<std::uint8_t> content, timestamp created,
                                    timestamp modified) {
    file_sample s;
    s.id_ = name;
    s.path_ = name;
    s.name_ = std::move(name);
    s.extension_chain_ = extension_chain_of(s.name_);
    s.size_bytes_ = content.size();
    s.created_at_ = created;
    s.modified_at_ = modified;
    s.head_.assign(content.begin(), content.begin() + static_cast<std::ptrdiff_t>(std::min(content.size(), head_size)));
    s.content_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(content));
    return s;
}

std::vector<std::uint8_t> file_sample::body() const {
    if (content_) {
        return *content_;
    }
    return detail::read_binary_file(path_);
}

std::string_view to_string(truth t) { return t == truth::benign ? "Benign" : "Malicious"; }

std::optional<truth> parse_truth(std::string_view s) {
    const std::string lower = ascii_lower(s);
    if (lower == "benign") return truth::benign;
    if (lower == "malicious") return truth::malicious;
    return std::nullopt;
}

std::vector<manifest_row> parse_manifest(std::string_view csv) {
    std::vector<manifest_row> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < csv.size()) {
        const std::size_t nl = std::min(csv.find('\n', pos), csv.size());
        const std::string line = trim(csv.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (ascii_lower(line) != manifest_header) {
                throw error(error_code::manifest_parse_error,
                            "line " + std::to_string(line_no) + ": expected header '" + std::string(manifest_header) + "'");
            }
            continue;
        }
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            throw error(error_code::manifest_parse_error, "line " + std::to_string(line_no) + ": expected 3 fields");
        }
        manifest_row row;
        row.path = trim(std::string_view(line).substr(0, c1));
        const auto t = parse_truth(trim(std::string_view(line).substr(c1 + 1, c2 - c1 - 1)));
        row.family = ascii_lower(trim(std::string_view(line).substr(c2 + 1)));
        if (row.path.empty() || !t) {
            throw error(error_code::manifest_parse_error,
                        "line " + std::to_string(line_no) + ": bad path or truth value");
        }
        row.label = *t;
        rows.push_back(std::move(row));
    }
    if (!header_seen) {
        throw error(error_code::manifest_parse_error, "line 1: missing header");
    }
    return rows;
}

std::vector<manifest_row> read_manifest(const fs::path& path) {
    return parse_manifest(detail::read_text_file(path));
}

void write_manifest(const fs::path& path, const std::vector<manifest_row>& rows) {
    std::string out(manifest_header);
    out += '\n';
    for (const auto& r : rows) {
        out += r.path;
        out += ',';
        out += to_string(r.label);
        out += ',';
        out += r.family;
        out += '\n';
    }
    detail::write_binary_file(path, out.data(), out.size());
}

corpus_label infer_label(const fs::path& root, const fs::path& file, bool strict) {
    corpus_label label;
    label.sample_id = generic_relative(root, file);
    const fs::path parent = file.parent_path();
    const bool at_root = parent.lexically_normal() == root.lexically_normal();
    const std::string dir = at_root ? std::string() : parent.filename().string();

    if (!dir.empty() && is_napierone_strain(dir)) {
        label.label = truth::malicious;
        label.family = ascii_lower(dir);
        return label;
    }
    if (strict && (dir.empty() || !is_napierone_file_type(dir))) {
        throw error(error_code::unlabelable_path, label.sample_id);
    }
    label.label = truth::benign;
    if (!dir.empty()) {
        label.family = ascii_lower(dir);
    }
    return label;
}

corpus load_corpus(const fs::path& root, const load_options& options) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw error(error_code::not_found, "corpus root is not a directory: " + root.string());
    }

    std::optional<fs::path> manifest_path = options.manifest;
    if (!manifest_path && fs::is_regular_file(root / default_manifest_name, ec)) {
        manifest_path = root / default_manifest_name;
    }
    std::map<std::string, manifest_row> by_path;
    if (manifest_path) {
        for (auto& row : read_manifest(*manifest_path)) {
            const fs::path p = fs::path(row.path).is_absolute() ? fs::path(row.path) : root / row.path;
            by_path[p.lexically_normal().generic_string()] = std::move(row);
        }
    }

    std::vector<fs::path> files;
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) {
            break;
        }
        if (it->is_regular_file(ec)) {
            const fs::path p = it->path().lexically_normal();
            if (manifest_path && fs::equivalent(p, *manifest_path, ec)) {
                continue;
            }
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

    corpus out;
    std::set<std::string> seen;
    for (const auto& f : files) {
        const std::string key = f.generic_string();
        seen.insert(key);
        try {
            corpus_label label;
            if (const auto it = by_path.find(key); it != by_path.end()) {
                label.sample_id = generic_relative(root, f);
                label.label = it->second.label;
                if (!it->second.family.empty()) {
                    label.family = it->second.family;
                }
            } else {
                label = infer_label(root, f, options.strict);
            }
            file_sample s = file_sample::ingest(f);
            s.set_id(label.sample_id);
            out.samples.push_back({std::move(s), std::move(label)});
        } catch (const error& e) {
            if (e.code() == error_code::unlabelable_path) {
                throw;
            }
            out.failures.push_back({f, e.what()});
        }
    }
    for (const auto& [key, row] : by_path) {
        if (!seen.count(key)) {
            out.failures.push_back({key, "NotFound: listed in manifest"});
        }
    }
    if (out.samples.empty()) {
        throw error(error_code::empty_corpus, root.string());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

std::uint64_t deterministic_rng::uniform(std::uint64_t lo, std::uint64_t hi) {
    if (hi <= lo) {
        return lo;
    }
    const std::uint64_t range = hi - lo;
    if (range == UINT64_MAX) {
        return next();
    }
    const std::uint64_t span = range + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return lo + x % span;
}

void deterministic_rng::fill(std::span<std::uint8_t> out) {
    std::size_t i = 0;
    while (i < out.size()) {
        std::uint64_t w = next();
        for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
            out[i] = static_cast<std::uint8_t>(w >> (8 * k));
        }
    }
}

std::vector<std::uint8_t> deterministic_rng::bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    fill(out);
    return out;
}

const std::vector<std::string>& bundled_word_list() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> out;
        std::istringstream in{std::string(assets::wordlist_txt())};
        std::string w;
        while (std::getline(in, w)) {
            if (!w.empty()) out.push_back(w);
        }
        return out;
    }();
    return words;
}

std::string english_like_text(deterministic_rng& rng, std::size_t size) {
    const auto& words = bundled_word_list();
    std::string out;
    out.reserve(size + 32);
    std::size_t sentence_left = rng.uniform(6, 16);
    std::size_t line_left = rng.uniform(8, 14);
    bool capitalize = true;
    while (out.size() < size) {
        std::string w = words[rng.uniform(0, words.size() - 1)];
        if (capitalize) {
            w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
            capitalize = false;
        }
        out += w;
        if (--sentence_left == 0) {
            out += rng.uniform(0, 5) == 0 ? ',' : '.';
            capitalize = out.back() == '.';
            sentence_left = rng.uniform(6, 16);
        }
        if (--line_left == 0) {
            out += '\n';
            line_left = rng.uniform(8, 14);
        } else {
            out += ' ';
        }
    }
    out.resize(size);
    return out;
}

namespace {

constexpr std::array<std::string_view, 5> class_dirs = {
    "plaintext_benign", "structured_benign", "compressed_like", "encrypted_like", "ransom_notes",
};

std::string alnum_string(deterministic_rng& rng, std::size_t n) {
    static constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        s += alphabet[rng.uniform(0, alphabet.size() - 1)];
    }
    return s;
}

std::vector<std::uint8_t> to_bytes(std::string_view s) { return {s.begin(), s.end()}; }

std::vector<std::uint8_t> deflate_bytes(std::span<const std::uint8_t> input, int window_bits) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, window_bits, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw error(error_code::io_error, "deflateInit2 failed");
    }
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(input.size())) + 64);
    zs.next_in = const_cast<Bytef*>(input.data());
    zs.avail_in = static_cast<uInt>(input.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) {
        throw error(error_code::io_error, "deflate failed");
    }
    out.resize(produced);
    return out;
}

void put_le(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

// Single-entry ZIP archive with a DEFLATE member and a fixed 1980-01-01 timestamp.
std::vector<std::uint8_t> make_zip(std::string_view member, std::span<const std::uint8_t> data) {
    const auto packed = deflate_bytes(data, -MAX_WBITS);
    const auto crc = static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
    const auto csize = static_cast<std::uint32_t>(packed.size());
    const auto usize = static_cast<std::uint32_t>(data.size());
    const auto nlen = static_cast<std::uint32_t>(member.size());

    std::vector<std::uint8_t> z;
    put_le(z, 0x04034b50, 4);
    put_le(z, 20, 2);     // version needed
    put_le(z, 0, 2);      // flags
    put_le(z, 8, 2);      // deflate
    put_le(z, 0, 2);      // time
    put_le(z, 0x21, 2);   // date
    put_le(z, crc, 4);
    put_le(z, csize, 4);
    put_le(z, usize, 4);
    put_le(z, nlen, 2);
    put_le(z, 0, 2);
    z.insert(z.end(), member.begin(), member.end());
    z.insert(z.end(), packed.begin(), packed.end());

    const auto cd_offset = static_cast<std::uint32_t>(z.size());
    put_le(z, 0x02014b50, 4);
    put_le(z, 20, 2);     // version made by
    put_le(z, 20, 2);
    put_le(z, 0, 2);
    put_le(z, 8, 2);
    put_le(z, 0, 2);
    put_le(z, 0x21, 2);
    put_le(z, crc, 4);
    put_le(z, csize, 4);
    put_le(z, usize, 4);
    put_le(z, nlen, 2);
    put_le(z, 0, 2);      // extra
    put_le(z, 0, 2);      // comment
    put_le(z, 0, 2);      // disk
    put_le(z, 0, 2);      // internal attrs
    put_le(z, 0, 4);      // external attrs
    put_le(z, 0, 4);      // local header offset
    z.insert(z.end(), member.begin(), member.end());
    const auto cd_size = static_cast<std::uint32_t>(z.size()) - cd_offset;

    put_le(z, 0x06054b50, 4);
    put_le(z, 0, 2);
    put_le(z, 0, 2);
    put_le(z, 1, 2);
    put_le(z, 1, 2);
    put_le(z, cd_size, 4);
    put_le(z, cd_offset, 4);
    put_le(z, 0, 2);
    return z;
}

// Low-entropy filler: text, zero runs, small-alphabet noise and counters.
std::vector<std::uint8_t> structured_payload(deterministic_rng& rng, std::size_t size) {
    std::vector<std::uint8_t> out;
    out.reserve(size);
    while (out.size() < size) {
        const std::size_t len = std::min<std::size_t>(rng.uniform(64, 512), size - out.size());
        switch (rng.uniform(0, 3)) {
        case 0: {
            const auto text = english_like_text(rng, len);
            out.insert(out.end(), text.begin(), text.end());
            break;
        }
        case 1:
            out.insert(out.end(), len, 0);
            break;
        case 2:
            for (std::size_t i = 0; i < len; ++i) out.push_back(static_cast<std::uint8_t>(rng.uniform(0, 15)));
            break;
        default: {
            const auto start = static_cast<std::uint8_t>(rng.uniform(0, 255));
            for (std::size_t i = 0; i < len; ++i) out.push_back(static_cast<std::uint8_t>(start + i / 4));
            break;
        }
        }
    }
    return out;
}

constexpr std::array<std::string_view, 10> note_sentences = {
    "All of your files have been encrypted with a strong algorithm.",
    "Your documents, photos and databases are encrypted and cannot be opened.",
    "To recover your files you must pay the ransom in bitcoin.",
    "Send the payment to the wallet address shown below.",
    "Install the Tor browser and open our onion page for instructions.",
    "Do not try to recover the data yourself or it will be lost forever.",
    "The price doubles after 72 hours, so act quickly.",
    "We can decrypt one file for free as proof.",
    "Contact us through the onion chat with your personal ID.",
    "Any attempt to remove this software will destroy the decryption key.",
};

constexpr std::array<std::string_view, 6> note_names = {
    "README_DECRYPT", "HOW_TO_RESTORE_FILES", "HELPME", "DECRYPT_INSTRUCTIONS", "readme", "RESTORE_MY_FILES",
};

std::string ransom_note_text(deterministic_rng& rng) {
    std::string note = "!!! ATTENTION !!!\n\n";
    // First two sentences always carry at least two distinct keywords.
    note += note_sentences[0];
    note += '\n';
    note += note_sentences[2];
    note += '\n';
    const std::size_t extra = rng.uniform(2, 6);
    for (std::size_t i = 0; i < extra; ++i) {
        note += note_sentences[rng.uniform(1, note_sentences.size() - 1)];
        note += '\n';
    }
    static constexpr std::string_view hex = "0123456789ABCDEF";
    note += "\nYour personal ID: ";
    for (int i = 0; i < 32; ++i) note += hex[rng.uniform(0, 15)];
    note += "\nWallet: bc1q";
    for (int i = 0; i < 38; ++i) note += static_cast<char>('a' + rng.uniform(0, 25));
    note += '\n';
    if (note.size() > 1024) {
        note.resize(1024);
    }
    return note;
}

} // namespace

synthetic_spec synthetic_spec_from_json(std::string_view json_text) {
    synthetic_spec spec;
    try {
        const auto j = nlohmann::json::parse(json_text);
        auto count = [&](const char* key, std::size_t& dst) {
            if (!j.contains(key)) return;
            const auto v = j.at(key).get<long long>();
            if (v < 0) throw error(error_code::invalid_spec, std::string(key) + " must be >= 0");
            dst = static_cast<std::size_t>(v);
        };
        count("plaintext_benign", spec.plaintext_benign);
        count("structured_benign", spec.structured_benign);
        count("compressed_like", spec.compressed_like);
        count("encrypted_like", spec.encrypted_like);
        count("ransom_notes", spec.ransom_notes);
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_root")) spec.output_root = j.at("output_root").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw error(error_code::invalid_spec, e.what());
    }
    return spec;
}

synthetic_spec default_synthetic_spec(fs::path output_root) {
    synthetic_spec spec;
    spec.plaintext_benign = 500;
    spec.structured_benign = 500;
    spec.compressed_like = 100;
    spec.encrypted_like = 500;
    spec.ransom_notes = 100;
    spec.seed = 42;
    spec.output_root = std::move(output_root);
    return spec;
}

std::vector<manifest_row> generate_synthetic_corpus(const synthetic_spec& spec) {
    if (spec.output_root.empty()) {
        throw error(error_code::invalid_spec, "output_root is empty");
    }
    std::error_code ec;
    fs::create_directories(spec.output_root, ec);
    if (ec) {
        throw error(error_code::io_error, "cannot create " + spec.output_root.string() + ": " + ec.message());
    }
    for (auto dir : class_dirs) {
        fs::create_directories(spec.output_root / dir, ec);
        if (ec) {
            throw error(error_code::io_error, "cannot create class directory: " + ec.message());
        }
    }

    const auto& db = bundled_signature_db();
    const auto& words = bundled_word_list();
    std::vector<const signature_entry*> magic_types;
    std::vector<std::string> known_exts;
    for (const auto& e : db.entries()) {
        known_exts.push_back(e.extension);
        if (e.has_magic()) {
            magic_types.push_back(&e);
        }
    }

    std::vector<manifest_row> rows;
    auto emit = [&](std::string_view cls, const std::string& name, std::span<const std::uint8_t> data, truth t) {
        const std::string rel = std::string(cls) + "/" + name;
        detail::write_binary_file(spec.output_root / rel, data.data(), data.size());
        rows.push_back({rel, t, std::string(cls)});
    };

    // Each class draws from its own stream so changing one count leaves the
    // other classes' bytes untouched.
    auto class_rng = [&](std::uint64_t k) { return deterministic_rng(spec.seed * 0x9E3779B97F4A7C15ULL + k); };

    {
        auto rng = class_rng(1);
        for (std::size_t n = 0; n < spec.plaintext_benign; ++n) {
            const auto text = english_like_text(rng, rng.uniform(1024, 65536));
            emit(class_dirs[0], "notes_" + std::to_string(n) + ".txt", to_bytes(text), truth::benign);
        }
    }
    {
        auto rng = class_rng(2);
        for (std::size_t n = 0; n < spec.structured_benign; ++n) {
            const signature_entry& type = *magic_types[rng.uniform(0, magic_types.size() - 1)];
            const magic_pattern& pat = type.patterns[rng.uniform(0, type.patterns.size() - 1)];
            auto data = structured_payload(rng, std::max<std::size_t>(rng.uniform(2048, 32768), pat.end()));
            std::fill(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(pat.offset), 0);
            std::copy(pat.bytes.begin(), pat.bytes.end(), data.begin() + static_cast<std::ptrdiff_t>(pat.offset));
            const std::string name = words[rng.uniform(0, words.size() - 1)] + "_" + std::to_string(n) + "." + type.extension;
            emit(class_dirs[1], name, data, truth::benign);
        }
    }
    {
        auto rng = class_rng(3);
        for (std::size_t n = 0; n < spec.compressed_like; ++n) {
            const auto text = english_like_text(rng, rng.uniform(4096, 65536));
            const auto raw = to_bytes(text);
            if (rng.uniform(0, 1) == 0) {
                emit(class_dirs[2], "archive_" + std::to_string(n) + ".gz", deflate_bytes(raw, MAX_WBITS + 16),
                     truth::benign);
            } else {
                emit(class_dirs[2], "bundle_" + std::to_string(n) + ".zip", make_zip("document.txt", raw),
                     truth::benign);
            }
        }
    }
    {
        auto rng = class_rng(4);
        std::set<std::string> used;
        for (std::size_t n = 0; n < spec.encrypted_like; ++n) {
            std::string name;
            do {
                name = words[rng.uniform(0, words.size() - 1)] + "." + known_exts[rng.uniform(0, known_exts.size() - 1)] +
                       "." + alnum_string(rng, rng.uniform(6, 20));
            } while (!used.insert(ascii_lower(name)).second);
            emit(class_dirs[3], name, rng.bytes(rng.uniform(4096, 32768)), truth::malicious);
        }
    }
    {
        auto rng = class_rng(5);
        for (std::size_t n = 0; n < spec.ransom_notes; ++n) {
            const std::string name =
                std::string(note_names[rng.uniform(0, note_names.size() - 1)]) + "_" + std::to_string(n) + ".txt";
            emit(class_dirs[4], name, to_bytes(ransom_note_text(rng)), truth::malicious);
        }
    }

    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    write_manifest(spec.output_root / default_manifest_name, rows);
    return rows;
}

} // namespace rwvote
