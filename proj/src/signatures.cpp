// rwvote - majority-voting ransomware artefact detection
// Signature database, keyword sets and API dictionary loading

#include <rwvote/signatures.hpp>

#include <rwvote/error.hpp>

#include "bundled_assets.hpp"
#include "io_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>

namespace rwvote {

namespace {

constexpr std::array<std::string_view, 41> file_types = {
    "7ZIP", "APK",  "BIN",  "BMP",  "CSS",  "CSV",  "DLL", "DOC",  "DOCX", "DWG", "ELF",
    "EPS",  "EPUB", "EXE",  "GIF",  "GZIP", "HTML", "ICS", "JS",   "JPG",  "JSON", "MKV",
    "MP3",  "MP4",  "ODS",  "OXPS", "PDF",  "PNG",  "PS",  "PPT",  "PPTX", "RAND", "SVG",
    "RAR",  "TIF",  "TXT",  "WEBP", "XLS",  "XLSX", "XML", "ZIP",
};

constexpr std::array<std::string_view, 31> strains = {
    "AVOSLOCKER", "BADRABBIT",   "BLACKBASTA",   "BLACKCAT",   "BLACKMATTER", "CERBER",
    "CHIMERA",    "CLOP",        "CONTI",        "CRYPTOLOCKER", "CUBA",      "DARKSIDE",
    "DHARMA",     "GANDCRAB",    "HELLOKITTY",   "JIGSAW",     "LOCKBIT",     "LORENZ",
    "MAZE",       "MEDUSALOCKER", "NETWALKER",   "NOTPETYA",   "PHOBOS",      "RAGNAR",
    "RANSOMEX",   "RYUK",        "SODINOKIBI",   "SUNCRYPT",   "TESLACRYPT",  "WANNACRY",
    "WASTEDLOCKER",
};

bool contains_ci(std::span<const std::string_view> list, std::string_view name) {
    const std::string lower = ascii_lower(name);
    return std::any_of(list.begin(), list.end(),
                       [&](std::string_view item) { return ascii_lower(item) == lower; });
}

std::vector<std::uint8_t> parse_hex(std::string_view hex, const std::string& where) {
    if (hex.empty() || hex.size() % 2 != 0) {
        throw error(error_code::parse_error, where + ": hex must be a non-empty even-length string");
    }
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw error(error_code::parse_error, where + ": hex must be uppercase 0-9A-F");
    };
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
    }
    return out;
}

} // namespace

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

signature_db::signature_db(std::vector<signature_entry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        const std::string where = "entry " + std::to_string(i) + " (" + e.extension + ")";
        if (e.extension.empty() || e.extension != ascii_lower(e.extension) ||
            e.extension.find('.') != std::string::npos) {
            throw error(error_code::parse_error, where + ": extension must be lowercase without dots");
        }
        if (e.plain_text && !e.patterns.empty()) {
            throw error(error_code::parse_error, where + ": plain-text entries take no patterns");
        }
        for (const auto& p : e.patterns) {
            if (p.bytes.empty() || p.end() > head_size) {
                throw error(error_code::parse_error, where + ": pattern must lie within the 4096-byte head");
            }
        }
        if (!index_.emplace(e.extension, i).second) {
            throw error(error_code::duplicate_extension, where);
        }
    }
}

const signature_entry* signature_db::lookup(std::string_view ext) const {
    if (ext.empty()) {
        return nullptr;
    }
    const auto it = index_.find(ascii_lower(ext));
    return it == index_.end() ? nullptr : &entries_[it->second];
}

signature_db parse_signature_db(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(error_code::parse_error, std::string("signature db: ") + e.what());
    }
    if (!doc.is_array()) {
        throw error(error_code::parse_error, "signature db must be a JSON array");
    }
    std::vector<signature_entry> entries;
    entries.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string where = "entry " + std::to_string(i);
        try {
            const auto& item = doc[i];
            signature_entry e;
            e.extension = item.at("extension").get<std::string>();
            e.plain_text = item.at("plain_text").get<bool>();
            for (const auto& p : item.at("patterns")) {
                magic_pattern mp;
                mp.offset = p.at("offset").get<std::size_t>();
                mp.bytes = parse_hex(p.at("hex").get<std::string>(), where);
                e.patterns.push_back(std::move(mp));
            }
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw error(error_code::parse_error, where + ": " + ex.what());
        }
    }
    return signature_db(std::move(entries));
}

signature_db load_signature_db(const std::optional<std::filesystem::path>& path) {
    if (!path) {
        return parse_signature_db(assets::signatures_json());
    }
    return parse_signature_db(detail::read_text_file(*path));
}

const signature_db& bundled_signature_db() {
    static const signature_db db = load_signature_db();
    return db;
}

bool match_magic(std::span<const std::uint8_t> head, const signature_entry& entry) {
    return std::any_of(entry.patterns.begin(), entry.patterns.end(), [&](const magic_pattern& p) {
        return p.end() <= head.size() &&
               std::equal(p.bytes.begin(), p.bytes.end(), head.begin() + static_cast<std::ptrdiff_t>(p.offset));
    });
}

bool head_covers_any_pattern(std::size_t head_len, const signature_entry& entry) {
    return std::any_of(entry.patterns.begin(), entry.patterns.end(),
                       [&](const magic_pattern& p) { return p.end() <= head_len; });
}

keyword_set parse_keyword_set(std::string_view json_text) {
    keyword_set ks;
    try {
        const auto doc = nlohmann::json::parse(json_text);
        for (const auto& k : doc.at("content_keywords")) {
            ks.content_keywords.insert(ascii_lower(k.get<std::string>()));
        }
        for (const auto& k : doc.at("filename_triggers")) {
            ks.filename_triggers.insert(ascii_lower(k.get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(error_code::parse_error, std::string("keywords: ") + e.what());
    }
    if (ks.content_keywords.count("") || ks.filename_triggers.count("")) {
        throw error(error_code::parse_error, "keywords: empty keyword");
    }
    return ks;
}

keyword_set load_keyword_set(const std::optional<std::filesystem::path>& path) {
    if (!path) {
        return parse_keyword_set(assets::keywords_json());
    }
    return parse_keyword_set(detail::read_text_file(*path));
}

const keyword_set& bundled_keyword_set() {
    static const keyword_set ks = load_keyword_set();
    return ks;
}

api_dictionary parse_api_dictionary(std::string_view text) {
    std::set<std::string> names;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
        if (line.empty()) {
            continue;
        }
        const bool ok = line.size() >= 4 && std::all_of(line.begin(), line.end(), [](char c) {
                            const auto u = static_cast<unsigned char>(c);
                            return u > 0x20 && u < 0x7F;
                        });
        if (!ok) {
            throw error(error_code::parse_error,
                        "api dictionary line " + std::to_string(line_no) + ": invalid name '" + std::string(line) + "'");
        }
        names.emplace(line);
    }
    return api_dictionary{{names.begin(), names.end()}};
}

api_dictionary load_api_dictionary(const std::optional<std::filesystem::path>& path) {
    if (!path) {
        return parse_api_dictionary(assets::api_names_txt());
    }
    return parse_api_dictionary(detail::read_text_file(*path));
}

const api_dictionary& bundled_api_dictionary() {
    static const api_dictionary dict = load_api_dictionary();
    return dict;
}

std::span<const std::string_view> napierone_file_types() { return file_types; }
std::span<const std::string_view> napierone_strains() { return strains; }

bool is_napierone_strain(std::string_view name) { return contains_ci(strains, name); }
bool is_napierone_file_type(std::string_view name) { return contains_ci(file_types, name); }

std::string extension_for_file_type(std::string_view type) {
    const std::string lower = ascii_lower(type);
    if (lower == "7zip") return "7z";
    if (lower == "gzip") return "gz";
    return lower;
}

} // namespace rwvote
