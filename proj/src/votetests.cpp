// rwvote - majority-voting ransomware artefact detection
// Discrete file, file-name and executable tests

#include <rwvote/votetests.hpp>

#include <rwvote/error.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace rwvote {

namespace {

constexpr std::array<std::string_view, 10> test_names = {
    "bitbyte",      "crypto_artifacts", "extension_entropy", "file_age", "file_entropy",
    "filename_entropy", "known_extension", "magic_number", "printable", "ransom_note",
};

vote make_vote(test_id id, verdict v, std::optional<double> measured, std::string evidence) {
    return vote{id, v, measured, std::move(evidence)};
}

vote abstain(test_id id, std::string reason) { return make_vote(id, verdict::abstain, std::nullopt, std::move(reason)); }

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool is_printable_byte(std::uint8_t b) { return (b >= 32 && b <= 126) || (b >= 9 && b <= 13); }

double parse_double(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw error(error_code::invalid_config, std::string(key) + ": not a number '" + std::string(value) + "'");
    }
    return out;
}

std::size_t parse_size(std::string_view key, std::string_view value) {
    std::size_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw error(error_code::invalid_config, std::string(key) + ": not an integer '" + std::string(value) + "'");
    }
    return out;
}

std::set<test_id> parse_test_list(std::string_view value) {
    std::set<test_id> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const std::size_t next = std::min(value.find(',', pos), value.size());
        const std::string_view item = value.substr(pos, next - pos);
        if (!item.empty()) {
            const auto id = parse_test_id(item);
            if (!id) {
                throw error(error_code::invalid_config, "unknown test '" + std::string(item) + "'");
            }
            out.insert(*id);
        }
        pos = next + 1;
    }
    return out;
}

} // namespace

std::string_view to_string(test_id id) { return test_names[static_cast<std::size_t>(id)]; }

std::optional<test_id> parse_test_id(std::string_view s) {
    for (std::size_t i = 0; i < test_names.size(); ++i) {
        if (test_names[i] == s) {
            return static_cast<test_id>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(verdict v) {
    switch (v) {
    case verdict::benign: return "Benign";
    case verdict::malicious: return "Malicious";
    case verdict::abstain: return "Abstain";
    }
    return "Abstain";
}

void detection_config::validate() const {
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0)) {
            throw error(error_code::invalid_config, std::string(name) + " must be > 0");
        }
    };
    positive("printable_min", printable_min);
    positive("chi_p_threshold", chi_p_threshold);
    positive("bitbyte_threshold", bitbyte_threshold);
    positive("name_entropy_max_bits", name_entropy_max_bits);
    positive("ext_entropy_max_bits", ext_entropy_max_bits);
    positive("ransom_note_max_bytes", static_cast<double>(ransom_note_max_bytes));
    positive("min_age_seconds", min_age_seconds);
    positive("chi_min_bytes", static_cast<double>(chi_min_bytes));
    if (printable_min > 1.0) {
        throw error(error_code::invalid_config, "printable_min must lie in (0, 1]");
    }
}

void to_json(nlohmann::json& j, const detection_config& cfg) {
    std::vector<std::string> enabled;
    for (auto id : cfg.enabled_tests) {
        enabled.emplace_back(to_string(id));
    }
    j = nlohmann::json{
        {"printable_min", cfg.printable_min},
        {"chi_p_threshold", cfg.chi_p_threshold},
        {"bitbyte_threshold", cfg.bitbyte_threshold},
        {"name_entropy_max_bits", cfg.name_entropy_max_bits},
        {"ext_entropy_max_bits", cfg.ext_entropy_max_bits},
        {"ransom_note_max_bytes", cfg.ransom_note_max_bytes},
        {"min_age_seconds", cfg.min_age_seconds},
        {"chi_min_bytes", cfg.chi_min_bytes},
        {"chi_whole_file", cfg.chi_whole_file},
        {"keywords",
         {{"content_keywords", cfg.keywords.content_keywords}, {"filename_triggers", cfg.keywords.filename_triggers}}},
        {"enabled_tests", enabled},
    };
}

void from_json(const nlohmann::json& j, detection_config& cfg) {
    try {
        auto get = [&](const char* key, auto& dst) {
            if (j.contains(key)) j.at(key).get_to(dst);
        };
        get("printable_min", cfg.printable_min);
        get("chi_p_threshold", cfg.chi_p_threshold);
        get("bitbyte_threshold", cfg.bitbyte_threshold);
        get("name_entropy_max_bits", cfg.name_entropy_max_bits);
        get("ext_entropy_max_bits", cfg.ext_entropy_max_bits);
        get("ransom_note_max_bytes", cfg.ransom_note_max_bytes);
        get("min_age_seconds", cfg.min_age_seconds);
        get("chi_min_bytes", cfg.chi_min_bytes);
        get("chi_whole_file", cfg.chi_whole_file);
        if (j.contains("keywords")) {
            cfg.keywords = parse_keyword_set(j.at("keywords").dump());
        }
        if (j.contains("enabled_tests")) {
            cfg.enabled_tests.clear();
            for (const auto& item : j.at("enabled_tests")) {
                const auto id = parse_test_id(item.get<std::string>());
                if (!id) {
                    throw error(error_code::invalid_config, "unknown test '" + item.get<std::string>() + "'");
                }
                cfg.enabled_tests.insert(*id);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw error(error_code::invalid_config, e.what());
    }
    cfg.validate();
}

void apply_override(detection_config& cfg, std::string_view key, std::string_view value) {
    if (key == "printable_min") cfg.printable_min = parse_double(key, value);
    else if (key == "chi_p_threshold") cfg.chi_p_threshold = parse_double(key, value);
    else if (key == "bitbyte_threshold") cfg.bitbyte_threshold = parse_double(key, value);
    else if (key == "name_entropy_max_bits") cfg.name_entropy_max_bits = parse_double(key, value);
    else if (key == "ext_entropy_max_bits") cfg.ext_entropy_max_bits = parse_double(key, value);
    else if (key == "ransom_note_max_bytes") cfg.ransom_note_max_bytes = parse_size(key, value);
    else if (key == "min_age_seconds") cfg.min_age_seconds = parse_double(key, value);
    else if (key == "chi_min_bytes") cfg.chi_min_bytes = parse_size(key, value);
    else if (key == "chi_whole_file") {
        if (value != "true" && value != "false") {
            throw error(error_code::invalid_config, "chi_whole_file expects true or false");
        }
        cfg.chi_whole_file = value == "true";
    } else if (key == "enabled_tests") cfg.enabled_tests = parse_test_list(value);
    else {
        throw error(error_code::invalid_config, "unknown setting '" + std::string(key) + "'");
    }
    cfg.validate();
}

double printable_ratio(std::span<const std::uint8_t> data) {
    if (data.empty()) {
        return 0.0;
    }
    const auto n = std::count_if(data.begin(), data.end(), is_printable_byte);
    return static_cast<double>(n) / static_cast<double>(data.size());
}

bool is_executable(const file_sample& sample) {
    const std::string ext = sample.last_extension();
    if (ext == "exe" || ext == "dll") {
        return true;
    }
    const auto& h = sample.head();
    if (h.size() >= 2 && h[0] == 'M' && h[1] == 'Z') {
        return true;
    }
    return h.size() >= 4 && h[0] == 0x7F && h[1] == 'E' && h[2] == 'L' && h[3] == 'F';
}

vote test_magic_number(const file_sample& sample, const signature_db& db, const detection_config&) {
    constexpr auto id = test_id::magic_number;
    if (sample.extension_chain().empty()) {
        return abstain(id, "no extension");
    }
    const std::string ext = sample.last_extension();
    const signature_entry* entry = db.lookup(ext);
    if (!entry) {
        return abstain(id, "unknown extension '" + ext + "'");
    }
    if (entry->plain_text) {
        return abstain(id, "plain-text type '" + ext + "' has no magic number");
    }
    if (!entry->has_magic()) {
        return abstain(id, "type '" + ext + "' has no documented magic number");
    }
    if (!head_covers_any_pattern(sample.head().size(), *entry)) {
        return make_vote(id, verdict::malicious, 0.0, "header truncated: too short for any '" + ext + "' signature");
    }
    if (match_magic(sample.head(), *entry)) {
        return make_vote(id, verdict::benign, 1.0, "magic number matches '" + ext + "'");
    }
    return make_vote(id, verdict::malicious, 0.0, "magic number does not match '" + ext + "'");
}

vote test_printable(const file_sample& sample, const signature_db& db, const detection_config& cfg) {
    constexpr auto id = test_id::printable;
    const signature_entry* entry = db.lookup(sample.last_extension());
    if (!entry || !entry->plain_text) {
        return abstain(id, "not a plain-text type");
    }
    if (sample.head().empty()) {
        return abstain(id, "empty file");
    }
    const double ratio = printable_ratio(sample.head());
    const verdict v = ratio >= cfg.printable_min ? verdict::benign : verdict::malicious;
    return make_vote(id, v, ratio, "printable ratio " + fmt(ratio) + " vs min " + fmt(cfg.printable_min));
}

vote test_file_entropy(const file_sample& sample, const detection_config& cfg) {
    constexpr auto id = test_id::file_entropy;
    if (sample.size_bytes() < cfg.chi_min_bytes) {
        return abstain(id, "file smaller than " + std::to_string(cfg.chi_min_bytes) + " bytes");
    }
    stats::chi_square_result r;
    if (cfg.chi_whole_file) {
        const auto body = sample.body();
        r = stats::chi_square_p(body, cfg.chi_min_bytes);
    } else {
        r = stats::chi_square_p(sample.head(), std::min<std::size_t>(cfg.chi_min_bytes, sample.head().size()));
    }
    const verdict v = r.p_value < cfg.chi_p_threshold ? verdict::benign : verdict::malicious;
    return make_vote(id, v, r.p_value,
                     "chi-square " + fmt(r.statistic) + " (dof 255), p " + fmt(r.p_value) + " vs " +
                         fmt(cfg.chi_p_threshold));
}

vote test_bitbyte(const file_sample& sample, const stats::control_curve& curve, const detection_config& cfg) {
    constexpr auto id = test_id::bitbyte;
    if (sample.size_bytes() < stats::bitbyte_stride || sample.head().size() < stats::bitbyte_stride) {
        return abstain(id, "file smaller than 8 bytes");
    }
    const double value = stats::bitbyte_value(sample.head(), curve);
    const verdict v = value > cfg.bitbyte_threshold ? verdict::benign : verdict::malicious;
    return make_vote(id, v, value, "BitByte " + fmt(value) + " vs " + fmt(cfg.bitbyte_threshold));
}

vote test_ransom_note(const file_sample& sample, const detection_config& cfg) {
    constexpr auto id = test_id::ransom_note;
    if (sample.size_bytes() > cfg.ransom_note_max_bytes) {
        return make_vote(id, verdict::benign, 0.0, "larger than " + std::to_string(cfg.ransom_note_max_bytes) + " bytes");
    }
    const auto& head = sample.head();
    const double ratio = printable_ratio(head);
    if (ratio < cfg.printable_min) {
        return make_vote(id, verdict::benign, 0.0, "not plain text (printable ratio " + fmt(ratio) + ")");
    }
    std::string text;
    text.reserve(head.size());
    for (std::uint8_t b : head) {
        text += is_printable_byte(b) ? static_cast<char>(std::tolower(b)) : ' ';
    }
    const std::string name = ascii_lower(sample.name());

    std::vector<std::string> hits;
    for (const auto& k : cfg.keywords.content_keywords) {
        if (text.find(k) != std::string::npos) hits.push_back(k);
    }
    for (const auto& t : cfg.keywords.filename_triggers) {
        if (name.find(t) != std::string::npos) hits.push_back("name:" + t);
    }
    if (hits.empty()) {
        return make_vote(id, verdict::benign, 0.0, "no ransom keywords");
    }
    std::string evidence = "keywords:";
    for (const auto& h : hits) {
        evidence += ' ';
        evidence += h;
    }
    return make_vote(id, verdict::malicious, static_cast<double>(hits.size()), evidence);
}

vote test_filename_entropy(const file_sample& sample, const detection_config& cfg) {
    constexpr auto id = test_id::filename_entropy;
    if (sample.name().empty()) {
        return abstain(id, "empty file name");
    }
    const double h = stats::shannon_entropy_string(sample.name());
    const verdict v = h < cfg.name_entropy_max_bits ? verdict::benign : verdict::malicious;
    return make_vote(id, v, h, "name entropy " + fmt(h) + " bits vs " + fmt(cfg.name_entropy_max_bits));
}

vote test_known_extension(const file_sample& sample, const signature_db& db, const detection_config&) {
    constexpr auto id = test_id::known_extension;
    if (sample.extension_chain().empty()) {
        return make_vote(id, verdict::malicious, 0.0, "no extension");
    }
    const std::string ext = sample.last_extension();
    if (db.known(ext)) {
        return make_vote(id, verdict::benign, 1.0, "known extension '" + ext + "'");
    }
    return make_vote(id, verdict::malicious, 0.0, "unknown extension '" + ext + "'");
}

vote test_extension_entropy(const file_sample& sample, const detection_config& cfg) {
    constexpr auto id = test_id::extension_entropy;
    std::string chain;
    for (const auto& e : sample.extension_chain()) {
        chain += e;
    }
    if (chain.empty()) {
        return abstain(id, "no extension");
    }
    const double h = stats::shannon_entropy_string(chain);
    const verdict v = h < cfg.ext_entropy_max_bits ? verdict::benign : verdict::malicious;
    return make_vote(id, v, h, "extension entropy " + fmt(h) + " bits vs " + fmt(cfg.ext_entropy_max_bits));
}

vote test_file_age(const file_sample& sample, timestamp now, const detection_config& cfg) {
    constexpr auto id = test_id::file_age;
    if (!is_executable(sample)) {
        return abstain(id, "not an executable");
    }
    using seconds_d = std::chrono::duration<double>;
    const double created_age = std::chrono::duration_cast<seconds_d>(now - sample.created_at()).count();
    const double modified_age = std::chrono::duration_cast<seconds_d>(now - sample.modified_at()).count();
    const double age = std::min(created_age, modified_age);
    if (age < 0.0) {
        return make_vote(id, verdict::malicious, age, "clock skew: timestamp in the future");
    }
    const verdict v = age > cfg.min_age_seconds ? verdict::benign : verdict::malicious;
    return make_vote(id, v, age, "age " + fmt(age) + " s vs " + fmt(cfg.min_age_seconds));
}

} // namespace rwvote
