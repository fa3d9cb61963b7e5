// rwvote - command-line front end

#include <rwvote/corpus.hpp>
#include <rwvote/cryptoscan.hpp>
#include <rwvote/error.hpp>
#include <rwvote/harness.hpp>
#include <rwvote/stats.hpp>
#include <rwvote/voting.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rwvote;

namespace {

constexpr int exit_usage = 1;
constexpr int exit_io = 2;

int exit_code_for(error_code code) {
    switch (code) {
    case error_code::not_found:
    case error_code::not_a_file:
    case error_code::io_error:
    case error_code::empty_corpus:
        return exit_io;
    default:
        return exit_usage;
    }
}

std::vector<std::uint8_t> read_blob(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw error(error_code::not_found, path.string());
    if (!fs::is_regular_file(path, ec)) throw error(error_code::not_a_file, path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(error_code::io_error, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t parse_seed(const std::string& s) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw error(error_code::invalid_config, "bad seed '" + s + "'");
    }
}

// Epoch seconds or UTC "YYYY-MM-DDTHH:MM:SSZ".
timestamp parse_now(const std::string& s) {
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
        return timestamp(std::chrono::seconds(std::stoll(s)));
    }
    std::tm tm{};
    const char* end = strptime(s.c_str(), "%Y-%m-%dT%H:%M:%S", &tm);
    if (end == nullptr || !(*end == '\0' || (end[0] == 'Z' && end[1] == '\0'))) {
        throw error(error_code::invalid_config, "bad --now '" + s + "'");
    }
    return timestamp(std::chrono::seconds(timegm(&tm)));
}

std::string hex(const std::vector<std::uint8_t>& bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 15];
    }
    return out;
}

struct detection_flags {
    std::optional<std::string> config;
    std::vector<std::string> overrides;
    std::optional<std::string> signatures;
    std::optional<std::string> curve;
    std::optional<std::string> api_names;
    std::optional<std::string> keywords;
    std::optional<std::string> now;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "Run configuration JSON");
        app->add_option("--set", overrides, "Override a setting, key=value (repeatable)");
        app->add_option("--signatures", signatures, "Signature database JSON");
        app->add_option("--curve", curve, "BitByte control curve JSON");
        app->add_option("--api-names", api_names, "API name dictionary");
        app->add_option("--keywords", keywords, "Ransom keyword JSON");
        app->add_option("--now", now, "Reference time for file age (epoch seconds or ISO-8601 UTC)");
    }

    [[nodiscard]] run_config build_config() const {
        run_config cfg = config ? load_run_config(*config) : run_config{};
        if (keywords) cfg.detection.keywords = load_keyword_set(fs::path(*keywords));
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw error(error_code::invalid_config, "--set expects key=value, got '" + kv + "'");
            }
            apply_run_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    }

    [[nodiscard]] detection_assets build_assets() const {
        auto opt = [](const std::optional<std::string>& s) {
            return s ? std::optional<fs::path>(*s) : std::nullopt;
        };
        return load_assets(opt(signatures), opt(curve), opt(api_names));
    }

    [[nodiscard]] timestamp reference_time() const {
        return now ? parse_now(*now) : std::chrono::time_point_cast<timestamp::duration>(std::chrono::system_clock::now());
    }
};

int run_scan(const std::vector<std::string>& paths, const detection_flags& flags,
             const std::optional<std::string>& jsonl_out) {
    const auto cfg = flags.build_config();
    const auto assets = flags.build_assets();
    const auto now = flags.reference_time();
    std::ofstream file;
    if (jsonl_out) {
        file.open(*jsonl_out, std::ios::binary | std::ios::trunc);
        if (!file) throw error(error_code::io_error, "cannot create " + *jsonl_out);
    }
    int status = 0;
    for (const auto& p : paths) {
        try {
            const auto sample = file_sample::ingest(p);
            const auto card = classify_sample(sample, assets, cfg.detection, cfg.policy, now);
            const std::string line = nlohmann::json(card).dump();
            std::cout << line << '\n';
            if (file) file << line << '\n';
        } catch (const error& e) {
            std::cerr << "rwvote: " << p << ": " << e.what() << '\n';
            status = exit_code_for(e.code());
        }
    }
    return status;
}

int run_evaluate(const std::string& root, const detection_flags& flags, const std::optional<std::string>& manifest,
                 const std::optional<std::string>& out, unsigned threads, bool strict,
                 const std::optional<std::string>& seed) {
    const auto cfg = flags.build_config();
    const auto assets = flags.build_assets();
    evaluate_options opts;
    if (manifest) opts.load.manifest = fs::path(*manifest);
    opts.load.strict = strict;
    opts.threads = threads;
    opts.now = flags.reference_time();
    if (seed) opts.seed = parse_seed(*seed);
    const auto report = evaluate_corpus(root, cfg, assets, opts);
    if (out) {
        for (const auto& p : emit_reports(report, *out)) std::cerr << "wrote " << p.string() << '\n';
    }
    std::cout << summary_csv(report);
    for (const auto& f : report.failures) {
        std::cerr << "rwvote: skipped " << f.path.string() << ": " << f.message << '\n';
    }
    return 0;
}

int run_gen_corpus(const std::optional<std::string>& spec_path, const std::optional<std::string>& seed,
                   const std::string& out) {
    synthetic_spec spec = default_synthetic_spec(out);
    if (spec_path) {
        std::ifstream in(*spec_path, std::ios::binary);
        if (!in) throw error(error_code::not_found, *spec_path);
        const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        const auto loaded = synthetic_spec_from_json(text);
        const auto seed_in_file = nlohmann::json::parse(text, nullptr, false).contains("seed");
        spec.plaintext_benign = loaded.plaintext_benign;
        spec.structured_benign = loaded.structured_benign;
        spec.compressed_like = loaded.compressed_like;
        spec.encrypted_like = loaded.encrypted_like;
        spec.ransom_notes = loaded.ransom_notes;
        if (seed_in_file) spec.seed = loaded.seed;
    }
    if (seed) spec.seed = parse_seed(*seed);
    spec.output_root = out;
    const auto rows = generate_synthetic_corpus(spec);
    std::cout << rows.size() << " files written to " << out << " (seed " << spec.seed << ")\n";
    return 0;
}

int run_keyscan(const std::string& path, bool aes, bool salsa, bool rsa, unsigned threads, std::size_t bit_errors) {
    const auto data = read_blob(path);
    if (!aes && !salsa && !rsa) aes = salsa = rsa = true;
    std::vector<cryptoscan::key_hit> hits;
    if (aes && data.size() >= cryptoscan::aes_min_blob) {
        cryptoscan::aes_scan_options opts;
        opts.threads = threads;
        opts.max_bit_errors = bit_errors;
        hits = cryptoscan::find_aes_key_schedules(data, opts);
    } else if (aes) {
        std::cerr << "rwvote: " << path << ": too small for an AES schedule, skipped\n";
    }
    if (salsa) {
        auto s = cryptoscan::find_salsa20_state(data);
        hits.insert(hits.end(), s.begin(), s.end());
    }
    if (rsa) {
        auto r = cryptoscan::find_rsa_der_keys(data);
        hits.insert(hits.end(), r.begin(), r.end());
    }
    for (const auto& h : hits) {
        nlohmann::json j{{"source", path},
                         {"algorithm", cryptoscan::to_string(h.algorithm)},
                         {"offset", h.offset},
                         {"span", h.span},
                         {"key", hex(h.key_bytes)},
                         {"detail", h.detail}};
        std::cout << j.dump() << '\n';
    }
    return 0;
}

int run_apiscan(const std::string& path, const std::optional<std::string>& dict_path, bool per_name) {
    const auto data = read_blob(path);
    const auto dict = load_api_dictionary(dict_path ? std::optional<fs::path>(*dict_path) : std::nullopt);
    const auto profile = cryptoscan::count_api_strings(data, dict);
    char per_kb[32];
    std::snprintf(per_kb, sizeof per_kb, "%.6f", profile.hits_per_kb);
    std::cout << "name,total,size,per_kb\n"
              << fs::path(path).filename().string() << ',' << profile.total_hits << ',' << profile.blob_size_bytes
              << ',' << per_kb << '\n';
    if (per_name) {
        std::cout << "\napi,count\n";
        for (const auto& [name, count] : profile.per_name_counts) std::cout << name << ',' << count << '\n';
    }
    return 0;
}

int run_notescan(const std::string& path, const std::optional<std::string>& keywords, std::size_t window) {
    const auto data = read_blob(path);
    const auto kw = load_keyword_set(keywords ? std::optional<fs::path>(*keywords) : std::nullopt);
    for (const auto& c : cryptoscan::scan_ransom_keywords(data, kw, window)) {
        nlohmann::json j{{"source", path}, {"offset", c.offset}, {"end", c.end}, {"keywords", c.keywords}};
        std::cout << j.dump() << '\n';
    }
    return 0;
}

int run_control_curve(const std::string& seed, std::size_t trials, const std::optional<std::string>& out) {
    const auto curve = stats::compute_control_curve(parse_seed(seed), trials);
    const std::string text = stats::control_curve_to_json(curve);
    if (out) {
        std::ofstream f(*out, std::ios::binary | std::ios::trunc);
        if (!f) throw error(error_code::io_error, "cannot create " + *out);
        f << text;
    } else {
        std::cout << text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Majority-voting ransomware artefact detection"};
    app.require_subcommand(1);

    detection_flags flags;

    std::vector<std::string> scan_paths;
    std::optional<std::string> scan_jsonl;
    auto* scan = app.add_subcommand("scan", "Classify files and print score cards as JSONL");
    scan->add_option("paths", scan_paths, "Files to classify")->required();
    scan->add_option("--jsonl", scan_jsonl, "Also write score cards to this file");
    flags.attach(scan);

    std::string eval_root;
    std::optional<std::string> eval_manifest, eval_out, eval_seed;
    unsigned eval_threads = 0;
    bool eval_strict = false;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a labelled corpus and write reports");
    evaluate->add_option("root", eval_root, "Corpus root")->required();
    evaluate->add_option("--manifest", eval_manifest, "Label manifest CSV (path,truth,family)");
    evaluate->add_option("--out", eval_out, "Report directory");
    evaluate->add_option("--threads", eval_threads, "Worker threads, 0 for all cores");
    evaluate->add_flag("--strict", eval_strict, "Reject files whose label cannot be inferred");
    evaluate->add_option("--seed", eval_seed, "Generator seed to record in the report");
    flags.attach(evaluate);

    std::optional<std::string> gen_spec, gen_seed;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen-corpus", "Write the seeded synthetic corpus");
    gen->add_option("--spec", gen_spec, "Class counts JSON (defaults to 500/500/100/500/100)");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output directory")->required();

    std::string key_blob;
    bool key_aes = false, key_salsa = false, key_rsa = false;
    unsigned key_threads = 1;
    std::size_t key_bit_errors = 0;
    auto* keyscan = app.add_subcommand("keyscan", "Search a blob for key material, print hits as JSONL");
    keyscan->add_option("blob", key_blob, "File or memory dump")->required();
    keyscan->add_flag("--aes", key_aes, "AES key schedules");
    keyscan->add_flag("--salsa", key_salsa, "Salsa20 states");
    keyscan->add_flag("--rsa", key_rsa, "DER RSA keys");
    keyscan->add_option("--threads", key_threads, "Worker threads for the AES scan");
    keyscan->add_option("--bit-errors", key_bit_errors, "Bit errors tolerated in an AES schedule");

    std::string api_blob;
    std::optional<std::string> api_dict;
    bool api_per_name = false;
    auto* apiscan = app.add_subcommand("apiscan", "Count API names in a blob's strings, print CSV");
    apiscan->add_option("blob", api_blob, "File or memory dump")->required();
    apiscan->add_option("--dict", api_dict, "API name dictionary");
    apiscan->add_flag("--per-name", api_per_name, "Also list counts per API name");

    std::string note_blob;
    std::optional<std::string> note_keywords;
    std::size_t note_window = 512;
    auto* notescan = app.add_subcommand("notescan", "Find ransom-note keyword clusters in a blob");
    notescan->add_option("blob", note_blob, "File or memory dump")->required();
    notescan->add_option("--keywords", note_keywords, "Keyword JSON");
    notescan->add_option("--window", note_window, "Cluster window in bytes");

    std::string curve_seed = "0xBEEF";
    std::size_t curve_trials = stats::default_curve_trials;
    std::optional<std::string> curve_out;
    auto* curve = app.add_subcommand("control-curve", "Compute the BitByte control curve");
    curve->add_option("--seed", curve_seed, "RNG seed");
    curve->add_option("--trials", curve_trials, "Monte Carlo trials");
    curve->add_option("--out", curve_out, "Output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_usage;
    }

    try {
        if (*scan) return run_scan(scan_paths, flags, scan_jsonl);
        if (*evaluate) {
            return run_evaluate(eval_root, flags, eval_manifest, eval_out, eval_threads, eval_strict, eval_seed);
        }
        if (*gen) return run_gen_corpus(gen_spec, gen_seed, gen_out);
        if (*keyscan) return run_keyscan(key_blob, key_aes, key_salsa, key_rsa, key_threads, key_bit_errors);
        if (*apiscan) return run_apiscan(api_blob, api_dict, api_per_name);
        if (*notescan) return run_notescan(note_blob, note_keywords, note_window);
        if (*curve) return run_control_curve(curve_seed, curve_trials, curve_out);
    } catch (const error& e) {
        std::cerr << "rwvote: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "rwvote: " << e.what() << '\n';
        return exit_io;
    }
    return exit_usage;
}
