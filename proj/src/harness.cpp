// rwvote - majority-voting ransomware artefact detection
// Corpus evaluation, detection metrics and report files

#include <rwvote/harness.hpp>

#include <rwvote/error.hpp>

#include "io_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>

namespace rwvote {

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string metric_flags(const metrics& m) {
    std::string out;
    auto add = [&](bool set, std::string_view name) {
        if (!set) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(m.accuracy_undefined, "accuracy_undefined");
    add(m.recall_undefined, "recall_undefined");
    add(m.precision_undefined, "precision_undefined");
    add(m.f1_undefined, "f1_undefined");
    return out;
}

std::string summary_row(std::string_view name, const confusion_matrix& cm) {
    const auto m = metrics_from_confusion(cm);
    std::string row = std::string(name);
    for (auto n : {cm.tp, cm.tn, cm.fp, cm.fn, cm.abstain}) {
        row += ',' + std::to_string(n);
    }
    for (auto v : {m.accuracy, m.recall, m.precision, m.f1}) {
        row += ',' + fixed(v);
    }
    row += ',' + metric_flags(m) + '\n';
    return row;
}

std::string rate_field(const grid_cell& cell) {
    const auto r = cell.pass_rate();
    return r ? fixed(*r, 2) : std::string();
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

} // namespace

void confusion_matrix::record(verdict v, truth label) {
    if (v == verdict::abstain) {
        ++abstain;
        return;
    }
    const bool pass = v == verdict::benign;
    if (label == truth::benign) {
        ++(pass ? tp : fn);
    } else {
        ++(pass ? fp : tn);
    }
}

void confusion_matrix::record(truth classification, truth label) {
    record(classification == truth::benign ? verdict::benign : verdict::malicious, label);
}

confusion_matrix& confusion_matrix::operator+=(const confusion_matrix& other) {
    tp += other.tp;
    tn += other.tn;
    fp += other.fp;
    fn += other.fn;
    abstain += other.abstain;
    return *this;
}

metrics metrics_from_confusion(const confusion_matrix& cm) {
    metrics m;
    auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
        if (den == 0) {
            undefined = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.accuracy = ratio(cm.tp + cm.tn, cm.total(), m.accuracy_undefined);
    m.recall = ratio(cm.tp, cm.tp + cm.fn, m.recall_undefined);
    m.precision = ratio(cm.tp, cm.tp + cm.fp, m.precision_undefined);
    // 2PR/(P+R) written over raw counts; P+R = 0 exactly when tp = 0.
    if (cm.tp == 0) {
        m.f1_undefined = true;
    } else {
        m.f1 = static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
    }
    return m;
}

std::optional<double> grid_cell::pass_rate() const {
    if (pass + fail == 0) {
        return std::nullopt;
    }
    return 100.0 * static_cast<double>(pass) / static_cast<double>(pass + fail);
}

std::vector<const sample_result*> evaluation_report::misclassified() const {
    std::vector<const sample_result*> out;
    for (const auto& r : results) {
        if (r.card.classification != r.label) out.push_back(&r);
    }
    return out;
}

std::map<std::string, std::string> describe_assets(const detection_assets& assets) {
    char seed[32];
    std::snprintf(seed, sizeof seed, "0x%llX", static_cast<unsigned long long>(assets.curve.seed));
    return {
        {"signatures", std::to_string(assets.signatures.size()) + " entries"},
        {"control_curve", std::string("seed ") + seed + ", " + std::to_string(assets.curve.trials) + " trials, sum " +
                              fixed(assets.curve.sum(), 4)},
        {"api_names", std::to_string(assets.api_names.names.size()) + " names"},
    };
}

evaluation_report evaluate_samples(const corpus& samples, const run_config& config, const detection_assets& assets,
                                   const evaluate_options& options) {
    config.detection.validate();
    config.policy.validate();
    if (samples.samples.empty()) {
        throw error(error_code::empty_corpus, "no samples to evaluate");
    }

    evaluation_report report;
    report.config = config;
    report.asset_versions = describe_assets(assets);
    report.seed = options.seed;
    report.failures = samples.failures;

    const std::size_t n = samples.samples.size();
    std::vector<std::optional<sample_result>> results(n);
    std::vector<std::string> late_failures(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto& ls = samples.samples[i];
            try {
                sample_result r;
                r.sample_id = ls.label.sample_id;
                r.label = ls.label.label;
                r.family = ls.label.family.value_or("");
                r.card = classify_sample(ls.sample, assets, config.detection, config.policy, options.now);
                r.card.sample_id = r.sample_id;
                if (options.api_scan && is_executable(ls.sample)) {
                    const auto body = ls.sample.body();
                    r.api = cryptoscan::count_api_strings(body, assets.api_names);
                }
                results[i] = std::move(r);
            } catch (const std::exception& e) {
                late_failures[i] = e.what();
            }
        }
    };
    const unsigned workers = worker_count(options.threads, n);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    for (auto id : all_tests) {
        if (config.detection.enabled(id)) report.per_test[id];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!results[i]) {
            report.failures.push_back({samples.samples[i].sample.path(), late_failures[i]});
            continue;
        }
        auto& r = *results[i];
        auto& family_row = report.grid[r.family];
        for (auto id : all_tests) {
            if (config.detection.enabled(id)) family_row[id];
        }
        for (const auto& v : r.card.votes) {
            report.per_test[v.test].record(v.result, r.label);
            auto& cell = family_row[v.test];
            ++(v.result == verdict::abstain ? cell.abstain : v.result == verdict::benign ? cell.pass : cell.fail);
        }
        // Tests that never ran on this sample count as abstentions.
        for (auto& [id, cm] : report.per_test) {
            const bool voted = std::any_of(r.card.votes.begin(), r.card.votes.end(),
                                           [id = id](const vote& v) { return v.test == id; });
            if (!voted) {
                ++cm.abstain;
                ++family_row[id].abstain;
            }
        }
        report.combined.record(r.card.classification, r.label);
        auto& combined_cell = report.grid_combined[r.family];
        ++(r.card.classification == truth::benign ? combined_cell.pass : combined_cell.fail);
        report.results.push_back(std::move(r));
    }
    std::sort(report.results.begin(), report.results.end(),
              [](const sample_result& a, const sample_result& b) { return a.sample_id < b.sample_id; });
    std::sort(report.failures.begin(), report.failures.end(),
              [](const ingest_failure& a, const ingest_failure& b) { return a.path < b.path; });
    return report;
}

evaluation_report evaluate_corpus(const std::filesystem::path& root, const run_config& config,
                                  const detection_assets& assets, const evaluate_options& options) {
    return evaluate_samples(load_corpus(root, options.load), config, assets, options);
}

std::set<report_format> all_report_formats() {
    return {report_format::scorecards, report_format::summary, report_format::grid, report_format::api_profiles,
            report_format::run_info};
}

std::string scorecard_jsonl(const evaluation_report& report) {
    std::string out;
    for (const auto& r : report.results) {
        nlohmann::json j = r.card;
        j["truth"] = to_string(r.label);
        j["family"] = r.family;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string summary_csv(const evaluation_report& report) {
    std::string out =
        "# positive = benign: tp = Benign vote on a benign file, tn = Malicious vote on a malicious file, "
        "fp = Benign vote on a malicious file, fn = Malicious vote on a benign file; abstentions are not counted\n"
        "test_id,tp,tn,fp,fn,abstain,accuracy,recall,precision,f1,flags\n";
    for (const auto& [id, cm] : report.per_test) {
        out += summary_row(to_string(id), cm);
    }
    out += summary_row("COMBINED", report.combined);
    return out;
}

std::string grid_csv(const evaluation_report& report) {
    std::vector<test_id> columns;
    for (const auto& [id, cm] : report.per_test) columns.push_back(id);
    std::string out = "family";
    for (auto id : columns) out += ',' + std::string(to_string(id));
    out += ",COMBINED\n";
    for (const auto& [family, row] : report.grid) {
        out += csv_field(family);
        for (auto id : columns) {
            const auto it = row.find(id);
            out += ',' + (it == row.end() ? std::string() : rate_field(it->second));
        }
        const auto c = report.grid_combined.find(family);
        out += ',' + (c == report.grid_combined.end() ? std::string() : rate_field(c->second)) + '\n';
    }
    return out;
}

std::string api_profiles_csv(const evaluation_report& report) {
    std::string out = "name,total,size,per_kb\n";
    for (const auto& r : report.results) {
        if (!r.api) continue;
        out += csv_field(r.sample_id) + ',' + std::to_string(r.api->total_hits) + ',' +
               std::to_string(r.api->blob_size_bytes) + ',' + fixed(r.api->hits_per_kb) + '\n';
    }
    return out;
}

std::string run_info_json(const evaluation_report& report) {
    const auto m = metrics_from_confusion(report.combined);
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"path", f.path.generic_string()}, {"message", f.message}});
    }
    nlohmann::json misclassified = nlohmann::json::array();
    for (const auto* r : report.misclassified()) {
        misclassified.push_back(r->sample_id);
    }
    nlohmann::json j{
        {"config", report.config},
        {"assets", report.asset_versions},
        {"seed", report.seed ? nlohmann::json(*report.seed) : nlohmann::json(nullptr)},
        {"samples", report.results.size()},
        {"combined",
         {{"tp", report.combined.tp},
          {"tn", report.combined.tn},
          {"fp", report.combined.fp},
          {"fn", report.combined.fn},
          {"accuracy", m.accuracy},
          {"recall", m.recall},
          {"precision", m.precision},
          {"f1", m.f1}}},
        {"misclassified", misclassified},
        {"failures", failures},
    };
    return j.dump(2) + '\n';
}

std::vector<std::filesystem::path> emit_reports(const evaluation_report& report, const std::filesystem::path& out_dir,
                                                const std::set<report_format>& formats) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw error(error_code::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    auto emit = [&](report_format f, const char* name, auto render) {
        if (!formats.count(f)) return;
        const auto path = out_dir / name;
        const std::string text = render(report);
        detail::write_binary_file(path, text.data(), text.size());
        written.push_back(path);
    };
    emit(report_format::scorecards, "scorecards.jsonl", scorecard_jsonl);
    emit(report_format::summary, "summary.csv", summary_csv);
    emit(report_format::grid, "grid.csv", grid_csv);
    const bool any_profile =
        std::any_of(report.results.begin(), report.results.end(), [](const sample_result& r) { return r.api.has_value(); });
    if (any_profile) {
        emit(report_format::api_profiles, "api_profiles.csv", api_profiles_csv);
    }
    emit(report_format::run_info, "run.json", run_info_json);
    return written;
}

} // namespace rwvote
