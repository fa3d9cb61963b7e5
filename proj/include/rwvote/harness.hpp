// rwvote - majority-voting ransomware artefact detection
// Corpus evaluation, detection metrics and report files

#ifndef RWVOTE_HARNESS_HPP
#define RWVOTE_HARNESS_HPP

#include <rwvote/corpus.hpp>
#include <rwvote/cryptoscan.hpp>
#include <rwvote/voting.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rwvote {

/// Positive means benign. A test "passes" when it votes Benign, so
/// tp = pass on a benign file, tn = fail on a malicious file,
/// fp = pass on a malicious file, fn = fail on a benign file.
struct confusion_matrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t abstain = 0; // not part of total()

    [[nodiscard]] std::size_t total() const { return tp + tn + fp + fn; }
    void record(verdict v, truth label);
    void record(truth classification, truth label);
    confusion_matrix& operator+=(const confusion_matrix& other);

    friend bool operator==(const confusion_matrix&, const confusion_matrix&) = default;
};

struct metrics {
    double accuracy = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    // Set when the value is a 0 standing in for a zero denominator.
    bool accuracy_undefined = false;
    bool recall_undefined = false;
    bool precision_undefined = false;
    bool f1_undefined = false;
};

[[nodiscard]] metrics metrics_from_confusion(const confusion_matrix& cm);

struct sample_result {
    std::string sample_id;
    truth label = truth::benign;
    std::string family;
    score_card card;
    std::optional<cryptoscan::api_profile> api; // executables only
};

/// Pass counts for one family and one test.
struct grid_cell {
    std::size_t pass = 0;
    std::size_t fail = 0;
    std::size_t abstain = 0;

    /// Percentage of non-abstaining votes that passed; empty if none voted.
    [[nodiscard]] std::optional<double> pass_rate() const;
};

struct evaluation_report {
    std::vector<sample_result> results; // sorted by sample_id
    std::map<test_id, confusion_matrix> per_test;
    confusion_matrix combined;
    std::map<std::string, std::map<test_id, grid_cell>> grid;
    std::map<std::string, grid_cell> grid_combined;
    std::vector<ingest_failure> failures;
    run_config config;
    std::map<std::string, std::string> asset_versions;
    std::optional<std::uint64_t> seed;

    /// Samples whose combined classification says benign while the label says malicious, or vice versa.
    [[nodiscard]] std::vector<const sample_result*> misclassified() const;
};

struct evaluate_options {
    load_options load;
    /// Worker threads for per-sample classification; 0 picks the hardware count.
    unsigned threads = 0;
    /// Reference time for the file-age test.
    timestamp now{};
    bool api_scan = true;
    /// Recorded in the report when the corpus came from the generator.
    std::optional<std::uint64_t> seed;
};

/// Loads and classifies every sample under `root`. Throws empty_corpus;
/// unreadable files are listed in `failures` instead.
[[nodiscard]] evaluation_report evaluate_corpus(const std::filesystem::path& root, const run_config& config,
                                                const detection_assets& assets, const evaluate_options& options = {});

/// Same as evaluate_corpus on an already loaded corpus.
[[nodiscard]] evaluation_report evaluate_samples(const corpus& samples, const run_config& config,
                                                 const detection_assets& assets, const evaluate_options& options = {});

/// Short descriptions of the asset set, for the report header.
[[nodiscard]] std::map<std::string, std::string> describe_assets(const detection_assets& assets);

enum class report_format { scorecards, summary, grid, api_profiles, run_info };

[[nodiscard]] std::set<report_format> all_report_formats();

/// Writes the requested files into `out_dir` (created if needed) and returns
/// their paths. api_profiles.csv is only written when some sample has a
/// profile. Throws io_error.
std::vector<std::filesystem::path> emit_reports(const evaluation_report& report, const std::filesystem::path& out_dir,
                                                const std::set<report_format>& formats = all_report_formats());

[[nodiscard]] std::string scorecard_jsonl(const evaluation_report& report);
[[nodiscard]] std::string summary_csv(const evaluation_report& report);
[[nodiscard]] std::string grid_csv(const evaluation_report& report);
[[nodiscard]] std::string api_profiles_csv(const evaluation_report& report);
/// Config snapshot, asset versions, seed, combined metrics and ingest failures.
[[nodiscard]] std::string run_info_json(const evaluation_report& report);

} // namespace rwvote

#endif // RWVOTE_HARNESS_HPP
