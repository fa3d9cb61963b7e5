// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <rwvote/cryptoscan.hpp>
#include <rwvote/error.hpp>
#include <rwvote/harness.hpp>
#include <rwvote/stats.hpp>

#include "test_support.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>
#include <openssl/aes.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

using namespace rwvote;
using clock_type = std::chrono::steady_clock;

namespace {

struct outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const timestamp fixed_now = timestamp{} + std::chrono::hours(24 * 365 * 60);

// The default corpus and its evaluation are shared by criteria 1, 9 and 10.
struct default_run {
    rwtest::temp_dir dir{"acceptance"};
    std::optional<evaluation_report> report;
    double eval_seconds = 0.0;
    std::string error;

    default_run() {
        try {
            generate_synthetic_corpus(default_synthetic_spec(dir.path() / "corpus"));
            evaluate_options o;
            o.now = fixed_now;
            o.seed = 42;
            const auto t0 = clock_type::now();
            report = evaluate_corpus(dir.path() / "corpus", run_config{}, load_assets(), o);
            eval_seconds = seconds_since(t0);
        } catch (const std::exception& e) {
            error = e.what();
        }
    }
};

default_run& shared_run() {
    static default_run run;
    return run;
}

outcome combined_accuracy() {
    auto& run = shared_run();
    if (!run.report) return {false, run.error};
    const auto& cm = run.report->combined;
    const auto m = metrics_from_confusion(cm);
    const bool ok = run.report->results.size() == 1700 && m.accuracy >= 0.99 && run.eval_seconds < 60.0;
    std::ostringstream d;
    d << "files=" << run.report->results.size() << " accuracy=" << fmt("%.6f", m.accuracy) << " (need >= 0.99)"
      << " tp=" << cm.tp << " tn=" << cm.tn << " fp=" << cm.fp << " fn=" << cm.fn
      << " runtime=" << fmt("%.2f", run.eval_seconds) << "s (need < 60)";
    return {ok, d.str()};
}

outcome chi_square_oracle() {
    double worst = 0.0;
    for (double s : {0.0, 50.0, 100.0, 200.0, 255.0, 300.0, 400.0, 1000.0}) {
        const double ours = stats::chi_square_sf(s);
        worst = std::max(worst, std::abs(ours - boost::math::gamma_q(127.5, s / 2.0)));
        if (s > 0.0) {
            const boost::math::chi_squared dist(255.0);
            worst = std::max(worst, std::abs(ours - boost::math::cdf(boost::math::complement(dist, s))));
        }
    }
    const bool p0 = stats::chi_square_sf(0.0) == 1.0;
    return {worst <= 1e-6 && p0, "max abs error " + fmt("%.3g", worst) + " (need <= 1e-6), p(0)==1 " +
                                     (p0 ? "yes" : "no")};
}

outcome entropy_kernel() {
    int bad = 0;
    auto expect = [&](double got, double want) {
        if (std::abs(got - want) > 1e-12) ++bad;
    };
    expect(stats::shannon_entropy_bytes(std::vector<std::uint8_t>(1024, 0x41)), 0.0);
    std::vector<std::uint8_t> all(256);
    std::iota(all.begin(), all.end(), 0);
    expect(stats::shannon_entropy_bytes(all), 8.0);
    expect(stats::shannon_entropy_bytes(rwtest::bytes_of("abab")), 1.0);
    expect(stats::shannon_entropy_string("invoice.docx"), 3.0849625007211565);
    expect(stats::shannon_entropy_string("docx"), 2.0);
    expect(stats::shannon_entropy_string("aaaa"), 0.0);

    std::mt19937_64 rng(2024);
    int perm_bad = 0;
    const int cases = 1000;
    for (int i = 0; i < cases; ++i) {
        auto data = rwtest::random_bytes(rng, 1 + rng() % 2048);
        for (auto& b : data) b = static_cast<std::uint8_t>(b % (1 + i % 256));
        const double h = stats::shannon_entropy_bytes(data);
        std::shuffle(data.begin(), data.end(), rng);
        if (std::abs(stats::shannon_entropy_bytes(data) - h) > 1e-12) ++perm_bad;
    }
    return {bad == 0 && perm_bad == 0, std::to_string(bad) + " example mismatches, " + std::to_string(perm_bad) +
                                           "/" + std::to_string(cases) + " permutation failures"};
}

outcome bitbyte_separation() {
    const auto& curve = stats::bundled_control_curve();
    deterministic_rng rng(4096);
    int random_low = 0;
    int text_high = 0;
    for (int i = 0; i < 1000; ++i) {
        if (stats::bitbyte_value(rng.bytes(4096), curve) < 56.0) ++random_low;
        const auto text = english_like_text(rng, 4096);
        if (stats::bitbyte_value(rwtest::bytes_of(text), curve) > 56.0) ++text_high;
    }
    return {random_low >= 990 && text_high >= 990,
            "random < 56: " + std::to_string(random_low) + "/1000, text > 56: " + std::to_string(text_high) +
                "/1000 (need >= 990 each)"};
}

std::vector<std::uint8_t> openssl_schedule(const std::vector<std::uint8_t>& key) {
    AES_KEY k;
    AES_set_encrypt_key(key.data(), static_cast<int>(key.size() * 8), &k);
    const std::size_t bytes = cryptoscan::aes_schedule_bytes(key.size());
    // Assembly back ends keep round keys in memory byte order, the C one as
    // host-order words; round key 0 is the key itself, which tells them apart.
    std::vector<std::uint8_t> out(reinterpret_cast<const std::uint8_t*>(k.rd_key),
                                  reinterpret_cast<const std::uint8_t*>(k.rd_key) + bytes);
    if (!std::equal(key.begin(), key.end(), out.begin())) {
        out.clear();
        for (std::size_t i = 0; i < bytes / 4; ++i) {
            const auto w = static_cast<std::uint32_t>(k.rd_key[i]);
            for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(w >> s));
        }
    }
    return out;
}

outcome aes_scanner() {
    constexpr std::size_t mib = 1 << 20;
    std::mt19937_64 rng(0xAE5);
    int recovered = 0;
    double slowest = 0.0;
    for (std::size_t len : {16, 24, 32}) {
        for (int i = 0; i < 100; ++i) {
            auto blob = rwtest::random_bytes(rng, mib);
            const auto key = rwtest::random_bytes(rng, len);
            const auto sched = openssl_schedule(key);
            const std::size_t at = rng() % (mib - sched.size() + 1);
            std::copy(sched.begin(), sched.end(), blob.begin() + static_cast<std::ptrdiff_t>(at));
            const auto t0 = clock_type::now();
            const auto hits = cryptoscan::find_aes_key_schedules(blob);
            slowest = std::max(slowest, seconds_since(t0));
            if (hits.size() == 1 && hits[0].offset == at && hits[0].key_bytes == key) ++recovered;
        }
    }
    std::size_t false_hits = 0;
    for (int i = 0; i < 100; ++i) {
        const auto blob = rwtest::random_bytes(rng, mib);
        const auto t0 = clock_type::now();
        false_hits += cryptoscan::find_aes_key_schedules(blob).size();
        slowest = std::max(slowest, seconds_since(t0));
    }
    return {recovered == 300 && false_hits == 0 && slowest < 5.0,
            "recovered " + std::to_string(recovered) + "/300, false hits " + std::to_string(false_hits) +
                " in 100 clean blobs, slowest blob " + fmt("%.3f", slowest) + "s (need < 5)"};
}

outcome salsa_rsa_scanners() {
    std::mt19937_64 rng(0x5A15A);
    const std::string sigma = "expand 32-byte k";
    int salsa_found = 0;
    for (int i = 0; i < 100; ++i) {
        auto blob = rwtest::random_bytes(rng, 1 << 16);
        const std::size_t at = rng() % (blob.size() - 64);
        for (int w = 0; w < 4; ++w) {
            std::copy_n(sigma.begin() + 4 * w, 4, blob.begin() + static_cast<std::ptrdiff_t>(at + 20 * w));
        }
        const auto hits = cryptoscan::find_salsa20_state(blob);
        if (hits.size() == 1 && hits[0].offset == at) ++salsa_found;
    }
    int rsa_total = 0;
    int rsa_found = 0;
    for (const auto& f : std::filesystem::directory_iterator(rwtest::fixture_dir() / "rsa")) {
        if (!f.path().filename().string().starts_with("private_")) continue;
        const auto der = rwtest::read_file(f.path());
        auto blob = rwtest::random_bytes(rng, 1 << 16);
        const std::size_t at = rng() % (blob.size() - der.size());
        std::copy(der.begin(), der.end(), blob.begin() + static_cast<std::ptrdiff_t>(at));
        ++rsa_total;
        const auto bare = cryptoscan::find_rsa_der_keys(der);
        const auto planted = cryptoscan::find_rsa_der_keys(blob);
        if (bare.size() == 1 && planted.size() == 1 && planted[0].offset == at) ++rsa_found;
    }
    std::size_t clean_hits = 0;
    for (int i = 0; i < 100; ++i) {
        const auto blob = rwtest::random_bytes(rng, 1 << 20);
        clean_hits += cryptoscan::find_salsa20_state(blob).size() + cryptoscan::find_rsa_der_keys(blob).size();
    }
    return {salsa_found == 100 && rsa_total > 0 && rsa_found == rsa_total && clean_hits == 0,
            "salsa20 " + std::to_string(salsa_found) + "/100, RSA private " + std::to_string(rsa_found) + "/" +
                std::to_string(rsa_total) + ", hits in 100 clean blobs " + std::to_string(clean_hits)};
}

std::vector<vote> votes_of(std::size_t b, std::size_t m, std::size_t a) {
    std::vector<vote> out;
    std::size_t t = 0;
    auto push = [&](verdict v, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back({all_tests[t++ % all_tests.size()], v, std::nullopt, ""});
    };
    push(verdict::benign, b);
    push(verdict::malicious, m);
    push(verdict::abstain, a);
    return out;
}

outcome voting_properties() {
    const vote_policy p;
    std::size_t cards = 0;
    std::size_t violations = 0;
    auto by_verdict = [](const vote& x, const vote& y) { return x.result < y.result; };
    for (std::size_t n = 1; n <= 9; ++n) {
        for (std::size_t b = 0; b <= n; ++b) {
            for (std::size_t m = 0; b + m <= n; ++m) {
                const std::size_t a = n - b - m;
                auto votes = votes_of(b, m, a);
                const auto base = aggregate(votes, p).classification;
                // Strict majority; ties and thin evidence fall to Malicious.
                const truth majority = (b + m >= 3 && b > m) ? truth::benign : truth::malicious;
                if (base != majority) ++violations;
                std::sort(votes.begin(), votes.end(), by_verdict);
                do {
                    ++cards;
                    if (aggregate(votes, p).classification != base) ++violations;
                } while (std::next_permutation(votes.begin(), votes.end(), by_verdict));
                if (b + m >= p.min_effective_votes && n < 9) {
                    if (aggregate(votes_of(b, m, a + 1), p).classification != base) ++violations;
                }
                if (b > 0 && base == truth::malicious &&
                    aggregate(votes_of(b - 1, m + 1, a), p).classification != truth::malicious) {
                    ++violations;
                }
            }
        }
    }
    return {violations == 0, std::to_string(cards) + " orderings checked, " + std::to_string(violations) +
                                 " violations"};
}

confusion_matrix recount_combined(const std::string& jsonl) {
    confusion_matrix cm;
    std::istringstream in(jsonl);
    for (std::string line; std::getline(in, line);) {
        const auto j = nlohmann::json::parse(line);
        const bool benign_file = j.at("truth") == "Benign";
        const bool pass = j.at("classification") == "Benign";
        if (benign_file) {
            ++(pass ? cm.tp : cm.fn);
        } else {
            ++(pass ? cm.fp : cm.tn);
        }
    }
    return cm;
}

bool same_ratio(double v, bool undefined, std::size_t num, std::size_t den) {
    if (den == 0) return undefined && v == 0.0;
    return !undefined && v == static_cast<double>(num) / static_cast<double>(den);
}

outcome metrics_formulas() {
    int agree = 0;
    const int corpora = 100;
    for (int i = 0; i < corpora; ++i) {
        rwtest::temp_dir dir("acceptance_metrics");
        synthetic_spec s;
        deterministic_rng pick(1000 + static_cast<std::uint64_t>(i));
        s.plaintext_benign = pick.uniform(0, 6);
        s.structured_benign = pick.uniform(0, 6);
        s.compressed_like = pick.uniform(0, 4);
        s.encrypted_like = pick.uniform(0, 6);
        s.ransom_notes = pick.uniform(1, 4);
        s.seed = 5000 + static_cast<std::uint64_t>(i);
        s.output_root = dir.path();
        generate_synthetic_corpus(s);
        evaluate_options o;
        o.now = fixed_now;
        o.threads = 1;
        const auto report = evaluate_corpus(dir.path(), run_config{}, load_assets(), o);
        const auto c = recount_combined(scorecard_jsonl(report));
        const auto m = metrics_from_confusion(report.combined);
        const bool ok = c == report.combined && same_ratio(m.accuracy, m.accuracy_undefined, c.tp + c.tn, c.total()) &&
                        same_ratio(m.recall, m.recall_undefined, c.tp, c.tp + c.fn) &&
                        same_ratio(m.precision, m.precision_undefined, c.tp, c.tp + c.fp) &&
                        same_ratio(m.f1, m.f1_undefined, c.tp == 0 ? 0 : 2 * c.tp,
                                   c.tp == 0 ? 0 : 2 * c.tp + c.fp + c.fn);
        if (ok) ++agree;
    }
    const auto ex = metrics_from_confusion({998, 924, 77, 2, 0});
    auto r4 = [](double v) { return std::round(v * 1e4) / 1e4; };
    const bool example = r4(ex.accuracy) == 0.9605 && r4(ex.recall) == 0.998 && r4(ex.precision) == 0.9284 &&
                         r4(ex.f1) == 0.9619;
    return {agree == corpora && example,
            std::to_string(agree) + "/" + std::to_string(corpora) + " corpora agree with the recount; example " +
                fmt("%.4f", ex.accuracy) + "/" + fmt("%.4f", ex.recall) + "/" + fmt("%.4f", ex.precision) + "/" +
                fmt("%.4f", ex.f1) + (example ? " matches" : " differs")};
}

outcome determinism() {
    auto& run = shared_run();
    if (!run.report) return {false, run.error};
    evaluate_options o;
    o.now = fixed_now;
    o.seed = 42;
    const auto again = evaluate_corpus(run.dir.path() / "corpus", run_config{}, load_assets(), o);
    const auto fmts = std::set<report_format>{report_format::scorecards, report_format::summary};
    emit_reports(*run.report, run.dir.path() / "a", fmts);
    emit_reports(again, run.dir.path() / "b", fmts);
    bool same = true;
    for (const char* f : {"scorecards.jsonl", "summary.csv"}) {
        const auto a = rwtest::read_file(run.dir.path() / "a" / f);
        same = same && !a.empty() && a == rwtest::read_file(run.dir.path() / "b" / f);
    }
    return {same, same ? "scorecards.jsonl and summary.csv byte-identical" : "outputs differ"};
}

outcome applicability_partition() {
    auto& run = shared_run();
    if (!run.report) return {false, run.error};
    std::size_t both = 0;
    for (const auto& r : run.report->results) {
        bool magic = false;
        bool printable = false;
        for (const auto& v : r.card.votes) {
            if (v.result == verdict::abstain) continue;
            if (v.test == test_id::magic_number) magic = true;
            if (v.test == test_id::printable) printable = true;
        }
        if (magic && printable) ++both;
    }
    return {both == 0, std::to_string(both) + " of " + std::to_string(run.report->results.size()) +
                           " samples voted on by both magic_number and printable"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria = {
        {"1 combined-vote accuracy on default synthetic corpus", combined_accuracy},
        {"2 chi-square p-value oracle", chi_square_oracle},
        {"3 entropy kernel", entropy_kernel},
        {"4 BitByte separation", bitbyte_separation},
        {"5 AES key-schedule scanner", aes_scanner},
        {"6 Salsa20/RSA scanners", salsa_rsa_scanners},
        {"7 voting properties", voting_properties},
        {"8 metrics formulas", metrics_formulas},
        {"9 report determinism", determinism},
        {"10 magic/printable applicability partition", applicability_partition},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
              << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
