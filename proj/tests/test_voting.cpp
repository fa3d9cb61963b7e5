#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <rwvote/error.hpp>
#include <rwvote/voting.hpp>

#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

using namespace rwvote;

namespace {

std::vector<vote> make_votes(std::size_t benign, std::size_t malicious, std::size_t abstain) {
    std::vector<vote> out;
    std::size_t t = 0;
    auto next_test = [&] { return all_tests[t++ % all_tests.size()]; };
    for (std::size_t i = 0; i < benign; ++i) out.push_back({next_test(), verdict::benign, std::nullopt, ""});
    for (std::size_t i = 0; i < malicious; ++i) out.push_back({next_test(), verdict::malicious, std::nullopt, ""});
    for (std::size_t i = 0; i < abstain; ++i) out.push_back({next_test(), verdict::abstain, std::nullopt, ""});
    return out;
}

// Majority rule written directly from the counts.
truth oracle(std::size_t b, std::size_t m) {
    if (b + m < 3) return truth::malicious;
    return b > m ? truth::benign : truth::malicious;
}

const timestamp fixed_now = timestamp{} + std::chrono::hours(24 * 365 * 50);

} // namespace

TEST_CASE("aggregate examples") {
    const vote_policy p;
    auto c = aggregate(make_votes(6, 2, 0), p);
    CHECK(c.classification == truth::benign);
    CHECK(c.benign_count == 6);
    CHECK(c.malicious_count == 2);
    CHECK_FALSE(c.tie);

    c = aggregate(make_votes(3, 3, 0), p);
    CHECK(c.classification == truth::malicious);
    CHECK(c.tie);

    c = aggregate(make_votes(0, 0, 8), p);
    CHECK(c.classification == truth::malicious);
    CHECK(c.insufficient_evidence);
    CHECK(c.abstain_count == 8);

    CHECK_THROWS_AS((void)aggregate({}, p), rwvote::error);
}

TEST_CASE("tie policy and effective-vote floor are configurable") {
    vote_policy p;
    p.tie_breaks_to = truth::benign;
    CHECK(aggregate(make_votes(2, 2, 0), p).classification == truth::benign);
    p.min_effective_votes = 5;
    const auto c = aggregate(make_votes(3, 1, 4), p);
    CHECK(c.insufficient_evidence);
    CHECK(c.classification == truth::malicious);
    p.min_effective_votes = 0;
    CHECK(aggregate(make_votes(0, 0, 2), p).tie);
}

TEST_CASE("weights decide the scores") {
    vote_policy p;
    std::vector<vote> v{{test_id::bitbyte, verdict::malicious, std::nullopt, ""},
                        {test_id::printable, verdict::benign, std::nullopt, ""},
                        {test_id::magic_number, verdict::benign, std::nullopt, ""}};
    CHECK(aggregate(v, p).classification == truth::benign);
    p.weights[test_id::bitbyte] = 3.0;
    const auto c = aggregate(v, p);
    CHECK(c.malicious_score == 3.0);
    CHECK(c.benign_score == 2.0);
    CHECK(c.classification == truth::malicious);
    p.weights[test_id::bitbyte] = 0.0;
    CHECK_THROWS_AS(p.validate(), rwvote::error);
}

TEST_CASE("exhaustive vote multisets up to nine") {
    const vote_policy p;
    for (std::size_t n = 1; n <= 9; ++n) {
        for (std::size_t b = 0; b <= n; ++b) {
            for (std::size_t m = 0; b + m <= n; ++m) {
                const std::size_t a = n - b - m;
                CAPTURE(b);
                CAPTURE(m);
                CAPTURE(a);
                auto votes = make_votes(b, m, a);
                const auto card = aggregate(votes, p);
                REQUIRE(card.benign_count + card.malicious_count + card.abstain_count == votes.size());
                REQUIRE(card.classification == oracle(b, m));

                // Every ordering of the same multiset gives the same card.
                std::sort(votes.begin(), votes.end(),
                          [](const vote& x, const vote& y) { return x.result < y.result; });
                do {
                    REQUIRE(aggregate(votes, p).classification == card.classification);
                } while (std::next_permutation(votes.begin(), votes.end(), [](const vote& x, const vote& y) {
                    return x.result < y.result;
                }));

                // Adding abstentions never changes a decided card.
                if (b + m >= p.min_effective_votes) {
                    for (std::size_t extra = 1; extra + n <= 12; ++extra) {
                        REQUIRE(aggregate(make_votes(b, m, a + extra), p).classification == card.classification);
                    }
                }
                // Benign to Malicious never moves a card towards Benign.
                if (b > 0 && card.classification == truth::malicious) {
                    REQUIRE(aggregate(make_votes(b - 1, m + 1, a), p).classification == truth::malicious);
                }
            }
        }
    }
}

TEST_CASE("score card JSON has sorted keys and all votes") {
    std::vector<vote> v{{test_id::bitbyte, verdict::benign, 70.5, "above"},
                        {test_id::file_age, verdict::abstain, std::nullopt, "n/a"},
                        {test_id::printable, verdict::benign, 1.0, "ok"}};
    const auto c = aggregate(v, vote_policy{}, "s1");
    const nlohmann::json j = c;
    const std::string dump = j.dump();
    CHECK(dump.find("\"abstain_count\"") < dump.find("\"benign_count\""));
    CHECK(j.at("classification") == "Malicious");
    CHECK(j.at("insufficient_evidence") == true);
    REQUIRE(j.at("votes").size() == 3);
    CHECK(j.at("votes")[1].at("measured").is_null());
    CHECK(j.at("votes")[0].at("measured") == 70.5);
    CHECK(j.at("sample_id") == "s1");
}

TEST_CASE("run config JSON and overrides") {
    run_config cfg;
    apply_run_override(cfg, "policy.tie_breaks_to", "Benign");
    apply_run_override(cfg, "policy.min_effective_votes", "4");
    apply_run_override(cfg, "policy.weight.printable", "2.5");
    apply_run_override(cfg, "bitbyte_threshold", "50");
    CHECK(cfg.policy.tie_breaks_to == truth::benign);
    CHECK(cfg.policy.min_effective_votes == 4);
    CHECK(cfg.policy.weight(test_id::printable) == 2.5);
    CHECK(cfg.detection.bitbyte_threshold == 50.0);

    const nlohmann::json j = cfg;
    const auto back = parse_run_config(j.dump());
    CHECK(back.policy.tie_breaks_to == truth::benign);
    CHECK(back.policy.min_effective_votes == 4);
    CHECK(back.policy.weight(test_id::printable) == 2.5);
    CHECK(back.detection.bitbyte_threshold == 50.0);

    CHECK_THROWS_AS(apply_run_override(cfg, "policy.weight.nosuch", "1"), rwvote::error);
    CHECK_THROWS_AS(apply_run_override(cfg, "policy.weight.printable", "-1"), rwvote::error);
    CHECK_THROWS_AS(apply_run_override(cfg, "policy.tie_breaks_to", "maybe"), rwvote::error);
    CHECK_THROWS_AS(apply_run_override(cfg, "policy.min_effective_votes", "x"), rwvote::error);
    CHECK_THROWS_AS((void)parse_run_config("[1]"), rwvote::error);
    CHECK_THROWS_AS((void)parse_run_config("{"), rwvote::error);
    CHECK(parse_run_config("{}").policy.min_effective_votes == 3);
}

TEST_CASE("encrypted-like sample is malicious") {
    const auto assets = load_assets();
    const detection_config cfg;
    deterministic_rng rng(42);
    const auto s = file_sample::from_bytes("q8vz1k3p.x7r2fw", rng.bytes(8192), rwtest::days_ago(fixed_now, 30),
                                           rwtest::days_ago(fixed_now, 30));
    const auto card = classify_sample(s, assets, cfg, vote_policy{}, fixed_now);
    CHECK(card.classification == truth::malicious);
    std::map<test_id, verdict> by_test;
    for (const auto& v : card.votes) by_test[v.test] = v.result;
    CHECK(by_test.at(test_id::file_entropy) == verdict::malicious);
    CHECK(by_test.at(test_id::bitbyte) == verdict::malicious);
    CHECK(by_test.at(test_id::known_extension) == verdict::malicious);
    CHECK(by_test.at(test_id::magic_number) == verdict::abstain);
    CHECK(by_test.count(test_id::crypto_artifacts) == 0);
}

TEST_CASE("docx-headed sample is benign with at least four benign votes") {
    const auto assets = load_assets();
    auto content = rwtest::read_file(rwtest::fixture_dir() / "heads" / "sample.docx");
    const auto s = file_sample::from_bytes("quarterly report.docx", content, rwtest::days_ago(fixed_now, 30),
                                           rwtest::days_ago(fixed_now, 30));
    const auto card = classify_sample(s, assets, detection_config{}, vote_policy{}, fixed_now);
    CHECK(card.classification == truth::benign);
    CHECK(card.benign_count >= 4);
}

TEST_CASE("ransom note card follows the traced rule set") {
    const auto assets = load_assets();
    const detection_config cfg;
    deterministic_rng rng(7);
    const std::string lead = "All your files have been encrypted. To recover them send bitcoin to the wallet "
                             "below and visit our onion site. ";
    const std::string text = lead + english_like_text(rng, 400 - lead.size());
    const auto s = file_sample::from_bytes("readme_decrypt.txt", rwtest::bytes_of(text), rwtest::days_ago(fixed_now, 2),
                                           rwtest::days_ago(fixed_now, 2));
    REQUIRE(s.size_bytes() == 400);
    const auto card = classify_sample(s, assets, cfg, vote_policy{}, fixed_now);

    // Recompute the card from the individual tests in canonical order.
    std::vector<vote> expected{
        test_bitbyte(s, assets.curve, cfg),         test_extension_entropy(s, cfg),
        test_file_age(s, fixed_now, cfg),           test_file_entropy(s, cfg),
        test_filename_entropy(s, cfg),              test_known_extension(s, assets.signatures, cfg),
        test_magic_number(s, assets.signatures, cfg), test_printable(s, assets.signatures, cfg),
        test_ransom_note(s, cfg),
    };
    CHECK(card.votes == expected);
    CHECK(card.classification == aggregate(expected, vote_policy{}).classification);
    CHECK(expected.back().result == verdict::malicious);
}

TEST_CASE("votes come in canonical order and only enabled tests run") {
    const auto assets = load_assets();
    detection_config cfg;
    const auto exe = rwtest::read_file(rwtest::fixture_dir() / "heads" / "sample.exe");
    const auto s = file_sample::from_bytes("tool.exe", exe, fixed_now - std::chrono::hours(1000),
                                           fixed_now - std::chrono::hours(1000));
    auto card = classify_sample(s, assets, cfg, vote_policy{}, fixed_now);
    REQUIRE(card.votes.size() == all_tests.size());
    for (std::size_t i = 0; i < all_tests.size(); ++i) CHECK(card.votes[i].test == all_tests[i]);

    cfg.enabled_tests = {test_id::printable, test_id::crypto_artifacts};
    card = classify_sample(s, assets, cfg, vote_policy{}, fixed_now);
    REQUIRE(card.votes.size() == 2);
    CHECK(card.votes[0].test == test_id::crypto_artifacts);
    CHECK(card.insufficient_evidence);

    cfg.enabled_tests.clear();
    CHECK_THROWS_AS((void)classify_sample(s, assets, cfg, vote_policy{}, fixed_now), rwvote::error);
}

TEST_CASE("test errors become abstentions") {
    rwtest::temp_dir dir("voting");
    const auto path = dir.path() / "prog.exe";
    rwtest::write_file(path, rwtest::read_file(rwtest::fixture_dir() / "heads" / "sample.exe"));
    const auto s = file_sample::ingest(path);
    std::filesystem::remove(path);
    detection_config cfg;
    cfg.enabled_tests = {test_id::crypto_artifacts};
    const auto card = classify_sample(s, load_assets(), cfg, vote_policy{}, fixed_now);
    REQUIRE(card.votes.size() == 1);
    CHECK(card.votes[0].result == verdict::abstain);
    CHECK(card.votes[0].evidence.starts_with("error: "));
}

TEST_CASE("classification is deterministic") {
    const auto assets = load_assets();
    deterministic_rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto s = file_sample::from_bytes("f" + std::to_string(i) + ".bin", rng.bytes(2000 + i * 100));
        const nlohmann::json a = classify_sample(s, assets, detection_config{}, vote_policy{}, fixed_now);
        const nlohmann::json b = classify_sample(s, assets, detection_config{}, vote_policy{}, fixed_now);
        CHECK(a.dump() == b.dump());
    }
}

TEST_CASE("asset loading errors propagate") {
    CHECK_THROWS_AS((void)load_assets(std::filesystem::path("/nonexistent/sig.json")), rwvote::error);
    CHECK_THROWS_AS((void)load_assets(std::nullopt, std::filesystem::path("/nonexistent/curve.json")), rwvote::error);
}
