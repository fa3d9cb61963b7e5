#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <rwvote/cryptoscan.hpp>

#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>
#include <sys/wait.h>

namespace {

struct run_result {
    int status = -1;
    std::string out;
};

// Runs the CLI with stdout captured and stderr discarded.
run_result run(const std::string& args) {
    const std::string cmd = std::string("'") + RWVOTE_CLI + "' " + args + " 2>/dev/null";
    run_result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    const auto b = rwtest::read_file(p);
    return {b.begin(), b.end()};
}

} // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run("").status == 1);
    CHECK(run("frobnicate").status == 1);
    CHECK(run("scan").status == 1);
    CHECK(run("keyscan").status == 1);
    CHECK(run("--help").status == 0);
}

TEST_CASE("IO errors exit 2") {
    CHECK(run("evaluate /nonexistent/corpus").status == 2);
    CHECK(run("keyscan /nonexistent/blob").status == 2);
    CHECK(run("scan /nonexistent/file").status == 2);
    rwtest::temp_dir dir("cli_empty");
    CHECK(run("evaluate " + q(dir.path())).status == 2);
}

TEST_CASE("bad configuration exits 1") {
    const auto doc = rwtest::fixture_dir() / "heads" / "sample.pdf";
    CHECK(run("scan --set printable_min=2 " + q(doc)).status == 1);
    CHECK(run("scan --set nosuchkey=1 " + q(doc)).status == 1);
    CHECK(run("scan --set policy.weight.printable=0 " + q(doc)).status == 1);
}

TEST_CASE("scan prints one score card per file") {
    rwtest::temp_dir dir("cli_scan");
    const auto a = rwtest::fixture_dir() / "heads" / "sample.pdf";
    const auto b = rwtest::fixture_dir() / "heads" / "sample.png";
    const auto out = dir.path() / "cards.jsonl";
    const auto r = run("scan --now 2030-01-01T00:00:00Z --jsonl " + q(out) + " " + q(a) + " " + q(b));
    REQUIRE(r.status == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    for (const auto& l : lines) {
        const auto j = nlohmann::json::parse(l);
        CHECK(j.contains("classification"));
        CHECK(j.at("votes").size() == 9);
    }
    CHECK(slurp(out) == r.out);

    // Fixed reference time makes the output reproducible.
    CHECK(run("scan --now 1893456000 " + q(a) + " " + q(b)).out == r.out);
}

TEST_CASE("overrides reach the tests") {
    const auto a = rwtest::fixture_dir() / "heads" / "sample.pdf";
    const auto r = run("scan --now 1893456000 --set enabled_tests=printable,magic_number,file_entropy " + q(a));
    REQUIRE(r.status == 0);
    const auto j = nlohmann::json::parse(lines_of(r.out).at(0));
    CHECK(j.at("votes").size() == 3);
}

TEST_CASE("gen-corpus then evaluate writes the report set") {
    rwtest::temp_dir dir("cli_eval");
    rwtest::write_file(dir.path() / "spec.json",
                       std::string(R"({"plaintext_benign":6,"structured_benign":6,"compressed_like":3,)"
                                   R"("encrypted_like":6,"ransom_notes":3})"));
    const auto corpus = dir.path() / "corpus";
    auto r = run("gen-corpus --spec " + q(dir.path() / "spec.json") + " --seed 7 --out " + q(corpus));
    REQUIRE(r.status == 0);
    CHECK(std::filesystem::exists(corpus / "manifest.csv"));

    r = run("evaluate " + q(corpus) + " --now 1893456000 --seed 7 --out " + q(dir.path() / "out"));
    REQUIRE(r.status == 0);
    CHECK(r.out == slurp(dir.path() / "out" / "summary.csv"));
    CHECK(lines_of(r.out).back().starts_with("COMBINED,"));
    CHECK(lines_of(slurp(dir.path() / "out" / "scorecards.jsonl")).size() == 24);
    const auto info = nlohmann::json::parse(slurp(dir.path() / "out" / "run.json"));
    CHECK(info.at("seed") == 7);

    const auto again = run("evaluate " + q(corpus) + " --now 1893456000 --threads 3 --seed 7 --out " +
                           q(dir.path() / "out2"));
    CHECK(slurp(dir.path() / "out" / "scorecards.jsonl") == slurp(dir.path() / "out2" / "scorecards.jsonl"));
}

TEST_CASE("keyscan reports planted keys as JSONL") {
    rwtest::temp_dir dir("cli_keys");
    std::mt19937_64 rng(31);
    auto blob = rwtest::random_bytes(rng, 100000);
    const auto key = rwtest::random_bytes(rng, 16);
    const auto sched = rwvote::cryptoscan::aes_expand_key(key);
    std::copy(sched.begin(), sched.end(), blob.begin() + 5000);
    const auto der = rwtest::read_file(rwtest::fixture_dir() / "rsa" / "private_1024_0.der");
    std::copy(der.begin(), der.end(), blob.begin() + 40000);
    rwtest::write_file(dir.path() / "dump.bin", blob);

    auto r = run("keyscan " + q(dir.path() / "dump.bin"));
    REQUIRE(r.status == 0);
    auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    auto j = nlohmann::json::parse(lines[0]);
    CHECK(j.at("algorithm") == "AES128");
    CHECK(j.at("offset") == 5000);
    std::string hex;
    for (auto b : key) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", b);
        hex += buf;
    }
    CHECK(j.at("key") == hex);
    j = nlohmann::json::parse(lines[1]);
    CHECK(j.at("algorithm") == "RSA");
    CHECK(j.at("offset") == 40000);

    r = run("keyscan --rsa " + q(dir.path() / "dump.bin"));
    CHECK(lines_of(r.out).size() == 1);
    r = run("keyscan --aes --threads 4 " + q(dir.path() / "dump.bin"));
    CHECK(lines_of(r.out).size() == 1);
}

TEST_CASE("apiscan and notescan") {
    rwtest::temp_dir dir("cli_api");
    const std::string text = std::string("xxCreateFileW\0WriteFile\0..", 26) +
                             "your files are encrypted, pay in bitcoin";
    rwtest::write_file(dir.path() / "blob.bin", text);
    auto r = run("apiscan --per-name " + q(dir.path() / "blob.bin"));
    REQUIRE(r.status == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "name,total,size,per_kb");
    CHECK(lines[1].starts_with("blob.bin,2," + std::to_string(text.size()) + ","));
    CHECK(r.out.find("WriteFile,1") != std::string::npos);

    r = run("notescan " + q(dir.path() / "blob.bin"));
    REQUIRE(r.status == 0);
    REQUIRE(lines_of(r.out).size() == 1);
    const auto j = nlohmann::json::parse(lines_of(r.out)[0]);
    CHECK(j.at("keywords") == nlohmann::json::array({"bitcoin", "encrypted"}));
}

TEST_CASE("control-curve reproduces the bundled asset") {
    rwtest::temp_dir dir("cli_curve");
    const auto r = run("control-curve --out " + q(dir.path() / "curve.json"));
    REQUIRE(r.status == 0);
    const auto ours = nlohmann::json::parse(slurp(dir.path() / "curve.json"));
    const auto bundled = nlohmann::json::parse(slurp(std::filesystem::path(RWVOTE_FIXTURE_DIR) / ".." / ".." /
                                                      "assets" / "control_curve.json"));
    CHECK(ours == bundled);
    CHECK(run("control-curve --trials 10").status == 1);
}
