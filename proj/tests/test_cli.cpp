#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "courl/io.hpp"
#include "test_util.hpp"

#ifndef COURL_CLI_PATH
#error "COURL_CLI_PATH must point at the courl executable"
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(COURL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  return n;
}

// Small corpus shared by the tests: 150 organic + 10 coordinated users.
const TempDir& corpus() {
  static TempDir dir("cli_corpus");
  static const int rc = run("synth --n-organic 150 --n-coordinated 10 --seed 3 -o " + dir.file("syn"));
  REQUIRE(rc == 0);
  return dir;
}

std::string posts() { return corpus().file("syn/posts.jsonl"); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth writes corpus, truth and metadata with digests") {
    const auto& d = corpus();
    for (const char* f : {"posts.jsonl", "profiles.jsonl", "truth.json", "run.json"})
      CHECK(fs::exists(d.file(std::string("syn/") + f)));
    const auto run_json = courl::read_json_file(d.file("syn/run.json"));
    CHECK(run_json["parameters"]["seed"] == 3);
    CHECK(run_json["parameters"]["rng"] == "mt19937_64");
    CHECK(run_json["summary"]["posts_sha256"] == courl::sha256_file(d.file("syn/posts.jsonl")));
    CHECK(courl::read_json_file(d.file("syn/truth.json"))["coordinated_ids"].size() == 10);

    TempDir again("cli_synth_again");
    REQUIRE(run("synth --n-organic 150 --n-coordinated 10 --seed 3 -o " + again.file("s")) == 0);
    CHECK(courl::read_file(again.file("s/posts.jsonl")) == courl::read_file(d.file("syn/posts.jsonl")));
  }

  TEST_CASE("detect writes every artifact and is byte-reproducible") {
    TempDir out("cli_detect");
    REQUIRE(run("detect -i " + posts() + " --percentile 90 -o " + out.file("a")) == 0);
    REQUIRE(run("detect -i " + posts() + " --percentile 90 --threads 1 -o " + out.file("b")) == 0);
    for (const char* f : {"report.json", "report.csv", "edges.csv", "network.graphml", "network.json",
                          "diagnostics.json", "run.json"}) {
      REQUIRE(fs::exists(out.file(std::string("a/") + f)));
      if (std::string(f) != "run.json")
        CHECK(courl::read_file(out.file(std::string("a/") + f)) == courl::read_file(out.file(std::string("b/") + f)));
    }
    auto ra = courl::read_json_file(out.file("a/run.json"));
    auto rb = courl::read_json_file(out.file("b/run.json"));
    CHECK(ra["inputs"][0]["sha256"] == courl::sha256_file(posts()));
    CHECK(ra["parameters"]["detection"]["percentile"] == 90.0);
    for (auto* r : {&ra, &rb}) {
      r->erase("created_at");
      r->erase("threads");
    }
    CHECK(ra == rb);
  }

  TEST_CASE("config file with flag override") {
    TempDir out("cli_config");
    write_text(out.file("cfg.json"), json{{"input", posts()}, {"percentile", 80.0}, {"min_urls", 3}}.dump());
    REQUIRE(run("detect --config " + out.file("cfg.json") + " --percentile 95 -o " + out.file("o")) == 0);
    const auto params = courl::read_json_file(out.file("o/run.json"))["parameters"]["detection"];
    CHECK(params["percentile"] == 95.0);
    CHECK(params["min_urls"] == 3);
  }

  TEST_CASE("exit codes and no partial outputs") {
    TempDir out("cli_errors");
    CHECK(run("stats -i " + out.file("missing.jsonl") + " -o " + out.file("s")) == 3);
    CHECK(count_files(out.file("s")) == 0);
    CHECK(run("detect -i " + out.file("missing.jsonl") + " -o " + out.file("d")) == 3);
    CHECK(count_files(out.file("d")) == 0);
    CHECK(run("detect -i " + posts() + " --percentile 150 -o " + out.file("d")) == 2);
    CHECK(run("detect -i " + posts() + " --tfidf bm25 -o " + out.file("d")) == 2);
    CHECK(run("detect -o " + out.file("d")) == 2);
    CHECK(run("detect -i " + posts() + " --no-such-flag") == 2);
    CHECK(count_files(out.file("d")) == 0);

    write_text(out.file("disjoint.jsonl"),
               "{\"id\":\"1\",\"author_id\":\"a\",\"urls\":[\"https://x.org/1\"]}\n"
               "{\"id\":\"2\",\"author_id\":\"b\",\"urls\":[\"https://x.org/2\"]}\n");
    CHECK(run("detect -i " + out.file("disjoint.jsonl") + " --min-urls 1 -o " + out.file("e")) == 4);
    CHECK(count_files(out.file("e")) == 0);
  }

  TEST_CASE("stats tables, including an empty corpus") {
    TempDir out("cli_stats");
    REQUIRE(run("stats -i " + posts() + " --top-k 5 -o " + out.file("s")) == 0);
    const auto hashtags = courl::read_file(out.file("s/top_hashtags.csv"));
    CHECK(hashtags.starts_with("item,count\n"));
    CHECK(std::count(hashtags.begin(), hashtags.end(), '\n') == 6);
    CHECK(courl::read_json_file(out.file("s/stats.json"))["n_posts"].get<int>() > 0);

    write_text(out.file("empty.jsonl"), "");
    REQUIRE(run("stats -i " + out.file("empty.jsonl") + " -o " + out.file("e")) == 0);
    CHECK(courl::read_file(out.file("e/top_hashtags.csv")) == "item,count\n");
    CHECK(courl::read_json_file(out.file("e/stats.json"))["n_posts"] == 0);
  }

  TEST_CASE("build then export with and without the default 10-core") {
    TempDir out("cli_export");
    REQUIRE(run("build -i " + posts() + " -o " + out.file("b")) == 0);
    CHECK(fs::exists(out.file("b/matrix.json")));
    const auto net = courl::read_json_file(out.file("b/network.json"));
    REQUIRE(run("export --network " + out.file("b/network.json") + " --no-k-core -o " + out.file("all")) == 0);
    const auto all = courl::read_file(out.file("all/edges.csv"));
    CHECK(static_cast<std::size_t>(std::count(all.begin(), all.end(), '\n')) == net["edges"].size() + 1);
    REQUIRE(run("export --network " + out.file("b/network.json") + " -o " + out.file("core")) == 0);
    CHECK(courl::read_json_file(out.file("core/run.json"))["parameters"]["k_core"] == 10);
    CHECK(fs::exists(out.file("core/network.graphml")));
    REQUIRE(run("export --network " + out.file("b/network.json") + " --format csv -o " + out.file("csv")) == 0);
    CHECK_FALSE(fs::exists(out.file("csv/network.graphml")));
    CHECK(run("export --network " + out.file("b/network.json") + " --format png -o " + out.file("x")) == 2);
  }

  TEST_CASE("characterize: report input, empty set, unknown ids") {
    TempDir out("cli_char");
    REQUIRE(run("detect -i " + posts() + " --percentile 90 -o " + out.file("d")) == 0);
    const std::string profiles = corpus().file("syn/profiles.jsonl");
    REQUIRE(run("characterize -i " + posts() + " --profiles " + profiles + " --flagged " + out.file("d/report.json") +
                " --probe \"tired of the lies\" -o " + out.file("c")) == 0);
    const auto f = courl::read_json_file(out.file("c/forensics.json"));
    REQUIRE_FALSE(f["bio_clusters"].empty());
    CHECK(f["bio_clusters"][0]["match_kind"] == "exact_template");
    CHECK(f["domain_counts"].contains("outlet.example.net"));

    write_text(out.file("none.txt"), "");
    REQUIRE(run("characterize -i " + posts() + " --profiles " + profiles + " --flagged " + out.file("none.txt") +
                " -o " + out.file("e")) == 0);
    CHECK(courl::read_json_file(out.file("e/forensics.json"))["bio_clusters"].empty());

    write_text(out.file("ghost.txt"), "ghost-user\n");
    REQUIRE(run("characterize -i " + posts() + " --profiles " + profiles + " --flagged " + out.file("ghost.txt") +
                " -o " + out.file("g")) == 0);
    CHECK(courl::read_file(out.file("g/user_activity.csv")) == "user_id,posts,links\nghost-user,0,0\n");
    CHECK(run("characterize -i " + posts() + " --profiles " + profiles + " --flagged " + out.file("nope.txt") +
              " -o " + out.file("n")) == 3);
  }

  TEST_CASE("eval and sweep") {
    TempDir out("cli_eval");
    REQUIRE(run("eval --flagged " + corpus().file("syn/truth.json") + " --truth " + corpus().file("syn/truth.json") +
                " -o " + out.file("same")) != 0);  // truth.json is not a report or an id list
    const auto truth = courl::read_json_file(corpus().file("syn/truth.json"));
    write_text(out.file("ids.json"), truth["coordinated_ids"].dump());
    REQUIRE(run("eval --flagged " + out.file("ids.json") + " --truth " + corpus().file("syn/truth.json") + " -o " +
                out.file("e")) == 0);
    const auto csv = courl::read_file(out.file("e/metrics.csv"));
    CHECK(csv.find("\n10,10,0,0,,1,1,1\n") != std::string::npos);

    REQUIRE(run("sweep --n-organic 200 --n-coordinated 10 --percentiles 95 97 99 -o " + out.file("s")) == 0);
    std::istringstream rows(courl::read_file(out.file("s/metrics.csv")));
    std::string line;
    std::getline(rows, line);
    std::vector<long> flagged;
    while (std::getline(rows, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
      REQUIRE(cells.size() >= 8);
      CHECK(cells[4] == "ok");
      flagged.push_back(std::stol(cells[7]));
    }
    REQUIRE(flagged.size() == 3);
    CHECK(flagged[0] >= flagged[1]);
    CHECK(flagged[1] >= flagged[2]);
  }
}
