#include <omp.h>

#include "doctest.h"

#include "courl/error.hpp"
#include "courl/graph.hpp"
#include "courl/io.hpp"
#include "courl/pipeline.hpp"
#include "courl/synth.hpp"
#include "test_util.hpp"

using namespace courl;

namespace {

Post share(std::string id, std::string author, std::string url) {
  Post p;
  p.post_id = std::move(id);
  p.author_id = std::move(author);
  p.raw_urls = {std::move(url)};
  return p;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("parameter validation and JSON") {
    DetectionParams p;
    CHECK_NOTHROW(p.validate());
    auto bad = p;
    bad.percentile = 100;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.similarity_threshold = -0.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.min_urls = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = p;
    bad.centrality.tol = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    DetectionParams q;
    q.update_from_json({{"k_core", 3}, {"normalization", "max"}, {"percentile", 95.0}, {"unrelated", 1}});
    CHECK(q.k_core == 3u);
    CHECK(q.centrality.normalization == Normalization::max);
    DetectionParams r;
    r.update_from_json(q.to_json());
    CHECK(r.to_json() == q.to_json());
    CHECK_THROWS_AS(r.update_from_json({{"min_urls", "five"}}), ConfigError);
  }

  TEST_CASE("empty results are reported as such") {
    std::vector<Post> posts{share("1", "a", "https://x.org/1"), share("2", "b", "https://x.org/2")};
    DetectionParams p;
    p.min_urls = 1;
    CHECK_THROWS_AS(run_detection(posts, p), EmptyResultError);  // disjoint: no edges
    p.min_urls = 5;
    CHECK_THROWS_AS(run_detection(posts, p), EmptyResultError);  // nobody active
  }

  TEST_CASE("one planted campaign yields one dominant cluster") {
    // p=97 over 1030 nodes flags 31: room for the 30 planted users
    SynthConfig c;
    c.n_coordinated = 30;
    const auto corpus = generate(c);
    DetectionParams p;
    p.percentile = 97;
    const auto r = run_detection(corpus.posts, p);
    CHECK(r.scores.converged);
    REQUIRE_FALSE(r.report.clusters.empty());
    const auto& top = *std::max_element(r.report.clusters.begin(), r.report.clusters.end(),
                                        [](const auto& a, const auto& b) { return a.members.size() < b.members.size(); });
    std::size_t planted = 0;
    for (const auto& m : top.members) planted += corpus.truth.coordinated_ids.contains(m);
    CHECK(planted >= 27);
    REQUIRE_FALSE(top.shared_urls.empty());
    CHECK(top.shared_urls[0].domain == "outlet.example.net");
    const auto m = evaluate(r.report, corpus.truth);
    CHECK(*m.precision >= 0.9);
    CHECK(*m.recall >= 0.9);
  }

  TEST_CASE("optional k-core restricts the scored network") {
    const auto corpus = generate(SynthConfig{});
    DetectionParams p;
    p.k_core = 10;
    const auto r = run_detection(corpus.posts, p);
    CHECK(r.network.n_nodes() < r.full_network.n_nodes());
    for (auto c : core_numbers(r.network)) CHECK(c >= 10);
  }

  TEST_CASE("expansion map merges shortened links") {
    std::vector<Post> posts;
    for (int u = 0; u < 3; ++u)
      for (int k = 0; k < 5; ++k)
        posts.push_back(share(std::to_string(u * 10 + k), "u" + std::to_string(u),
                              u == 0 ? "https://t.co/s" + std::to_string(k)
                                     : "https://news.org/" + std::to_string(k)));
    for (int k = 0; k < 40; ++k) posts.push_back(share("f" + std::to_string(k), "filler" + std::to_string(k % 8),
                                                       "https://other.org/" + std::to_string(k)));
    ExpansionMap map;
    for (int k = 0; k < 5; ++k) map.insert("https://t.co/s" + std::to_string(k), "https://news.org/" + std::to_string(k));
    DetectionParams p;
    p.percentile = 50;
    const auto without = collect_shares(posts);
    const auto with = collect_shares(posts, {}, &map);
    const auto r0 = run_detection(without, p);
    const auto r1 = run_detection(with, p);
    CHECK(r1.full_network.n_edges() > r0.full_network.n_edges());
  }
}

TEST_SUITE("io") {
  TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, 0.0}) CHECK(std::stod(format_double(v)) == v);
  }

  TEST_CASE("CSV escaping") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  }

  TEST_CASE("sha256 known answer") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    TempDir dir("sha");
    write_text(dir.file("f"), "abc");
    CHECK(sha256_file(dir.file("f")) == sha256_hex("abc"));
    CHECK_THROWS_AS(sha256_file(dir.file("missing")), IoError);
  }

  TEST_CASE("atomic writes leave no temporaries") {
    TempDir dir("atomic");
    write_file_atomic(dir.file("out.txt"), "one");
    write_file_atomic(dir.file("out.txt"), "two");
    CHECK(read_file(dir.file("out.txt")) == "two");
    {
      AtomicWriter w(dir.file("stream.txt"));
      w.stream() << "abandoned";
    }
    CHECK_FALSE(std::filesystem::exists(dir.file("stream.txt")));
    {
      AtomicWriter w(dir.file("stream.txt"));
      w.stream() << "kept";
      w.commit();
    }
    CHECK(read_file(dir.file("stream.txt")) == "kept");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
    CHECK(files == 2);
    CHECK_THROWS_AS(write_file_atomic(dir.file("no/such/dir/x"), "x"), IoError);
  }

  TEST_CASE("matrix and network snapshots round-trip") {
    SynthConfig c;
    c.n_organic = 200;
    c.n_coordinated = 10;
    const auto r = run_detection(generate(c).posts, DetectionParams{});
    const auto m = matrix_from_snapshot(matrix_snapshot(r.matrix, 0.5));
    CHECK(m.users == r.matrix.users);
    CHECK(m.urls == r.matrix.urls);
    CHECK(m.row_ptr == r.matrix.row_ptr);
    CHECK(m.cols == r.matrix.cols);
    CHECK(m.counts == r.matrix.counts);
    CHECK(m.weights == r.matrix.weights);
    CHECK(matrix_snapshot(r.matrix, 0.5)["header"]["tfidf_variant"] == "standard");

    const auto g = network_from_snapshot(network_snapshot(r.network));
    CHECK(g.nodes == r.network.nodes);
    CHECK(g.edges == r.network.edges);
    CHECK_THROWS_AS(network_from_snapshot({{"nodes", {"a"}}}), IoError);
  }

  TEST_CASE("exports") {
    SimilarityNetwork g;
    g.nodes = {"a", "b&c", "d"};
    g.edges = {{0, 1, 0.5}, {1, 2, 0.25}};
    CHECK(edge_list_csv(g) == "source,target,weight\na,b&c,0.5\nb&c,d,0.25\n");
    const auto xml = graphml(g);
    CHECK(xml.find("b&amp;c") != std::string::npos);
    CHECK(xml.find("<edge id=\"e1\" source=\"n1\" target=\"n2\">") != std::string::npos);

    const auto scores = eigenvector_centrality(g);
    auto report = percentile_threshold(scores, 50);
    report.clusters = extract_clusters(g, report.flagged_ids());
    const auto csv = report_csv(scores, report);
    CHECK(csv.starts_with("user_id,score,flagged,cluster_id,suspended\n"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find("\"b&c\"") == std::string::npos);  // '&' needs no quoting
  }
}
