#include <algorithm>
#include <random>

#include "doctest.h"

#include "courl/error.hpp"
#include "courl/ingest.hpp"
#include "courl/url.hpp"
#include "test_util.hpp"

using namespace courl;

TEST_SUITE("url") {
  TEST_CASE("canonical form of a messy URL") {
    auto u = canonicalize_url("HTTPS://WWW.Example.com/Path?utm_source=x&id=2#frag");
    REQUIRE(u);
    CHECK(u->full == "https://example.com/Path?id=2");
    CHECK(u->registered_domain == "example.com");
  }

  TEST_CASE("shortened links stay unresolved") {
    auto u = canonicalize_url("https://t.co/AbC");
    REQUIRE(u);
    CHECK(u->registered_domain == "t.co");
    CHECK(u->full == "https://t.co/AbC");
  }

  TEST_CASE("rejections") {
    CHECK_FALSE(canonicalize_url("not a url"));
    CHECK_FALSE(canonicalize_url(""));
    CHECK_FALSE(canonicalize_url("   "));
    CHECK_FALSE(canonicalize_url("::bad::"));
    CHECK_FALSE(canonicalize_url("https://"));
    CHECK_FALSE(canonicalize_url("https://host.com:80x/"));
  }

  TEST_CASE("variants that must collapse to one identity") {
    const char* variants[] = {
        "https://example.com/a/b",
        "http://example.com/a/b",  // scheme differs, so this one is distinct
        "https://www.example.com/a/b/",
        "HTTPS://EXAMPLE.COM/a/b#section",
        "https://example.com/a/b?utm_campaign=z&fbclid=abc",
        "  https://Example.com/a/b?s=20&t=xyz  ",
    };
    const auto base = canonicalize_url(variants[0]);
    REQUIRE(base);
    CHECK(canonicalize_url(variants[1])->full == "http://example.com/a/b");
    for (std::size_t i = 2; i < std::size(variants); ++i) CHECK(canonicalize_url(variants[i]) == base);
  }

  TEST_CASE("query parameters sorted by name, path case kept") {
    auto u = canonicalize_url("https://news.site/Story?b=2&a=1&utm_medium=m");
    REQUIRE(u);
    CHECK(u->full == "https://news.site/Story?a=1&b=2");
  }

  TEST_CASE("scheme-less input defaults to https; userinfo and port") {
    CHECK(canonicalize_url("example.org/x")->full == "https://example.org/x");
    auto u = canonicalize_url("https://user:pw@Example.org:8080/x");
    REQUIRE(u);
    CHECK(u->full == "https://example.org:8080/x");
    CHECK(u->registered_domain == "example.org");
  }

  TEST_CASE("configurable tracking list") {
    UrlCanonicalizer keep_all(std::vector<std::string>{});
    CHECK(keep_all("https://a.com/?utm_source=1")->full == "https://a.com?utm_source=1");
    UrlCanonicalizer custom({"ref", "x_*"});
    CHECK(custom("https://a.com/p?ref=1&x_a=2&y=3")->full == "https://a.com/p?y=3");
    CHECK(custom.is_tracking_param("x_anything"));
    CHECK_FALSE(custom.is_tracking_param("utm_source"));
  }

  TEST_CASE("idempotence over random URL-like strings") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "abcXYZ019./:?&=#_-@% ";
    const char* schemes[] = {"", "https://", "HTTP://", "//"};
    std::size_t accepted = 0;
    const char* hosts[] = {"Example.com", "www.www.A.org", "t.co", "sub.Site.net:8080", "u@h.io", "localhost"};
    for (int n = 0; n < 3000; ++n) {
      std::string s = std::string(schemes[rng() % 4]) + hosts[rng() % 6];
      const std::size_t len = rng() % 30;
      for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
      auto once = canonicalize_url(s);
      if (!once) continue;
      ++accepted;
      auto twice = canonicalize_url(once->full);
      REQUIRE_MESSAGE(twice, s);
      CHECK_MESSAGE(*twice == *once, s);
    }
    CHECK(accepted > 500);
  }

  TEST_CASE("expansion map") {
    ExpansionMap map;
    map.insert("https://t.co/abc", "https://www.Target.com/story/?utm_source=tw");
    map.insert("https://t.co/bad", "::bad::");
    const auto hit = map.apply(*canonicalize_url("t.co/abc"));
    CHECK(hit.full == "https://target.com/story");
    CHECK(hit.registered_domain == "target.com");
    const auto miss = *canonicalize_url("https://t.co/zzz");
    CHECK(map.apply(miss) == miss);
    CHECK(map.warnings() == 0);
    const auto bad = *canonicalize_url("https://t.co/bad");
    CHECK(apply_expansion_map(bad, map) == bad);
    CHECK(map.warnings() == 1);
  }

  TEST_CASE("expansion map from TSV") {
    TempDir dir("expmap");
    write_text(dir.file("map.tsv"), "# shortened\texpanded\n\nhttps://bit.ly/x\thttps://a.org/1\nnot a key\tx\n");
    const auto map = ExpansionMap::load(dir.file("map.tsv"));
    CHECK(map.size() == 1);
    CHECK(map.apply(*canonicalize_url("bit.ly/x")).full == "https://a.org/1");
    CHECK_THROWS_AS(ExpansionMap::load(dir.file("missing.tsv")), IoError);
  }
}

TEST_SUITE("ingest") {
  TEST_CASE("three lines with one malformed") {
    TempDir dir("ingest");
    write_text(dir.file("p.jsonl"),
               "{\"id\":\"1\",\"author_id\":\"a\",\"urls\":[\"https://t.co/abc\"]}\n"
               "{not json\n"
               "{\"id\":\"2\",\"author_id\":\"b\",\"hashtags\":[\"#Trump2024\"],\"mentions\":[\"@RNCResearch\"]}\n");
    auto corpus = parse_corpus(dir.file("p.jsonl"));
    REQUIRE(corpus.posts.size() == 2);
    CHECK(corpus.stats.rejects == 1);
    CHECK(corpus.stats.lines == 3);
    CHECK(corpus.posts[0].raw_urls == std::vector<std::string>{"https://t.co/abc"});
    CHECK(corpus.posts[1].hashtags == std::vector<std::string>{"trump2024"});
    CHECK(corpus.posts[1].mentions == std::vector<std::string>{"rncresearch"});
  }

  TEST_CASE("empty file and missing file") {
    TempDir dir("ingest_empty");
    write_text(dir.file("e.jsonl"), "");
    auto corpus = parse_corpus(dir.file("e.jsonl"));
    CHECK(corpus.posts.empty());
    CHECK(corpus.stats.rejects == 0);
    CHECK_THROWS_AS(parse_corpus(dir.file("nope.jsonl")), IoError);
  }

  TEST_CASE("rejects: missing ids, bad types, negative counts, duplicates") {
    const PostSchema s;
    CHECK_FALSE(parse_post_line(R"({"author_id":"a"})", s));
    CHECK_FALSE(parse_post_line(R"({"id":"1"})", s));
    CHECK_FALSE(parse_post_line(R"({"id":"","author_id":"a"})", s));
    CHECK_FALSE(parse_post_line(R"({"id":"1","author_id":"a","urls":"x"})", s));
    CHECK_FALSE(parse_post_line(R"({"id":"1","author_id":"a","like_count":-1})", s));
    CHECK_FALSE(parse_post_line(R"([1,2])", s));
    CHECK(parse_post_line(R"({"id":7,"author_id":9})", s));

    TempDir dir("dups");
    write_text(dir.file("d.jsonl"), "{\"id\":\"1\",\"author_id\":\"a\"}\n{\"id\":\"1\",\"author_id\":\"b\"}\n");
    auto corpus = parse_corpus(dir.file("d.jsonl"));
    CHECK(corpus.posts.size() == 1);
    CHECK(corpus.stats.rejects == 1);
  }

  TEST_CASE("field-name mapping") {
    auto schema = PostSchema::from_json({{"post_id", "tweet_id"}, {"author_id", "user"}, {"urls", "links"}});
    auto p = parse_post_line(R"({"tweet_id":"t1","user":"u1","links":["https://x.org/a"],"lang":"en"})", schema);
    REQUIRE(p);
    CHECK(p->post_id == "t1");
    CHECK(p->author_id == "u1");
    CHECK(p->raw_urls.size() == 1);
    CHECK(p->language == "en");
    CHECK_THROWS_AS(PostSchema::from_json({{"no_such_field", "x"}}), ConfigError);
  }

  TEST_CASE("large file keeps input order across parse batches") {
    TempDir dir("order");
    std::string text;
    for (int i = 0; i < 40000; ++i)
      text += "{\"id\":\"" + std::to_string(i) + "\",\"author_id\":\"u" + std::to_string(i % 17) + "\"}\n";
    write_text(dir.file("big.jsonl"), text);
    std::vector<std::string> ids;
    read_posts(dir.file("big.jsonl"), {}, [&](Post&& p) { ids.push_back(p.post_id); });
    REQUIRE(ids.size() == 40000);
    for (int i = 0; i < 40000; ++i) REQUIRE(ids[static_cast<std::size_t>(i)] == std::to_string(i));
  }

  TEST_CASE("profiles and handle list") {
    TempDir dir("profiles");
    write_text(dir.file("p.jsonl"),
               "{\"user_id\":\"1\",\"handle\":\"Alice\",\"bio\":\"hi\",\"suspended\":true}\n"
               "{\"user_id\":\"1\",\"handle\":\"dup\"}\n"
               "{\"handle\":\"noid\"}\n"
               "{\"user_id\":\"2\",\"handle\":\"bob\",\"bio_urls\":[\"https://b.org\"]}\n");
    auto set = read_profiles(dir.file("p.jsonl"));
    REQUIRE(set.profiles.size() == 2);
    CHECK(set.stats.rejects == 2);
    CHECK(set.profiles[0].suspended == true);
    CHECK_FALSE(set.profiles[1].suspended.has_value());
    write_text(dir.file("h.txt"), "@Alice\nbob\n\n  @@Carol \n");
    CHECK(read_handle_list(dir.file("h.txt")) == std::set<std::string>{"alice", "bob", "carol"});
  }

  TEST_CASE("filter_active_users") {
    auto post = [](std::string author, std::vector<std::string> urls) {
      Post p;
      p.author_id = std::move(author);
      p.raw_urls = std::move(urls);
      return p;
    };
    std::vector<Post> posts{post("a", {"https://x.org/1", "https://x.org/2", "https://x.org/1"}),
                            post("a", {"https://x.org/3", "https://x.org/4"}),
                            post("b", {"https://x.org/1", "not a url"}),
                            post("b", {"https://x.org/9"}),
                            post("c", {"https://x.org/1"}),
                            post("d", {})};
    CHECK(filter_active_users(posts, 5) == std::set<std::string>{"a"});
    CHECK(filter_active_users(posts, 2) == std::set<std::string>{"a", "b"});
    CHECK(filter_active_users(posts, 1) == std::set<std::string>{"a", "b", "c"});
    CHECK_THROWS_AS(filter_active_users(posts, 0), ConfigError);
    // monotone in min_urls
    for (std::size_t k = 1; k < 7; ++k) {
      auto hi = filter_active_users(posts, k + 1), lo = filter_active_users(posts, k);
      CHECK(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
    }
  }

  TEST_CASE("corpus statistics: exact counts, permutation invariance, merge") {
    std::vector<Post> posts;
    std::mt19937_64 rng(3);
    const char* tags[] = {"trump2024", "vote", "news"};
    const char* urls[] = {"https://www.foxnews.com/a", "https://t.co/x", "https://youtube.com/watch?v=1", "bad url"};
    const char* langs[] = {"en", "es", ""};
    std::uint64_t trump = 0;
    for (int i = 0; i < 500; ++i) {
      Post p;
      p.post_id = std::to_string(i);
      p.author_id = "u" + std::to_string(i % 40);
      const auto t = rng() % 3;
      p.hashtags.push_back(tags[t]);
      trump += t == 0;
      p.mentions.push_back("rncresearch");
      p.raw_urls.push_back(urls[rng() % 4]);
      p.language = langs[rng() % 3];
      p.likes = static_cast<std::int64_t>(rng() % 5);
      posts.push_back(p);
    }
    const auto stats = compute_corpus_stats(posts);
    CHECK(stats.n_posts == 500);
    CHECK(stats.n_authors == 40);
    CHECK(stats.hashtag_counts.at("trump2024") == trump);
    CHECK(stats.mention_counts.at("rncresearch") == 500);
    std::uint64_t domain_total = 0, lang_total = 0, with_lang = 0;
    for (const auto& [d, n] : stats.domain_counts) domain_total += n;
    for (const auto& [l, n] : stats.language_distribution) lang_total += n;
    for (const auto& p : posts) with_lang += !p.language.empty();
    CHECK(domain_total + stats.n_rejected_urls == stats.n_urls);
    CHECK(lang_total == with_lang);
    CHECK(stats.domain_counts.contains("foxnews.com"));
    CHECK(stats.domain_counts.contains("t.co"));

    auto shuffled = posts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(compute_corpus_stats(shuffled).to_json() == stats.to_json());

    CorpusStatsBuilder left, right;
    for (std::size_t i = 0; i < posts.size(); ++i) (i % 3 ? left : right).add(posts[i]);
    right.merge(left);
    CHECK(right.finish().to_json() == stats.to_json());
  }

  TEST_CASE("empty corpus statistics") {
    const auto stats = compute_corpus_stats(std::vector<Post>{});
    CHECK(stats.n_posts == 0);
    CHECK(stats.hashtag_counts.empty());
    CHECK(stats.domain_counts.empty());
  }

  TEST_CASE("top_k orders by count then item") {
    CountMap m{{"b", 5}, {"a", 5}, {"c", 9}, {"d", 1}};
    auto top = top_k(m, 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0].first == "c");
    CHECK(top[1].first == "a");
    CHECK(top[2].first == "b");
    CHECK(top_k(m, 10).size() == 4);
  }
}
