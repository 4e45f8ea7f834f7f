#include <random>

#include "doctest.h"

#include "courl/characterize.hpp"
#include "courl/error.hpp"
#include "oracles.hpp"

using namespace courl;

namespace {

UserProfile profile(std::string id, std::string bio, std::vector<std::string> links = {}) {
  UserProfile p;
  p.user_id = std::move(id);
  p.handle = p.user_id;
  p.bio = std::move(bio);
  p.bio_urls = std::move(links);
  return p;
}

Post post(std::string id, std::string author, std::vector<std::string> urls, std::vector<std::string> media = {},
          bool repost = false, std::int64_t t = 0) {
  Post p;
  p.post_id = std::move(id);
  p.author_id = std::move(author);
  p.raw_urls = std::move(urls);
  p.media_digests = std::move(media);
  p.is_repost = repost;
  p.created_at = t;
  return p;
}

std::u32string ascii32(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_SUITE("characterize") {
  TEST_CASE("bio normalisation") {
    CHECK(normalize_bio("  Are you TIRED of fake news?!  clik on\tthe link below.. ") ==
          "are you tired of fake news clik on the link below");
    CHECK(normalize_bio("Proud 🇺🇸 patriot!") == "proud 🇺🇸 patriot");
    CHECK(normalize_bio("Café, s'il vous plaît") == "café sil vous plaît");
    const std::string samples[] = {"A  b,,c", "  ", "x!y?z", "Émile — ok"};
    for (const auto& s : samples) CHECK(normalize_bio(normalize_bio(s)) == normalize_bio(s));
  }

  TEST_CASE("3-gram shingles and Jaccard agree with the brute-force oracle") {
    CHECK(char_shingles("abcd") == std::set<std::u32string>{U"abc", U"bcd"});
    CHECK(char_shingles("ab") == std::set<std::u32string>{U"ab"});
    CHECK(char_shingles("🇺🇸a").size() == 1);  // three code points
    std::mt19937_64 rng(51);
    const std::string alphabet = "abcde ";
    for (int trial = 0; trial < 300; ++trial) {
      std::string a, b;
      for (std::size_t i = 0, n = rng() % 20; i < n; ++i) a.push_back(alphabet[rng() % alphabet.size()]);
      for (std::size_t i = 0, n = rng() % 20; i < n; ++i) b.push_back(alphabet[rng() % alphabet.size()]);
      CHECK(jaccard(char_shingles(a), char_shingles(b)) == doctest::Approx(oracle::jaccard_u32(ascii32(a), ascii32(b))));
    }
  }

  TEST_CASE("template probe captures 15 profiles with varied surrounding text") {
    const std::string phrase = "Are you tired of fake news? clik on the link below";
    std::vector<UserProfile> profiles;
    for (int i = 0; i < 15; ++i)
      profiles.push_back(profile("c" + std::to_string(i), "Patriot #" + std::to_string(i) + ". " + phrase +
                                                              (i % 2 ? " 🇺🇸" : " Stay strong!")));
    for (int i = 0; i < 20; ++i) profiles.push_back(profile("o" + std::to_string(i), "organic bio " + std::to_string(i * 7919)));
    BioTemplateOptions opts;
    opts.template_probes = {phrase};
    const auto clusters = find_bio_templates(profiles, opts);
    std::size_t exact = 0;
    for (const auto& c : clusters) {
      if (c.match_kind != BioMatchKind::exact_template) continue;
      ++exact;
      CHECK(c.members.size() == 15);
      CHECK(c.normalized_text == normalize_bio(phrase));
      for (const auto& m : c.members) CHECK(m[0] == 'c');
    }
    CHECK(exact == 1);
  }

  TEST_CASE("identical bios group exactly; emoji variants are near duplicates") {
    std::vector<UserProfile> profiles{profile("a", "Love my country and my family"),
                                      profile("b", "love my COUNTRY and my family!"),
                                      profile("c", "Love my country and my family 🇺🇸"),
                                      profile("d", "Completely unrelated gardening notes")};
    const auto clusters = find_bio_templates(profiles);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].match_kind == BioMatchKind::exact_template);
    CHECK(clusters[0].members == std::set<std::string>{"a", "b"});
    CHECK(clusters[1].match_kind == BioMatchKind::near_duplicate);
    CHECK(clusters[1].members == std::set<std::string>{"a", "b", "c"});
    // the pair is near-duplicate by the oracle as well
    const auto x = normalize_bio(profiles[0].bio), y = normalize_bio(profiles[2].bio);
    CHECK(jaccard(char_shingles(x), char_shingles(y)) >= 0.8);
  }

  TEST_CASE("distinct bios give nothing; option checks") {
    std::vector<UserProfile> profiles{profile("a", "alpha beta"), profile("b", "gamma delta"), profile("c", "")};
    CHECK(find_bio_templates(profiles).empty());
    BioTemplateOptions bad;
    bad.min_members = 1;
    CHECK_THROWS_AS(find_bio_templates(profiles, bad), ConfigError);
    bad = {};
    bad.jaccard_min = 0.0;
    CHECK_THROWS_AS(find_bio_templates(profiles, bad), ConfigError);
  }

  TEST_CASE("hashtag sequences are order sensitive") {
    std::vector<UserProfile> profiles{profile("a", "#MAGA2024 #Trump2024TheOnlyChoice #Trump2024 vote!"),
                                      profile("b", "Mom. #maga2024 #trump2024theonlychoice #trump2024"),
                                      profile("c", "#Trump2024 #MAGA2024 #Trump2024TheOnlyChoice"),
                                      profile("d", "no tags here")};
    CHECK(extract_hashtags(profiles[0].bio) ==
          std::vector<std::string>{"maga2024", "trump2024theonlychoice", "trump2024"});
    auto seqs = find_hashtag_sequences(profiles);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].members == std::set<std::string>{"a", "b"});
    CHECK(find_hashtag_sequences(std::vector<UserProfile>{profile("x", "none"), profile("y", "none")}).empty());
  }

  TEST_CASE("duplicate media: originals only") {
    std::vector<Post> posts;
    for (int i = 0; i < 3; ++i)
      posts.push_back(post("o" + std::to_string(i), "user" + std::to_string(i), {}, {"sha256:img"}, false, 100 - i));
    for (int i = 0; i < 50; ++i)
      posts.push_back(post("r" + std::to_string(i), "fan" + std::to_string(i), {}, {"sha256:img"}, true));
    for (int i = 0; i < 100; ++i)
      posts.push_back(post("c" + std::to_string(i), i == 0 ? "solo" : "fan" + std::to_string(i), {}, {"sha256:cascade"},
                           i != 0));
    auto groups = find_duplicate_media(posts);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].media_digest == "sha256:img");
    CHECK(groups[0].postings.size() == 3);
    CHECK(groups[0].distinct_users() == 3);
    CHECK(groups[0].postings[0].created_at == 98);  // time order
    CHECK(find_duplicate_media(std::vector<Post>{post("1", "a", {}, {"x"}), post("2", "b", {}, {"y"})}).empty());
  }

  TEST_CASE("domain statistics and platform classes") {
    std::vector<Post> posts;
    for (int i = 0; i < 438; ++i)
      posts.push_back(post("p" + std::to_string(i), "io" + std::to_string(i % 34),
                           {"https://www.patriotvoice.site/story/" + std::to_string(i) + "?utm_source=x"}));
    posts.push_back(post("y", "io1", {"https://youtu.be/abc", "https://www.youtube.com/watch?v=1"}));
    posts.push_back(post("z", "io2", {"https://t.co/xyz", "https://m.facebook.com/page", "garbage url"}));
    posts.push_back(post("w", "outsider", {"https://www.patriotvoice.site/other"}));
    std::set<std::string> users;
    for (int i = 0; i < 34; ++i) users.insert("io" + std::to_string(i));
    const auto prof = domain_stats(posts, users);
    CHECK(prof.domain_counts.at("patriotvoice.site") == 438);
    CHECK(prof.platform_counts.at("video-platform") == 2);
    CHECK(prof.platform_counts.at("this-platform") == 1);
    CHECK(prof.platform_counts.at("other-social") == 1);
    CHECK(prof.platform_counts.at("web") == 438);
    CHECK(prof.rejected_urls == 1);
    std::uint64_t d = 0, p = 0;
    for (const auto& [k, n] : prof.domain_counts) d += n;
    for (const auto& [k, n] : prof.platform_counts) p += n;
    CHECK(d == p);
    CHECK(d == 442);

    const auto none = domain_stats(posts, {"nobody"});
    CHECK(none.domain_counts.empty());
    for (const auto& [k, n] : none.platform_counts) CHECK(n == 0);
  }

  TEST_CASE("platform map from JSON") {
    auto map = PlatformMap::from_json({{"rumble.com", "video-platform"}, {"x.com", "this-platform"}});
    CHECK(map.classify("rumble.com") == "video-platform");
    CHECK(map.classify("www.rumble.com") == "video-platform");
    CHECK(map.classify("youtube.com") == "web");
    CHECK(PlatformMap::from_json(map.to_json()).to_json() == map.to_json());
  }

  TEST_CASE("shared bio links") {
    std::vector<UserProfile> profiles;
    for (int i = 0; i < 15; ++i)
      profiles.push_back(profile("u" + std::to_string(i), "",
                                 {i % 2 ? "https://www.MeigsBarrett.com/" : "https://boveed.beehiiv.com/p/1"}));
    profiles.push_back(profile("lonely", "", {"https://only-me.org", "::bad::"}));
    const auto r = shared_bio_links(profiles);
    CHECK(r.users_by_domain.size() == 2);
    CHECK(r.users_by_domain.at("meigsbarrett.com").size() == 7);
    CHECK(r.users_by_domain.at("boveed.beehiiv.com").size() == 8);
    CHECK(r.skipped_urls == 1);
    CHECK(shared_bio_links(std::vector<UserProfile>{profile("a", "", {"https://a.org"}), profile("b", "", {"https://b.org"})})
              .users_by_domain.empty());
  }

  TEST_CASE("characterize: missing profiles, zero-post users, input-order invariance") {
    std::vector<Post> posts{post("1", "a", {"https://x.org/1"}, {"m"}), post("2", "b", {"https://x.org/2"}, {"m"}),
                            post("3", "zz", {"https://x.org/3"})};
    std::vector<UserProfile> profiles{profile("a", "same bio"), profile("b", "same bio")};
    const std::set<std::string> flagged{"a", "b", "ghost"};
    const auto r = characterize(posts, profiles, flagged);
    CHECK(r.missing_profiles == std::vector<std::string>{"ghost"});
    CHECK(r.users_without_posts == std::vector<std::string>{"ghost"});
    CHECK(r.posts_per_user.at("ghost") == 0);
    CHECK(r.posts_per_user.at("a") == 1);
    CHECK_FALSE(r.posts_per_user.contains("zz"));
    CHECK(r.links_per_user.at("b") == 1);
    CHECK(r.media_groups.size() == 1);
    CHECK(r.bio_clusters.size() == 1);
    CHECK(r.domains.domain_counts.at("x.org") == 2);

    auto rp = posts;
    std::reverse(rp.begin(), rp.end());
    auto rprof = profiles;
    std::reverse(rprof.begin(), rprof.end());
    CHECK(characterize(rp, rprof, flagged).to_json() == r.to_json());

    const auto empty = characterize(posts, profiles, {});
    CHECK(empty.bio_clusters.empty());
    CHECK(empty.media_groups.empty());
    CHECK(empty.posts_per_user.empty());
  }
}
