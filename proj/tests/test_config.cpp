#include <fstream>

#include "doctest.h"
#include "roughchaos/config.hpp"
#include "roughchaos/errors.hpp"

using namespace roughchaos;

TEST_CASE("config parses keys, comments and typed values") {
  Config cfg = Config::parse(
      "# leading comment\n"
      "schema = 1\n"
      "  name = poc   # trailing\n"
      "x=2.5\n"
      "n = 12\n"
      "flag = true\n"
      "ns = 8, 16 ,32\n"
      "xs = 0.5,-1e-3\n");
  CHECK(cfg.get_string("name") == "poc");
  CHECK(cfg.get_double("x") == 2.5);
  CHECK(cfg.get_size("n") == 12);
  CHECK(cfg.get_bool("flag"));
  CHECK(cfg.get_size_list("ns") == std::vector<std::size_t>{8, 16, 32});
  CHECK(cfg.get_double_list("xs") == std::vector<double>{0.5, -1e-3});
  CHECK(cfg.get_double("missing", 7.0) == 7.0);
  CHECK_NOTHROW(cfg.finish());
  const auto r = cfg.resolved();
  CHECK(r["missing"] == 7.0);
  CHECK(r["ns"].size() == 3);
  // Resolved keys come out sorted, so reports do not depend on call order.
  std::string prev;
  for (const auto& [k, v] : r.items()) {
    CHECK(prev < k);
    prev = k;
  }
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(Config::parse("n = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("schema = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("schema = 1\nno equals sign\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("schema = 1\n = 3\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("schema = 1\na = 1\na = 2\n"), ConfigError);

  Config cfg = Config::parse("schema = 1\nx = 1.5abc\nn = -3\nb = maybe\nempty = ,\n");
  CHECK_THROWS_AS(cfg.get_double("x"), ConfigError);
  CHECK_THROWS_AS(cfg.get_size("n"), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool("b"), ConfigError);
  CHECK_THROWS_AS(cfg.get_size_list("empty"), ConfigError);
  CHECK_THROWS_AS(cfg.get_double("absent"), ConfigError);
}

TEST_CASE("unused keys are reported by finish") {
  Config cfg = Config::parse("schema = 1\nused = 1\ntypo_key = 2\nout = dir\n");
  cfg.get_size("used");
  CHECK(cfg.take_unrecorded("out") == std::optional<std::string>("dir"));
  CHECK_FALSE(cfg.resolved().contains("out"));
  try {
    cfg.finish();
    FAIL("finish accepted an unused key");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
  }
}

TEST_CASE("content hash is the git blob id") {
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  const std::string text = "schema = 1\nseed = 3\n";
  CHECK(Config::parse(text).content_hash() == git_blob_sha1(text));

  const auto file = std::filesystem::temp_directory_path() / "roughchaos_test_config.conf";
  std::ofstream(file, std::ios::binary) << text;
  CHECK(Config::load(file).content_hash() == git_blob_sha1(text));
  CHECK_THROWS_AS(Config::load(file.string() + ".missing"), ConfigError);
}
