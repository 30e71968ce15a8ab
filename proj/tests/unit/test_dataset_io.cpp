#include <doctest.h>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "sigdesc/dataset_io.hpp"
#include "sigdesc/error.hpp"

using namespace sigdesc;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

std::string svc_file(int n, double t0 = 0.0) {
  std::string s = std::to_string(n) + "\n";
  for (int i = 0; i < n; ++i) {
    s += std::to_string(100 + i) + " " + std::to_string(200 + 2 * i) + " " +
         std::to_string(t0 + 10 * i) + " 1 90 45 " + std::to_string(500 + i) + "\n";
  }
  return s;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("svc2004: two pen-down samples") {
  const Trajectory t = parse_svc2004("2\n100 200 0 1 0 0 512\n101 201 10 1 0 0 520");
  REQUIRE(t.size() == 2);
  CHECK(t.samples[0] == PenSample{100, 200, 0, 512, true});
  CHECK(t.samples[1] == PenSample{101, 201, 10, 520, true});
}

TEST_CASE("svc2004: button status 0 lifts the pen") {
  const Trajectory t = parse_svc2004("3\n1 1 0 1 0 0 5\n2 2 5 0 0 0 0\n3 3 9 1 0 0 7\n");
  REQUIRE(t.size() == 3);
  CHECK(t.samples[0].pen_down);
  CHECK_FALSE(t.samples[1].pen_down);
  CHECK(t.samples[2].pen_down);
}

TEST_CASE("svc2004: malformed input names the line") {
  CHECK(error_of([] { parse_svc2004("0"); }).find("line") != std::string::npos);
  CHECK(error_of([] { parse_svc2004("abc\n"); }).find("line 1") != std::string::npos);
  CHECK(error_of([] { parse_svc2004("3\n1 1 0 1 0 0 5\n2 2 5 1 0 0 5\n"); }).find("line") !=
        std::string::npos);
  CHECK(error_of([] { parse_svc2004("2\n1 1 0 1 0 0 5\n2 x 5 1 0 0 5\n"); }).find("line 3") !=
        std::string::npos);
  CHECK(error_of([] { parse_svc2004("2\n1 1 0 1 0 0 5\n2 2 5 1 0 0\n"); }).find("line 3") !=
        std::string::npos);
  CHECK(error_of([] { parse_svc2004("2\n1 1 9 1 0 0 5\n2 2 5 1 0 0 5\n"); }).find("line 3") !=
        std::string::npos);
}

TEST_CASE("canonical: parse, errors, and exact round trip") {
  const Trajectory t = parse_canonical("x y t p d\n0 0 0 1 1\n1 1 5 1 1\n");
  REQUIRE(t.size() == 2);
  CHECK(t.samples[1] == PenSample{1, 1, 5, 1, true});

  CHECK_THROWS_AS(parse_canonical("0 0 0 1 1\n1 1 5 1 1\n"), Error);
  CHECK_THROWS_AS(parse_canonical("x y t p d\n0 0 5 1 1\n1 1 4 1 1\n"), Error);
  CHECK_THROWS_AS(parse_canonical("x y t p d\n0 0 0 1 2\n1 1 5 1 1\n"), Error);
  CHECK_THROWS_AS(parse_canonical("x y t p d\n0 0 0 1\n1 1 5 1 1\n"), Error);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory r = test::random_trajectory(rng, 30);
    r.samples[5].pen_down = false;
    r.samples[5].pressure = 0.0;
    r.samples[7].x = 1.0 / 3.0;
    const Trajectory back = parse_canonical(to_canonical(r), r.meta);
    CHECK(back == r);
  }
}

TEST_CASE("load_corpus: counts, warnings, and errors") {
  test::TempDir dir("corpus");
  for (const char* user : {"001", "002"}) {
    for (int i = 0; i < 5; ++i) {
      write_file(dir.path() / user / "genuine" / ("g" + std::to_string(i) + ".txt"), svc_file(10));
      write_file(dir.path() / user / "forgery" / ("f" + std::to_string(i) + ".txt"), svc_file(12));
    }
  }
  CorpusLoad load = load_corpus(dir.path(), CorpusLayout::svc2004);
  REQUIRE(load.corpus.users.size() == 2);
  CHECK(load.corpus.users.at("001").genuine.size() == 5);
  CHECK(load.corpus.users.at("002").skilled_forgeries.size() == 5);
  CHECK(load.corpus.users.at("001").skilled_forgeries.front().meta.label == Label::skilled_forgery);
  CHECK(load.warnings.empty());

  write_file(dir.path() / "002" / "genuine" / "broken.txt", "3\n1 2 3\n");
  load = load_corpus(dir.path(), CorpusLayout::svc2004);
  CHECK(load.corpus.users.at("002").genuine.size() == 5);
  REQUIRE(load.warnings.size() == 1);
  CHECK(load.warnings[0].path.filename() == "broken.txt");

  test::TempDir sparse("sparse");
  write_file(sparse.path() / "u" / "genuine" / "a.txt", svc_file(4));
  load = load_corpus(sparse.path(), CorpusLayout::svc2004);
  CHECK(load.corpus.users.size() == 1);
  CHECK(load.warnings.size() == 1);

  test::TempDir empty("empty");
  CHECK_THROWS_AS(load_corpus(empty.path(), CorpusLayout::svc2004), Error);
  CHECK_THROWS_AS(load_corpus(empty.path() / "missing", CorpusLayout::svc2004), Error);
}

TEST_CASE("write_corpus then load_corpus reproduces the corpus") {
  test::TempDir dir("roundtrip");
  const Corpus c = generate_synthetic_corpus(7, 3, 4, 2);
  write_corpus(dir.path(), c);
  const CorpusLoad load = load_corpus(dir.path(), CorpusLayout::canonical);
  CHECK(load.warnings.empty());
  REQUIRE(load.corpus.users.size() == 3);
  for (const auto& [id, sigs] : c.users) {
    const auto& got = load.corpus.users.at(id);
    REQUIRE(got.genuine.size() == sigs.genuine.size());
    REQUIRE(got.skilled_forgeries.size() == sigs.skilled_forgeries.size());
    for (std::size_t i = 0; i < sigs.genuine.size(); ++i) {
      CHECK(got.genuine[i].samples == sigs.genuine[i].samples);
    }
  }
}

TEST_CASE("synthetic generator: determinism and sample contract") {
  const Corpus a = generate_synthetic_corpus(1, 2, 3, 3);
  const Corpus b = generate_synthetic_corpus(1, 2, 3, 3);
  REQUIRE(a.users.size() == 2);
  for (const auto& [id, sigs] : a.users) {
    const auto& other = b.users.at(id);
    CHECK(sigs.genuine.size() == 3);
    CHECK(sigs.skilled_forgeries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(sigs.genuine[i] == other.genuine[i]);
      CHECK(sigs.skilled_forgeries[i] == other.skilled_forgeries[i]);
    }
  }
  CHECK_FALSE(generate_synthetic_corpus(2, 2, 3, 3).users.at("u000").genuine[0] ==
              a.users.at("u000").genuine[0]);

  for (const auto& [id, sigs] : generate_synthetic_corpus(5, 6, 4, 4).users) {
    for (const auto* list : {&sigs.genuine, &sigs.skilled_forgeries}) {
      for (const auto& t : *list) {
        CHECK(t.size() >= 80);
        CHECK(t.size() <= 200);
        CHECK(t.meta.user_id == id);
        for (std::size_t i = 0; i < t.size(); ++i) {
          CHECK(t.samples[i].pressure >= 0.0);
          if (i > 0) CHECK(t.samples[i].t > t.samples[i - 1].t);
        }
      }
    }
  }
  CHECK_THROWS_AS(generate_synthetic_corpus(1, 0, 3, 3), Error);
  CHECK_THROWS_AS(generate_synthetic_corpus(1, 2, 0, 3), Error);
  CHECK_THROWS_AS(generate_synthetic_corpus(1, 2, 3, 0), Error);
}

TEST_CASE("synthetic generator: forgeries sit further from the latent than genuine samples") {
  const auto users = generate_synthetic_users(3, 100, 2, 2);
  auto rel_dist = [](const CurveParams& p, const CurveParams& latent) {
    double s = 0.0;
    for (std::size_t i = 0; i < CurveParams::kCount; ++i) {
      const double r = p.values[i] / latent.values[i] - 1.0;
      s += r * r;
    }
    return std::sqrt(s / CurveParams::kCount);
  };
  double genuine = 0.0, forgery = 0.0;
  for (const auto& u : users) {
    for (const auto& g : u.genuine) genuine += rel_dist(g.params, u.latent);
    for (const auto& f : u.forgeries) forgery += rel_dist(f.params, u.latent);
  }
  genuine /= 200.0;
  forgery /= 200.0;
  CHECK(genuine == doctest::Approx(SyntheticOptions{}.genuine_jitter).epsilon(0.1));
  CHECK(forgery > 5.0 * genuine);
}
