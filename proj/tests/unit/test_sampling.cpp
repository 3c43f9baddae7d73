#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "selfieboost/error.hpp"
#include "selfieboost/parallel.hpp"
#include "selfieboost/rng.hpp"
#include "selfieboost/sampling.hpp"

using namespace selfieboost;

TEST_CASE("splitmix64 reference outputs") {
  SeededRng rng(1234567);
  CHECK(rng.next_u64() == 6457827717110365317ULL);
  CHECK(rng.next_u64() == 3203168211198807973ULL);
  CHECK(rng.next_u64() == 9817491932198370423ULL);
}

TEST_CASE("rng basics") {
  SeededRng rng(1);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(rng.uniform_index(7) < 7);
  }
  CHECK(derive_seed(5, Stream::kBoost, 0) != derive_seed(5, Stream::kBoost, 1));
  CHECK(derive_seed(5, Stream::kBoost, 0) != derive_seed(5, Stream::kTeacher, 0));
  CHECK(derive_seed(5, Stream::kBoost, 3) == derive_seed(5, Stream::kBoost, 3));

  SeededRng g(2);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double z = g.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("weights_from_margins") {
  SUBCASE("reference example") {
    const std::vector<double> margins{0.0, 0.0, -0.6931471805599453};
    auto w = weights_from_margins(margins);
    CHECK(w.probs[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(w.probs[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(w.probs[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w.normalizer_log == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  }
  SUBCASE("large margins do not underflow") {
    const std::vector<double> margins{1000.0, 1000.0};
    auto w = weights_from_margins(margins);
    CHECK(w.probs[0] == 0.5);
    CHECK(w.probs[1] == 0.5);
    CHECK(w.normalizer_log == doctest::Approx(-1000.0 + std::log(2.0)));
  }
  SUBCASE("single example") {
    auto w = weights_from_margins(std::vector<double>{-3.0});
    CHECK(w.probs[0] == 1.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(weights_from_margins(std::vector<double>{}), EmptyDatasetError);
    CHECK_THROWS_AS(weights_from_margins(std::vector<double>{0.0, NAN}), NumericError);
    CHECK_THROWS_AS(weights_from_margins(std::vector<double>{0.0, INFINITY}), NumericError);
  }
  SUBCASE("sums to one and is shift invariant") {
    SeededRng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> margins(1 + rng.uniform_index(3000));
      for (double& v : margins) v = 3.0 * rng.normal();
      auto w = weights_from_margins(margins);
      const double total = std::accumulate(w.probs.begin(), w.probs.end(), 0.0);
      CHECK(std::abs(total - 1.0) <= 1e-12);

      const double c = 20.0 * rng.uniform() - 10.0;
      std::vector<double> shifted = margins;
      for (double& v : shifted) v += c;
      auto ws = weights_from_margins(shifted);
      double worst = 0.0;
      for (std::size_t i = 0; i < margins.size(); ++i) worst = std::max(worst, std::abs(ws.probs[i] - w.probs[i]));
      CHECK(worst <= 1e-15);
    }
  }
  SUBCASE("exactly representable shifts give identical weights") {
    SeededRng rng(8);
    std::vector<double> margins(777);
    for (double& v : margins) v = std::ldexp(std::round(std::ldexp(rng.normal(), 20)), -20);
    auto w = weights_from_margins(margins);
    for (double c : {-8.0, -0.5, 0.25, 3.0}) {
      std::vector<double> shifted = margins;
      for (double& v : shifted) v += c;
      CHECK(weights_from_margins(shifted).probs == w.probs);
    }
  }
  SUBCASE("thread count does not change the bits") {
    SeededRng rng(4);
    std::vector<double> margins(5000);
    for (double& v : margins) v = rng.normal();
    auto a = weights_from_margins(margins, 1);
    auto b = weights_from_margins(margins, 6);
    CHECK(a.probs == b.probs);
    CHECK(a.normalizer_log == b.normalizer_log);
  }
}

TEST_CASE("chunked_sum is independent of threads") {
  SeededRng rng(5);
  std::vector<double> v(10000);
  for (double& x : v) x = rng.normal() * 1e6;
  const double one = chunked_sum(v.size(), 1, [&](std::size_t i) { return v[i]; });
  for (unsigned t : {2u, 3u, 7u, 16u}) CHECK(chunked_sum(v.size(), t, [&](std::size_t i) { return v[i]; }) == one);
  CHECK(chunked_sum(0, 4, [](std::size_t) { return 1.0; }) == 0.0);
}

TEST_CASE("alias tables") {
  SUBCASE("uniform") {
    auto t = build_alias(std::vector<double>(5, 0.2));
    for (double p : t.reconstruct()) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("degenerate point mass") {
    auto t = build_alias(std::vector<double>{1.0, 0.0, 0.0});
    SeededRng rng(6);
    for (int k = 0; k < 10000; ++k) REQUIRE(t.draw(rng) == 0);
  }
  SUBCASE("reconstruction of random distributions") {
    SeededRng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> p(1 + rng.uniform_index(500));
      for (double& v : p) v = rng.uniform() < 0.2 ? 0.0 : std::exp(3.0 * rng.normal());
      double total = std::accumulate(p.begin(), p.end(), 0.0);
      if (total == 0.0) {
        p[0] = 1.0;
        total = 1.0;
      }
      for (double& v : p) v /= total;
      auto t = build_alias(p);
      auto back = t.reconstruct();
      double worst = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(back[i] - p[i]));
      CHECK(worst <= 1e-12);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_alias(std::vector<double>{}), EmptyDatasetError);
    CHECK_THROWS_AS(build_alias(std::vector<double>{0.5, 0.6}), NumericError);
    CHECK_THROWS_AS(build_alias(std::vector<double>{1.5, -0.5}), NumericError);
  }
}

TEST_CASE("sample_indices") {
  auto t = build_alias(std::vector<double>{0.1, 0.2, 0.3, 0.4});
  SUBCASE("same seed, same draws") {
    SeededRng a(9), b(9);
    CHECK(sample_indices(t, 1000, a) == sample_indices(t, 1000, b));
  }
  SUBCASE("frequencies follow the distribution") {
    SeededRng rng(10);
    auto idx = sample_indices(t, 400000, rng);
    std::vector<double> count(4, 0.0);
    for (auto i : idx) count[i] += 1.0;
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(count[i] / 400000.0 - 0.1 * (i + 1)) < 0.005);
  }
  SUBCASE("n = 0 is rejected") {
    SeededRng rng(1);
    CHECK_THROWS_AS(sample_indices(t, 0, rng), DomainError);
  }
}
