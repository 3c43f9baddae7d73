#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "selfieboost/data.hpp"
#include "selfieboost/error.hpp"

using namespace selfieboost;

TEST_CASE("Dataset validation") {
  CHECK_NOTHROW(Dataset({1.0, 2.0}, 2, {1}));
  CHECK_THROWS_AS(Dataset({}, 2, {}), EmptyDatasetError);
  CHECK_THROWS_AS(Dataset({1.0, 2.0, 3.0}, 2, {1}), ShapeError);
  CHECK_THROWS_AS(Dataset({1.0, 2.0}, 2, {0}), DomainError);
  CHECK_THROWS_AS(Dataset({1.0, NAN}, 2, {1}), NumericError);
  Dataset ds({1.0, 2.0, 3.0, 4.0}, 2, {1, -1});
  CHECK(ds.x(1)[0] == 3.0);
  CHECK(ds.y(1) == -1);
  CHECK(ds.matrix().rows() == 2);
}

TEST_CASE("gen_realizable") {
  TeacherSpec spec;
  spec.seed = 42;

  SUBCASE("every kept point has margin at least one under the teacher") {
    auto r = gen_realizable(500, 10, spec);
    CHECK(r.data.size() == 500);
    CHECK(r.data.dim() == 10);
    double min_margin = INFINITY;
    for (std::size_t i = 0; i < r.data.size(); ++i) {
      min_margin = std::min(min_margin, r.data.y(i) * forward(r.teacher, r.data.x(i)));
    }
    CHECK(min_margin >= 1.0);
  }
  SUBCASE("both labels appear") {
    auto r = gen_realizable(500, 10, spec);
    int pos = 0;
    for (int y : r.data.labels()) pos += y > 0;
    CHECK(pos > 0);
    CHECK(pos < 500);
  }
  SUBCASE("deterministic in the seed") {
    auto a = gen_realizable(200, 4, spec);
    auto b = gen_realizable(200, 4, spec);
    CHECK(a.data == b.data);
    CHECK(a.teacher == b.teacher);
    CHECK(a.rejected == b.rejected);
    spec.seed = 43;
    CHECK_FALSE(gen_realizable(200, 4, spec).data == a.data);
  }
  SUBCASE("teacher architecture follows the spec") {
    spec.hidden = {3, 2};
    spec.activation = Activation::kRelu;
    auto r = gen_realizable(50, 5, spec);
    CHECK(r.teacher.architecture() == NetworkArchitecture(5, {3, 2}, Activation::kRelu));
  }
  SUBCASE("unreachable margin floor") {
    spec.tau = 1e9;
    CHECK_THROWS_AS(gen_realizable(10, 3, spec), DegenerateTeacherError);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(gen_realizable(0, 3, spec), DomainError);
    spec.tau = 0.0;
    CHECK_THROWS_AS(gen_realizable(10, 3, spec), DomainError);
  }
}

TEST_CASE("CSV round trip") {
  TeacherSpec spec;
  spec.seed = 7;
  auto r = gen_realizable(100, 3, spec);
  SUBCASE("in memory") { CHECK(dataset_from_csv(dataset_to_csv(r.data)) == r.data); }
  SUBCASE("through a file") {
    const auto path = std::filesystem::temp_directory_path() / "selfieboost_test_data.csv";
    save_csv(r.data, path);
    CHECK(load_csv(path) == r.data);
  }
  SUBCASE("header") { CHECK(dataset_to_csv(r.data).rfind("f0,f1,f2,label\n", 0) == 0); }
}

TEST_CASE("CSV parsing") {
  SUBCASE("explicit plus sign and CRLF") {
    auto ds = dataset_from_csv("f0,label\r\n0.5,+1\r\n-2,-1\r\n");
    CHECK(ds.size() == 2);
    CHECK(ds.y(0) == 1);
    CHECK(ds.x(1)[0] == -2.0);
  }
  SUBCASE("errors carry the line number") {
    try {
      dataset_from_csv("f0,f1,label\n1,2,1\n3,1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(dataset_from_csv(""), EmptyDatasetError);
  CHECK_THROWS_AS(dataset_from_csv("f0,label\n"), EmptyDatasetError);
  CHECK_THROWS_AS(dataset_from_csv("x,label\n1,1\n"), ParseError);
  CHECK_THROWS_AS(dataset_from_csv("f0,label\n1,0\n"), ParseError);
  CHECK_THROWS_AS(dataset_from_csv("f0,label\nabc,1\n"), ParseError);
  CHECK_THROWS_AS(dataset_from_csv("f0,label\nnan,1\n"), ParseError);
  CHECK_THROWS_AS(load_csv("/nonexistent/selfieboost.csv"), IoError);
}
