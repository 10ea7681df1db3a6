// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <set>
#include <string>

#include "doctest.h"
#include "mgem/error.hpp"
#include "mgem/taskgen.hpp"
#include "test_util.hpp"

using namespace mgem;
using testutil::TempDir;

namespace {

StreamSpec spec_for(StreamFamily f, std::size_t tasks = 3) {
  StreamSpec s;
  s.family = f;
  s.n_tasks = tasks;
  s.n_train = 40;
  s.n_test = 20;
  s.n_features = 5;
  s.n_classes = 3;
  s.seed = 9;
  return s;
}

std::string ten_rows() {
  std::string text = "x1,x2,label\n";
  for (int i = 0; i < 10; ++i) {
    text += std::to_string(i) + "," + std::to_string(0.5 * i) + "," + std::to_string(i % 2) + "\n";
  }
  return text;
}

}  // namespace

TEST_CASE("same spec gives bitwise-identical streams") {
  for (auto f : {StreamFamily::permuted, StreamFamily::rotated, StreamFamily::split_classes}) {
    const auto a = generate(spec_for(f));
    const auto b = generate(spec_for(f));
    REQUIRE(a.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(a.tasks[k].descriptor == k + 1);
      CHECK(a.tasks[k].train.features == b.tasks[k].train.features);
      CHECK(a.tasks[k].test.labels == b.tasks[k].test.labels);
    }
  }
}

TEST_CASE("labels are balanced and in range") {
  for (auto f : {StreamFamily::permuted, StreamFamily::rotated, StreamFamily::split_classes}) {
    const auto s = generate(spec_for(f));
    for (const auto& t : s.tasks) {
      std::vector<int> counts(3, 0);
      for (int y : t.train.labels) {
        REQUIRE(y >= 0);
        REQUIRE(y < 3);
        ++counts[static_cast<std::size_t>(y)];
      }
      CHECK(*std::max_element(counts.begin(), counts.end()) -
                *std::min_element(counts.begin(), counts.end()) <=
            1);
    }
  }
}

TEST_CASE("permuted: task 1 is the base data, later tasks permute its columns") {
  const auto s = generate(spec_for(StreamFamily::permuted));
  const auto& base = s.tasks[0].train.features;
  const auto& second = s.tasks[1].train.features;
  CHECK(s.tasks[0].train.labels == s.tasks[1].train.labels);
  // Every column of task 2 is some column of task 1.
  for (Eigen::Index c = 0; c < second.cols(); ++c) {
    bool found = false;
    for (Eigen::Index b = 0; b < base.cols(); ++b) found = found || second.col(c) == base.col(b);
    CHECK(found);
  }
  CHECK(second != base);
}

TEST_CASE("rotated, two tasks: task 2 means are task 1 means rotated by pi/2") {
  const StreamSpec spec = spec_for(StreamFamily::rotated, 2);
  const auto s = generate(spec);
  const auto [a, b] = rotation_plane(spec.seed, spec.n_features);
  CHECK(a != b);
  const Eigen::MatrixXd rot = plane_rotation(spec.n_features, a, b, std::numbers::pi / 2);
  const Eigen::MatrixXd expect = s.tasks[0].class_means * rot.transpose();
  CHECK((s.tasks[1].class_means - expect).cwiseAbs().maxCoeff() < 1e-12);
  // Coordinates outside the plane are unchanged.
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(spec.n_features); ++c) {
    if (c == static_cast<Eigen::Index>(a) || c == static_cast<Eigen::Index>(b)) continue;
    CHECK(s.tasks[1].class_means.col(c) == s.tasks[0].class_means.col(c));
  }
}

TEST_CASE("plane_rotation is orthogonal") {
  const Eigen::MatrixXd r = plane_rotation(4, 1, 3, 0.7);
  CHECK((r * r.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(1, 1) == doctest::Approx(std::cos(0.7)));
}

TEST_CASE("split_classes: tasks use disjoint class means, relabeled to [0, C)") {
  const auto s = generate(spec_for(StreamFamily::split_classes));
  CHECK(s.tasks[0].class_means != s.tasks[1].class_means);
  CHECK(s.n_classes == 3);
}

TEST_CASE("spec validation") {
  StreamSpec s = spec_for(StreamFamily::rotated);
  s.n_tasks = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = spec_for(StreamFamily::rotated);
  s.n_features = 1;
  CHECK_THROWS_AS(s.validate(), Error);
  s = spec_for(StreamFamily::csv);
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK_THROWS_AS(family_from_string("mnist"), Error);
}

TEST_CASE("csv: 10 rows split 80/20 into 8 train and 2 test, disjoint") {
  TempDir dir;
  const auto p = dir.write("a.csv", ten_rows());
  const auto s = load_csv({p}, CsvSchema{});
  REQUIRE(s.size() == 1);
  CHECK(s.tasks[0].train.size() == 8);
  CHECK(s.tasks[0].test.size() == 2);
  CHECK(s.n_features == 2);
  CHECK(s.n_classes == 2);
  std::set<double> train_x;
  for (Eigen::Index r = 0; r < 8; ++r) train_x.insert(s.tasks[0].train.features(r, 0));
  for (Eigen::Index r = 0; r < 2; ++r) CHECK_FALSE(train_x.contains(s.tasks[0].test.features(r, 0)));
}

TEST_CASE("csv: two files give descriptors 1 and 2 in file order") {
  TempDir dir;
  const auto a = dir.write("a.csv", ten_rows());
  const auto b = dir.write("b.csv", "u,v,label\n1,2,0\n3,4,1\n5,6,0\n");
  const auto s = load_csv({a, b}, CsvSchema{});
  REQUIRE(s.size() == 2);
  CHECK(s.tasks[0].descriptor == 1);
  CHECK(s.tasks[1].descriptor == 2);
  CHECK(s.tasks[1].train.size() + s.tasks[1].test.size() == 3);
}

TEST_CASE("csv: non-numeric cell names line and column") {
  TempDir dir;
  const auto p = dir.write("bad.csv", "x1,x2,label\n1,2,0\n1,abc,1\n");
  try {
    load_csv({p}, CsvSchema{});
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("x2") != std::string::npos);
  }
}

TEST_CASE("csv: ragged rows, bad headers, bad labels") {
  TempDir dir;
  CHECK_THROWS_AS(load_csv({dir.write("r.csv", "x,label\n1,0\n1,2,0\n")}, CsvSchema{}), ParseError);
  CHECK_THROWS_AS(load_csv({dir.write("h.csv", "x,y\n1,0\n2,1\n")}, CsvSchema{}), ParseError);
  CHECK_THROWS_AS(load_csv({dir.write("l.csv", "x,label\n1,0\n2,1.5\n")}, CsvSchema{}), ParseError);
  CHECK_THROWS_AS(load_csv({dir.write("n.csv", "x,label\n1,0\n2,-1\n")}, CsvSchema{}), ParseError);
  CHECK_THROWS_AS(load_csv({dir.write("one.csv", "x,label\n1,0\n")}, CsvSchema{}), ParseError);
  CHECK_THROWS_AS(load_csv({(dir.path / "missing.csv").string()}, CsvSchema{}), Error);
  CsvSchema narrow;
  narrow.n_classes = 2;
  try {
    load_csv({dir.write("range.csv", "x,label\n1,0\n2,1\n3,2\n")}, narrow);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("csv: generate delegates through the csv family") {
  TempDir dir;
  StreamSpec s;
  s.family = StreamFamily::csv;
  s.csv_paths = {dir.write("a.csv", ten_rows())};
  s.train_fraction = 0.5;
  const auto stream = generate(s);
  CHECK(stream.tasks[0].train.size() == 5);
}
