#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "klemu/design.hpp"

using klemu::DesignOfExperiments;
using klemu::Index;
using klemu::ParameterSpace;

namespace {

// Stratum index of coordinate x along an axis split into m equal cells.
Index stratum_of(double x, double lo, double hi, Index m) {
  const double width = (hi - lo) / static_cast<double>(m);
  Index s = static_cast<Index>(std::floor((x - lo) / width));
  return std::clamp<Index>(s, 0, m - 1);
}

// True iff every stratum 0..m-1 appears exactly once along axis j.
bool axis_is_stratified(const DesignOfExperiments& doe, Index j) {
  const Index m = doe.size();
  std::vector<Index> strata;
  strata.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    strata.push_back(stratum_of(doe.points(i, j), doe.space.lower[j], doe.space.upper[j], m));
  }
  std::sort(strata.begin(), strata.end());
  std::vector<Index> expected(static_cast<std::size_t>(m));
  std::iota(expected.begin(), expected.end(), Index{0});
  return strata == expected;
}

}  // namespace

TEST_CASE("lhs occupies every stratum of every axis exactly once") {
  const auto space = ParameterSpace::cube(0.0, 2.0, 3);
  const auto doe = klemu::design::lhs_sample(space, 30, 42);

  REQUIRE(doe.size() == 30);
  REQUIRE(doe.dim() == 3);
  for (Index j = 0; j < 3; ++j) {
    CHECK(axis_is_stratified(doe, j));
  }
}

TEST_CASE("lhs points stay inside the box") {
  const auto space = ParameterSpace::cube(-1.0, 5.0, 4);
  const auto doe = klemu::design::lhs_sample(space, 17, 99);
  for (Index i = 0; i < doe.size(); ++i) {
    for (Index j = 0; j < doe.dim(); ++j) {
      CHECK(doe.points(i, j) >= space.lower[j]);
      CHECK(doe.points(i, j) < space.upper[j]);  // offsets live in [0,1), so the top edge is open
    }
  }
}

TEST_CASE("lhs is bit-identical for identical arguments") {
  const auto space = ParameterSpace::cube(0.0, 2.0, 3);
  const auto a = klemu::design::lhs_sample(space, 30, 42);
  const auto b = klemu::design::lhs_sample(space, 30, 42);
  CHECK(a.points == b.points);

  const auto c = klemu::design::lhs_sample(space, 30, 43);
  CHECK(a.points != c.points);
}

TEST_CASE("lhs with a single point fills the whole axis cell") {
  const auto space = ParameterSpace::cube(0.0, 1.0, 1);
  const auto doe = klemu::design::lhs_sample(space, 1, 5);
  REQUIRE(doe.size() == 1);
  CHECK(doe.points(0, 0) >= 0.0);
  CHECK(doe.points(0, 0) < 1.0);
}

TEST_CASE("lhs strata on a small 2-d example") {
  const auto space = ParameterSpace::cube(0.0, 4.0, 2);
  const auto doe = klemu::design::lhs_sample(space, 4, 7);
  for (Index j = 0; j < 2; ++j) {
    CHECK(axis_is_stratified(doe, j));
  }
}

TEST_CASE("lhs rejects bad arguments") {
  const auto space = ParameterSpace::cube(0.0, 1.0, 2);
  CHECK_THROWS_AS(klemu::design::lhs_sample(space, 0, 1), klemu::DataError);

  ParameterSpace degenerate;
  degenerate.lower = Eigen::ArrayXd::Constant(2, 1.0);
  degenerate.upper = Eigen::ArrayXd::Constant(2, 1.0);  // lower == upper
  CHECK_THROWS_AS(klemu::design::lhs_sample(degenerate, 3, 1), klemu::DataError);
}

TEST_CASE("validate_design accepts a fresh sample") {
  const auto doe = klemu::design::lhs_sample(ParameterSpace::cube(0.0, 2.0, 3), 12, 3);
  CHECK(klemu::design::validate_design(doe).empty());
}

TEST_CASE("validate_design flags out-of-bounds points") {
  auto doe = klemu::design::lhs_sample(ParameterSpace::cube(0.0, 2.0, 3), 6, 3);
  doe.points(2, 1) = 7.5;
  const auto msgs = klemu::design::validate_design(doe);
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0].find("outside bounds in dim") != std::string::npos);
  CHECK(msgs[0].find("2") != std::string::npos);
}

TEST_CASE("validate_design flags duplicated points") {
  auto doe = klemu::design::lhs_sample(ParameterSpace::cube(0.0, 2.0, 3), 6, 3);
  doe.points.row(4) = doe.points.row(1);
  const auto msgs = klemu::design::validate_design(doe);
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0].find("duplicate point at indices") != std::string::npos);
}
