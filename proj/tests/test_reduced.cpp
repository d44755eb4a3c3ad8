#include "doctest.h"

#include "sbcm/dynamics.hpp"
#include "sbcm/reduced.hpp"
#include "sbcm/spectral.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace sbcm;

TEST_CASE("family endpoints") {
  FamilySpec pol{FamilyKind::polarized, 6};
  OpinionState h = family_state(pol, 0.0);
  for (int j = 0; j < 8; ++j) CHECK(h[j] == doctest::Approx(-3.5 + j));
  OpinionState x1 = family_state(pol, 1.0);
  for (int j = 0; j < 8; ++j) CHECK(x1[j] == (j <= 3 ? -3.5 : 3.5));
  FamilySpec con{FamilyKind::consensus, 6};
  OpinionState c1 = family_state(con, 1.0);
  CHECK(c1[0] == -3.5);
  CHECK(c1[3] == 0.0);
  CHECK(c1[7] == 3.5);
  CHECK_THROWS_AS(family_state(pol, 1.5), ValidationError);
  CHECK_THROWS_AS(family_state(FamilySpec{FamilyKind::polarized, 5}, 0.5), ValidationError);
  CHECK(family_kind_from_string("consensus") == FamilyKind::consensus);
  CHECK_THROWS_AS(family_kind_from_string("fragmented"), ValidationError);
}

TEST_CASE("only the middle pair moves along the polarized family") {
  FamilySpec spec{FamilyKind::polarized, 8};
  Graph g = path_graph(8);
  ModelParams p{3.0, 0.4};
  for (double theta : {0.1, 0.45, 0.8}) {
    OpinionState f = velocity(g, family_state(spec, theta), p);
    const NodeId a = family_active_node(spec);
    CHECK(a == 4);
    for (int j = 0; j < 10; ++j)
      if (j != a && j != a + 1) CHECK(std::abs(f[j]) < 1e-12);
    CHECK(f[a + 1] == doctest::Approx(-f[a]));
    CHECK(reduced_velocity(spec, theta, p) == doctest::Approx(f[a]));
  }
}

TEST_CASE("consensus family moves only at the ends") {
  FamilySpec spec{FamilyKind::consensus, 8};
  Graph g = path_graph(8);
  ModelParams p{3.0, 0.4};
  OpinionState f = velocity(g, family_state(spec, 0.3), p);
  CHECK(family_active_node(spec) == 1);
  for (int j = 2; j <= 7; ++j) CHECK(std::abs(f[j]) < 1e-12);
  CHECK(f[8] == doctest::Approx(-f[1]));
}

TEST_CASE("family counts") {
  FamilySpec spec{FamilyKind::polarized, 12};
  // gamma = 0: only the harmonic state
  auto c0 = count_stable_family(spec, ModelParams{0.0, 0.5}, 401);
  CHECK(c0.roots.size() == 1);
  CHECK(c0.count_reduced == 1);
  CHECK(c0.count_full == 1);
  // moderate gamma: harmonic plus a nearly polarized state
  auto c = count_stable_family(spec, ModelParams{0.2, 0.5}, 2001);
  CHECK(c.roots.front().theta == 0.0);
  CHECK(c.count_reduced >= 2);
  for (const auto& r : c.roots) CHECK(r.residual < 1e-9);
}

TEST_CASE("two-class reduction is exact") {
  for (auto al : {Alignment::aligned, Alignment::unaligned}) {
    auto pc = paired_cliques(8, al);
    ModelParams p{6.0, 0.3};
    for (double x1 : {-0.7, 0.1, 0.9})
      for (double x2 : {-0.4, 0.5}) {
        auto full = clique_reduced_velocity(pc, x1, x2, p);
        auto fast = clique_fast_velocity(pc, x1, x2, p);
        CHECK(full[0] == doctest::Approx(fast[0]).epsilon(1e-14));
        CHECK(full[1] == doctest::Approx(fast[1]).epsilon(1e-14));
      }
  }
}

TEST_CASE("line counts") {
  auto pc = paired_cliques(10, Alignment::aligned);
  auto c0 = count_stable_on_line(pc, ModelParams{0.0, 0.5});
  REQUIRE(c0.roots.size() == 1);
  CHECK(c0.roots[0].x1 == doctest::Approx(0.0).scale(1.0));
  CHECK(c0.count == 1);
  CHECK_THROWS_AS(count_stable_on_line(pc, ModelParams{0.0, 0.5}, CliqueLine::anti_diagonal, 100),
                  ValidationError);
}

TEST_CASE("phase portrait on a coarse grid") {
  auto pc = paired_cliques(10, Alignment::aligned);
  ModelParams p{20.0, 0.3};
  GridSpec grid{-1.2, 1.2, -1.2, 1.2, 21, 21};
  PortraitOptions opts;
  opts.starts_per_axis = 9;
  opts.horizon = 100.0;
  auto pp = phase_portrait(pc, p, grid, opts);
  CHECK_FALSE(pp.fixed_points.empty());
  for (const auto& fp : pp.fixed_points) {
    CHECK(fp.residual < 1e-8);
    auto v = clique_fast_velocity(pc, fp.x1, fp.x2, p);
    CHECK(std::abs(v[0]) < 1e-8);
    CHECK(std::abs(v[1]) < 1e-8);
  }
  CHECK(pp.basins.size() == 21u * 21u);
  CHECK_FALSE(pp.nullclines.empty());

  auto dir = std::filesystem::temp_directory_path() / "sbcm_portrait_test";
  std::filesystem::remove_all(dir);
  write_portrait(dir, pp);
  for (const char* f : {"fixed_points.csv", "nullclines.csv", "basins.csv"}) {
    std::ifstream in(dir / f);
    std::string header;
    CHECK(std::getline(in, header));
    CHECK_FALSE(header.empty());
  }
  std::filesystem::remove_all(dir);
}
