#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "offroad/grid_search.hpp"

using namespace offroad;

namespace {

IntermediateMap random_map(int w, int h, double p, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  IntermediateMap m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, b(rng) ? CellClass::Obstacle : CellClass::Free);
  return m;
}

void check_valid_path(const IntermediateMap& m, const GridPath& p, Cell s, Cell t) {
  REQUIRE_FALSE(p.points.empty());
  CHECK(p.points.front() == s.center());
  CHECK(p.points.back() == t.center());
  double cost = 0;
  for (size_t i = 0; i < p.points.size(); ++i) {
    const Cell c = cell_of(p.points[i]);
    CHECK(m.is_traversable(c));
    if (i == 0) continue;
    const Cell a = cell_of(p.points[i - 1]);
    const int dx = c.x - a.x, dy = c.y - a.y;
    CHECK(std::max(std::abs(dx), std::abs(dy)) == 1);
    if (dx && dy) {
      CHECK(m.is_traversable(a.x + dx, a.y));
      CHECK(m.is_traversable(a.x, a.y + dy));
    }
    cost += std::hypot(double(dx), double(dy));
  }
  CHECK(std::abs(cost - p.cost) < 1e-9);
}

}  // namespace

TEST_SUITE("grid_search") {

TEST_CASE("A* and JPS equal brute-force Dijkstra on random 64x64 maps") {
  std::mt19937_64 rng(2024);
  int solved = 0, attempts = 0;
  while (solved < 200 && attempts < 2000) {
    ++attempts;
    const double density = 0.1 + 0.25 * double(rng() % 100) / 100.0;
    const auto m = random_map(64, 64, density, rng());
    const Cell s{int(rng() % 64), int(rng() % 64)}, t{int(rng() % 64), int(rng() % 64)};
    if (!m.is_traversable(s) || !m.is_traversable(t)) continue;
    const auto d = oracle::dijkstra(64, 64, s.x, s.y, [&](int x, int y) { return m.is_traversable(x, y); });
    const double want = d[static_cast<size_t>(t.y) * 64 + t.x];
    const ClearanceMap grid(m);
    if (std::isinf(want)) {
      CHECK_THROWS_AS(astar(grid, s, t), PlanningError);
      CHECK_THROWS_AS(jps(grid, s, t), PlanningError);
      continue;
    }
    const auto a = astar(grid, s, t);
    const auto j = jps(grid, s, t);
    CHECK(std::abs(a.cost - want) < 1e-9);
    CHECK(std::abs(j.cost - want) < 1e-9);
    check_valid_path(m, a, s, t);
    check_valid_path(m, j, s, t);
    ++solved;
  }
  CHECK(solved == 200);
}

TEST_CASE("empty map diagonal") {
  const ClearanceMap grid(IntermediateMap(10, 10));
  for (auto planner : {GridPlanner::AStar, GridPlanner::Jps}) {
    const auto p = grid_search(planner, grid, {0, 0}, {9, 9});
    CHECK(p.cost == doctest::Approx(9 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(p.points.size() == 10);
  }
  CHECK(octile({0, 0}, {9, 9}) == doctest::Approx(9 * std::sqrt(2.0)));
  CHECK(octile({0, 0}, {5, 2}) == doctest::Approx(3 + 2 * std::sqrt(2.0)));
}

TEST_CASE("start equals target") {
  const ClearanceMap grid(IntermediateMap(5, 5));
  for (auto planner : {GridPlanner::AStar, GridPlanner::Jps}) {
    const auto p = grid_search(planner, grid, {2, 3}, {2, 3});
    CHECK(p.points.size() == 1);
    CHECK(p.cost == 0.0);
  }
}

TEST_CASE("open straight line gives two jump points") {
  const ClearanceMap grid(IntermediateMap(30, 10));
  const auto p = jps(grid, {2, 5}, {25, 5});
  CHECK(p.waypoints.size() == 2);
  CHECK(p.cost == 23.0);
  CHECK(p.points.size() == 24);
}

TEST_CASE("wall with a single gap") {
  auto m = oracle::from_ascii({
      "..........",
      "..........",
      "#####.####",
      "..........",
      "..........",
  });
  const ClearanceMap grid(m);
  const auto d = oracle::dijkstra(10, 5, 0, 0, [&](int x, int y) { return m.is_traversable(x, y); });
  for (auto planner : {GridPlanner::AStar, GridPlanner::Jps}) {
    const auto p = grid_search(planner, grid, {0, 0}, {9, 4});
    CHECK(std::abs(p.cost - d[4 * 10 + 9]) < 1e-9);
    bool through_gap = false;
    for (const Vec2& v : p.points) through_gap |= cell_of(v) == Cell{5, 2};
    CHECK(through_gap);
  }
}

TEST_CASE("no corner cutting between diagonal obstacles") {
  const auto m = oracle::from_ascii({".#", "#."});
  const ClearanceMap grid(m);
  CHECK_THROWS_AS(astar(grid, {0, 0}, {1, 1}), PlanningError);
  CHECK_THROWS_AS(jps(grid, {0, 0}, {1, 1}), PlanningError);
}

TEST_CASE("blocked endpoints and unreachable target") {
  const auto m = oracle::from_ascii({"..#..", "..#..", "..#.."});
  const ClearanceMap grid(m);
  try {
    jps(grid, {0, 0}, {4, 0});
    FAIL("expected an error");
  } catch (const PlanningError& e) {
    CHECK(e.kind() == ErrorKind::NoGridPath);
    CHECK(e.stage() == "grid_search");
  }
  CHECK_THROWS_AS(astar(grid, {2, 0}, {4, 0}), PlanningError);
  CHECK_THROWS_AS(astar(grid, {0, 0}, {-1, 0}), PlanningError);
}

TEST_CASE("deterministic output") {
  const auto m = random_map(64, 64, 0.2, 99);
  const ClearanceMap grid(m);
  Cell s{1, 1}, t{62, 60};
  while (!m.is_traversable(s)) ++s.x;
  while (!m.is_traversable(t)) --t.x;
  for (auto planner : {GridPlanner::AStar, GridPlanner::Jps}) {
    try {
      const auto a = grid_search(planner, grid, s, t), b = grid_search(planner, grid, s, t);
      CHECK(a.points == b.points);
      CHECK(a.waypoints == b.waypoints);
    } catch (const PlanningError&) {
    }
  }
}

TEST_CASE("timeout is reported") {
  // An enclosed target forces a full sweep, so the deadline is polled.
  IntermediateMap m(600, 600);
  for (int i = 500; i <= 520; ++i) {
    m.set(i, 500, CellClass::Obstacle);
    m.set(i, 520, CellClass::Obstacle);
    m.set(500, i, CellClass::Obstacle);
    m.set(520, i, CellClass::Obstacle);
  }
  const ClearanceMap grid(m);
  const Deadline expired(std::chrono::duration<double>(0.0));
  for (auto planner : {GridPlanner::AStar, GridPlanner::Jps}) {
    try {
      grid_search(planner, grid, {0, 0}, {510, 510}, expired);
      FAIL("expected an error");
    } catch (const PlanningError& e) {
      CHECK(e.kind() == ErrorKind::Timeout);
    }
  }
}

TEST_CASE("clearance blocks only free cells near obstacles") {
  auto m = oracle::from_ascii({
      "..........",
      "..........",
      ".....#....",
      "...T......",
      "..........",
  });
  const ClearanceMap c(m, 2.0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 10; ++x) {
      const double d = oracle::distance_to_cell_square({double(x), double(y)}, 5, 2);
      bool want = m.is_traversable(x, y);
      if (m.at(x, y) == CellClass::Free && d < 2.0) want = false;
      CHECK(c.passable(x, y) == want);
    }
  CHECK(c.passable(3, 3));  // trail within the radius stays open
  CHECK_FALSE(c.passable(7, 3));
  CHECK(c.passable(8, 2));
  CHECK(c.passable(7, 4));
  // Radius 1 blocks the whole 8-neighbourhood and nothing further.
  const ClearanceMap one(m, 1.0);
  CHECK_FALSE(one.passable(6, 3));
  CHECK_FALSE(one.passable(4, 1));
  CHECK(one.passable(7, 2));
  CHECK(one.passable(7, 3));
  CHECK_FALSE(c.passable(-1, 0));
  CHECK_THROWS_AS(ClearanceMap(m, -1.0), PlanningError);
}

TEST_CASE("clearance on a large map matches brute force in sampled windows") {
  const auto m = random_map(300, 200, 0.01, 17);
  const ClearanceMap c(m, 3.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 400; ++k) {
    const int x = int(rng() % 300), y = int(rng() % 200);
    bool near = false;
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        if (oracle::distance_to_cell_square({double(x), double(y)}, x + dx, y + dy) < 3.0 &&
            m.in_bounds(x + dx, y + dy) && !m.is_traversable(x + dx, y + dy))
          near = true;
    CHECK(c.passable(x, y) == (m.is_traversable(x, y) && (m.at(x, y) != CellClass::Free || !near)));
  }
}

TEST_CASE("compress_collinear keeps turning points") {
  const PixelPath p{{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 2}, {4, 3}};
  const PixelPath want{{0, 0}, {2, 0}, {4, 2}, {4, 3}};
  CHECK(compress_collinear(p) == want);
  CHECK(compress_collinear(PixelPath{{1, 1}}) == PixelPath{{1, 1}});
}

TEST_CASE("line of sight visits every crossed cell") {
  std::set<std::pair<int, int>> seen;
  auto rec = [&](int x, int y) {
    seen.insert({x, y});
    return true;
  };
  CHECK(line_of_sight({0, 0}, {3, 0}, rec));
  CHECK(seen == std::set<std::pair<int, int>>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  seen.clear();
  // Exactly through a corner: both side cells count.
  CHECK(line_of_sight({0, 0}, {1, 1}, rec));
  CHECK(seen.count({1, 0}));
  CHECK(seen.count({0, 1}));
  const auto m = oracle::from_ascii({"...", ".#.", "..."});
  auto ok = [&](int x, int y) { return m.is_traversable(x, y); };
  CHECK_FALSE(line_of_sight({0, 0}, {2, 2}, ok));
  CHECK(line_of_sight({0, 0}, {2, 0}, ok));
  CHECK_FALSE(line_of_sight({0, 2}, {1, 0}, ok));
}

TEST_CASE("simplify keeps endpoints and only visible shortcuts") {
  const auto m = random_map(64, 64, 0.15, 3);
  const ClearanceMap grid(m);
  auto ok = [&](int x, int y) { return m.is_traversable(x, y); };
  std::mt19937_64 rng(6);
  int done = 0;
  for (int k = 0; k < 200 && done < 30; ++k) {
    const Cell s{int(rng() % 64), int(rng() % 64)}, t{int(rng() % 64), int(rng() % 64)};
    if (!m.is_traversable(s) || !m.is_traversable(t)) continue;
    GridPath p;
    try {
      p = astar(grid, s, t);
    } catch (const PlanningError&) {
      continue;
    }
    const auto simple = simplify_line_of_sight(p.points, ok);
    CHECK(simple.front() == p.points.front());
    CHECK(simple.back() == p.points.back());
    CHECK(simple.size() <= p.points.size());
    for (size_t i = 1; i < simple.size(); ++i) CHECK(line_of_sight(simple[i - 1], simple[i], ok));
    CHECK(path_length(simple) <= p.cost + 1e-9);
    ++done;
  }
  CHECK(done == 30);
}

}  // TEST_SUITE
