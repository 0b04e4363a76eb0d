#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dcflex/milp.hpp"

using namespace dcflex::milp;

namespace {

MilpInstance random_instance(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> obj(-5.0, 10.0), coef(-2.0, 6.0);
  std::uniform_int_distribution<int> sense(0, 5), pick(0, 2);
  MilpInstance inst;
  for (int j = 0; j < n; ++j) inst.add_variable("x" + std::to_string(j), std::round(obj(rng) * 4) / 4);
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      if (pick(rng) == 0) continue;
      const double c = std::round(coef(rng));
      if (c == 0.0) continue;
      terms.push_back({j, c});
      total += std::max(c, 0.0);
    }
    const int s = sense(rng);
    if (s == 0) inst.add_constraint(terms, Sense::kGreaterEqual, std::floor(total / 4));
    else if (s == 1 && !terms.empty()) inst.add_constraint(terms, Sense::kEqual, std::floor(total / 3));
    else inst.add_constraint(terms, Sense::kLessEqual, std::floor(total / 2));
  }
  return inst;
}

}  // namespace

TEST_SUITE("milp") {

TEST_CASE("single binary") {
  MilpInstance inst;
  const int x = inst.add_variable("x", 1.0);
  inst.add_constraint({{x, 1.0}}, Sense::kLessEqual, 1.0);
  const auto r = solve(inst);
  CHECK(r.status == SolveStatus::kOptimal);
  CHECK(r.objective_value == doctest::Approx(1.0));
  CHECK(r.assignment == std::vector<std::uint8_t>{1});
}

TEST_CASE("unit knapsack picks the better item") {
  MilpInstance inst;
  const int x = inst.add_variable("x", 2.0);
  const int y = inst.add_variable("y", 3.0);
  inst.add_constraint({{x, 1.0}, {y, 1.0}}, Sense::kLessEqual, 1.0);
  const auto r = solve(inst);
  CHECK(r.objective_value == doctest::Approx(3.0));
  CHECK(r.assignment == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("empty and infeasible instances") {
  MilpInstance empty;
  empty.set_objective_constant(-4.5);
  for (const auto& r : {solve(empty), brute_force(empty)}) {
    CHECK(r.status == SolveStatus::kOptimal);
    CHECK(r.objective_value == doctest::Approx(-4.5));
  }

  MilpInstance bad;
  const int x = bad.add_variable("x", 1.0);
  bad.add_constraint({{x, 1.0}}, Sense::kGreaterEqual, 1.0);
  bad.add_constraint({{x, 1.0}}, Sense::kLessEqual, 0.0);
  CHECK(solve(bad).status == SolveStatus::kInfeasible);
  CHECK(brute_force(bad).status == SolveStatus::kInfeasible);
  CHECK(solve(bad).assignment.empty());
}

TEST_CASE("ties resolve to the lexicographically smallest optimum") {
  MilpInstance inst;
  const int a = inst.add_variable("a", 1.0);
  const int b = inst.add_variable("b", 1.0);
  inst.add_constraint({{a, 1.0}, {b, 1.0}}, Sense::kLessEqual, 1.0);
  CHECK(brute_force(inst).assignment == std::vector<std::uint8_t>{0, 1});
  CHECK(solve(inst).assignment == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("solve matches exhaustive enumeration on random instances") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 150; ++k) {
    const int n = 8 + k % 9;
    const auto inst = random_instance(rng, n, 5);
    const auto bf = brute_force(inst);
    const auto r = solve(inst, SolveOptions{0.0});
    REQUIRE(r.status == bf.status);
    if (bf.status != SolveStatus::kOptimal) continue;
    CHECK(std::abs(r.objective_value - bf.objective_value) <= 1e-6);
    CHECK(inst.max_violation(r.assignment) == 0.0);
    CHECK(inst.evaluate(r.assignment) == doctest::Approx(r.objective_value));
  }
}

TEST_CASE("repeated solves are bit-identical") {
  std::mt19937_64 rng(5);
  const auto inst = random_instance(rng, 16, 6);
  const auto a = solve(inst);
  const auto b = solve(inst);
  CHECK(a.assignment == b.assignment);
  CHECK(a.objective_value == b.objective_value);
  CHECK(a.nodes == b.nodes);
}

TEST_CASE("a node limit returns the best incumbent as gap-limited") {
  std::mt19937_64 rng(17);
  MilpInstance inst;
  std::uniform_real_distribution<double> w(1.0, 9.0);
  std::vector<Term> row;
  for (int j = 0; j < 30; ++j) {
    inst.add_variable("x" + std::to_string(j), std::round(w(rng) * 100) / 100);
    row.push_back({j, std::round(w(rng) * 100) / 100});
  }
  inst.add_constraint(row, Sense::kLessEqual, 40.0);
  const auto r = solve(inst, SolveOptions{0.0, std::numeric_limits<double>::infinity(), 1});
  CHECK(r.status == SolveStatus::kGapLimit);
  REQUIRE(r.assignment.size() == 30);
  CHECK(inst.max_violation(r.assignment) == 0.0);
  CHECK(r.best_bound >= r.objective_value);
}

TEST_CASE("brute force refuses large instances") {
  MilpInstance inst;
  for (int j = 0; j <= kBruteForceMaxVars; ++j) inst.add_variable("x" + std::to_string(j), 1.0);
  CHECK_THROWS_AS(brute_force(inst), std::invalid_argument);
}

TEST_CASE("instances reject undeclared variables and non-finite data") {
  MilpInstance inst;
  inst.add_variable("x", 1.0);
  CHECK_THROWS_AS(inst.add_constraint({{3, 1.0}}, Sense::kLessEqual, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(inst.add_constraint({{0, std::nan("")}}, Sense::kLessEqual, 1.0), std::invalid_argument);
}

TEST_CASE("LP text dump") {
  MilpInstance inst;
  const int x = inst.add_variable("x_a", 2.5);
  const int y = inst.add_variable("x_b", -1.0);
  inst.add_constraint({{x, 1.0}, {y, 2.0}}, Sense::kLessEqual, 2.0, "cap");
  std::ostringstream out;
  inst.write_lp(out);
  const auto s = out.str();
  CHECK(s.find("Maximize") != std::string::npos);
  CHECK(s.find("cap:") != std::string::npos);
  CHECK(s.find("Binaries") != std::string::npos);
  CHECK(s.find("x_b") != std::string::npos);
  CHECK(s.find("End") != std::string::npos);
}

}
