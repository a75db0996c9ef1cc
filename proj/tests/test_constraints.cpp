#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "formation/constraints.hpp"
#include "formation/errors.hpp"
#include "formation/scenario.hpp"

using namespace formation;
using doctest::Approx;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector stack(std::initializer_list<Vector> blocks) {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.size());
  Vector x(n);
  int k = 0;
  for (const auto& b : blocks) {
    x.segment(k, b.size()) = b;
    k += static_cast<int>(b.size());
  }
  return x;
}

// Reference smoothing straight from the definitions, no max-shift.
double naive_alpha(const std::vector<double>& psi, double nu) {
  double s = 0.0;
  for (double p : psi) s += std::exp(-nu * p);
  return -std::log(s) / nu;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector up = x, down = x;
    up[k] += h;
    down[k] -= h;
    g[k] = (f(up) - f(down)) / (2 * h);
  }
  return g;
}

double rel_error(const Vector& a, const Vector& fd, double value) {
  const double denom = std::max(fd.lpNorm<Eigen::Infinity>(), 1e-3 * std::abs(value));
  return denom == 0.0 ? (a - fd).lpNorm<Eigen::Infinity>() : (a - fd).lpNorm<Eigen::Infinity>() / denom;
}

const Layout kPair{2, 2};

}  // namespace

TEST_CASE("atom values at center, boundary and relative anchors") {
  const Layout one{1, 2};
  const auto ball = ConstraintAtom::inside(0, 1.0, FixedPoint{v2(2, 0)});
  CHECK(eval_atom(ball, v2(2, 0), one) == Approx(1.0));
  CHECK(eval_atom(ball, v2(3, 0), one) == Approx(0.0));

  // Case A, agent 2 at distance 1 from agent 1.
  const auto tether = ConstraintAtom::inside(1, 1.0, AgentRef{0});
  CHECK(eval_atom(tether, stack({v2(2, 0), v2(2, 1)}), kPair) == Approx(0.0));

  const auto apart = ConstraintAtom::outside(1, 1.0, AgentRef{0});
  CHECK(eval_atom(apart, stack({v2(0, 0), v2(3, 0)}), kPair) == Approx(8.0));
}

TEST_CASE("atom errors") {
  CHECK_THROWS_AS(ConstraintAtom::inside(0, -1.0, FixedPoint{v2(0, 0)}), ConfigError);
  CHECK_THROWS_AS(ConstraintAtom::inside(1, 1.0, AgentRef{1}), ConfigError);
  const auto far = ConstraintAtom::inside(0, 1.0, AgentRef{5});
  CHECK_THROWS_AS(eval_atom(far, stack({v2(0, 0), v2(1, 0)}), kPair), ConfigError);
  const auto wrong_dim = ConstraintAtom::inside(0, 1.0, FixedPoint{Vector::Zero(3)});
  CHECK_THROWS_AS(eval_atom(wrong_dim, stack({v2(0, 0), v2(1, 0)}), kPair), ConfigError);
}

TEST_CASE("atom gradients") {
  const Layout one{1, 2};
  const auto ball = ConstraintAtom::inside(0, 1.0, FixedPoint{v2(2, 0)});
  CHECK(grad_atom(ball, v2(2, 0), one).to_dense(one).norm() == 0.0);

  const auto tether = ConstraintAtom::inside(0, 1.0, AgentRef{1});
  const Vector g = grad_atom(tether, stack({v2(1, 0), v2(0, 0)}), kPair).to_dense(kPair);
  CHECK(g[0] == Approx(-2.0));
  CHECK(g[1] == Approx(0.0));
  CHECK(g[2] == Approx(2.0));
  CHECK(g[3] == Approx(0.0));
}

TEST_CASE("atom gradients match central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  const Layout layout{3, 3};
  for (int n = 0; n < 100; ++n) {
    Vector x(layout.size());
    for (auto& c : x) c = u(rng);
    Vector anchor(3);
    for (auto& c : anchor) c = u(rng);
    const std::vector<ConstraintAtom> atoms{
        ConstraintAtom::inside(0, 1.5, FixedPoint{anchor}),
        ConstraintAtom::outside(1, 0.5, FixedPoint{anchor}),
        ConstraintAtom::inside(2, 2.0, AgentRef{0}),
        ConstraintAtom::outside(0, 0.3, AgentRef{1}),
    };
    for (const auto& a : atoms) {
      const Vector fd = fd_gradient([&](const Vector& p) { return eval_atom(a, p, layout); }, x, 1e-5);
      CHECK(rel_error(grad_atom(a, x, layout).to_dense(layout), fd, eval_atom(a, x, layout)) <= 1e-6);
    }
  }
}

TEST_CASE("consolidated and global minima") {
  const Layout one{1, 2};
  const AgentConstraintSet single(0, {ConstraintAtom::inside(0, 1.0, FixedPoint{v2(0, 0)})});
  CHECK(consolidated_alpha_bar(single, v2(0.5, 0), one) == Approx(0.75));

  // psi values {0.3, -0.1}.
  const AgentConstraintSet two(0, {ConstraintAtom::inside(0, std::sqrt(0.3), FixedPoint{v2(0, 0)}),
                                   ConstraintAtom::inside(0, std::sqrt(0.9), FixedPoint{v2(1, 0)})});
  CHECK(consolidated_alpha_bar(two, v2(0, 0), one) == Approx(-0.1));

  // Case B agent 2 at the reported optimum.
  const auto sets = constraint_sets(builtin_case("B"));
  const Layout three{3, 2};
  const Vector xb = stack({v2(1.99, 0.0), v2(-0.61, 0.03), v2(-1.99, 0.0)});
  const double expected = std::min(9.0 - (xb.segment(2, 2) - xb.segment(0, 2)).squaredNorm(),
                                   4.0 - (xb.segment(2, 2) - xb.segment(4, 2)).squaredNorm());
  CHECK(consolidated_alpha_bar(sets[1], xb, three) == Approx(expected));
  CHECK(expected == Approx(2.09).epsilon(0.01));

  const auto a = constraint_sets(builtin_case("A"));
  CHECK(global_beta_bar(a, stack({v2(2, 0), v2(2, 0), v2(2, 0)}), three) == Approx(1.0));
  CHECK(global_beta_bar(a, stack({v2(2, 0), v2(2, 0), v2(5, 0)}), three) < 0.0);
}

TEST_CASE("smooth alpha and beta") {
  const Layout one{1, 2};
  const AgentConstraintSet single(0, {ConstraintAtom::inside(0, 1.0, FixedPoint{v2(0, 0)})});
  const Vector x = v2(0.3, 0.2);
  CHECK(std::abs(smooth_alpha(single, x, one, 5.0) - eval_atom(single.atoms()[0], x, one)) <= 1e-12);

  // Both psi = 0.
  const AgentConstraintSet zeros(0, {ConstraintAtom::inside(0, 1.0, FixedPoint{v2(1, 0)}),
                                     ConstraintAtom::inside(0, 1.0, FixedPoint{v2(-1, 0)})});
  CHECK(smooth_alpha(zeros, v2(0, 0), one, 5.0) == Approx(-std::log(2.0) / 5.0));
  CHECK(smooth_alpha(zeros, v2(0, 0), one, 5.0) == Approx(-0.13863).epsilon(1e-4));

  const std::vector<AgentConstraintSet> sets{single};
  CHECK(smooth_beta(sets, x, one, {5.0, 3.0}) == Approx(smooth_alpha(single, x, one, 5.0)));

  // Against the unshifted definitions.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto c = constraint_sets(builtin_case("E"));
  const Layout three{3, 2};
  for (int n = 0; n < 50; ++n) {
    Vector p(6);
    for (auto& e : p) e = u(rng);
    std::vector<double> alphas;
    for (const auto& set : c) {
      const double ref = naive_alpha(atom_values(set, p, three), 5.0);
      CHECK(smooth_alpha(set, p, three, 5.0) == Approx(ref).epsilon(1e-12));
      alphas.push_back(ref);
    }
    CHECK(smooth_beta(c, p, three, {5.0, 2.0}) == Approx(naive_alpha(alphas, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("sandwich bounds on random points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4, 4), nu(0.01, 5.0);
  const Layout three{3, 2};
  for (const char* name : {"A", "B", "C", "D", "E"}) {
    const auto sets = constraint_sets(builtin_case(name));
    const int m = max_atom_count(sets);
    for (int n = 0; n < 200; ++n) {
      Vector p(6);
      for (auto& e : p) e = u(rng);
      const SmoothingParams params{5.0, nu(rng)};
      for (const auto& set : sets) {
        const double a = smooth_alpha(set, p, three, params.nu_alpha);
        const double abar = consolidated_alpha_bar(set, p, three);
        CHECK(abar - a >= -1e-12);
        CHECK(a + std::log(set.size()) / params.nu_alpha - abar >= -1e-12);
      }
      const double b = smooth_beta(sets, p, three, params);
      const double bbar = global_beta_bar(sets, p, three);
      CHECK(bbar - b >= -1e-12);
      CHECK(b + std::log(3.0) / params.nu_beta + std::log(m) / params.nu_alpha - bbar >= -1e-12);
    }
  }
}

TEST_CASE("log h and local objective") {
  const Layout one{1, 2};
  // psi = 0.5
  const AgentConstraintSet half(0, {ConstraintAtom::inside(0, std::sqrt(0.5), FixedPoint{v2(0, 0)})});
  CHECK(log_h(half, v2(0, 0), one, 5.0) == Approx(-2.5));
  const AgentConstraintSet zeros(0, {ConstraintAtom::inside(0, 1.0, FixedPoint{v2(1, 0)}),
                                     ConstraintAtom::inside(0, 1.0, FixedPoint{v2(-1, 0)})});
  CHECK(log_h(zeros, v2(0, 0), one, 5.0) == Approx(std::log(2.0)));
  CHECK(local_objective_log(zeros, v2(0, 0), one, {5.0, 5.0}) == Approx(std::log(2.0)));

  const auto a = constraint_sets(builtin_case("A"));
  const Vector x = stack({v2(3, 0), v2(3, 0), v2(3, 0)});
  CHECK(local_objective(a[0], x, {3, 2}, {5.0, 5.0}).value == Approx(1.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto e = constraint_sets(builtin_case("E"));
  for (int n = 0; n < 20; ++n) {
    Vector p(6);
    for (auto& c : p) c = u(rng);
    for (const auto& set : e) {
      CHECK(std::abs(log_h(set, p, {3, 2}, 5.0) + 5.0 * smooth_alpha(set, p, {3, 2}, 5.0)) <= 1e-12);
      CHECK(local_objective_log(set, p, {3, 2}, {5.0, 5.0}) == Approx(log_h(set, p, {3, 2}, 5.0)));
    }
  }
}

TEST_CASE("local objective gradient") {
  const Layout one{1, 2};
  const AgentConstraintSet centered(0, {ConstraintAtom::inside(0, 1.0, FixedPoint{v2(0, 0)}),
                                        ConstraintAtom::inside(0, 2.0, FixedPoint{v2(0, 0)})});
  CHECK(grad_local_objective(centered, v2(0, 0), one, {5.0, 2.0}).norm() == 0.0);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2, 2), nu(0.5, 5);
  int checked = 0;
  for (const char* name : {"A", "B", "C", "D", "E"}) {
    const auto sets = constraint_sets(builtin_case(name));
    for (int n = 0; n < 40; ++n) {
      Vector p(6);
      for (auto& c : p) c = u(rng);
      const SmoothingParams params{nu(rng), nu(rng)};
      for (const auto& set : sets) {
        const double lf = local_objective_log(set, p, {3, 2}, params);
        if (lf > 300) continue;
        const Vector fd = fd_gradient(
            [&](const Vector& q) { return std::exp(local_objective_log(set, q, {3, 2}, params)); }, p,
            1e-5);
        CHECK(rel_error(grad_local_objective(set, p, {3, 2}, params), fd, std::exp(lf)) <= 1e-6);
        ++checked;
      }
    }
  }
  CHECK(checked > 400);
}

TEST_CASE("saturation guard") {
  const Layout one{1, 1};
  Vector far(1);
  far << 1000.0;
  const AgentConstraintSet set(0, {ConstraintAtom::inside(0, 1.0, FixedPoint{Vector::Zero(1)})});
  const SmoothingParams params{5.0, 5.0};
  CHECK(local_objective_log(set, far, one, params) > 700.0);
  CHECK(local_objective(set, far, one, params).saturated);
  CHECK_THROWS_AS(grad_local_objective(set, far, one, params), SaturationError);
  CHECK(grad_log_local_objective(set, far, one, params).allFinite());
  CHECK(std::isfinite(smooth_alpha(set, far, one, 5.0)));
}

TEST_CASE("log-convexity of all-Inside objectives") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  const Layout three{3, 2};
  for (const char* name : {"A", "B", "C", "D"}) {
    const auto sets = constraint_sets(builtin_case(name));
    for (int n = 0; n < 200; ++n) {
      Vector x(6), y(6);
      for (auto& c : x) c = u(rng);
      for (auto& c : y) c = u(rng);
      const SmoothingParams params{5.0, 5.0};
      const double fx = global_objective_log(sets, x, three, params);
      const double fy = global_objective_log(sets, y, three, params);
      const double fm = global_objective_log(sets, 0.5 * (x + y), three, params);
      CHECK(fm <= 0.5 * fx + 0.5 * fy + 1e-12 * std::max({1.0, std::abs(fx), std::abs(fy)}));
    }
  }
}

TEST_CASE("auxiliary ball makes beta_bar radially unbounded") {
  // Two agents tethered only to each other: translating both leaves beta_bar
  // unchanged until the auxiliary ball is installed.
  Scenario s;
  s.agents = 2;
  s.dim = 2;
  s.constraints = {ConstraintAtom::inside(0, 1.0, AgentRef{1}),
                   ConstraintAtom::inside(1, 1.0, AgentRef{0})};
  const Vector shift = stack({v2(1, 1), v2(1, 1)}).normalized();
  const auto bare = constraint_sets(s);
  CHECK(global_beta_bar(bare, 100 * shift, s.layout()) == Approx(global_beta_bar(bare, shift, s.layout())));

  s.auxiliary.enabled = true;
  s.auxiliary.c_aux = 25.0;
  const auto sets = constraint_sets(s);
  CHECK(sets[0].size() == 2);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int n = 0; n < 20; ++n) {
    Vector dir(4);
    for (auto& c : dir) c = g(rng);
    dir.normalize();
    double previous = global_beta_bar(sets, 10 * dir, s.layout());
    for (double rho = 20; rho < 1e4; rho *= 2) {
      const double next = global_beta_bar(sets, rho * dir, s.layout());
      CHECK(next < previous);
      previous = next;
    }
  }
}
