#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "meanfp/semigroup.hpp"

using namespace meanfp;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double t : v) x[i++] = t;
  return x;
}

MatrixXd mat2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

MapPtr flip_1d() { return make_affine(-MatrixXd::Identity(1, 1), VectorXd::Zero(1)); }

MapPtr swap_2d() { return make_affine(mat2(0, 1, 1, 0), VectorXd::Zero(2)); }

MapPtr unit_clamp_2d() { return make_clamp(vec({0.0, 0.0}), vec({1.0, 1.0})); }

// counterclockwise quarter turn
MapPtr rot90() { return make_affine(mat2(0, -1, 1, 0), VectorXd::Zero(2)); }

Representation diagonal_family() {
  return Representation(LpSpace(2, 2.0), {unit_clamp_2d(), swap_2d()});
}

}  // namespace

TEST_CASE("affine certificates") {
  LpSpace e2(2, 2.0);
  // a genuine expansion is rejected for every p
  CHECK_THROWS_AS(
      Representation(e2, {make_affine(2.0 * MatrixXd::Identity(2, 2),
                                      VectorXd::Zero(2))}),
      CertificationError);
  // swap is an isometry for all p and passes the interpolation bound
  for (double p : {1.5, 2.0, 4.0})
    CHECK(swap_2d()->lipschitz_bound(p) == doctest::Approx(1.0));
  // a map whose l1/linf bound exceeds 1 is rejected for p != 2 even though
  // sigma_max alone would not certify it either
  const MapPtr shear = make_affine(mat2(0.5, 0.5, 0.0, 0.5), VectorXd::Zero(2));
  CHECK(shear->lipschitz_bound(4.0) ==
        doctest::Approx(std::pow(1.0, 0.25) * std::pow(1.0, 0.75)));
  const MapPtr wide = make_affine(mat2(0.6, 0.6, 0.0, 0.0), VectorXd::Zero(2));
  // ||A||_1 = 0.6, ||A||_inf = 1.2 -> bound 0.6^(1/4) * 1.2^(3/4) > 1
  CHECK(wide->lipschitz_bound(4.0) > 1.0);
  CHECK_THROWS_AS(Representation(LpSpace(2, 4.0), {wide}), CertificationError);
  // ... but it is accepted in the Hilbert case where sigma_max decides
  CHECK(wide->lipschitz_bound(2.0) < 1.0);
  Representation ok(LpSpace(2, 2.0), {wide});
  CHECK(ok.k() == 1);
}

TEST_CASE("clamp construction validates bounds") {
  CHECK_THROWS_AS(ClampMap(vec({1.0, 0.0}), vec({0.0, 1.0})),
                  std::invalid_argument);
}

TEST_CASE("apply examples") {
  // T(x) = -x, s = (2): an involution squared is the identity
  Representation flip(LpSpace(1, 2.0), {flip_1d()});
  CHECK(flip.apply({2}, vec({0.7}))[0] == doctest::Approx(0.7).epsilon(1e-15));

  // clamp onto [0,1]^2
  Representation clamp_only(LpSpace(2, 2.0), {unit_clamp_2d()});
  const VectorXd c = clamp_only.apply({1}, vec({2.0, -1.0}));
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 0.0);

  // clamp then swap at s = (1,1); commutation makes both orders agree
  Representation diag = diagonal_family();
  const VectorXd a = diag.apply({1, 1}, vec({2.0, -1.0}));
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 1.0);
  const VectorXd swapped_first =
      diag.generator(0).apply(diag.generator(1).apply(vec({2.0, -1.0})));
  CHECK(a[0] == doctest::Approx(swapped_first[0]).epsilon(1e-12));
  CHECK(a[1] == doctest::Approx(swapped_first[1]).epsilon(1e-12));

  // identity element
  const VectorXd same = diag.apply({0, 0}, vec({0.3, 0.8}));
  CHECK(same[0] == 0.3);
  CHECK(same[1] == 0.8);
}

TEST_CASE("apply rejects bad inputs") {
  Representation diag = diagonal_family();
  CHECK_THROWS_AS(diag.apply({1}, vec({0.0, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(diag.apply({-1, 0}, vec({0.0, 0.0})), std::invalid_argument);

  Representation boxed(LpSpace(2, 2.0), {swap_2d()},
                       Domain::box(vec({0.0, 0.0}), vec({1.0, 1.0})));
  CHECK_THROWS_AS(boxed.apply({1}, vec({2.0, 0.0})), std::domain_error);
}

TEST_CASE("certification examples") {
  Representation diag = diagonal_family();
  const auto good = certify(diag, 200, 7);
  CHECK(good.pass);
  CHECK(good.max_commutator_defect <= 1e-12);
  CHECK(good.max_expansive_ratio <= 1.0 + 1e-9);

  Representation bad(LpSpace(2, 2.0), {rot90(), unit_clamp_2d()});
  const auto report = certify(bad, 200, 7);
  CHECK_FALSE(report.pass);
  CHECK(report.max_commutator_defect > 1e-3);
  CHECK(report.witness_point.size() == 2);
  // deterministic witness: both orders differ at (2, -1)
  const VectorXd w = vec({2.0, -1.0});
  const VectorXd order_a = bad.generator(1).apply(bad.generator(0).apply(w));
  const VectorXd order_b = bad.generator(0).apply(bad.generator(1).apply(w));
  CHECK((order_a - order_b).norm() > 0.5);

  Representation ident(LpSpace(2, 2.0), {make_identity(2)});
  const auto trivial = certify(ident, 50, 3);
  CHECK(trivial.pass);
  CHECK(trivial.max_commutator_defect == 0.0);
}

TEST_CASE("semigroup law on random indices") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(0, 3);
  Representation diag = diagonal_family();
  for (int trial = 0; trial < 100; ++trial) {
    MultiIndex s{small(rng), small(rng)};
    MultiIndex t{small(rng), small(rng)};
    const VectorXd x = sample_point(diag.space(), diag.domain(), rng);
    const VectorXd lhs = diag.apply(add_index(s, t), x);
    const VectorXd rhs = diag.apply(s, diag.apply(t, x));
    CHECK(lp_norm(lhs - rhs, 2.0) <= 1e-9 * (1.0 + lp_norm(x, 2.0)));
  }
}

TEST_CASE("full action is nonexpansive") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> small(0, 6);
  for (double p : {1.5, 2.0, 3.0}) {
    Representation diag(LpSpace(2, p), {unit_clamp_2d(), swap_2d()});
    for (int trial = 0; trial < 100; ++trial) {
      MultiIndex s{small(rng), small(rng)};
      const VectorXd x = sample_point(diag.space(), diag.domain(), rng);
      const VectorXd y = sample_point(diag.space(), diag.domain(), rng);
      const double dxy = lp_norm(x - y, p);
      if (dxy < 1e-9) continue;
      CHECK(lp_norm(diag.apply(s, x) - diag.apply(s, y), p) <=
            (1.0 + 1e-9) * dxy);
    }
  }
}

TEST_CASE("fixed-set oracle: diagonal segment") {
  Representation diag = diagonal_family();
  const auto fix = fixed_set_oracle(diag);
  CHECK(fix.subspace_dim() == 1);
  CHECK(fix.has_box());

  CHECK(fix.contains(vec({0.25, 0.25})));
  CHECK(fix.contains(vec({1.0, 1.0})));
  CHECK_FALSE(fix.contains(vec({0.25, 0.30})));
  CHECK_FALSE(fix.contains(vec({2.0, 2.0})));  // on the line, outside the box

  // sampled points are genuine common fixed points, uniform in t
  const auto samples = fix.sample_many(50, 99);
  for (const auto& z : samples) {
    CHECK(fix.max_generator_residual(z) <= 1e-10);
    CHECK(z[0] == doctest::Approx(z[1]).epsilon(1e-12));
    CHECK(z[0] >= -1e-12);
    CHECK(z[0] <= 1.0 + 1e-12);
  }
}

TEST_CASE("fixed-set oracle: affine cases") {
  Representation flip(LpSpace(1, 2.0), {flip_1d()});
  const auto fix0 = fixed_set_oracle(flip);
  CHECK(fix0.subspace_dim() == 0);
  CHECK(fix0.point().norm() == doctest::Approx(0.0));
  CHECK(fix0.contains(VectorXd::Zero(1)));
  CHECK_FALSE(fix0.contains(vec({0.1})));

  Representation ident(LpSpace(2, 2.0), {make_identity(2)});
  const auto fix_all = fixed_set_oracle(ident);
  CHECK(fix_all.subspace_dim() == 2);
  CHECK_FALSE(fix_all.has_box());
  CHECK(fix_all.contains(vec({3.0, -4.0})));
}

TEST_CASE("fixed-set oracle errors") {
  // pure translation has no fixed point
  Representation shift(LpSpace(1, 2.0),
                       {make_affine(MatrixXd::Identity(1, 1), vec({1.0}))});
  CHECK_THROWS_AS(fixed_set_oracle(shift), InfeasibleError);

  // composed generators are outside the oracle's reach
  Representation comp(LpSpace(2, 2.0),
                      {make_composed({unit_clamp_2d(), swap_2d()})});
  CHECK_THROWS_AS(fixed_set_oracle(comp), UnsupportedError);

  // disjoint clamp boxes
  Representation boxes(
      LpSpace(1, 2.0),
      {make_clamp(vec({0.0}), vec({1.0})), make_clamp(vec({2.0}), vec({3.0}))});
  CHECK_THROWS_AS(fixed_set_oracle(boxes), InfeasibleError);
}

TEST_CASE("oracle soundness both ways") {
  std::mt19937_64 rng(2024);
  Representation diag = diagonal_family();
  const auto fix = fixed_set_oracle(diag);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd z = fix.sample(rng);
    // points passed by the predicate barely move under any generator
    REQUIRE(fix.contains(z));
    CHECK(fix.max_generator_residual(z) <= 1e-9);
    // conversely, near-exact fixed points pass
    VectorXd nudged = z;
    nudged[0] += 1e-13;
    nudged[1] += 1e-13;
    if (nudged[0] <= 1.0 && diag.max_generator_residual(nudged) <= 1e-12)
      CHECK(fix.contains(nudged));
  }
}

TEST_CASE("metric projection onto the fixed set (p = 2)") {
  Representation diag = diagonal_family();
  const auto fix = fixed_set_oracle(diag);
  const VectorXd px = fix.project(vec({1.0, 0.0}));
  CHECK(px[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(px[1] == doctest::Approx(0.5).epsilon(1e-10));

  // u already in the set
  const VectorXd inside = fix.project(vec({0.3, 0.3}));
  CHECK(inside[0] == doctest::Approx(0.3).epsilon(1e-12));

  // clipping to the segment end
  const VectorXd clipped = fix.project(vec({3.0, 1.5}));
  CHECK(clipped[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(clipped[1] == doctest::Approx(1.0).epsilon(1e-9));

  Representation flip(LpSpace(1, 2.0), {flip_1d()});
  CHECK(fixed_set_oracle(flip).project(vec({3.0}))[0] == 0.0);

  Representation diag_lp(LpSpace(2, 3.0), {unit_clamp_2d(), swap_2d()});
  CHECK_THROWS_AS(fixed_set_oracle(diag_lp).project(vec({1.0, 0.0})),
                  UnsupportedError);
}

TEST_CASE("fixed-set oracle: two-parameter set in R^3") {
  // clamp onto [0,1]^3 and a swap of the first two coordinates: the common
  // fixed points form the 2-parameter patch { (t, t, s) } inside the box
  MatrixXd S = MatrixXd::Identity(3, 3);
  S(0, 0) = S(1, 1) = 0;
  S(0, 1) = S(1, 0) = 1;
  Representation rep(LpSpace(3, 2.0),
                     {make_clamp(VectorXd::Zero(3), VectorXd::Ones(3)),
                      make_affine(S, VectorXd::Zero(3))});
  const auto fix = fixed_set_oracle(rep);
  CHECK(fix.subspace_dim() == 2);
  CHECK(fix.has_box());

  for (const auto& z : fix.sample_many(50, 500)) {
    CHECK(fix.max_generator_residual(z) <= 1e-10);
    CHECK(z[0] == doctest::Approx(z[1]).epsilon(1e-12));
    CHECK(z.minCoeff() >= -1e-10);
    CHECK(z.maxCoeff() <= 1.0 + 1e-10);
  }

  VectorXd u(3);
  u << 1.0, 0.0, 2.0;
  const VectorXd px = fix.project(u);
  CHECK(px[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(px[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(px[2] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ball domains") {
  Domain ball = Domain::ball(vec({0.0, 0.0}), 2.0);
  LpSpace e2(2, 2.0);
  CHECK(ball.contains(e2, vec({1.0, 1.0})));
  CHECK_FALSE(ball.contains(e2, vec({2.0, 2.0})));
  const VectorXd pulled = ball.pull_inside(e2, vec({4.0, 0.0}));
  CHECK(lp_norm(pulled, 2.0) == doctest::Approx(2.0));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i)
    CHECK(ball.contains(e2, sample_point(e2, ball, rng), 1e-12));
  Representation rep(e2, {swap_2d()}, ball);
  CHECK_THROWS_AS(fixed_set_oracle(rep), UnsupportedError);
}
