#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "shiftlab/space.hpp"

using namespace shiftlab;

namespace {
SpaceSpec geometric_sup(double r, int p_max = 20) {
    return SpaceSpec(Domain::unilateral, SupNorm{}, p_max, SpaceSpec::GeometricRule{r});
}

SparseVector rand_vector(std::mt19937_64& rng, Domain d = Domain::unilateral) {
    std::uniform_int_distribution<std::int64_t> idx(d == Domain::unilateral ? 0 : -40, 60);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::vector<SparseVector::Entry> entries;
    std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) entries.emplace_back(idx(rng), coef(rng));
    return SparseVector::from_entries(d, std::move(entries));
}
}  // namespace

TEST_CASE("seminorm examples") {
    auto space = geometric_sup(0.5);
    CHECK(seminorm(space, SparseVector::basis(Domain::unilateral, 3), 7) ==
          Catch::Approx(0.125).epsilon(1e-12));
    CHECK(seminorm(space, SparseVector(Domain::unilateral), 0) == 0.0);

    // power-type l1 with nu_q(k) = (1+q)^k
    std::vector<double> rq;
    for (int q = 0; q <= 6; ++q) rq.push_back(1.0 + q);
    SpaceSpec l1(Domain::unilateral, PowerNorm{1.0}, 6, SpaceSpec::PerQGeometricRule{rq});
    auto x = SparseVector::from_entries(Domain::unilateral, {{0, 1.0}, {1, 1.0}});
    for (int q = 0; q <= 6; ++q) {
        double direct = oracle::power_norm({{0, 1.0}, {1, 1.0}}, 1.0, [&](std::int64_t k) {
            return std::pow(1.0 + q, static_cast<double>(k));
        });
        CHECK(direct == Catch::Approx(2.0 + q));
        CHECK(seminorm(l1, x, q) == Catch::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("f_norm enclosure") {
    auto space = geometric_sup(0.5, 20);
    double tail = std::ldexp(1.0, -21);

    auto zero = f_norm(space, SparseVector(Domain::unilateral));
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi == Catch::Approx(tail));

    // a vector with every seminorm >= 1 saturates each term
    SpaceSpec flat(Domain::unilateral, SupNorm{}, 20, SpaceSpec::ConstantRule{1.0});
    auto sat = f_norm(flat, SparseVector::basis(Domain::unilateral, 0, 2.0));
    CHECK(sat.lo == Catch::Approx(1.0 - tail));

    auto e5 = f_norm(space, SparseVector::basis(Domain::unilateral, 5));
    CHECK(e5.lo == Catch::Approx((1.0 / 32.0) * (1.0 - tail)).epsilon(1e-12));
    CHECK(e5.hi - e5.lo == Catch::Approx(tail));
}

TEST_CASE("f_norm interval contains the value at doubled resolution") {
    std::mt19937_64 rng(11);
    auto coarse = geometric_sup(0.7, 10);
    auto fine = geometric_sup(0.7, 21);
    for (int t = 0; t < 30; ++t) {
        auto x = rand_vector(rng);
        auto c = f_norm(coarse, x);
        auto f = f_norm(fine, x);
        CHECK(c.lo <= f.lo + 1e-15);
        CHECK(f.hi <= c.hi + 1e-15);
    }
}

TEST_CASE("truncate") {
    auto x = SparseVector::from_entries(Domain::unilateral, {{0, 1.0}, {7, 1.0}});
    auto t = truncate(x, 0, 5);
    CHECK(t.support_size() == 1);
    CHECK(t.coef(0) == 1.0);

    auto full = truncate(x, 0, 1000);
    CHECK(full.entries() == x.entries());

    auto b = SparseVector::from_entries(Domain::bilateral, {{-3, 1.0}, {2, 1.0}});
    auto tb = truncate(b, -2, 2);
    CHECK(tb.support_size() == 1);
    CHECK(tb.coef(2) == 1.0);
}

TEST_CASE("sparse arithmetic stores no zeros") {
    auto e1 = SparseVector::basis(Domain::unilateral, 1);
    CHECK(subtract(e1, e1).is_zero());

    auto e3 = SparseVector::basis(Domain::unilateral, 3);
    auto s = add(scale(e3, 2.0), e3);
    CHECK(s.support_size() == 1);
    CHECK(s.coef(3) == 3.0);

    auto x = SparseVector::from_entries(Domain::unilateral, {{0, 1.0}, {2, 0.5}});
    auto r = subtract(x, SparseVector::from_entries(Domain::unilateral, {{2, 0.5}}));
    CHECK(r.support_size() == 1);
    CHECK(r.coef(0) == 1.0);
}

TEST_CASE("arithmetic rejects domain mixing") {
    auto u = SparseVector::basis(Domain::unilateral, 1);
    auto b = SparseVector::basis(Domain::bilateral, 1);
    CHECK_THROWS_AS(add(u, b), DomainMismatch);
    CHECK_THROWS_AS(SparseVector::basis(Domain::unilateral, -1), DomainMismatch);
}

TEST_CASE("triangle inequality on random sparse pairs") {
    std::mt19937_64 rng(23);
    auto sup = geometric_sup(0.5, 8);
    SpaceSpec l2(Domain::unilateral, PowerNorm{2.0}, 8, SpaceSpec::GeometricRule{0.8});
    for (int t = 0; t < 50; ++t) {
        auto x = rand_vector(rng);
        auto y = rand_vector(rng);
        for (int q = 0; q <= 8; ++q) {
            CHECK(seminorm(sup, add(x, y), q) <=
                  seminorm(sup, x, q) + seminorm(sup, y, q) + 1e-12);
            CHECK(seminorm(l2, add(x, y), q) <=
                  seminorm(l2, x, q) + seminorm(l2, y, q) + 1e-12);
        }
    }
}

TEST_CASE("coordinate damping never increases seminorms") {
    std::mt19937_64 rng(29);
    auto space = geometric_sup(0.6, 8);
    std::uniform_real_distribution<double> damp(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        auto x = rand_vector(rng);
        std::vector<SparseVector::Entry> damped;
        for (auto [k, c] : x.entries()) damped.emplace_back(k, c * damp(rng));
        auto ax = SparseVector::from_entries(Domain::unilateral, std::move(damped));
        for (int q = 0; q <= 8; ++q)
            CHECK(seminorm(space, ax, q) <= seminorm(space, x, q) + 1e-12);
    }
}

TEST_CASE("seminorms are non-decreasing in q") {
    std::mt19937_64 rng(31);
    std::vector<double> rq{0.25, 0.5, 0.5, 0.75, 1.0};
    SpaceSpec space(Domain::unilateral, SupNorm{}, 4, SpaceSpec::PerQGeometricRule{rq});
    for (int t = 0; t < 30; ++t) {
        auto x = rand_vector(rng);
        for (int q = 0; q < 4; ++q)
            CHECK(seminorm(space, x, q) <= seminorm(space, x, q + 1) * (1.0 + 1e-12));
    }
}

TEST_CASE("monotonicity validation rejects decreasing q ladders") {
    CHECK_THROWS_AS(SpaceSpec(Domain::unilateral, SupNorm{}, 3,
                              SpaceSpec::PerQGeometricRule{{0.9, 0.5}}),
                    ConfigError);
    CHECK_THROWS_AS(SpaceSpec(Domain::unilateral, SupNorm{}, 3,
                              SpaceSpec::TableRule{{{1.0, 2.0}, {0.5, 2.0}}, 0, 1.0}),
                    ConfigError);
}

TEST_CASE("f_norm against a direct summation oracle") {
    std::mt19937_64 rng(37);
    auto space = geometric_sup(0.5, 12);
    for (int t = 0; t < 20; ++t) {
        auto x = rand_vector(rng);
        double lo = oracle::f_norm_lo(
            x.entries(),
            [](int, std::int64_t k) { return std::pow(0.5, static_cast<double>(k)); }, true, 0.0,
            12);
        auto iv = f_norm(space, x);
        CHECK(iv.lo == Catch::Approx(lo).margin(1e-12));
    }
}
