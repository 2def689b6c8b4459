#include <catch2/catch_amalgamated.hpp>

#include "shiftlab/separate.hpp"

using namespace shiftlab;

namespace {

// exhaustive pairwise verification by membership scans, independent of the
// library's own certificate scan
void verify_family(const SeparatedFamily& fam, std::uint64_t horizon) {
    std::size_t P = fam.sets.size();
    std::vector<std::vector<std::uint64_t>> elems(P);
    for (std::size_t p = 0; p < P; ++p)
        for (std::uint64_t n = 0; n <= horizon; ++n)
            if (fam.sets[p].contains(n)) elems[p].push_back(n);
    for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t q = 0; q < P; ++q) {
            for (auto n : elems[p]) {
                for (auto m : elems[q]) {
                    if (p == q && n == m) continue;
                    std::uint64_t gap = n > m ? n - m : m - n;
                    INFO("p=" << p << " q=" << q << " n=" << n << " m=" << m);
                    REQUIRE(gap > fam.gaps[p] + fam.gaps[q]);
                }
            }
        }
    }
    for (std::size_t p = 0; p < P; ++p) {
        auto rec = lower_density(fam.sets[p], horizon, default_burn_in(horizon));
        REQUIRE(rec.estimate >= fam.certificate.declared_floor[p].value());
    }
}

}  // namespace

TEST_CASE("separate carves two copies of the naturals") {
    auto naturals = IntegerSet::periodic(1, {0});
    auto fam = separate({{naturals, Rational(1, 1)}, {naturals, Rational(1, 1)}}, {2, 2},
                        {.horizon = 10000});
    CHECK(fam.certificate.strategy == "carved");
    CHECK(fam.certificate.pairwise_disjoint);
    verify_family(fam, 2000);
    // all cross gaps exceed 4
    CHECK(fam.certificate.min_cross_gap[0][1] > 4);
}

TEST_CASE("separate passes a single set through") {
    auto m3 = IntegerSet::periodic(3, {0});
    auto fam = separate({{m3, Rational(1, 3)}}, {0}, {.horizon = 3000});
    CHECK(fam.certificate.strategy == "passthrough");
    REQUIRE(fam.sets.size() == 1);
    for (std::uint64_t n = 0; n <= 300; ++n) CHECK(fam.sets[0].contains(n) == (n % 3 == 0));
}

TEST_CASE("separate rejects finite sets") {
    CHECK_THROWS_AS(separate({{IntegerSet::finite({1, 2}), Rational(1, 10)}}, {1}, {}),
                    DensityCollapse);
}

TEST_CASE("separate thins a single dense set when a self gap is demanded") {
    auto naturals = IntegerSet::periodic(1, {0});
    auto fam = separate({{naturals, Rational(1, 1)}}, {3}, {.horizon = 5000});
    verify_family(fam, 1000);
}

TEST_CASE("already separated periodic inputs pass through unchanged") {
    auto b0 = IntegerSet::periodic(20, {3});
    auto b1 = IntegerSet::periodic(40, {7});
    auto fam = separate({{b0, Rational(1, 20)}, {b1, Rational(1, 40)}}, {1, 1},
                        {.horizon = 8000});
    CHECK(fam.certificate.strategy == "passthrough");
    verify_family(fam, 2000);
}

TEST_CASE("greedy separation handles generator-backed sets") {
    auto evens = IntegerSet::generator("arithmetic", {{"start", 0}, {"step", 2}}, Rational(1, 2));
    auto odds = IntegerSet::generator("arithmetic", {{"start", 1}, {"step", 2}}, Rational(1, 2));
    auto fam = separate({{evens, Rational(1, 2)}, {odds, Rational(1, 2)}}, {2, 3},
                        {.horizon = 4000});
    CHECK(fam.certificate.strategy == "greedy");
    CHECK(fam.certificate.pairwise_disjoint);
    verify_family(fam, 4000);
}

TEST_CASE("greedy separation reports infeasible sparse inputs") {
    // a generator whose elements run out long before the horizon
    auto sparse = IntegerSet::generator("arithmetic", {{"start", 0}, {"step", 1}});
    auto fam_ok = separate({{sparse, Rational(1, 1)}}, {1}, {.horizon = 500});
    CHECK(fam_ok.sets.size() == 1);
    // two interleaved very sparse sets cannot keep their declared floors
    auto thin = IntegerSet::generator("arithmetic", {{"start", 0}, {"step", 4001}},
                                      Rational(1, 4001));
    CHECK_THROWS(separate({{thin, Rational(1, 2)}, {thin, Rational(1, 2)}}, {1, 1},
                          {.horizon = 4000}));
}
