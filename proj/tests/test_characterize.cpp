#include <catch2/catch_amalgamated.hpp>

#include "shiftlab/characterize.hpp"

using namespace shiftlab;

namespace {

SpaceSpec xv_half(int p_max = 20) {
    return SpaceSpec(Domain::unilateral, SupNorm{}, p_max, SpaceSpec::GeometricRule{0.5});
}

struct DemoCert {
    FrBuildResult built;
    IntegerSet A;
    std::vector<double> eps;
};

DemoCert demo_cert(const SpaceSpec& space) {
    FrBuildInput in;
    in.families = {IntegerSet::periodic(20, {3}), IntegerSet::periodic(40, {7}),
                   IntegerSet::periodic(80, {12})};
    in.gaps = {1, 1, 1};
    in.support_bound = 4000;
    in.epsilon = 1.0;
    DemoCert d{build_fr_vector_unilateral(space, in), IntegerSet::empty(), {}};
    d.A = IntegerSet::finite(d.built.cert.schedule);
    for (std::size_t q = 0; q < d.built.cert.used_families.size(); ++q)
        d.eps.push_back(std::ldexp(d.built.cert.epsilon,
                                   -static_cast<int>(d.built.cert.schedule[q] + 1)));
    return d;
}

}  // namespace

TEST_CASE("fr characterization: vacuous, duality pass, sabotage fail") {
    auto space = xv_half();
    CheckOptions opts;
    opts.horizon = 3900;
    opts.q_max = 2;

    auto vac = check_fr_characterization(space, IntegerSet::finite({0}), {}, {},
                                         ShiftVariant::unilateral, opts);
    CHECK(vac.overall == Verdict::pass);
    CHECK(vac.cells.empty());

    auto d = demo_cert(space);
    auto rep = check_fr_characterization(space, d.A, d.built.cert.used_families, d.eps,
                                         ShiftVariant::unilateral, opts);
    CHECK(rep.overall == Verdict::pass);
    for (const auto& c : rep.cells) CHECK(c.verdict == Verdict::pass);

    // same families, inverted weights: the series condition must fail
    SpaceSpec bad(Domain::unilateral, SupNorm{}, 20, SpaceSpec::GeometricRule{2.0});
    auto sab = check_fr_characterization(bad, d.A, d.built.cert.used_families, d.eps,
                                         ShiftVariant::unilateral, opts);
    CHECK(sab.overall == Verdict::fail);
    bool some_series_failed = false;
    for (const auto& s : sab.series) some_series_failed |= s.verdict == Verdict::fail;
    CHECK(some_series_failed);
}

TEST_CASE("fr characterization rejects families outside A") {
    auto space = xv_half();
    CheckOptions opts;
    opts.horizon = 500;
    auto A = IntegerSet::finite({0, 10, 20});
    CHECK_THROWS_AS(check_fr_characterization(space, A, {IntegerSet::finite({10, 15})}, {0.5},
                                              ShiftVariant::unilateral, opts),
                    ScheduleMismatch);
}

TEST_CASE("fh characterization passes on fast-gap families and fails flat") {
    CheckOptions opts;
    opts.horizon = 4000;
    opts.q_max = 1;
    std::vector<IntegerSet> fams{IntegerSet::periodic(64, {40}), IntegerSet::periodic(128, {90})};
    std::vector<double> eps{std::ldexp(1.0, -6), std::ldexp(1.0, -7)};

    auto good = check_fh_characterization(xv_half(), fams, eps, opts);
    CHECK(good.overall == Verdict::pass);

    SpaceSpec flat(Domain::unilateral, SupNorm{}, 20, SpaceSpec::ConstantRule{1.0});
    auto bad = check_fh_characterization(flat, fams, eps, opts);
    CHECK(bad.overall == Verdict::fail);

    auto vac = check_fh_characterization(xv_half(), {}, {}, opts);
    CHECK(vac.overall == Verdict::pass);
}

TEST_CASE("c0 checker: identity weights agree exactly across orientations") {
    CheckOptions opts;
    opts.horizon = 2000;
    opts.q_max = 0;
    auto A = IntegerSet::periodic(10, {0});
    std::vector<IntegerSet> fams{IntegerSet::periodic(10, {0}, {}, {0})};
    std::vector<double> eps{0.5};

    auto rep = check_c0_weighted(WeightSequence::identity(), A, fams, eps,
                                 C0Orientation::as_printed, opts);
    // products are identically 1: condition (2) fails for eps_q < 1 either way
    CHECK(rep.as_printed.overall == Verdict::fail);
    CHECK(rep.via_conjugation.overall == Verdict::fail);
    REQUIRE(rep.as_printed.cells.size() == rep.via_conjugation.cells.size());
    for (std::size_t i = 0; i < rep.as_printed.cells.size(); ++i)
        CHECK(rep.as_printed.cells[i].value == rep.via_conjugation.cells[i].value);
}

TEST_CASE("c0 checker discriminates the product orientation") {
    CheckOptions opts;
    opts.horizon = 2000;
    opts.q_max = 0;
    auto A = IntegerSet::periodic(10, {0});
    std::vector<IntegerSet> fams{IntegerSet::periodic(10, {0}, {}, {0})};
    std::vector<double> eps{0.5};

    auto doubling = check_c0_weighted(WeightSequence::constant(2.0), A, fams, eps,
                                      C0Orientation::via_conjugation, opts);
    CHECK(doubling.as_printed.overall == Verdict::fail);
    CHECK(doubling.via_conjugation.overall == Verdict::pass);
    CHECK(doubling.overall == Verdict::pass);  // the chosen orientation carries the verdict

    auto halving = check_c0_weighted(WeightSequence::constant(0.5), A, fams, eps,
                                     C0Orientation::as_printed, opts);
    CHECK(halving.as_printed.overall == Verdict::pass);
    CHECK(halving.via_conjugation.overall == Verdict::fail);
}

TEST_CASE("min condition: operator bound, pass, and the derived report") {
    SpaceSpec space(Domain::unilateral, SupNorm{}, 4, SpaceSpec::GeometricRule{0.5});
    CheckOptions opts;
    opts.horizon = 4000;
    opts.q_max = 2;

    std::vector<IntegerSet> fams{IntegerSet::periodic(64, {16}), IntegerSet::periodic(128, {27}),
                                 IntegerSet::periodic(256, {38})};
    auto A = IntegerSet::periodic(256, {16, 80, 144, 208, 27, 155, 38}, {0, 1, 2});
    std::vector<double> eps{1.0 / 8, 1.0 / 32, 1.0 / 128};

    auto rep = check_min_condition(space, A, fams, eps, opts);
    CHECK(rep.op_norm_bound == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(rep.min_report.overall == Verdict::pass);
    CHECK(rep.subsample == std::vector<std::size_t>{0, 1, 2});
    CHECK(rep.derived_fh.overall == Verdict::pass);
    for (const auto& c : rep.chain_cells) CHECK(c.verdict == Verdict::pass);
    CHECK(rep.overall == Verdict::pass);

    // min implies the plain eps_q condition
    auto plain = check_fr_characterization(space, A, fams, eps, ShiftVariant::unilateral, opts);
    CHECK(plain.overall == Verdict::pass);
}

TEST_CASE("min condition refuses non-uniform spaces and diverging ratios") {
    SpaceSpec perq(Domain::unilateral, SupNorm{}, 2, SpaceSpec::PerQGeometricRule{{0.5, 0.75, 1.0}});
    CHECK_THROWS_AS(
        check_min_condition(perq, IntegerSet::finite({0}), {}, {}, CheckOptions{.horizon = 100}),
        ConfigError);

    std::vector<double> vals;
    for (int k = 0; k <= 20; ++k) vals.push_back(std::pow(2.0, -static_cast<double>(k) * k));
    SpaceSpec shrinking(Domain::unilateral, SupNorm{}, 2,
                        SpaceSpec::TableRule{{vals}, 0, vals.back()});
    CHECK_THROWS_AS(check_min_condition(shrinking, IntegerSet::finite({0}), {}, {},
                                        CheckOptions{.horizon = 20}),
                    UnboundedOperator);
}
