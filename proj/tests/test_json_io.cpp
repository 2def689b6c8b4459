#include <catch2/catch_amalgamated.hpp>

#include "shiftlab/json_io.hpp"

using namespace shiftlab;

namespace {
bool same_members(const IntegerSet& a, const IntegerSet& b, std::uint64_t up_to) {
    for (std::uint64_t n = 0; n <= up_to; ++n)
        if (a.contains(n) != b.contains(n)) return false;
    return true;
}
}  // namespace

TEST_CASE("integer set serialization round trips") {
    auto fin = IntegerSet::finite({1, 5, 9});
    auto fj = to_json(fin);
    CHECK(fj["kind"] == "finite");
    CHECK(same_members(fin, integer_set_from_json(fj), 200));

    auto evp = IntegerSet::periodic(12, {2, 7}, {0}, {14});
    auto pj = to_json(evp);
    CHECK(pj["d"] == 12);
    CHECK(same_members(evp, integer_set_from_json(pj), 400));

    auto gen = IntegerSet::generator("arithmetic", {{"start", 4}, {"step", 9}}, Rational(1, 9));
    auto gj = to_json(gen);
    CHECK(gj["floor"] == "1/9");
    CHECK(same_members(gen, integer_set_from_json(gj), 400));
}

TEST_CASE("weight sequence and space serialization round trips") {
    for (const auto& w :
         {WeightSequence::constant(2.0), WeightSequence::geometric(1.5, 0.9),
          WeightSequence::table({2.0, 0.5, 3.0}, 1.25), WeightSequence::formula("harmonic_plus_one")}) {
        auto back = weight_sequence_from_json(to_json(w));
        for (std::int64_t l = 1; l <= 40; ++l)
            CHECK(back.weight(l) == Catch::Approx(w.weight(l)).epsilon(1e-15));
    }

    SpaceSpec conj(Domain::unilateral, SupNorm{}, 12,
                   SpaceSpec::ConjugatedRule{
                       std::make_shared<const SpaceSpec>(Domain::unilateral, SupNorm{}, 12,
                                                         SpaceSpec::ConstantRule{1.0}),
                       WeightSequence::constant(2.0)});
    auto back = space_from_json(to_json(conj));
    for (std::int64_t k = 0; k <= 60; ++k)
        for (int q : {0, 5, 12})
            CHECK(back.log_weight(q, k) == Catch::Approx(conj.log_weight(q, k)).margin(1e-12));

    SpaceSpec power(Domain::bilateral, PowerNorm{2.0}, 6, SpaceSpec::SymGeometricRule{0.75});
    auto back2 = space_from_json(to_json(power));
    CHECK_FALSE(back2.is_sup());
    CHECK(back2.power() == 2.0);
    CHECK(back2.log_weight(3, -9) == Catch::Approx(power.log_weight(3, -9)).margin(1e-12));
}

TEST_CASE("sparse vector round trip") {
    auto v = SparseVector::from_entries(Domain::bilateral, {{-3, 0.25}, {7, -1.5}});
    auto back = sparse_vector_from_json(to_json(v), Domain::bilateral);
    CHECK(subtract(v, back).is_zero());
}

TEST_CASE("hitting report CSV schema") {
    HittingReport rep;
    rep.hits = IntegerSet::finite({3, 7});
    auto csv = hitting_report_csv(rep);
    CHECK(csv.rfind("n,count,ratio\n", 0) == 0);
    CHECK(csv.find("3,1,0.25") != std::string::npos);
    CHECK(csv.find("7,2,0.25") != std::string::npos);
}

TEST_CASE("condition summary table renders one line per report") {
    ConditionReport a;
    a.condition_id = "fr_characterization";
    a.overall = Verdict::pass;
    a.worst_margin = 0.25;
    ConditionReport b;
    b.condition_id = "fh_characterization";
    b.overall = Verdict::fail;
    auto txt = render_condition_summary({a, b});
    CHECK(txt.find("fr_characterization") != std::string::npos);
    CHECK(txt.find("pass") != std::string::npos);
    CHECK(txt.find("fail") != std::string::npos);
}
