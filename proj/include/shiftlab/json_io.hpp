#pragma once

#include <json.hpp>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "shiftlab/characterize.hpp"
#include "shiftlab/construct.hpp"
#include "shiftlab/integer_set.hpp"
#include "shiftlab/recurrence.hpp"
#include "shiftlab/separate.hpp"
#include "shiftlab/space.hpp"
#include "shiftlab/weight_sequence.hpp"

namespace shiftlab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// integer sets
// ---------------------------------------------------------------------------

inline json to_json(const IntegerSet& s) {
    json j;
    if (auto* f = std::get_if<IntegerSet::Finite>(&s.data())) {
        j["kind"] = "finite";
        j["elems"] = f->elems;
    } else if (auto* p = std::get_if<IntegerSet::Periodic>(&s.data())) {
        j["kind"] = "periodic";
        j["d"] = p->period;
        j["residues"] = p->residues;
        j["insert"] = p->inserted;
        j["delete"] = p->deleted;
    } else {
        const auto& g = std::get<IntegerSet::Generator>(s.data());
        j["kind"] = "generator";
        j["name"] = g.name;
        j["params"] = g.params;
        if (g.floor) j["floor"] = g.floor->str();
    }
    return j;
}

inline IntegerSet integer_set_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "finite") return IntegerSet::finite(j.at("elems").get<std::vector<std::uint64_t>>());
    if (kind == "periodic") {
        return IntegerSet::periodic(
            j.at("d").get<std::uint64_t>(), j.at("residues").get<std::vector<std::uint64_t>>(),
            j.value("insert", std::vector<std::uint64_t>{}),
            j.value("delete", std::vector<std::uint64_t>{}));
    }
    if (kind == "generator") {
        std::optional<Rational> floor;
        if (j.contains("floor")) floor = Rational::parse(j.at("floor").get<std::string>());
        return IntegerSet::generator(j.at("name").get<std::string>(),
                                     j.value("params", std::map<std::string, std::int64_t>{}),
                                     floor);
    }
    throw ConfigError("unknown integer set kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// weight sequences
// ---------------------------------------------------------------------------

inline json to_json(const WeightSequence& w) {
    json j;
    if (auto* c = std::get_if<WeightSequence::Constant>(&w.rule())) {
        j["rule"] = "constant";
        j["value"] = c->value;
    } else if (auto* g = std::get_if<WeightSequence::Geometric>(&w.rule())) {
        j["rule"] = "geometric";
        j["scale"] = g->scale;
        j["ratio"] = g->ratio;
    } else if (auto* t = std::get_if<WeightSequence::Table>(&w.rule())) {
        j["rule"] = "table";
        j["values"] = t->values;
        j["default"] = t->fallback;
    } else {
        j["rule"] = "formula";
        j["name"] = std::get<WeightSequence::Formula>(w.rule()).name;
    }
    return j;
}

inline WeightSequence weight_sequence_from_json(const json& j) {
    std::string rule = j.at("rule").get<std::string>();
    if (rule == "constant") return WeightSequence::constant(j.at("value").get<double>());
    if (rule == "geometric")
        return WeightSequence::geometric(j.value("scale", 1.0), j.at("ratio").get<double>());
    if (rule == "table")
        return WeightSequence::table(j.at("values").get<std::vector<double>>(),
                                     j.value("default", 1.0));
    if (rule == "formula") return WeightSequence::formula(j.at("name").get<std::string>());
    throw ConfigError("unknown weight rule '" + rule + "'");
}

// ---------------------------------------------------------------------------
// spaces and vectors
// ---------------------------------------------------------------------------

inline json to_json(const SpaceSpec& s) {
    json j;
    j["domain"] = domain_name(s.domain());
    if (s.is_sup())
        j["norm"] = "sup";
    else
        j["norm"] = json{{"power", s.power()}};
    j["p_max"] = s.p_max();
    json wj;
    if (auto* c = std::get_if<SpaceSpec::ConstantRule>(&s.rule())) {
        wj["rule"] = "constant";
        wj["c"] = c->c;
    } else if (auto* g = std::get_if<SpaceSpec::GeometricRule>(&s.rule())) {
        wj["rule"] = "geometric";
        wj["r"] = g->r;
    } else if (auto* sg = std::get_if<SpaceSpec::SymGeometricRule>(&s.rule())) {
        wj["rule"] = "sym_geometric";
        wj["r"] = sg->r;
    } else if (auto* pq = std::get_if<SpaceSpec::PerQGeometricRule>(&s.rule())) {
        wj["rule"] = "per_q_geometric";
        wj["r_q"] = pq->r_q;
    } else if (auto* t = std::get_if<SpaceSpec::TableRule>(&s.rule())) {
        wj["rule"] = "table";
        wj["values"] = t->rows;
        wj["offset"] = t->offset;
        wj["default"] = t->fallback;
    } else {
        const auto& cj = std::get<SpaceSpec::ConjugatedRule>(s.rule());
        wj["rule"] = "conjugated";
        wj["base"] = to_json(*cj.base);
        wj["shift_weights"] = to_json(cj.w);
    }
    j["weights"] = wj;
    return j;
}

inline SpaceSpec space_from_json(const json& j) {
    std::string dom = j.at("domain").get<std::string>();
    Domain domain = dom == "bilateral" ? Domain::bilateral : Domain::unilateral;
    if (dom != "bilateral" && dom != "unilateral")
        throw ConfigError("unknown domain '" + dom + "'");
    NormKind norm = SupNorm{};
    if (j.at("norm").is_object()) norm = PowerNorm{j.at("norm").at("power").get<double>()};
    int p_max = j.at("p_max").get<int>();
    const json& wj = j.at("weights");
    std::string rule = wj.at("rule").get<std::string>();
    if (rule == "constant")
        return SpaceSpec(domain, norm, p_max, SpaceSpec::ConstantRule{wj.at("c").get<double>()});
    if (rule == "geometric")
        return SpaceSpec(domain, norm, p_max, SpaceSpec::GeometricRule{wj.at("r").get<double>()});
    if (rule == "sym_geometric")
        return SpaceSpec(domain, norm, p_max,
                         SpaceSpec::SymGeometricRule{wj.at("r").get<double>()});
    if (rule == "per_q_geometric")
        return SpaceSpec(domain, norm, p_max,
                         SpaceSpec::PerQGeometricRule{wj.at("r_q").get<std::vector<double>>()});
    if (rule == "table")
        return SpaceSpec(domain, norm, p_max,
                         SpaceSpec::TableRule{wj.at("values").get<std::vector<std::vector<double>>>(),
                                              wj.value("offset", std::int64_t{0}),
                                              wj.value("default", 1.0)});
    if (rule == "conjugated") {
        auto base = std::make_shared<const SpaceSpec>(space_from_json(wj.at("base")));
        return SpaceSpec(domain, norm, p_max,
                         SpaceSpec::ConjugatedRule{base,
                                                   weight_sequence_from_json(wj.at("shift_weights"))});
    }
    throw ConfigError("unknown space weight rule '" + rule + "'");
}

inline json to_json(const SparseVector& v) {
    json entries = json::array();
    for (const auto& [k, c] : v.entries()) entries.push_back(json::array({k, c}));
    return json{{"entries", entries}};
}

inline SparseVector sparse_vector_from_json(const json& j, Domain domain) {
    std::vector<SparseVector::Entry> entries;
    for (const auto& e : j.at("entries"))
        entries.emplace_back(e.at(0).get<std::int64_t>(), e.at(1).get<double>());
    return SparseVector::from_entries(domain, std::move(entries));
}

// ---------------------------------------------------------------------------
// density, separation, hitting
// ---------------------------------------------------------------------------

inline json to_json(const DensityRecord& r) {
    json j;
    if (r.exact) j["exact"] = r.exact->str();
    j["estimate"] = r.estimate;
    j["extremum_at"] = r.extremum_at;
    j["ratio_at_horizon"] = r.ratio_at_horizon;
    j["horizon"] = r.horizon;
    j["burn_in"] = r.burn_in;
    return j;
}

inline json to_json(const SeparatedFamily& f) {
    json j;
    json sets = json::array();
    for (const auto& s : f.sets) sets.push_back(to_json(s));
    j["sets"] = sets;
    j["gaps"] = f.gaps;
    json cert;
    cert["strategy"] = f.certificate.strategy;
    cert["pairwise_disjoint"] = f.certificate.pairwise_disjoint;
    cert["horizon"] = f.certificate.horizon;
    json gaps_matrix = json::array();
    for (const auto& row : f.certificate.min_cross_gap) {
        json r = json::array();
        for (auto g : row) {
            if (g == detail::kNoGap)
                r.push_back(nullptr);
            else
                r.push_back(g);
        }
        gaps_matrix.push_back(r);
    }
    cert["min_cross_gap"] = gaps_matrix;
    json floors = json::array();
    for (const auto& fl : f.certificate.declared_floor) floors.push_back(fl.str());
    cert["declared_floor"] = floors;
    json dens = json::array();
    for (const auto& d : f.certificate.density) dens.push_back(to_json(d));
    cert["density"] = dens;
    j["certificate"] = cert;
    return j;
}

inline json to_json(const Metric& m) {
    if (auto* s = std::get_if<MetricSeminorm>(&m)) return json{{"seminorm", s->q}};
    return json("f_norm");
}

inline json to_json(const HittingReport& r) {
    json j;
    j["target"] = r.target_desc;
    j["metric"] = to_json(r.metric);
    j["epsilon"] = r.epsilon;
    j["horizon_requested"] = r.horizon_requested;
    j["horizon_used"] = r.horizon_used;
    if (r.safe_horizon) j["safe_horizon"] = *r.safe_horizon;
    j["hits"] = to_json(r.hits);
    j["density"] = to_json(r.density);
    j["floor"] = r.floor;
    j["meets_floor"] = r.meets_floor;
    return j;
}

/// CSV time series of a hitting report: one row per hit with the running
/// prefix count and ratio. Schema: n,count,ratio.
inline std::string hitting_report_csv(const HittingReport& r) {
    std::ostringstream out;
    out << "n,count,ratio\n";
    const auto& f = std::get<IntegerSet::Finite>(r.hits.data());
    std::uint64_t count = 0;
    for (auto n : f.elems) {
        ++count;
        out << n << "," << count << ","
            << static_cast<double>(count) / static_cast<double>(n + 1) << "\n";
    }
    return out.str();
}

inline json to_json(const FrVerdict& v) {
    json reports = json::array();
    for (const auto& r : v.reports) reports.push_back(to_json(r));
    return json{{"reports", reports}, {"floor", v.floor}, {"consistent", v.consistent}};
}

inline json to_json(const FhReport& v) {
    json reports = json::array();
    for (const auto& r : v.per_target) reports.push_back(to_json(r));
    return json{{"per_target", reports}, {"all_meet_floor", v.all_meet_floor}};
}

// ---------------------------------------------------------------------------
// construction certificates
// ---------------------------------------------------------------------------

inline json to_json(const ConstructionCertificate& c) {
    json j;
    j["domain"] = domain_name(c.domain);
    j["anchor"] = c.anchor;
    j["epsilon"] = c.epsilon;
    j["support_bound"] = c.support_bound;
    j["schedule"] = c.schedule;
    json owners = json::array();
    for (auto o : c.schedule_owner) {
        if (o == kAnchorOwner)
            owners.push_back(nullptr);
        else
            owners.push_back(o);
    }
    j["schedule_owner"] = owners;
    json fams = json::array();
    for (const auto& f : c.used_families) fams.push_back(to_json(f));
    j["used_families"] = fams;
    j["gap_params"] = c.gap_params;
    json pruning = json::array();
    for (const auto& p : c.pruning)
        pruning.push_back(json{{"slot", p.slot},
                               {"dropped", p.dropped},
                               {"min_used", p.min_used},
                               {"worst_family_norm", p.worst_family_norm},
                               {"budget", p.budget}});
    j["pruning"] = pruning;
    json steps = json::array();
    for (const auto& s : c.steps)
        steps.push_back(json{{"k", s.k},
                             {"schedule_value", s.schedule_value},
                             {"step_norm", s.step_norm},
                             {"budget", s.budget},
                             {"points_pasted", s.points_pasted}});
    j["steps"] = steps;
    j["anchor_distance"] = c.anchor_distance;
    j["schedule_support_identity"] = c.schedule_support_identity;
    if (c.first_off_schedule) j["first_off_schedule"] = *c.first_off_schedule;
    j["safe_horizon"] = c.safe_horizon;
    json residuals = json::array();
    for (const auto& r : c.residuals)
        residuals.push_back(json{{"q", r.q},
                                 {"m", r.m},
                                 {"residual", r.residual},
                                 {"budget", r.budget},
                                 {"recomputation_gap", r.recomputation_gap},
                                 {"within_budget", r.within_budget}});
    j["residuals"] = residuals;
    return j;
}

// ---------------------------------------------------------------------------
// condition reports
// ---------------------------------------------------------------------------

inline json to_json(const CellRecord& c) {
    json j;
    j["p"] = c.p;
    j["q"] = c.q;
    j["m"] = c.m;
    if (c.j >= 0) j["j"] = c.j;
    j["value"] = c.value;
    j["budget"] = c.budget;
    j["tail_bound"] = c.tail_bound;
    j["verdict"] = verdict_name(c.verdict);
    return j;
}

inline json to_json(const ConditionReport& r) {
    json j;
    j["condition"] = r.condition_id;
    json series = json::array();
    for (const auto& s : r.series) {
        json blocks = json::array();
        for (const auto& [cut, norm] : s.blocks) blocks.push_back(json::array({cut, norm}));
        series.push_back(json{{"p", s.p},
                              {"blocks", blocks},
                              {"tail_bound", s.tail_bound},
                              {"tol", s.tol},
                              {"verdict", verdict_name(s.verdict)}});
    }
    j["series"] = series;
    json cells = json::array();
    for (const auto& c : r.cells) cells.push_back(to_json(c));
    j["cells"] = cells;
    j["overall"] = verdict_name(r.overall);
    j["sampled"] = r.sampled;
    if (std::isfinite(r.worst_margin)) j["worst_margin"] = r.worst_margin;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline json to_json(const C0Report& r) {
    return json{{"as_printed", to_json(r.as_printed)},
                {"via_conjugation", to_json(r.via_conjugation)},
                {"verdict_bearing",
                 r.verdict_bearing == C0Orientation::as_printed ? "as_printed" : "via_conjugation"},
                {"overall", verdict_name(r.overall)}};
}

inline json to_json(const MinConditionReport& r) {
    json chain = json::array();
    for (const auto& c : r.chain_cells) chain.push_back(to_json(c));
    return json{{"op_norm_bound", r.op_norm_bound},
                {"min_condition", to_json(r.min_report)},
                {"subsample", r.subsample},
                {"chain_cells", chain},
                {"derived_fh", to_json(r.derived_fh)},
                {"overall", verdict_name(r.overall)}};
}

/// Compact text table: condition x verdict x worst margin.
inline std::string render_condition_summary(const std::vector<ConditionReport>& reports) {
    std::ostringstream out;
    out << "condition                              verdict        worst_margin\n";
    for (const auto& r : reports) {
        std::string name = r.condition_id;
        if (name.size() < 38) name.resize(38, ' ');
        std::string v = verdict_name(r.overall);
        if (v.size() < 14) v.resize(14, ' ');
        out << name << " " << v << " ";
        if (std::isfinite(r.worst_margin))
            out << r.worst_margin;
        else
            out << "-";
        out << "\n";
    }
    return out.str();
}

}  // namespace shiftlab
