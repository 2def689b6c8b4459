#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shiftlab/json_io.hpp"

namespace shiftlab {

/// Parsed experiment file: a space, optional shift weights, named integer
/// sets, and an ordered pipeline of stages.
struct ExperimentConfig {
    json raw;
    SpaceSpec space;
    WeightSequence weights;
    std::map<std::string, IntegerSet> sets;
    std::uint64_t seed = 1;
    std::uint64_t horizon = 10000;
    std::string out_dir;
};

struct RunOutcome {
    int exit_code = 0;  // 0 pass, 2 inconclusive, 1 failure
    std::vector<std::string> lines;
    std::vector<ConditionReport> condition_reports;
};

inline ExperimentConfig parse_experiment(const json& j, const std::string& out_override = "",
                                         std::optional<std::uint64_t> horizon_override = {},
                                         std::optional<std::uint64_t> seed_override = {}) {
    if (!j.contains("space")) throw ConfigError("experiment needs a 'space'");
    ExperimentConfig cfg{j,
                         space_from_json(j.at("space")),
                         j.contains("weights") ? weight_sequence_from_json(j.at("weights"))
                                               : WeightSequence::identity(),
                         {},
                         j.value("seed", std::uint64_t{1}),
                         j.value("horizon", std::uint64_t{10000}),
                         j.value("out", std::string{})};
    if (j.contains("sets"))
        for (const auto& [name, sj] : j.at("sets").items())
            cfg.sets.emplace(name, integer_set_from_json(sj));
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (horizon_override) cfg.horizon = *horizon_override;
    if (seed_override) cfg.seed = *seed_override;
    if (auto* cj = std::get_if<SpaceSpec::ConjugatedRule>(&cfg.space.rule()))
        cj->w.validate_window(cfg.space.domain(), static_cast<std::int64_t>(cfg.horizon));
    return cfg;
}

namespace detail {

struct RunContext {
    const ExperimentConfig* cfg;
    std::map<std::string, SeparatedFamily> separations;
    std::map<std::string, FrBuildResult> constructions;
    bool quiet = false;
    RunOutcome outcome;

    void note(const std::string& line) {
        outcome.lines.push_back(line);
        if (!quiet) std::cout << line << "\n";
    }

    void record(bool ok, bool inconclusive = false) {
        if (!ok)
            outcome.exit_code = 1;
        else if (inconclusive && outcome.exit_code == 0)
            outcome.exit_code = 2;
    }

    void write_artifact(const std::string& name, const json& j) const {
        if (cfg->out_dir.empty()) return;
        std::filesystem::create_directories(cfg->out_dir);
        std::ofstream f(std::filesystem::path(cfg->out_dir) / (name + ".json"));
        f << j.dump(2) << "\n";
    }

    void write_text(const std::string& name, const std::string& text) const {
        if (cfg->out_dir.empty()) return;
        std::filesystem::create_directories(cfg->out_dir);
        std::ofstream f(std::filesystem::path(cfg->out_dir) / name);
        f << text;
    }

    IntegerSet named_set(const std::string& name) const {
        auto it = cfg->sets.find(name);
        if (it == cfg->sets.end()) throw ConfigError("unknown set '" + name + "'");
        return it->second;
    }
};

inline void run_separate_stage(RunContext& ctx, const json& st) {
    std::vector<SeparateRequest> requests;
    for (const auto& rj : st.at("requests"))
        requests.push_back({ctx.named_set(rj.at("set").get<std::string>()),
                            Rational::parse(rj.at("floor").get<std::string>())});
    SeparateOptions opts;
    opts.horizon = st.value("horizon", ctx.cfg->horizon);
    auto fam = separate(requests, st.at("gaps").get<std::vector<std::uint64_t>>(), opts);
    std::string name = st.value("save", std::string("separate"));
    ctx.write_artifact(name, to_json(fam));
    ctx.separations.emplace(name, fam);
    ctx.note("[separate] " + name + ": strategy=" + fam.certificate.strategy + " sets=" +
             std::to_string(fam.sets.size()));
    ctx.record(true);
}

inline void run_construct_stage(RunContext& ctx, const json& st) {
    FrBuildInput in;
    if (st.contains("families_from")) {
        auto it = ctx.separations.find(st.at("families_from").get<std::string>());
        if (it == ctx.separations.end())
            throw ConfigError("construct references unknown separation artifact");
        in.families = it->second.sets;
        in.gaps = it->second.gaps;
    } else {
        for (const auto& name : st.at("families"))
            in.families.push_back(ctx.named_set(name.get<std::string>()));
        in.gaps = st.at("gaps").get<std::vector<std::uint64_t>>();
    }
    in.anchor = st.value("anchor", std::int64_t{0});
    in.support_bound = st.value("bound", ctx.cfg->horizon);
    in.epsilon = st.value("epsilon", 0.1);
    in.gaps_include_schedule_values = st.value("gaps_include_schedule_values", false);
    bool bilateral = st.value("variant", std::string("unilateral")) == "bilateral";
    auto res = bilateral ? build_fr_vector_bilateral(ctx.cfg->space, in)
                         : build_fr_vector_unilateral(ctx.cfg->space, in);

    bool residuals_ok = true;
    if (st.contains("residual_samples")) {
        const auto& rs = st.at("residual_samples");
        std::uint64_t q_max = rs.value("q_max", std::uint64_t{3});
        std::size_t per_q = rs.value("per_q", std::size_t{10});
        std::mt19937_64 rng(ctx.cfg->seed);
        std::vector<std::pair<std::uint64_t, std::uint64_t>> samples;
        for (std::uint64_t q = 0; q < res.cert.used_families.size() && q <= q_max; ++q) {
            auto elems = res.cert.used_families[q].elements_up_to(res.cert.safe_horizon);
            if (elems.empty()) continue;
            std::vector<std::uint64_t> chosen(elems.begin(),
                                              elems.begin() + static_cast<std::ptrdiff_t>(std::min(
                                                                  per_q / 2 + 1, elems.size())));
            std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
            while (chosen.size() < std::min(per_q, elems.size())) chosen.push_back(elems[pick(rng)]);
            std::sort(chosen.begin(), chosen.end());
            chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
            for (auto m : chosen) samples.emplace_back(q, m);
        }
        auto rows = verify_construction_residuals(ctx.cfg->space, res.y, res.cert, samples,
                                                  ctx.cfg->weights);
        for (const auto& r : rows) residuals_ok = residuals_ok && r.within_budget;
    }
    std::string name = st.value("save", std::string("construct"));
    ctx.write_artifact(name, to_json(res.cert));
    ctx.constructions.emplace(name, std::move(res));
    ctx.note("[construct] " + name + ": schedule points=" +
             std::to_string(ctx.constructions.at(name).cert.schedule.size()) +
             " safe_horizon=" + std::to_string(ctx.constructions.at(name).cert.safe_horizon) +
             (residuals_ok ? " residuals=ok" : " residuals=VIOLATED"));
    ctx.record(residuals_ok);
}

inline void run_scan_stage(RunContext& ctx, const json& st) {
    std::string kind = st.value("kind", std::string("fr_verdict"));
    SparseVector x(ctx.cfg->space.domain());
    std::optional<std::uint64_t> safe;
    if (st.contains("vector_from")) {
        auto it = ctx.constructions.find(st.at("vector_from").get<std::string>());
        if (it == ctx.constructions.end())
            throw ConfigError("scan references unknown construction artifact");
        x = it->second.y;
        safe = it->second.cert.safe_horizon;
    } else if (st.contains("vector")) {
        x = sparse_vector_from_json(st.at("vector"), ctx.cfg->space.domain());
    } else {
        throw ConfigError("scan needs 'vector' or 'vector_from'");
    }
    HittingOptions opts;
    opts.horizon = st.value("horizon", ctx.cfg->horizon);
    if (safe && opts.horizon > *safe)
        throw ConfigError("scan horizon " + std::to_string(opts.horizon) +
                          " exceeds the construction safe horizon " + std::to_string(*safe));
    opts.safe_horizon = safe;
    opts.floor = st.value("floor", 0.0);
    std::string name = st.value("save", std::string("scan"));

    if (kind == "fr_verdict") {
        auto verdict = fr_verdict(ctx.cfg->space, x, ctx.cfg->weights,
                                  st.at("epsilons").get<std::vector<double>>(), opts);
        ctx.write_artifact(name, to_json(verdict));
        for (std::size_t i = 0; i < verdict.reports.size(); ++i)
            ctx.write_text(name + "_" + std::to_string(i) + ".csv",
                           hitting_report_csv(verdict.reports[i]));
        ctx.note(std::string("[scan] ") + name + ": fr_verdict " +
                 (verdict.consistent ? "consistent" : "NOT consistent") +
                 " with frequent recurrence at this horizon");
        bool expect = st.value("expect_consistent", true);
        ctx.record(verdict.consistent == expect);
    } else if (kind == "hitting") {
        auto target = sparse_vector_from_json(st.at("target"), ctx.cfg->space.domain());
        Metric metric = MetricFNorm{};
        if (st.contains("metric") && st.at("metric").is_number_integer())
            metric = MetricSeminorm{st.at("metric").get<int>()};
        auto rep = hitting_set(ctx.cfg->space, x, ctx.cfg->weights, target, metric,
                               st.at("epsilon").get<double>(), opts);
        ctx.write_artifact(name, to_json(rep));
        ctx.write_text(name + ".csv", hitting_report_csv(rep));
        ctx.note("[scan] " + name + ": hits=" +
                 std::to_string(count_prefix(rep.hits, rep.horizon_used)) +
                 " density_estimate=" + std::to_string(rep.density.estimate));
        ctx.record(!st.contains("floor") || rep.meets_floor);
    } else if (kind == "fh_check") {
        BallFamilySpec spec{ctx.named_set(st.at("A").get<std::string>()), st.value("M", 1.0)};
        std::vector<SparseVector> targets;
        for (const auto& tj : st.at("targets"))
            targets.push_back(sparse_vector_from_json(tj, ctx.cfg->space.domain()));
        auto rep = fh_for_B1_check(ctx.cfg->space, x, ctx.cfg->weights, spec, targets,
                                   st.at("epsilon").get<double>(), opts);
        ctx.write_artifact(name, to_json(rep));
        for (std::size_t i = 0; i < rep.per_target.size(); ++i)
            ctx.write_text(name + "_" + std::to_string(i) + ".csv",
                           hitting_report_csv(rep.per_target[i]));
        ctx.note(std::string("[scan] ") + name + ": fh_check " +
                 (rep.all_meet_floor ? "all targets meet the floor" : "floor MISSED"));
        ctx.record(rep.all_meet_floor);
    } else {
        throw ConfigError("unknown scan kind '" + kind + "'");
    }
}

inline void run_check_stage(RunContext& ctx, const json& st) {
    std::string kind = st.at("kind").get<std::string>();
    CheckOptions opts;
    opts.horizon = st.value("horizon", ctx.cfg->horizon);
    opts.q_max = st.value("q_max", std::uint64_t{3});
    opts.m_samples = st.value("m_samples", std::size_t{5});
    opts.seed = ctx.cfg->seed;
    opts.series_tol = st.value("series_tol", 1e-6);
    std::string name = st.value("save", std::string("check_") + kind);
    std::string expect = st.value("expect", std::string("pass"));

    auto finish = [&](const ConditionReport& rep) {
        ctx.write_artifact(name, to_json(rep));
        ctx.outcome.condition_reports.push_back(rep);
        ctx.note("[check] " + name + ": " + rep.condition_id + " -> " +
                 verdict_name(rep.overall));
        bool ok = verdict_name(rep.overall) == expect;
        ctx.record(ok, rep.overall == Verdict::inconclusive);
    };

    std::vector<IntegerSet> families;
    std::vector<double> eps;
    IntegerSet A = IntegerSet::empty();
    if (st.contains("from_cert")) {
        auto it = ctx.constructions.find(st.at("from_cert").get<std::string>());
        if (it == ctx.constructions.end())
            throw ConfigError("check references unknown construction artifact");
        const auto& cert = it->second.cert;
        A = IntegerSet::finite(cert.schedule);
        families = cert.used_families;
        for (std::size_t q = 0; q < families.size(); ++q)
            eps.push_back(std::ldexp(cert.epsilon,
                                     -static_cast<int>(std::min<std::uint64_t>(
                                         cert.schedule[q] + 1, 4000))));
        opts.horizon = std::min(opts.horizon, cert.safe_horizon);
        opts.q_max = std::min<std::uint64_t>(opts.q_max, families.size() - 1);
    } else {
        if (st.contains("A")) A = ctx.named_set(st.at("A").get<std::string>());
        if (st.contains("families"))
            for (const auto& n : st.at("families"))
                families.push_back(ctx.named_set(n.get<std::string>()));
        if (st.contains("eps")) eps = st.at("eps").get<std::vector<double>>();
    }

    if (kind == "fr") {
        auto variant = st.value("variant", std::string("unilateral")) == "bilateral"
                           ? ShiftVariant::bilateral
                           : ShiftVariant::unilateral;
        finish(check_fr_characterization(ctx.cfg->space, A, families, eps, variant, opts));
    } else if (kind == "fh") {
        finish(check_fh_characterization(ctx.cfg->space, families, eps, opts));
    } else if (kind == "c0") {
        auto orientation = st.value("orientation", std::string("via_conjugation")) == "as_printed"
                               ? C0Orientation::as_printed
                               : C0Orientation::via_conjugation;
        auto rep = check_c0_weighted(ctx.cfg->weights, A, families, eps, orientation, opts);
        ctx.write_artifact(name, to_json(rep));
        ctx.outcome.condition_reports.push_back(rep.as_printed);
        ctx.outcome.condition_reports.push_back(rep.via_conjugation);
        ctx.note("[check] " + name + ": as_printed -> " + verdict_name(rep.as_printed.overall) +
                 ", via_conjugation -> " + verdict_name(rep.via_conjugation.overall));
        bool ok = verdict_name(rep.overall) == expect;
        if (st.contains("expect_as_printed"))
            ok = ok && verdict_name(rep.as_printed.overall) ==
                           st.at("expect_as_printed").get<std::string>();
        if (st.contains("expect_via_conjugation"))
            ok = ok && verdict_name(rep.via_conjugation.overall) ==
                           st.at("expect_via_conjugation").get<std::string>();
        ctx.record(ok, rep.overall == Verdict::inconclusive);
    } else if (kind == "min") {
        auto rep = check_min_condition(ctx.cfg->space, A, families, eps, opts);
        ctx.write_artifact(name, to_json(rep));
        ctx.outcome.condition_reports.push_back(rep.min_report);
        ctx.outcome.condition_reports.push_back(rep.derived_fh);
        ctx.note("[check] " + name + ": min -> " + verdict_name(rep.min_report.overall) +
                 ", derived fh -> " + verdict_name(rep.derived_fh.overall));
        ctx.record(verdict_name(rep.overall) == expect, rep.overall == Verdict::inconclusive);
    } else {
        throw ConfigError("unknown check kind '" + kind + "'");
    }
}

}  // namespace detail

/// Execute the pipeline stages in order. `only_kind`, when nonempty, stops
/// after the last stage of that kind (earlier stages still run so that
/// references resolve).
inline RunOutcome run_experiment(const ExperimentConfig& cfg, bool quiet = false,
                                 const std::string& only_kind = "") {
    detail::RunContext ctx;
    ctx.cfg = &cfg;
    ctx.quiet = quiet;
    if (!cfg.raw.contains("pipeline")) {
        ctx.note("empty pipeline");
        return ctx.outcome;
    }
    const json& pipeline = cfg.raw.at("pipeline");
    std::size_t last = pipeline.size();
    if (!only_kind.empty()) {
        last = 0;
        for (std::size_t i = 0; i < pipeline.size(); ++i)
            if (pipeline[i].value("stage", std::string{}) == only_kind) last = i + 1;
        if (last == 0) throw ConfigError("no '" + only_kind + "' stage in the pipeline");
    }
    for (std::size_t i = 0; i < last; ++i) {
        const json& st = pipeline[i];
        std::string stage = st.at("stage").get<std::string>();
        if (stage == "separate")
            detail::run_separate_stage(ctx, st);
        else if (stage == "construct")
            detail::run_construct_stage(ctx, st);
        else if (stage == "scan")
            detail::run_scan_stage(ctx, st);
        else if (stage == "check")
            detail::run_check_stage(ctx, st);
        else
            throw ConfigError("unknown stage '" + stage + "'");
    }
    if (!ctx.outcome.condition_reports.empty())
        ctx.write_text("summary.txt", render_condition_summary(ctx.outcome.condition_reports));
    return ctx.outcome;
}

}  // namespace shiftlab
