/*******************************************************************************
* Copyright 2026 The cimnas Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

// cimnas: command-line driver.
//
//   cimnas space   <spec.yaml>
//   cimnas eval    <spec.yaml> <design.yaml> <profile.yaml> [--objective ..] [--seed N]
//   cimnas search  <config.yaml> [--seed N] [--workers N] [--objective ..] [--generations N] [--out DIR]
//   cimnas compare <config.yaml> [same overrides]
//   cimnas train   <config.yaml> [--seed N] [--out FILE]
//
// Exit codes: 0 success, 2 config or parse error, 3 infeasible design
// (eval), 4 search failure.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cimnas/config.hpp"
#include "cimnas/evaluator.hpp"
#include "cimnas/evolve.hpp"
#include "cimnas/predictor.hpp"
#include "cimnas/report.hpp"
#include "cimnas/space.hpp"

namespace fs = std::filesystem;
using namespace cimnas;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSearch = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> objective;
    std::optional<int> generations;
    std::string out = "cimnas_out";
};

void apply(RunConfig& c, const Overrides& o) {
    if (o.seed) set_seed(c, *o.seed);
    if (o.workers) c.search.workers = *o.workers;
    if (o.objective) c.search.objective = parse_objective(*o.objective);
    if (o.generations) c.search.generations = *o.generations;
    validate(c.search);
}

RunManifest manifest_for(const std::string& command, const RunConfig& c) {
    RunManifest m;
    m.command = command;
    m.config_path = c.path.string();
    m.config_hash = hash_text(c.text);
    m.seed = c.search.seed;
    m.spec_hash = hash_text(c.spec_text);
    m.profile_hash = hash_text(c.profile_text);
    return m;
}

std::string to_text(const auto& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_space(const std::string& spec_path) {
    const SearchSpaceSpec spec = load_spec_file(spec_path);
    const Cardinality c = cardinality(spec);
    std::cout << "genes:    " << spec.genes.size() << '\n'
              << "model:    " << c.model << " (~" << to_scientific(c.model) << ")\n"
              << "quant:    " << c.quant << " (~" << to_scientific(c.quant) << ")\n"
              << "hardware: " << c.hardware << " (~" << to_scientific(c.hardware) << ")\n"
              << "total:    " << c.total << " (~" << to_scientific(c.total) << ")\n"
              << c.model << " × " << c.quant << " × " << c.hardware << " = " << c.total << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& spec_path, const std::string& design_path, const std::string& profile_path,
             const std::string& objective_text, std::uint64_t seed, double area_constraint, bool header) {
    const SearchSpaceSpec spec = load_spec_file(spec_path);
    const TemplateTable table = load_template_file(spec.template_table);
    const TechnologyProfile profile = load_profile_file(profile_path);
    const std::vector<int> idx = load_design_file(spec, design_path);
    ObjectiveSpec objective = parse_objective(objective_text);

    OracleParams oracle;
    oracle.seed = seed;
    const OracleAccuracy accuracy(spec, oracle);
    SynthSettings synth;
    synth.seed = seed;
    const DesignEvaluator evaluator(spec, table, profile, accuracy, synth);

    ArchiveEntry e;
    e.design = decode(spec, canonical_encoding(spec, idx));
    e.eval = evaluator.evaluate(e.design);
    e.feasible = e.eval.metrics.feasible && e.eval.metrics.area_mm2 <= area_constraint;
    if (objective.needs_anchor()) objective.anchor = anchor_of(e.eval.metrics, e.eval.accuracy);
    e.score = score(e.eval.metrics, e.eval.accuracy, objective);
    if (header) std::cout << kArchiveColumns << '\n';
    write_archive_row(std::cout, e);
    if (!e.feasible) {
        std::cerr << "design is infeasible: " << e.eval.metrics.required_macros << " macros required, "
                  << e.eval.metrics.available_macros << " available, area " << fmt(e.eval.metrics.area_mm2) << " mm^2\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

int cmd_search(const std::string& config_path, const Overrides& o) {
    RunConfig c = load_config_file(config_path);
    apply(c, o);
    const auto accuracy = make_accuracy_model(c);
    const DesignEvaluator evaluator(c.spec, c.table, c.profile, *accuracy, c.synth);

    const auto start = std::chrono::steady_clock::now();
    SearchResult result;
    try {
        result = run_search(c.spec, c.search, evaluator);
    } catch (const Error& e) {
        std::cerr << "search failed: " << e.what() << '\n';
        return kExitSearch;
    }
    RunManifest m = manifest_for("search", c);
    m.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path out(o.out);
    const std::string ref = "manifest.txt";
    const TopK top = select_top_k(result.archive, kTopK);
    const Diversity div = diversity(top.entries);
    write_file(out / ref, to_text([&](std::ostream& os) { write_manifest(m, os); }));
    write_file(out / "archive.csv", to_text([&](std::ostream& os) { write_archive(result.archive, os, ref); }));
    write_file(out / "convergence.csv", to_text([&](std::ostream& os) { write_convergence(result.convergence, os, ref); }));
    write_file(out / "topk.csv", to_text([&](std::ostream& os) { write_top_k(top, div, os, ref); }));

    std::cout << "objective:   " << to_string(c.search.objective) << '\n'
              << "evaluated:   " << result.archive.size() << " designs, " << result.rejections
              << " initial rejections\n";
    if (!top.entries.empty()) {
        const auto& b = top.entries.front();
        std::cout << "best score:  " << fmt(b.score) << '\n'
                  << "best design: " << join_encoding(b.design.encoding) << '\n'
                  << "  E " << fmt(b.eval.metrics.energy_mj) << " mJ, D " << fmt(b.eval.metrics.delay_us) << " us, A "
                  << fmt(b.eval.metrics.area_mm2) << " mm^2, Acc " << fmt(b.eval.accuracy) << " %\n";
    }
    std::cout << "top-" << top.entries.size() << " diversity: " << fmt(div.value) << (top.short_of_k ? " (fewer than 5 feasible designs)" : "")
              << '\n'
              << "outputs in " << out.string() << '\n';
    return kExitOk;
}

CompareRow method_row(const MethodResult& r, const ObjectiveSpec& objective) {
    CompareRow row;
    row.method = r.method;
    row.metrics = r.best.eval.metrics;
    row.edap = r.best.eval.metrics.edap;
    row.accuracy = r.best.eval.accuracy;
    row.score = score(row.metrics, row.accuracy, objective);
    row.diversity = r.diversity.value;
    row.has_diversity = true;
    return row;
}

int cmd_compare(const std::string& config_path, const Overrides& o) {
    RunConfig c = load_config_file(config_path);
    apply(c, o);
    const auto accuracy = make_accuracy_model(c);
    const DesignEvaluator evaluator(c.spec, c.table, c.profile, *accuracy, c.synth);
    const auto start = std::chrono::steady_clock::now();

    std::vector<CompareRow> rows;
    ObjectiveSpec objective = c.search.objective;
    BaselineResult base;
    try {
        const SearchResult joint = run_search(c.spec, c.search, evaluator);
        if (objective.needs_anchor() && !objective.anchor) objective.anchor = joint.archive.anchor;
        const MethodResult j = summarize_joint(joint, objective);
        const MethodResult t = run_two_stage(c.spec, c.search, evaluator);
        const MethodResult x = run_xpert_like(c.spec, c.search, evaluator);
        base = baselines(c.spec, evaluator, objective, c.search.seed, c.baseline_samples);
        CompareRow b1{"baseline1", base.median.metrics, base.median.edap, base.median.accuracy, base.median.score, 0, false};
        CompareRow b2{"baseline2", base.random_mean.metrics, base.random_mean.edap, base.random_mean.accuracy,
                      base.random_mean.score, 0, false};
        rows = {b1, b2, method_row(j, objective), method_row(t, objective), method_row(x, objective)};
    } catch (const Error& e) {
        std::cerr << "comparison failed: " << e.what() << '\n';
        return kExitSearch;
    }
    RunManifest m = manifest_for("compare", c);
    m.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const fs::path out(o.out);
    const std::string ref = "manifest.txt";
    const std::string table = to_text([&](std::ostream& os) {
        write_comparison(rows, base.median.edap, base.random_mean.edap, os, ref, objective);
    });
    write_file(out / ref, to_text([&](std::ostream& os) { write_manifest(m, os); }));
    write_file(out / "compare.csv", table);
    std::cout << table;
    return kExitOk;
}

int cmd_train(const std::string& config_path, const Overrides& o) {
    RunConfig c = load_config_file(config_path);
    apply(c, o);
    RngStream rng = RngStream::named(c.search.seed, "predictor");
    const auto train = make_training_set(c.spec, c.oracle, c.predictor.training_samples, rng);
    const auto held_out = make_training_set(c.spec, c.oracle, 1000, rng);
    TrainingHyper hyper = c.predictor.hyper;
    hyper.seed = c.search.seed;
    const PredictorModel model = train_predictor(train, hyper);
    std::vector<double> truth, pred;
    for (const auto& s : held_out) {
        truth.push_back(s.accuracy);
        pred.push_back(predict(model, s.encoding));
    }
    const fs::path out = o.out == "cimnas_out" ? fs::path("predictor.ckpt") : fs::path(o.out);
    write_file(out, to_text([&](std::ostream& os) { save_checkpoint(model, os); }));
    std::cout << "training samples: " << train.size() << '\n'
              << "final loss:       " << fmt(model.final_loss) << '\n'
              << "held-out spearman: " << fmt(spearman(truth, pred)) << '\n'
              << "checkpoint:       " << out.string() << '\n';
    return kExitOk;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Root seed");
    cmd->add_option("--workers", o.workers, "Evaluation threads")->check(CLI::PositiveNumber);
    cmd->add_option("--objective", o.objective, "edap | delay | energy_area | priority:a=..,b=..,c=..,d=..");
    cmd->add_option("--generations", o.generations, "Generation count")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", o.out, "Output directory");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint model, quantization and CIM hardware search"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string spec_path, design_path, profile_path, config_path, objective = "edap";
    std::uint64_t seed = 0;
    double area_constraint = 800.0;
    bool header = false;
    Overrides overrides;

    auto* space = app.add_subcommand("space", "Print search-space cardinality");
    space->add_option("spec", spec_path, "Search-space file")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate one design");
    eval->add_option("spec", spec_path, "Search-space file")->required();
    eval->add_option("design", design_path, "Design file")->required();
    eval->add_option("profile", profile_path, "Technology profile")->required();
    eval->add_option("--objective", objective, "Objective for the score column");
    eval->add_option("--seed", seed, "Seed for histograms and oracle noise");
    eval->add_option("--area-constraint", area_constraint, "Area limit in mm^2");
    eval->add_flag("--header", header, "Print the column header");

    auto* search = app.add_subcommand("search", "Run the joint evolutionary search");
    search->add_option("config", config_path, "Run configuration")->required();
    add_overrides(search, overrides);

    auto* compare = app.add_subcommand("compare", "Run all searchers and baselines");
    compare->add_option("config", config_path, "Run configuration")->required();
    add_overrides(compare, overrides);

    auto* train = app.add_subcommand("train", "Train the accuracy predictor on oracle labels");
    train->add_option("config", config_path, "Run configuration")->required();
    add_overrides(train, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*space) return cmd_space(spec_path);
        if (*eval) return cmd_eval(spec_path, design_path, profile_path, objective, seed, area_constraint, header);
        if (*search) return cmd_search(config_path, overrides);
        if (*compare) return cmd_compare(config_path, overrides);
        if (*train) return cmd_train(config_path, overrides);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
