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

#pragma once

// Run configuration: one YAML file with the sections
//
//   space:              path to the search-space file
//   oracle:             synthetic accuracy oracle parameters
//   predictor:          accuracy source (oracle or trained perceptron)
//   search:             evolutionary parameters and objective
//   hardware-profiles:  named technology profiles and the active one
//   synth:              synthetic histogram sampling (optional)
//   baselines:          random-baseline sample count (optional)
//
// Relative paths resolve against the config file's directory.
//
// Design files select one point of a space:
//
//   encoding: [..]            full index vector, or
//   model: reference          full-depth reference network
//   hardware: median          per-gene median, or a map of gene values

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cimnas/cim_cost.hpp"
#include "cimnas/error.hpp"
#include "cimnas/evolve.hpp"
#include "cimnas/predictor.hpp"
#include "cimnas/space.hpp"
#include "cimnas/workload.hpp"

namespace cimnas {

struct PredictorSettings {
    enum class Source { Oracle, Trained };
    Source source = Source::Oracle;
    std::size_t training_samples = 5000;
    TrainingHyper hyper;
    std::string checkpoint;  // load instead of training when set
};

struct RunConfig {
    std::filesystem::path path;
    std::string text;
    std::filesystem::path space_path;
    SearchSpaceSpec spec;
    std::string spec_text;
    TemplateTable table;
    std::string profile_name;
    std::filesystem::path profile_path;
    std::string profile_text;
    TechnologyProfile profile;
    OracleParams oracle;
    PredictorSettings predictor;
    SearchConfig search;
    SynthSettings synth;
    std::size_t baseline_samples = 1000;
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_relative() ? base / path : path).lexically_normal();
}

template <class T>
void optional_value(const YAML::Node& node, const char* key, T& out) {
    if (node && node[key]) out = node[key].as<T>();
}

inline Distribution parse_distribution(const YAML::Node& n, const std::string& path) {
    const auto kind = n.IsScalar() ? n.as<std::string>() : require(n, "kind", path).as<std::string>();
    if (kind == "uniform") return Distribution::uniform();
    if (kind == "half_gaussian") {
        double sigma = 1.0 / 3.0;
        if (!n.IsScalar()) optional_value(n, "sigma", sigma);
        return Distribution::half_gaussian(sigma);
    }
    if (kind == "constant") {
        if (n.IsScalar()) throw Error(ErrorCode::MissingKey, path + ".value");
        return Distribution::constant(require(n, "value", path).as<double>());
    }
    throw Error(ErrorCode::InvalidSpec, path + ": unknown distribution '" + kind + "'");
}

inline RunConfig load_config_node(const YAML::Node& root, const std::filesystem::path& base) {
    RunConfig c;
    c.space_path = resolve(base, require(root, "space").as<std::string>());
    c.spec_text = read_text_file(c.space_path, "spec");
    c.spec = load_spec_text(c.spec_text, c.space_path.parent_path());
    c.table = load_template_file(c.spec.template_table);

    const auto profiles = require(root, "hardware-profiles");
    c.profile_name = require(profiles, "active", "hardware-profiles").as<std::string>();
    const auto paths = require(profiles, "paths", "hardware-profiles");
    if (!paths[c.profile_name])
        throw Error(ErrorCode::MissingKey, "hardware-profiles.paths." + c.profile_name);
    c.profile_path = resolve(base, paths[c.profile_name].as<std::string>());
    c.profile_text = read_text_file(c.profile_path, "profile");
    c.profile = load_profile(YAML::Load(c.profile_text));

    const auto oracle = root["oracle"];
    optional_value(oracle, "ceiling", c.oracle.ceiling);
    optional_value(oracle, "capacity_gap", c.oracle.capacity_gap);
    optional_value(oracle, "kappa", c.oracle.kappa);
    optional_value(oracle, "gamma", c.oracle.gamma);
    optional_value(oracle, "knee", c.oracle.knee);
    optional_value(oracle, "noise", c.oracle.noise);
    optional_value(oracle, "seed", c.oracle.seed);
    validate(c.oracle);

    const auto pred = root["predictor"];
    if (pred && pred["source"]) {
        const auto src = pred["source"].as<std::string>();
        if (src == "oracle") c.predictor.source = PredictorSettings::Source::Oracle;
        else if (src == "trained") c.predictor.source = PredictorSettings::Source::Trained;
        else throw Error(ErrorCode::InvalidSpec, "predictor.source: '" + src + "'");
    }
    optional_value(pred, "training_samples", c.predictor.training_samples);
    optional_value(pred, "hidden", c.predictor.hyper.hidden);
    optional_value(pred, "learning_rate", c.predictor.hyper.learning_rate);
    optional_value(pred, "epochs", c.predictor.hyper.epochs);
    optional_value(pred, "batch_size", c.predictor.hyper.batch_size);
    if (pred && pred["checkpoint"]) c.predictor.checkpoint = resolve(base, pred["checkpoint"].as<std::string>()).string();

    const auto search = require(root, "search");
    auto& s = c.search;
    optional_value(search, "population", s.population);
    optional_value(search, "generations", s.generations);
    optional_value(search, "crossover_prob", s.crossover_prob);
    optional_value(search, "mutation_prob", s.mutation_prob);
    optional_value(search, "eta_c", s.eta_c);
    optional_value(search, "eta_m", s.eta_m);
    optional_value(search, "seed", s.seed);
    optional_value(search, "workers", s.workers);
    optional_value(search, "area_constraint", s.area_constraint);
    optional_value(search, "max_sampling_attempts", s.max_sampling_attempts);
    optional_value(search, "max_repair_attempts", s.max_repair_attempts);
    optional_value(search, "max_duplicate_retries", s.max_duplicate_retries);
    if (search["objective"]) s.objective = parse_objective(search["objective"].as<std::string>());
    validate(s);

    const auto synth = root["synth"];
    if (synth && synth["inputs"]) c.synth.inputs = parse_distribution(synth["inputs"], "synth.inputs");
    if (synth && synth["weights"]) c.synth.weights = parse_distribution(synth["weights"], "synth.weights");
    optional_value(synth, "samples", c.synth.samples);
    c.synth.seed = s.seed;

    optional_value(root["baselines"], "samples", c.baseline_samples);
    return c;
}

} // namespace detail

/// Seeds derived from search.seed (oracle noise, histogram synthesis,
/// predictor training) follow a seed override.
inline void set_seed(RunConfig& c, std::uint64_t seed) {
    c.search.seed = seed;
    c.synth.seed = seed;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
    RunConfig c;
    const std::string text = read_text_file(path, "config");
    try {
        c = detail::load_config_node(YAML::Load(text), path.parent_path());
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
    }
    c.path = path;
    c.text = text;
    return c;
}

/// Builds the configured accuracy source. A trained predictor is loaded from
/// `predictor.checkpoint` when set, otherwise fitted on oracle labels.
inline std::unique_ptr<AccuracyModel> make_accuracy_model(const RunConfig& c) {
    if (c.predictor.source == PredictorSettings::Source::Oracle) return std::make_unique<OracleAccuracy>(c.spec, c.oracle);
    if (!c.predictor.checkpoint.empty()) {
        std::ifstream in(c.predictor.checkpoint);
        if (!in) throw Error(ErrorCode::Io, "checkpoint not found: " + c.predictor.checkpoint);
        return std::make_unique<PredictorAccuracy>(c.spec, load_checkpoint(in));
    }
    RngStream rng = RngStream::named(c.search.seed, "predictor");
    const auto samples = make_training_set(c.spec, c.oracle, c.predictor.training_samples, rng);
    TrainingHyper hyper = c.predictor.hyper;
    hyper.seed = c.search.seed;
    return std::make_unique<PredictorAccuracy>(c.spec, train_predictor(samples, hyper));
}

inline std::vector<int> load_design(const SearchSpaceSpec& spec, const YAML::Node& root) {
    if (root["encoding"]) {
        const auto idx = root["encoding"].as<std::vector<int>>();
        decode(spec, idx);
        return idx;
    }
    std::vector<int> idx(spec.genes.size(), 0);
    const std::string model = detail::require(root, "model").as<std::string>();
    if (model != "reference") throw Error(ErrorCode::InvalidSpec, "model: '" + model + "' (expected 'reference')");
    idx = reference_model_encoding(spec, idx);
    const auto hw = detail::require(root, "hardware");
    if (hw.IsScalar()) {
        if (hw.as<std::string>() != "median") throw Error(ErrorCode::InvalidSpec, "hardware: expected 'median' or a map");
        return median_hardware_encoding(spec, idx);
    }
    for (std::size_t i = 0; i < spec.genes.size(); ++i) {
        const auto& g = spec.genes[i];
        if (g.group != GeneGroup::Hardware) continue;
        const auto h = static_cast<std::size_t>(g.kind);
        const auto v = detail::require(hw, g.name, "hardware").as<double>();
        const auto& list = spec.hardware[h];
        const auto it = std::find(list.begin(), list.end(), v);
        if (it == list.end()) throw Error(ErrorCode::InvalidGenome, "hardware." + g.name + " value not in the choice list");
        idx[i] = static_cast<int>(it - list.begin());
    }
    return idx;
}

inline std::vector<int> load_design_file(const SearchSpaceSpec& spec, const std::filesystem::path& path) {
    const std::string text = read_text_file(path, "design");
    try {
        return load_design(spec, YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
    }
}

} // namespace cimnas
