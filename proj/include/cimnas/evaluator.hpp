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

#include <vector>

#include "cimnas/cim_cost.hpp"
#include "cimnas/predictor.hpp"
#include "cimnas/space.hpp"
#include "cimnas/workload.hpp"

namespace cimnas {

struct Evaluation {
    HardwareMetrics metrics;
    double accuracy = 0;
};

/// Cheap pre-check used while sampling: capacity fit and area.
struct FitCheck {
    bool memory_fit = false;
    double area_mm2 = 0;
};

/// Composes expand_model -> histograms -> cost model -> accuracy for one
/// design. Holds only immutable state, so `evaluate` may be called from any
/// number of threads at once.
class DesignEvaluator {
public:
    DesignEvaluator(const SearchSpaceSpec& spec, TemplateTable table, TechnologyProfile tech,
                    const AccuracyModel& accuracy, SynthSettings synth = {})
        : spec_(&spec), table_(std::move(table)), tech_(std::move(tech)), accuracy_(&accuracy), synth_(synth) {}

    const SearchSpaceSpec& spec() const { return *spec_; }
    const TechnologyProfile& tech() const { return tech_; }
    const TemplateTable& table() const { return table_; }
    const AccuracyModel& accuracy_model() const { return *accuracy_; }
    const SynthSettings& synth() const { return synth_; }

    std::vector<LayerWorkload> workloads(const DesignPoint& d) const {
        return expand_model(*spec_, table_, d.model, d.quant, spec_->input_resolution);
    }

    FitCheck fits(const DesignPoint& d) const {
        const auto layers = workloads(d);
        const auto mapping = map_network(layers, d.hardware);
        return {check_feasibility(mapping, d.hardware.mode), compute_area(d.hardware, tech_)};
    }

    Evaluation evaluate(const DesignPoint& d) const {
        const auto layers = workloads(d);
        const auto hist = layer_histograms(layers, synth_);
        return {evaluate_hardware(layers, hist, d.hardware, tech_), accuracy_->accuracy(d)};
    }

private:
    const SearchSpaceSpec* spec_;
    TemplateTable table_;
    TechnologyProfile tech_;
    const AccuracyModel* accuracy_;
    SynthSettings synth_;
};

} // namespace cimnas
