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

// Accuracy surrogates: one-hot design encoding, a closed-form synthetic
// accuracy oracle, and a two-hidden-layer perceptron trained against it.
// All three sit behind AccuracyModel so the search does not care which one
// it is talking to.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cimnas/error.hpp"
#include "cimnas/rng.hpp"
#include "cimnas/space.hpp"

namespace cimnas {

// ---------------------------------------------------------------------------
// One-hot encoding

/// Slot layout for the model and quantization genes. Block genes of blocks
/// that can be inactive (block index >= the stage's minimum depth) get one
/// extra trailing "inactive" slot.
struct OneHotLayout {
    struct Entry {
        std::size_t gene = 0;    // index into spec.genes
        std::size_t offset = 0;
        std::size_t choices = 0;
        bool has_inactive = false;
    };
    std::vector<Entry> entries;
    std::size_t length = 0;
};

inline OneHotLayout one_hot_layout(const SearchSpaceSpec& spec) {
    OneHotLayout layout;
    for (std::size_t i = 0; i < spec.genes.size(); ++i) {
        const auto& g = spec.genes[i];
        if (g.group == GeneGroup::Hardware) continue;
        OneHotLayout::Entry e;
        e.gene = i;
        e.offset = layout.length;
        e.choices = g.choices;
        e.has_inactive = g.block >= 0 && g.block >= spec.min_depth(g.stage);
        layout.length += g.choices + (e.has_inactive ? 1 : 0);
        layout.entries.push_back(e);
    }
    return layout;
}

struct EncodedDesign {
    std::vector<float> values;
};

inline EncodedDesign one_hot_encode(const SearchSpaceSpec& spec, const OneHotLayout& layout, const DesignPoint& d) {
    const std::vector<int> idx = d.encoding.size() == spec.genes.size() ? d.encoding : encode(spec, d);
    EncodedDesign out;
    out.values.assign(layout.length, 0.0f);
    for (const auto& e : layout.entries) {
        const int v = idx[e.gene];
        if (v < 0 || static_cast<std::size_t>(v) >= e.choices)
            throw Error(ErrorCode::InvalidGenome, spec.genes[e.gene].name + " index out of range");
        if (e.has_inactive && !gene_active(spec, idx, e.gene))
            out.values[e.offset + e.choices] = 1.0f;
        else
            out.values[e.offset + static_cast<std::size_t>(v)] = 1.0f;
    }
    return out;
}

inline EncodedDesign one_hot_encode(const SearchSpaceSpec& spec, const DesignPoint& d) {
    return one_hot_encode(spec, one_hot_layout(spec), d);
}

/// Hash of the canonical model + quantization genes; identifies the network
/// a design realizes independent of hardware and padding.
inline std::uint64_t network_key(const SearchSpaceSpec& spec, const DesignPoint& d) {
    const std::vector<int> idx = canonical_encoding(spec, d.encoding.size() == spec.genes.size() ? d.encoding : encode(spec, d));
    std::string bytes;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (spec.genes[i].group == GeneGroup::Hardware) continue;
        bytes += std::to_string(idx[i]);
        bytes += ',';
    }
    return fnv1a(bytes);
}

// ---------------------------------------------------------------------------
// Synthetic oracle

struct OracleParams {
    double ceiling = 78.0;      // %
    double capacity_gap = 6.0;  // accuracy lost at zero capacity
    double kappa = 2000.0;      // capacity scale
    double gamma = 0.12;        // % per bit below the knee, per block and conv kind
    double knee = 6.0;          // bits
    double noise = 0.1;         // % amplitude of the seeded perturbation
    std::uint64_t seed = 0;
};

inline void validate(const OracleParams& p) {
    if (!(p.ceiling > 0 && p.ceiling <= 100)) throw Error(ErrorCode::InvalidSpec, "oracle.ceiling must be in (0, 100]");
    if (!(p.gamma > 0) || !(p.kappa > 0)) throw Error(ErrorCode::InvalidSpec, "oracle.gamma and oracle.kappa must be > 0");
    if (p.capacity_gap < 0 || p.noise < 0) throw Error(ErrorCode::InvalidSpec, "oracle.capacity_gap and oracle.noise must be >= 0");
}

/// Noise-free oracle accuracy.
///
/// acc = ceiling - gap * exp(-capacity / kappa) - gamma * sum(deficit), where
/// capacity = sum over active blocks of kernel^2 * expansion (* width^2) and
/// deficit = max(0, knee - min(w_bits, in_bits)) per block and conv kind.
/// Inactive blocks are charged the worst deficit the spec allows, so adding
/// a block never lowers accuracy.
inline double oracle_accuracy_noiseless(const OracleParams& p, const SearchSpaceSpec& spec, const DesignPoint& d) {
    double capacity = 0;
    double deficit = 0;
    std::array<double, 2> worst{};
    for (std::size_t k = 0; k < 2; ++k) {
        const int lowest = std::min(spec.quant[k].weight_bits.front(), spec.quant[k].input_bits.front());
        worst[k] = std::max(0.0, p.knee - lowest);
    }
    for (int s = 0; s < spec.stage_count; ++s) {
        const auto si = static_cast<std::size_t>(s);
        for (int b = 0; b < spec.max_depth(s); ++b) {
            const auto bi = static_cast<std::size_t>(b);
            if (b < d.model.depths.at(si)) {
                const double k = d.model.kernels[si][bi];
                capacity += k * k * d.model.expansions[si][bi];
                const auto& bp = d.quant.blocks[si][bi];
                for (std::size_t kind = 0; kind < 2; ++kind)
                    deficit += std::max(0.0, p.knee - std::min(bp.weight_bits[kind], bp.input_bits[kind]));
            } else {
                deficit += worst[0] + worst[1];
            }
        }
    }
    if (spec.has_width_mult()) capacity *= d.model.width_mult * d.model.width_mult;
    const double acc = p.ceiling - p.capacity_gap * std::exp(-capacity / p.kappa) - p.gamma * deficit;
    return std::clamp(acc, 1.0, p.ceiling);
}

/// Oracle with a deterministic per-network perturbation in [-noise, noise].
inline double oracle_accuracy(const OracleParams& p, const SearchSpaceSpec& spec, const DesignPoint& d) {
    double acc = oracle_accuracy_noiseless(p, spec, d);
    if (p.noise > 0) {
        const std::uint64_t h = mix64(network_key(spec, d) ^ mix64(p.seed));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        acc += p.noise * (2.0 * u - 1.0);
    }
    return std::clamp(acc, 1.0, p.ceiling);
}

// ---------------------------------------------------------------------------
// Perceptron

struct TrainingHyper {
    std::vector<int> hidden{400, 400};
    double learning_rate = 1e-3;
    int epochs = 40;
    int batch_size = 64;
    std::uint64_t seed = 0;
};

/// input -> hidden[0] -> hidden[1] -> 1, ReLU on hidden layers, identity
/// output. Targets are standardized during training; `target_mean` and
/// `target_scale` undo it at prediction time.
template <class Scalar>
struct Perceptron {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<Matrix> weights;  // weights[l] is out x in
    std::vector<Vector> biases;
    Scalar target_mean = 0;
    Scalar target_scale = 1;
    TrainingHyper hyper;
    std::vector<double> loss_history;  // per-epoch training MSE (standardized units)
    double final_loss = 0;

    std::size_t input_size() const { return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().cols()); }

    static Perceptron zeros(std::size_t input, const std::vector<int>& hidden) {
        Perceptron p;
        long long prev = static_cast<long long>(input);
        for (int h : hidden) {
            p.weights.push_back(Matrix::Zero(h, prev));
            p.biases.push_back(Vector::Zero(h));
            prev = h;
        }
        p.weights.push_back(Matrix::Zero(1, prev));
        p.biases.push_back(Vector::Zero(1));
        p.hyper.hidden = hidden;
        return p;
    }

    /// He-uniform initialization from a seeded stream.
    static Perceptron initialized(std::size_t input, const std::vector<int>& hidden, RngStream& rng) {
        Perceptron p = zeros(input, hidden);
        for (auto& w : p.weights) {
            const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                for (Eigen::Index i = 0; i < w.rows(); ++i)
                    w(i, j) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
        }
        return p;
    }

    /// Raw network output (standardized units) for a batch laid out one
    /// sample per column.
    Matrix forward(const Matrix& x) const {
        Matrix a = x;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            Matrix z = (weights[l] * a).colwise() + biases[l];
            a = l + 1 < weights.size() ? Matrix(z.cwiseMax(Scalar(0))) : z;
        }
        return a;
    }

    struct Gradient {
        std::vector<Matrix> weights;
        std::vector<Vector> biases;
    };

    /// Mean squared error of raw outputs against `target` (one row) and its
    /// gradient with respect to every parameter.
    Scalar loss_and_gradient(const Matrix& x, const Matrix& target, Gradient& grad) const {
        const std::size_t layers = weights.size();
        std::vector<Matrix> acts(layers + 1);
        std::vector<Matrix> pre(layers);
        acts[0] = x;
        for (std::size_t l = 0; l < layers; ++l) {
            pre[l] = (weights[l] * acts[l]).colwise() + biases[l];
            acts[l + 1] = l + 1 < layers ? Matrix(pre[l].cwiseMax(Scalar(0))) : pre[l];
        }
        const Scalar n = static_cast<Scalar>(x.cols());
        const Matrix diff = acts[layers] - target;
        const Scalar loss = diff.squaredNorm() / n;
        grad.weights.resize(layers);
        grad.biases.resize(layers);
        Matrix delta = diff * (Scalar(2) / n);
        for (std::size_t l = layers; l-- > 0;) {
            grad.weights[l] = delta * acts[l].transpose();
            grad.biases[l] = delta.rowwise().sum();
            if (l > 0) {
                Matrix back = weights[l].transpose() * delta;
                delta = back.cwiseProduct((pre[l - 1].array() > Scalar(0)).matrix().template cast<Scalar>());
            }
        }
        return loss;
    }
};

using PredictorModel = Perceptron<float>;

struct TrainingSample {
    EncodedDesign encoding;
    double accuracy = 0;
};

/// Mini-batch training with Adam on mean squared error. Deterministic for a
/// given hyper.seed.
inline PredictorModel train_predictor(const std::vector<TrainingSample>& samples, const TrainingHyper& hyper) {
    if (samples.size() < 100) throw Error(ErrorCode::InvalidSpec, "train_predictor needs at least 100 samples");
    const std::size_t input = samples.front().encoding.values.size();
    for (const auto& s : samples)
        if (s.encoding.values.size() != input)
            throw Error(ErrorCode::InconsistentEncodingLength,
                        "expected " + std::to_string(input) + ", got " + std::to_string(s.encoding.values.size()));

    using M = PredictorModel::Matrix;
    RngStream rng = RngStream::named(hyper.seed, "predictor");
    PredictorModel model = PredictorModel::initialized(input, hyper.hidden, rng);
    model.hyper = hyper;

    double mean = 0;
    for (const auto& s : samples) mean += s.accuracy;
    mean /= static_cast<double>(samples.size());
    double var = 0;
    for (const auto& s : samples) var += (s.accuracy - mean) * (s.accuracy - mean);
    var /= static_cast<double>(samples.size());
    model.target_mean = static_cast<float>(mean);
    model.target_scale = static_cast<float>(var > 1e-12 ? std::sqrt(var) : 1.0);

    const auto n = static_cast<Eigen::Index>(samples.size());
    M x(static_cast<Eigen::Index>(input), n);
    M t(1, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& s = samples[static_cast<std::size_t>(j)];
        x.col(j) = Eigen::Map<const Eigen::VectorXf>(s.encoding.values.data(), static_cast<Eigen::Index>(input));
        t(0, j) = static_cast<float>((s.accuracy - mean) / model.target_scale);
    }

    // Adam state.
    const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    std::vector<M> mw, vw;
    std::vector<PredictorModel::Vector> mb, vb;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        mw.push_back(M::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vw.push_back(mw.back());
        mb.push_back(PredictorModel::Vector::Zero(model.biases[l].size()));
        vb.push_back(mb.back());
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = static_cast<Eigen::Index>(std::max(1, hyper.batch_size));
    long long step = 0;
    PredictorModel::Gradient grad;
    M xb, tb;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index len = std::min(batch, n - start);
            xb.resize(x.rows(), len);
            tb.resize(1, len);
            for (Eigen::Index j = 0; j < len; ++j) {
                xb.col(j) = x.col(order[static_cast<std::size_t>(start + j)]);
                tb(0, j) = t(0, order[static_cast<std::size_t>(start + j)]);
            }
            model.loss_and_gradient(xb, tb, grad);
            ++step;
            const float lr = static_cast<float>(hyper.learning_rate);
            const float c1 = 1.0f - std::pow(b1, static_cast<float>(step));
            const float c2 = 1.0f - std::pow(b2, static_cast<float>(step));
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                mw[l] = b1 * mw[l] + (1 - b1) * grad.weights[l];
                vw[l] = b2 * vw[l] + (1 - b2) * grad.weights[l].cwiseAbs2();
                model.weights[l].array() -= lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
                mb[l] = b1 * mb[l] + (1 - b1) * grad.biases[l];
                vb[l] = b2 * vb[l] + (1 - b2) * grad.biases[l].cwiseAbs2();
                model.biases[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
            }
        }
        const M out = model.forward(x);
        model.loss_history.push_back(static_cast<double>((out - t).squaredNorm()) / static_cast<double>(n));
    }
    model.final_loss = model.loss_history.empty() ? 0.0 : model.loss_history.back();
    return model;
}

/// Single forward pass, de-standardized and clamped to [0, 100].
inline double predict(const PredictorModel& model, const EncodedDesign& enc) {
    if (enc.values.size() != model.input_size())
        throw Error(ErrorCode::ShapeMismatch, "encoding length " + std::to_string(enc.values.size()) +
                                                  " but model expects " + std::to_string(model.input_size()));
    const Eigen::Map<const Eigen::VectorXf> x(enc.values.data(), static_cast<Eigen::Index>(enc.values.size()));
    const PredictorModel::Matrix out = model.forward(x);
    const double y = static_cast<double>(out(0, 0)) * model.target_scale + model.target_mean;
    return std::clamp(y, 0.0, 100.0);
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::string_view kCheckpointMagic = "cimnas-predictor";
inline constexpr int kCheckpointVersion = 1;

inline void save_checkpoint(const PredictorModel& model, std::ostream& out) {
    out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    out << "layers " << model.weights.size() << '\n';
    out << std::setprecision(9) << "target " << model.target_mean << ' ' << model.target_scale << '\n';
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        out << "weight " << w.rows() << ' ' << w.cols() << '\n';
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << w(i, j);
            out << '\n';
        }
        out << "bias " << model.biases[l].size() << '\n';
        for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) out << (i ? " " : "") << model.biases[l](i);
        out << '\n';
    }
}

inline PredictorModel load_checkpoint(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != kCheckpointMagic) throw Error(ErrorCode::SchemaMismatch, "not a predictor checkpoint");
    if (version != kCheckpointVersion)
        throw Error(ErrorCode::SchemaMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                                   std::to_string(kCheckpointVersion));
    auto expect = [&](std::string_view word) {
        std::string got;
        in >> got;
        if (got != word) throw Error(ErrorCode::SchemaMismatch, "expected '" + std::string(word) + "', got '" + got + "'");
    };
    PredictorModel model;
    std::size_t layers = 0;
    expect("layers");
    in >> layers;
    expect("target");
    in >> model.target_mean >> model.target_scale;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::Index rows = 0, cols = 0;
        expect("weight");
        in >> rows >> cols;
        PredictorModel::Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) in >> w(i, j);
        Eigen::Index n = 0;
        expect("bias");
        in >> n;
        PredictorModel::Vector b(n);
        for (Eigen::Index i = 0; i < n; ++i) in >> b(i);
        if (!in) throw Error(ErrorCode::SchemaMismatch, "truncated checkpoint");
        if (l > 0 && cols != model.weights.back().rows())
            throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " input does not match previous output");
        if (n != rows) throw Error(ErrorCode::ShapeMismatch, "bias length differs from weight rows");
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    model.hyper.hidden.clear();
    for (std::size_t l = 0; l + 1 < model.weights.size(); ++l)
        model.hyper.hidden.push_back(static_cast<int>(model.weights[l].rows()));
    return model;
}

// ---------------------------------------------------------------------------
// Pluggable accuracy source

class AccuracyModel {
public:
    virtual ~AccuracyModel() = default;
    /// Predicted top-1 accuracy in percent. Must be reentrant.
    virtual double accuracy(const DesignPoint& d) const = 0;
};

class OracleAccuracy final : public AccuracyModel {
public:
    OracleAccuracy(const SearchSpaceSpec& spec, OracleParams params) : spec_(&spec), params_(params) { validate(params_); }
    double accuracy(const DesignPoint& d) const override { return oracle_accuracy(params_, *spec_, d); }
    const OracleParams& params() const { return params_; }

private:
    const SearchSpaceSpec* spec_;
    OracleParams params_;
};

class PredictorAccuracy final : public AccuracyModel {
public:
    PredictorAccuracy(const SearchSpaceSpec& spec, PredictorModel model)
        : spec_(&spec), layout_(one_hot_layout(spec)), model_(std::move(model)) {
        if (model_.input_size() != layout_.length)
            throw Error(ErrorCode::ShapeMismatch, "predictor input size does not match the spec encoding");
    }
    double accuracy(const DesignPoint& d) const override {
        return predict(model_, one_hot_encode(*spec_, layout_, d));
    }
    const PredictorModel& model() const { return model_; }

private:
    const SearchSpaceSpec* spec_;
    OneHotLayout layout_;
    PredictorModel model_;
};

/// Measured accuracies keyed by network (see network_key). Unknown networks
/// fall back to `fallback` when given, otherwise raise InvalidGenome.
class LookupAccuracy final : public AccuracyModel {
public:
    LookupAccuracy(const SearchSpaceSpec& spec, std::unordered_map<std::uint64_t, double> table,
                   const AccuracyModel* fallback = nullptr)
        : spec_(&spec), table_(std::move(table)), fallback_(fallback) {}
    double accuracy(const DesignPoint& d) const override {
        const auto it = table_.find(network_key(*spec_, d));
        if (it != table_.end()) return it->second;
        if (fallback_) return fallback_->accuracy(d);
        throw Error(ErrorCode::InvalidGenome, "network not present in the accuracy table");
    }

private:
    const SearchSpaceSpec* spec_;
    std::unordered_map<std::uint64_t, double> table_;
    const AccuracyModel* fallback_;
};

/// Oracle-labeled training set of uniformly sampled designs.
inline std::vector<TrainingSample> make_training_set(const SearchSpaceSpec& spec, const OracleParams& oracle,
                                                     std::size_t n, RngStream& rng) {
    const OneHotLayout layout = one_hot_layout(spec);
    std::vector<TrainingSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DesignPoint d = sample_uniform(spec, rng);
        out.push_back({one_hot_encode(spec, layout, d), oracle_accuracy(oracle, spec, d)});
    }
    return out;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return (da > 0 && db > 0) ? num / std::sqrt(da * db) : 0.0;
}

} // namespace cimnas
