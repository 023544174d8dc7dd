#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmm/head.hpp"
#include "cmm/matrix.hpp"
#include "cmm/params.hpp"

namespace cmm {

enum class Activation { tanh, relu };

// Dense MLP: len(hidden_dims)+1 dense layers, activation after every layer
// except the last (the projection layer). 64-bit floats throughout.
struct ModelConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t embed_dim = 0;
    Activation activation = Activation::tanh;

    std::size_t layer_count() const { return hidden_dims.size() + 1; }
    std::size_t layer_in(std::size_t l) const {
        return l == 0 ? input_dim : hidden_dims[l - 1];
    }
    std::size_t layer_out(std::size_t l) const {
        return l == hidden_dims.size() ? embed_dim : hidden_dims[l];
    }
    void validate() const;
};

std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);

// Zero-valued ParamSet with the model's canonical block layout.
ParamSet zero_params(const ModelConfig& cfg);
// Seeded init: weights uniform in [-a, a] with a = sqrt(6/(fan_in+fan_out)),
// biases zero.
ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed);

// Linearized view around a frozen base point: effective parameters are
// base + tau elementwise, outputs are f(x; base) + J(x; base) . tau.
struct TangentModel {
    ParamSet base;
    ParamSet tau;
};

struct ForwardTrace {
    std::vector<Matrix> inputs;  // input activations of each dense layer
    std::vector<Matrix> preacts; // pre-activation outputs of each dense layer
    Matrix output;               // embeddings, batch x embed_dim
};

ForwardTrace forward_trace(const ModelConfig& cfg, const ParamSet& params,
                           const Matrix& x);
Matrix forward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x);

// Reverse sweep from an adjoint on the embeddings; returns the parameter
// gradient (same layout as params).
ParamSet backward_from_output(const ModelConfig& cfg, const ParamSet& params,
                              const ForwardTrace& trace, const Matrix& dz);

struct TangentOut {
    Matrix z0;  // f(x; base)
    Matrix jvp; // J(x; base) . tau
};

TangentOut tangent_forward(const ModelConfig& cfg, const TangentModel& model,
                           const Matrix& x);
std::pair<TangentOut, ForwardTrace> tangent_forward_trace(const ModelConfig& cfg,
                                                          const TangentModel& model,
                                                          const Matrix& x);

// Adjoint sweep of the tangent trace: gradients w.r.t. tau only, the base
// receives none. dz is the adjoint on z0 + jvp.
ParamSet tangent_backward_from_output(const ModelConfig& cfg, const TangentModel& model,
                                      const ForwardTrace& base_trace, const Matrix& dz);

struct LossGrad {
    double loss = 0.0;
    ParamSet grad;
};

// Mean cross-entropy of the head on standard forward outputs.
LossGrad backward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x,
                  const std::vector<int>& labels, const FrozenHead& head);

// Mean cross-entropy on linearized outputs z0 + jvp; gradient w.r.t. tau.
LossGrad tangent_backward(const ModelConfig& cfg, const TangentModel& model,
                          const Matrix& x, const std::vector<int>& labels,
                          const FrozenHead& head);

enum class FeatureMode { standard, linearized };

// Unnormalized embeddings of the effective parameters. In linearized mode the
// task vector is effective - base and the output is z0 + jvp.
Matrix features(const ModelConfig& cfg, FeatureMode mode, const ParamSet& base,
                const ParamSet& effective, const Matrix& x);

} // namespace cmm
