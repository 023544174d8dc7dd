#pragma once

#include <utility>
#include <vector>

#include "cmm/net.hpp"

namespace cmm {

struct BiasReport {
    double d_before = 0.0;
    double d_after = 0.0;
    int steps_taken = 0;
    std::vector<double> per_step_trace; // bias after each refinement step
};

// Mean over samples of the Euclidean norm of the per-sample feature
// difference, on unnormalized features.
double representation_bias(const ModelConfig& cfg, FeatureMode mode,
                           const ParamSet& theta0, const ParamSet& model_a,
                           const ParamSet& model_b, const Matrix& x);

// Gradient descent on the mean squared feature distance to the reference,
// updating only the final dense layer of `merged`. Returns the snapshot with
// the lowest observed bias, so d_after <= d_before always.
std::pair<ParamSet, BiasReport> refine_last_layer(const ModelConfig& cfg,
                                                  FeatureMode mode,
                                                  const ParamSet& theta0,
                                                  const ParamSet& merged,
                                                  const ParamSet& reference,
                                                  const Matrix& x, int steps, double lr);

} // namespace cmm
