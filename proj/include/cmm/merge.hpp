#pragma once

#include <cstdint>
#include <vector>

#include "cmm/fisher.hpp"
#include "cmm/params.hpp"

namespace cmm {

struct MergeConfig {
    double lambda = 0.5;  // weight on the current model
    double floor = 1e-12; // denominator floor; below it the entry falls back
                          // to the plain lambda-weighted average
    FisherKind fisher_kind = FisherKind::bias_corrected;
};

// Elementwise Fisher-weighted closed form:
//   theta* = (l*Fc.tc + (1-l)*Fp.tp) / (l*Fc + (1-l)*Fp)
// Entries whose denominator is below cfg.floor fall back to the weighted
// average. lambda in {0,1} returns the corresponding model exactly.
ParamSet fisher_merge(const ParamSet& theta_cur, const FisherAccumulator& f_cur,
                      const ParamSet& theta_prev, const FisherAccumulator& f_prev,
                      const MergeConfig& cfg);

// Running accumulator recursion: lambda*F_cur + (1-lambda)*F_prev.
FisherAccumulator fisher_state_update(const FisherAccumulator& f_cur,
                                      const FisherAccumulator& f_prev, double lambda);

// Elementwise arithmetic mean.
ParamSet weight_average(const std::vector<ParamSet>& models);

// Per entry, the value of largest absolute magnitude across the task vectors;
// ties keep the earliest task's value.
ParamSet maxabs(const std::vector<ParamSet>& task_vectors);

// Per entry, the value of one uniformly chosen source model (seeded).
ParamSet randmix(const std::vector<ParamSet>& models, std::uint64_t seed);

// (1-alpha)*a + alpha*b, alpha in [0, 1].
ParamSet interpolate(const ParamSet& theta_a, const ParamSet& theta_b, double alpha);

} // namespace cmm
