#pragma once

#include <cstdint>

#include "cmm/fisher.hpp"
#include "cmm/params.hpp"

namespace cmm {

// decoupled: theta -= lr * (mhat/(sqrt(vhat)+eps) + wd*theta)
// coupled:   g += wd*theta first, then the plain Adam update.
enum class DecayMode { decoupled, coupled };

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.1;
    DecayMode decay_mode = DecayMode::decoupled;
};

// AdamW with exposed moment state; the bias-corrected second moment doubles
// as the diagonal Fisher estimate used for merging.
class AdamW {
public:
    AdamW(const ParamSet& layout_like, const AdamWConfig& cfg);

    // One update; lr_scale multiplies the configured learning rate (used by
    // the cosine schedule). The step counter advances by exactly 1.
    void step(ParamSet& params, const ParamSet& grad, double lr_scale = 1.0);

    // Bias-corrected second moment (or raw v), clamped to >= 0. Requires at
    // least one step.
    FisherAccumulator fisher_estimate(FisherKind kind = FisherKind::bias_corrected) const;

    long long steps() const { return t_; }
    const ParamSet& m() const { return m_; }
    const ParamSet& v() const { return v_; }
    const AdamWConfig& hyper() const { return hyper_; }

    // Checkpoint restore.
    void restore(ParamSet m, ParamSet v, long long t);

private:
    AdamWConfig hyper_;
    ParamSet m_;
    ParamSet v_;
    long long t_ = 0;
};

// Cosine annealing: lr * 0.5 * (1 + cos(pi * step / total_steps)).
double cosine_lr_scale(long long step, long long total_steps);

} // namespace cmm
