#include "cmm/optim.hpp"

#include <cmath>
#include <limits>

#include "cmm/error.hpp"

namespace cmm {

AdamW::AdamW(const ParamSet& layout_like, const AdamWConfig& cfg)
    : hyper_(cfg), m_(layout_like.zeros_like()), v_(layout_like.zeros_like()) {
    if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
        throw ConfigError("adamw betas must lie in [0, 1)");
    if (cfg.eps <= 0.0) throw ConfigError("adamw eps must be positive");
    if (cfg.weight_decay < 0.0) throw ConfigError("adamw weight decay must be >= 0");
}

void AdamW::step(ParamSet& params, const ParamSet& grad, double lr_scale) {
    ParamSet::require_compatible(m_, params, "adamw step params");
    ParamSet::require_compatible(m_, grad, "adamw step grad");
    if (t_ == std::numeric_limits<long long>::max())
        throw NumericError("adamw step counter overflow");

    for (std::size_t b = 0; b < grad.block_count(); ++b)
        for (double g : grad.values(b))
            if (!std::isfinite(g))
                throw NumericError("non-finite gradient in block '" + grad.info(b).name +
                                   "'");

    ++t_;
    const double lr = hyper_.lr * lr_scale;
    const double b1 = hyper_.beta1;
    const double b2 = hyper_.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const double wd = hyper_.weight_decay;

    auto th = params.flat();
    const auto g0 = grad.flat();
    auto m = m_.flat();
    auto v = v_.flat();
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double g =
            hyper_.decay_mode == DecayMode::coupled ? g0[i] + wd * th[i] : g0[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double mhat = m[i] / corr1;
        const double vhat = v[i] / corr2;
        double update = mhat / (std::sqrt(vhat) + hyper_.eps);
        if (hyper_.decay_mode == DecayMode::decoupled) update += wd * th[i];
        th[i] -= lr * update;
    }
}

FisherAccumulator AdamW::fisher_estimate(FisherKind kind) const {
    if (t_ < 1) throw StateError("fisher estimate requires at least one optimizer step");
    FisherAccumulator f;
    f.values = v_;
    f.source = FisherSource::single_task;
    if (kind == FisherKind::bias_corrected) {
        const double corr = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
        for (double& x : f.values.flat()) x /= corr;
    }
    for (double& x : f.values.flat())
        if (x < 0.0) x = 0.0;
    return f;
}

void AdamW::restore(ParamSet m, ParamSet v, long long t) {
    ParamSet::require_compatible(m_, m, "adamw restore m");
    ParamSet::require_compatible(v_, v, "adamw restore v");
    if (t < 0) throw StateError("adamw step counter must be >= 0");
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
}

double cosine_lr_scale(long long step, long long total_steps) {
    if (total_steps <= 0) return 1.0;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return 0.5 * (1.0 + std::cos(3.14159265358979323846 * frac));
}

} // namespace cmm
