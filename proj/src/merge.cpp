#include "cmm/merge.hpp"

#include <cmath>

#include "cmm/error.hpp"
#include "cmm/rng.hpp"

namespace cmm {

namespace {

void require_nonnegative(const FisherAccumulator& f, const char* which) {
    for (std::size_t b = 0; b < f.values.block_count(); ++b)
        for (double x : f.values.values(b))
            if (!(x >= 0.0))
                throw NumericError(std::string("negative fisher entry in ") + which +
                                   " block '" + f.values.info(b).name + "'");
}

void require_lambda(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw UsageError("merge coefficient lambda must lie in [0, 1]");
}

} // namespace

ParamSet fisher_merge(const ParamSet& theta_cur, const FisherAccumulator& f_cur,
                      const ParamSet& theta_prev, const FisherAccumulator& f_prev,
                      const MergeConfig& cfg) {
    require_lambda(cfg.lambda);
    if (!(cfg.floor > 0.0)) throw UsageError("merge denominator floor must be positive");
    ParamSet::require_compatible(theta_cur, theta_prev, "fisher_merge models");
    ParamSet::require_compatible(theta_cur, f_cur.values, "fisher_merge current fisher");
    ParamSet::require_compatible(theta_cur, f_prev.values, "fisher_merge previous fisher");
    require_nonnegative(f_cur, "current");
    require_nonnegative(f_prev, "previous");

    // Endpoints return the corresponding model exactly, bit for bit.
    if (cfg.lambda == 0.0) return theta_prev;
    if (cfg.lambda == 1.0) return theta_cur;

    const double l = cfg.lambda;
    ParamSet out = theta_cur.zeros_like();
    auto o = out.flat();
    const auto tc = theta_cur.flat();
    const auto tp = theta_prev.flat();
    const auto fc = f_cur.values.flat();
    const auto fp = f_prev.values.flat();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double wc = l * fc[i];
        const double wp = (1.0 - l) * fp[i];
        const double den = wc + wp;
        o[i] = den < cfg.floor ? l * tc[i] + (1.0 - l) * tp[i]
                               : (wc * tc[i] + wp * tp[i]) / den;
    }
    return out;
}

FisherAccumulator fisher_state_update(const FisherAccumulator& f_cur,
                                      const FisherAccumulator& f_prev, double lambda) {
    require_lambda(lambda);
    ParamSet::require_compatible(f_cur.values, f_prev.values, "fisher_state_update");
    require_nonnegative(f_cur, "current");
    require_nonnegative(f_prev, "previous");

    FisherAccumulator out;
    out.values = f_cur.values.zeros_like();
    out.source = FisherSource::merged;
    auto o = out.values.flat();
    const auto a = f_cur.values.flat();
    const auto b = f_prev.values.flat();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = lambda * a[i] + (1.0 - lambda) * b[i];
    return out;
}

ParamSet weight_average(const std::vector<ParamSet>& models) {
    if (models.empty()) throw UsageError("weight_average requires at least one model");
    for (const ParamSet& m : models)
        ParamSet::require_compatible(models.front(), m, "weight_average");

    ParamSet out = models.front().zeros_like();
    auto o = out.flat();
    const double inv = 1.0 / static_cast<double>(models.size());
    for (const ParamSet& m : models) {
        const auto v = m.flat();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += v[i];
    }
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= inv;
    return out;
}

ParamSet maxabs(const std::vector<ParamSet>& task_vectors) {
    if (task_vectors.empty())
        throw UsageError("maxabs requires at least one task vector");
    for (const ParamSet& m : task_vectors)
        ParamSet::require_compatible(task_vectors.front(), m, "maxabs");

    ParamSet out = task_vectors.front();
    auto o = out.flat();
    for (std::size_t k = 1; k < task_vectors.size(); ++k) {
        const auto v = task_vectors[k].flat();
        for (std::size_t i = 0; i < o.size(); ++i)
            if (std::abs(v[i]) > std::abs(o[i])) o[i] = v[i]; // strict: ties keep earliest
    }
    return out;
}

ParamSet randmix(const std::vector<ParamSet>& models, std::uint64_t seed) {
    if (models.empty()) throw UsageError("randmix requires at least one model");
    for (const ParamSet& m : models)
        ParamSet::require_compatible(models.front(), m, "randmix");

    Rng rng(mix_seed(seed, 0x4a1dULL));
    ParamSet out = models.front().zeros_like();
    auto o = out.flat();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = models[rng.integer(models.size())].flat()[i];
    return out;
}

ParamSet interpolate(const ParamSet& theta_a, const ParamSet& theta_b, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw UsageError("interpolation alpha must lie in [0, 1]");
    ParamSet::require_compatible(theta_a, theta_b, "interpolate");
    if (alpha == 0.0) return theta_a;
    if (alpha == 1.0) return theta_b;

    ParamSet out = theta_a.zeros_like();
    auto o = out.flat();
    const auto a = theta_a.flat();
    const auto b = theta_b.flat();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = (1.0 - alpha) * a[i] + alpha * b[i];
    return out;
}

} // namespace cmm
