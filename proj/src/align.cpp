#include "cmm/align.hpp"

#include <cmath>

#include "cmm/error.hpp"

namespace cmm {

namespace {

double mean_feature_distance(const Matrix& za, const Matrix& zb) {
    double total = 0.0;
    for (std::size_t i = 0; i < za.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < za.cols(); ++j) {
            const double d = za(i, j) - zb(i, j);
            s += d * d;
        }
        total += std::sqrt(s);
    }
    return total / static_cast<double>(za.rows());
}

} // namespace

double representation_bias(const ModelConfig& cfg, FeatureMode mode,
                           const ParamSet& theta0, const ParamSet& model_a,
                           const ParamSet& model_b, const Matrix& x) {
    if (x.rows() == 0) throw DataError("representation bias requires a non-empty dataset");
    const Matrix za = features(cfg, mode, theta0, model_a, x);
    const Matrix zb = features(cfg, mode, theta0, model_b, x);
    return mean_feature_distance(za, zb);
}

std::pair<ParamSet, BiasReport> refine_last_layer(const ModelConfig& cfg,
                                                  FeatureMode mode,
                                                  const ParamSet& theta0,
                                                  const ParamSet& merged,
                                                  const ParamSet& reference,
                                                  const Matrix& x, int steps, double lr) {
    if (steps < 0) throw UsageError("refinement step count must be >= 0");
    if (x.rows() == 0) throw DataError("refinement requires a non-empty dataset");

    const std::size_t last = cfg.layer_count() - 1;
    const std::string wname = weight_name(last);
    const std::string bname = bias_name(last);

    const Matrix z_ref = features(cfg, mode, theta0, reference, x);
    const double inv_batch = 1.0 / static_cast<double>(x.rows());

    ParamSet current = merged;
    BiasReport report;
    report.d_before = representation_bias(cfg, mode, theta0, current, reference, x);
    report.d_after = report.d_before;
    ParamSet best = current;

    for (int s = 0; s < steps; ++s) {
        // Mean squared feature distance is the surrogate objective; the
        // reported bias stays the mean of norms.
        Matrix z = features(cfg, mode, theta0, current, x);
        Matrix dz(z.rows(), z.cols());
        double mse = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) {
                const double d = z(i, j) - z_ref(i, j);
                mse += d * d;
                dz(i, j) = 2.0 * d * inv_batch;
            }
        if (!std::isfinite(mse)) throw NumericError("non-finite refinement loss");

        ParamSet grad;
        if (mode == FeatureMode::standard) {
            const ForwardTrace trace = forward_trace(cfg, current, x);
            grad = backward_from_output(cfg, current, trace, dz);
        } else {
            TangentModel m{theta0, current.zeros_like()};
            auto tau = m.tau.flat();
            const auto b = theta0.flat();
            const auto e = current.flat();
            for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = e[i] - b[i];
            auto [out, trace] = tangent_forward_trace(cfg, m, x);
            grad = tangent_backward_from_output(cfg, m, trace, dz);
        }

        auto w = current.values(wname);
        const auto gw = grad.values(wname);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
        auto bvals = current.values(bname);
        const auto gb = grad.values(bname);
        for (std::size_t i = 0; i < bvals.size(); ++i) bvals[i] -= lr * gb[i];

        const double d = representation_bias(cfg, mode, theta0, current, reference, x);
        report.per_step_trace.push_back(d);
        ++report.steps_taken;
        if (d < report.d_after) {
            report.d_after = d;
            best = current;
        }
    }
    return {std::move(best), std::move(report)};
}

} // namespace cmm
