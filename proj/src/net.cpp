#include "cmm/net.hpp"

#include <cmath>

#include "cmm/error.hpp"
#include "cmm/rng.hpp"

namespace cmm {

namespace {

double act(Activation a, double v) {
    return a == Activation::tanh ? std::tanh(v) : (v > 0.0 ? v : 0.0);
}

// relu derivative at the kink is defined as 0.
double act_deriv(Activation a, double preact) {
    if (a == Activation::tanh) {
        const double t = std::tanh(preact);
        return 1.0 - t * t;
    }
    return preact > 0.0 ? 1.0 : 0.0;
}

void check_input(const ModelConfig& cfg, const Matrix& x) {
    if (x.cols() != cfg.input_dim)
        throw ShapeError("input width " + std::to_string(x.cols()) +
                         " does not match input_dim " + std::to_string(cfg.input_dim));
}

void check_layout(const ModelConfig& cfg, const ParamSet& params) {
    const ParamSet expect = zero_params(cfg);
    ParamSet::require_compatible(expect, params, "model parameters");
}

// y (batch x out) = x (batch x in) * W^T + b, W stored as out x in.
void dense(const Matrix& x, std::span<const double> w, std::span<const double> b,
           std::size_t out, std::size_t in, Matrix& y) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row(i);
        double* yi = y.row(i);
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w.data() + o * in;
            double s = b[o];
            for (std::size_t j = 0; j < in; ++j) s += wo[j] * xi[j];
            yi[o] = s;
        }
    }
}

// Same contraction without the bias term.
void dense_nobias(const Matrix& x, std::span<const double> w, std::size_t out,
                  std::size_t in, Matrix& y) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row(i);
        double* yi = y.row(i);
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w.data() + o * in;
            double s = 0.0;
            for (std::size_t j = 0; j < in; ++j) s += wo[j] * xi[j];
            yi[o] += s;
        }
    }
}

// Accumulate dW += delta^T . input and db += column sums of delta; propagate
// dx = delta . W.
void dense_backward(const Matrix& input, const Matrix& delta,
                    std::span<const double> w, std::span<double> dw,
                    std::span<double> db, std::size_t out, std::size_t in,
                    Matrix* dx) {
    for (std::size_t i = 0; i < delta.rows(); ++i) {
        const double* di = delta.row(i);
        const double* xi = input.row(i);
        for (std::size_t o = 0; o < out; ++o) {
            const double d = di[o];
            db[o] += d;
            double* dwo = dw.data() + o * in;
            for (std::size_t j = 0; j < in; ++j) dwo[j] += d * xi[j];
        }
        if (dx != nullptr) {
            double* dxi = dx->row(i);
            for (std::size_t o = 0; o < out; ++o) {
                const double d = di[o];
                const double* wo = w.data() + o * in;
                for (std::size_t j = 0; j < in; ++j) dxi[j] += d * wo[j];
            }
        }
    }
}

} // namespace

void ModelConfig::validate() const {
    if (input_dim < 1 || embed_dim < 1)
        throw ConfigError("model dimensions must be >= 1");
    for (std::size_t h : hidden_dims)
        if (h < 1) throw ConfigError("hidden dimensions must be >= 1");
}

std::string weight_name(std::size_t layer) {
    return "layer" + std::to_string(layer) + ".weight";
}

std::string bias_name(std::size_t layer) {
    return "layer" + std::to_string(layer) + ".bias";
}

ParamSet zero_params(const ModelConfig& cfg) {
    cfg.validate();
    ParamSet p;
    for (std::size_t l = 0; l < cfg.layer_count(); ++l) {
        p.add_block(weight_name(l), {cfg.layer_out(l), cfg.layer_in(l)});
        p.add_block(bias_name(l), {cfg.layer_out(l)});
    }
    return p;
}

ParamSet init_params(const ModelConfig& cfg, std::uint64_t seed) {
    ParamSet p = zero_params(cfg);
    Rng rng(mix_seed(seed, 0x1217ULL));
    for (std::size_t l = 0; l < cfg.layer_count(); ++l) {
        const double fan_in = static_cast<double>(cfg.layer_in(l));
        const double fan_out = static_cast<double>(cfg.layer_out(l));
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : p.values(weight_name(l))) w = rng.uniform(-a, a);
    }
    return p;
}

ForwardTrace forward_trace(const ModelConfig& cfg, const ParamSet& params,
                           const Matrix& x) {
    check_input(cfg, x);
    check_layout(cfg, params);
    const std::size_t layers = cfg.layer_count();
    ForwardTrace t;
    t.inputs.reserve(layers);
    t.preacts.reserve(layers);

    Matrix a = x;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = cfg.layer_in(l);
        const std::size_t out = cfg.layer_out(l);
        Matrix p(a.rows(), out);
        dense(a, params.values(weight_name(l)), params.values(bias_name(l)), out, in, p);
        t.inputs.push_back(std::move(a));
        if (l + 1 < layers) {
            a = Matrix(p.rows(), out);
            for (std::size_t i = 0; i < p.rows(); ++i)
                for (std::size_t o = 0; o < out; ++o)
                    a(i, o) = act(cfg.activation, p(i, o));
        } else {
            a = p; // no activation on the projection layer
        }
        t.preacts.push_back(std::move(p));
    }
    t.output = std::move(a);
    return t;
}

Matrix forward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x) {
    return forward_trace(cfg, params, x).output;
}

ParamSet backward_from_output(const ModelConfig& cfg, const ParamSet& params,
                              const ForwardTrace& trace, const Matrix& dz) {
    ParamSet grad = params.zeros_like();
    const std::size_t layers = cfg.layer_count();
    Matrix delta = dz;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = cfg.layer_in(l);
        const std::size_t out = cfg.layer_out(l);
        if (l + 1 < layers) {
            const Matrix& p = trace.preacts[l];
            for (std::size_t i = 0; i < delta.rows(); ++i)
                for (std::size_t o = 0; o < out; ++o)
                    delta(i, o) *= act_deriv(cfg.activation, p(i, o));
        }
        Matrix dx(delta.rows(), in);
        dense_backward(trace.inputs[l], delta, params.values(weight_name(l)),
                       grad.values(weight_name(l)), grad.values(bias_name(l)), out, in,
                       l > 0 ? &dx : nullptr);
        delta = std::move(dx);
    }
    return grad;
}

std::pair<TangentOut, ForwardTrace> tangent_forward_trace(const ModelConfig& cfg,
                                                          const TangentModel& model,
                                                          const Matrix& x) {
    ParamSet::require_compatible(model.base, model.tau, "tangent model base/tau");
    check_input(cfg, x);
    check_layout(cfg, model.base);
    const std::size_t layers = cfg.layer_count();

    ForwardTrace t;
    t.inputs.reserve(layers);
    t.preacts.reserve(layers);

    Matrix a = x;
    Matrix da(x.rows(), x.cols()); // tangent of the input is zero
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = cfg.layer_in(l);
        const std::size_t out = cfg.layer_out(l);
        const auto w0 = model.base.values(weight_name(l));
        const auto b0 = model.base.values(bias_name(l));
        const auto wt = model.tau.values(weight_name(l));
        const auto bt = model.tau.values(bias_name(l));

        Matrix p(a.rows(), out);
        dense(a, w0, b0, out, in, p);
        // dp = W0 . da + Wt . a + bt
        Matrix dp(a.rows(), out);
        dense(a, wt, bt, out, in, dp);
        dense_nobias(da, w0, out, in, dp);

        t.inputs.push_back(std::move(a));
        if (l + 1 < layers) {
            a = Matrix(p.rows(), out);
            da = Matrix(p.rows(), out);
            for (std::size_t i = 0; i < p.rows(); ++i)
                for (std::size_t o = 0; o < out; ++o) {
                    a(i, o) = act(cfg.activation, p(i, o));
                    da(i, o) = act_deriv(cfg.activation, p(i, o)) * dp(i, o);
                }
        } else {
            a = p;
            da = std::move(dp);
        }
        t.preacts.push_back(std::move(p));
    }
    TangentOut out{std::move(a), std::move(da)};
    t.output = out.z0;
    return {std::move(out), std::move(t)};
}

TangentOut tangent_forward(const ModelConfig& cfg, const TangentModel& model,
                           const Matrix& x) {
    return tangent_forward_trace(cfg, model, x).first;
}

ParamSet tangent_backward_from_output(const ModelConfig& cfg, const TangentModel& model,
                                      const ForwardTrace& base_trace, const Matrix& dz) {
    ParamSet grad = model.tau.zeros_like();
    const std::size_t layers = cfg.layer_count();
    Matrix delta = dz;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in = cfg.layer_in(l);
        const std::size_t out = cfg.layer_out(l);
        if (l + 1 < layers) {
            const Matrix& p = base_trace.preacts[l];
            for (std::size_t i = 0; i < delta.rows(); ++i)
                for (std::size_t o = 0; o < out; ++o)
                    delta(i, o) *= act_deriv(cfg.activation, p(i, o));
        }
        // dWt += delta^T . base_input, dbt += delta, delta_in = delta . W0.
        Matrix dx(delta.rows(), in);
        dense_backward(base_trace.inputs[l], delta, model.base.values(weight_name(l)),
                       grad.values(weight_name(l)), grad.values(bias_name(l)), out, in,
                       l > 0 ? &dx : nullptr);
        delta = std::move(dx);
    }
    return grad;
}

LossGrad backward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x,
                  const std::vector<int>& labels, const FrozenHead& head) {
    const ForwardTrace trace = forward_trace(cfg, params, x);
    const FrozenHead::LossResult lr = head.cross_entropy(trace.output, labels);
    if (!std::isfinite(lr.loss)) throw NumericError("non-finite training loss");
    return {lr.loss, backward_from_output(cfg, params, trace, lr.dz)};
}

LossGrad tangent_backward(const ModelConfig& cfg, const TangentModel& model,
                          const Matrix& x, const std::vector<int>& labels,
                          const FrozenHead& head) {
    auto [out, trace] = tangent_forward_trace(cfg, model, x);
    Matrix z(out.z0.rows(), out.z0.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j)
            z(i, j) = out.z0(i, j) + out.jvp(i, j);
    const FrozenHead::LossResult lr = head.cross_entropy(z, labels);
    if (!std::isfinite(lr.loss)) throw NumericError("non-finite training loss");
    return {lr.loss, tangent_backward_from_output(cfg, model, trace, lr.dz)};
}

Matrix features(const ModelConfig& cfg, FeatureMode mode, const ParamSet& base,
                const ParamSet& effective, const Matrix& x) {
    if (mode == FeatureMode::standard) return forward(cfg, effective, x);

    ParamSet::require_compatible(base, effective, "feature extraction");
    TangentModel m{base, effective.zeros_like()};
    auto tau = m.tau.flat();
    const auto b = base.flat();
    const auto e = effective.flat();
    for (std::size_t i = 0; i < tau.size(); ++i) tau[i] = e[i] - b[i];
    const TangentOut out = tangent_forward(cfg, m, x);
    Matrix z(out.z0.rows(), out.z0.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j)
            z(i, j) = out.z0(i, j) + out.jvp(i, j);
    return z;
}

} // namespace cmm
