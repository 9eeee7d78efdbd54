#include "mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "rng.hpp"

namespace darkfed::nn {

void MlpSpec::validate() const {
    if (layer_dims.size() < 2)
        throw std::invalid_argument("MlpSpec: need at least 2 layer dims");
    for (int d : layer_dims)
        if (d < 1)
            throw std::invalid_argument("MlpSpec: non-positive layer dim " + std::to_string(d));
}

std::size_t MlpSpec::param_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < layer_dims.size(); ++k)
        n += static_cast<std::size_t>(layer_dims[k]) * layer_dims[k + 1] + layer_dims[k + 1];
    return n;
}

ParamVector init_model(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    ParamVector params(spec.param_count(), 0.0);
    std::mt19937_64 eng(mix64(seed));
    std::size_t off = 0;
    for (std::size_t k = 0; k + 1 < spec.layer_dims.size(); ++k) {
        const int fan_in = spec.layer_dims[k];
        const int fan_out = spec.layer_dims[k + 1];
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (int i = 0; i < fan_in * fan_out; ++i)
            params[off++] = dist(eng);
        off += fan_out; // biases stay zero
    }
    return params;
}

namespace {

struct LayerView {
    const double* weights; // fan_in x fan_out, row-major
    const double* biases;  // fan_out
    int fan_in;
    int fan_out;
};

std::vector<LayerView> layer_views(const MlpSpec& spec, const ParamVector& params) {
    if (params.size() != spec.param_count())
        throw std::invalid_argument("params length " + std::to_string(params.size()) +
                                    " does not match spec param_count " + std::to_string(spec.param_count()));
    std::vector<LayerView> views;
    std::size_t off = 0;
    for (std::size_t k = 0; k + 1 < spec.layer_dims.size(); ++k) {
        LayerView v;
        v.fan_in = spec.layer_dims[k];
        v.fan_out = spec.layer_dims[k + 1];
        v.weights = params.data() + off;
        off += static_cast<std::size_t>(v.fan_in) * v.fan_out;
        v.biases = params.data() + off;
        off += v.fan_out;
        views.push_back(v);
    }
    return views;
}

// activations[0] = inputs, activations[k] = post-relu output of layer k
// (identity on the last layer). pre[k] = pre-activation of layer k+1.
struct ForwardTrace {
    std::vector<Matrix> activations;
    std::vector<Matrix> pre;
};

ForwardTrace forward_trace(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs) {
    spec.validate();
    if (static_cast<int>(inputs.cols) != spec.input_dim())
        throw std::invalid_argument("forward: input dim " + std::to_string(inputs.cols) +
                                    " does not match spec input dim " + std::to_string(spec.input_dim()));
    auto views = layer_views(spec, params);

    ForwardTrace t;
    t.activations.reserve(views.size() + 1);
    t.pre.reserve(views.size());
    t.activations.push_back(inputs);

    for (std::size_t k = 0; k < views.size(); ++k) {
        const LayerView& v = views[k];
        const Matrix& a = t.activations.back();
        Matrix z(a.rows, static_cast<std::size_t>(v.fan_out));
        for (std::size_t r = 0; r < a.rows; ++r) {
            const double* arow = a.data.data() + r * a.cols;
            double* zrow = z.data.data() + r * z.cols;
            for (int j = 0; j < v.fan_out; ++j) zrow[j] = v.biases[j];
            for (int i = 0; i < v.fan_in; ++i) {
                const double ai = arow[i];
                if (ai == 0.0) continue;
                const double* wrow = v.weights + static_cast<std::size_t>(i) * v.fan_out;
                for (int j = 0; j < v.fan_out; ++j) zrow[j] += ai * wrow[j];
            }
        }
        t.pre.push_back(z);
        const bool last = (k + 1 == views.size());
        if (last) {
            t.activations.push_back(std::move(z));
        } else {
            Matrix a_next = t.pre.back();
            for (double& x : a_next.data) x = x > 0.0 ? x : 0.0;
            t.activations.push_back(std::move(a_next));
        }
    }
    return t;
}

} // namespace

Matrix forward(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs) {
    return forward_trace(spec, params, inputs).activations.back();
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows, logits.cols);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const double* in = logits.data.data() + r * logits.cols;
        double* out = p.data.data() + r * p.cols;
        double m = in[0];
        for (std::size_t c = 1; c < logits.cols; ++c) m = std::max(m, in[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.cols; ++c) {
            out[c] = std::exp(in[c] - m);
            sum += out[c];
        }
        for (std::size_t c = 0; c < logits.cols; ++c) out[c] /= sum;
    }
    return p;
}

double hard_ce_loss(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows)
        throw std::invalid_argument("hard_ce_loss: label count mismatch");
    const int C = static_cast<int>(logits.cols);
    Matrix p = softmax_rows(logits);
    double loss = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        int y = labels[r];
        if (y < 0 || y >= C)
            throw std::invalid_argument("hard_ce_loss: label " + std::to_string(y) +
                                        " out of range [0," + std::to_string(C) + ")");
        loss -= std::log(std::max(p.at(r, y), 1e-300));
    }
    return loss / static_cast<double>(logits.rows);
}

double soft_ce_loss(const Matrix& student_logits, const Matrix& teacher_logits) {
    if (student_logits.rows != teacher_logits.rows || student_logits.cols != teacher_logits.cols)
        throw std::invalid_argument("soft_ce_loss: shape mismatch");
    Matrix ps = softmax_rows(student_logits);
    Matrix pt = softmax_rows(teacher_logits);
    double loss = 0.0;
    for (std::size_t i = 0; i < ps.data.size(); ++i)
        loss -= pt.data[i] * std::log(std::max(ps.data[i], 1e-300));
    return loss / static_cast<double>(student_logits.rows);
}

ParamVector backprop_grad(const MlpSpec& spec, const ParamVector& params, const Batch& batch,
                          LossKind kind, const Matrix* teacher_logits) {
    ForwardTrace t = forward_trace(spec, params, batch.inputs);
    const Matrix& logits = t.activations.back();
    const std::size_t n = logits.rows;
    const int C = static_cast<int>(logits.cols);

    // dL/dlogits for both mean-reduced cross-entropy losses: (p_student - target)/n.
    Matrix delta = softmax_rows(logits);
    if (kind == LossKind::HardTarget) {
        if (!batch.labels)
            throw std::invalid_argument("backprop_grad: hard loss needs labels");
        if (batch.labels->size() != n)
            throw std::invalid_argument("backprop_grad: label count mismatch");
        for (std::size_t r = 0; r < n; ++r) {
            int y = (*batch.labels)[r];
            if (y < 0 || y >= C)
                throw std::invalid_argument("backprop_grad: label out of range");
            delta.at(r, y) -= 1.0;
        }
    } else {
        if (!teacher_logits)
            throw std::invalid_argument("backprop_grad: soft loss needs teacher logits");
        if (teacher_logits->rows != n || teacher_logits->cols != logits.cols)
            throw std::invalid_argument("backprop_grad: teacher logits shape mismatch");
        Matrix pt = softmax_rows(*teacher_logits);
        for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] -= pt.data[i];
    }
    for (double& x : delta.data) x /= static_cast<double>(n);

    auto views = layer_views(spec, params);
    ParamVector grad(params.size(), 0.0);

    // Walk layers backwards accumulating dW = a^T delta, db = column sums.
    std::size_t off_end = params.size();
    for (std::size_t k = views.size(); k-- > 0;) {
        const LayerView& v = views[k];
        const Matrix& a = t.activations[k];
        const std::size_t wsize = static_cast<std::size_t>(v.fan_in) * v.fan_out;
        const std::size_t boff = off_end - v.fan_out;
        const std::size_t woff = boff - wsize;

        for (std::size_t r = 0; r < n; ++r) {
            const double* arow = a.data.data() + r * a.cols;
            const double* drow = delta.data.data() + r * delta.cols;
            for (int j = 0; j < v.fan_out; ++j) grad[boff + j] += drow[j];
            for (int i = 0; i < v.fan_in; ++i) {
                const double ai = arow[i];
                if (ai == 0.0) continue;
                double* grow = grad.data() + woff + static_cast<std::size_t>(i) * v.fan_out;
                for (int j = 0; j < v.fan_out; ++j) grow[j] += ai * drow[j];
            }
        }

        if (k > 0) {
            // delta_prev = (delta W^T) o relu'(pre[k-1]); relu'(0) := 0.
            const Matrix& z_prev = t.pre[k - 1];
            Matrix delta_prev(n, static_cast<std::size_t>(v.fan_in));
            for (std::size_t r = 0; r < n; ++r) {
                const double* drow = delta.data.data() + r * delta.cols;
                double* prow = delta_prev.data.data() + r * delta_prev.cols;
                for (int i = 0; i < v.fan_in; ++i) {
                    if (z_prev.at(r, i) <= 0.0) {
                        prow[i] = 0.0;
                        continue;
                    }
                    const double* wrow = v.weights + static_cast<std::size_t>(i) * v.fan_out;
                    double s = 0.0;
                    for (int j = 0; j < v.fan_out; ++j) s += drow[j] * wrow[j];
                    prow[i] = s;
                }
            }
            delta = std::move(delta_prev);
        }
        off_end = woff;
    }
    return grad;
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double eta) {
    vec::check_same_length(params, grad, "sgd_step");
    ParamVector out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) out[i] = params[i] - eta * grad[i];
    return out;
}

} // namespace darkfed::nn
