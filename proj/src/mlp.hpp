#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vec.hpp"

namespace darkfed::nn {

// Dense row-major matrix of 64-bit reals.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Architecture description: layer widths, rectifier hidden activation,
// identity (logit) output. Parameters are stored per layer as the row-major
// weight block followed by the bias block.
struct MlpSpec {
    std::vector<int> layer_dims;

    void validate() const;
    std::size_t param_count() const;
    int input_dim() const { return layer_dims.front(); }
    int num_classes() const { return layer_dims.back(); }
    std::size_t num_layers() const { return layer_dims.size() - 1; }
};

// A training batch: inputs and, when the loss needs them, integer labels.
struct Batch {
    Matrix inputs;
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return inputs.rows; }
};

enum class LossKind { HardTarget, SoftTeacher };

// Fan-in-scaled zero-mean Gaussian weights (variance 2/fan_in), zero biases.
ParamVector init_model(const MlpSpec& spec, std::uint64_t seed);

// Logits for a batch of inputs: n x C.
Matrix forward(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs);

// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

// Mean over the batch of -log softmax(logits)[label].
double hard_ce_loss(const Matrix& logits, const std::vector<int>& labels);

// Mean over the batch of cross-entropy between the teacher softmax and the
// student softmax. Minimized (with zero student gradient) at logit agreement.
double soft_ce_loss(const Matrix& student_logits, const Matrix& teacher_logits);

// Gradient of the chosen loss w.r.t. params. For HardTarget the batch must
// carry labels; for SoftTeacher pass the teacher's logits on the same inputs.
ParamVector backprop_grad(const MlpSpec& spec, const ParamVector& params, const Batch& batch,
                          LossKind kind, const Matrix* teacher_logits = nullptr);

// params - eta * grad.
ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double eta);

} // namespace darkfed::nn
