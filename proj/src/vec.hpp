#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace darkfed {

// Flat ordered array of model parameters. The universal currency for models,
// updates, penalty gradients and defense inputs.
using ParamVector = std::vector<double>;

namespace vec {

void check_same_length(const ParamVector& a, const ParamVector& b, const char* where);
bool all_finite(const ParamVector& v);

double dot(const ParamVector& a, const ParamVector& b);
double norm2(const ParamVector& v);

ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector sub(const ParamVector& a, const ParamVector& b);
ParamVector scaled(const ParamVector& v, double c);

// a += c * b
void axpy(ParamVector& a, double c, const ParamVector& b);

// u.v / (|u||v|). Empty optional when either norm is below eps (the
// direction is undefined there, and callers treat the term as absent).
std::optional<double> cosine(const ParamVector& u, const ParamVector& v, double eps = 1e-12);

constexpr double kDegenerateNormEps = 1e-12;

} // namespace vec
} // namespace darkfed
