#include "vec.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace darkfed::vec {

void check_same_length(const ParamVector& a, const ParamVector& b, const char* where) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(where) + ": length mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

bool all_finite(const ParamVector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double dot(const ParamVector& a, const ParamVector& b) {
    check_same_length(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const ParamVector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

ParamVector add(const ParamVector& a, const ParamVector& b) {
    check_same_length(a, b, "add");
    ParamVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

ParamVector sub(const ParamVector& a, const ParamVector& b) {
    check_same_length(a, b, "sub");
    ParamVector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

ParamVector scaled(const ParamVector& v, double c) {
    ParamVector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = c * v[i];
    return r;
}

void axpy(ParamVector& a, double c, const ParamVector& b) {
    check_same_length(a, b, "axpy");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += c * b[i];
}

std::optional<double> cosine(const ParamVector& u, const ParamVector& v, double eps) {
    check_same_length(u, v, "cosine");
    double nu = norm2(u);
    double nv = norm2(v);
    if (nu < eps || nv < eps) return std::nullopt;
    return dot(u, v) / (nu * nv);
}

} // namespace darkfed::vec
