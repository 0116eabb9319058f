#include "hedgeratio/simd.hpp"

namespace hr::simd::scalar {

double dot(const double* x, const double* y, std::size_t len) {
    double sum = 0.0;
    for (std::size_t k = 0; k < len; ++k) sum += x[k] * y[k];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t len) {
    for (std::size_t k = 0; k < len; ++k) y[k] += alpha * x[k];
}

void scale(double alpha, const double* x, double* y, std::size_t len) {
    for (std::size_t k = 0; k < len; ++k) y[k] = alpha * x[k];
}

void add(const double* x, double* y, std::size_t len) {
    for (std::size_t k = 0; k < len; ++k) y[k] += x[k];
}

}  // namespace hr::simd::scalar
