#include "consensus/kernels/kernels.hpp"

#include <cmath>
#include <limits>

namespace consensus::kernels::scalar {

void neg_log(const double* u, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = -std::log(u[i]);
}

void exp_nonpos(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
}

min2 exp_draw_min2(const double* u, const double* scale, std::size_t n) {
    double m1 = std::numeric_limits<double>::infinity();
    double m2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -std::log(u[i]) * scale[i];
        if (x < m1) {
            m2 = m1;
            m1 = x;
        } else if (x < m2) {
            m2 = x;
        }
    }
    return {m1, m2};
}

double weighted_exp_sum(const double* w, const double* r, std::size_t n, double x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = -r[i] * x;
        acc += w[i] * (e < -708.0 ? 0.0 : std::exp(e));
    }
    return acc;
}

} // namespace consensus::kernels::scalar
