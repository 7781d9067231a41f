#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace consensus::kernels {

enum class backend { scalar, avx2 };

/// Best backend the running CPU supports.
backend best_supported();
/// Currently selected backend (defaults to best_supported()).
backend active();
/// Select a backend; returns false (and leaves the selection unchanged) if
/// the CPU cannot run it.
bool select(backend b);
bool select(std::string_view name);
std::string_view name(backend b);

struct min2 {
    double smallest;
    double second;
};

/// out[i] = -log(u[i]). Domain: u[i] a positive normal double <= 1.
void neg_log(const double* u, double* out, std::size_t n);

/// out[i] = exp(x[i]). Domain: x[i] <= 0; inputs below -708 flush to 0.
void exp_nonpos(const double* x, double* out, std::size_t n);

/// Two smallest values of { -log(u[i]) * scale[i] : i < n }, n >= 2.
/// One batched trial of the exponential order-statistics oracle:
/// scale[i] = 1/lambda_i turns uniforms into per-miner exponential draws.
min2 exp_draw_min2(const double* u, const double* scale, std::size_t n);

/// sum_i w[i] * exp(-r[i] * x); r[i]*x >= 0.
double weighted_exp_sum(const double* w, const double* r, std::size_t n, double x);

/// Reference implementations (always available; used by equivalence tests).
namespace scalar {
void neg_log(const double* u, double* out, std::size_t n);
void exp_nonpos(const double* x, double* out, std::size_t n);
min2 exp_draw_min2(const double* u, const double* scale, std::size_t n);
double weighted_exp_sum(const double* w, const double* r, std::size_t n, double x);
} // namespace scalar

#if defined(CONSENSUS_AVX2_TU)
namespace avx2 {
void neg_log(const double* u, double* out, std::size_t n);
void exp_nonpos(const double* x, double* out, std::size_t n);
min2 exp_draw_min2(const double* u, const double* scale, std::size_t n);
double weighted_exp_sum(const double* w, const double* r, std::size_t n, double x);
} // namespace avx2
#endif

} // namespace consensus::kernels
