#pragma once

namespace bayesqp::simd {

enum class Backend { Scalar, Avx2 };

/// Backend in use. Resolved once: the BAYESQP_SIMD environment variable
/// ("scalar", "avx2", "auto") wins, otherwise the best supported instruction
/// set is picked at runtime.
Backend active_backend();
bool backend_supported(Backend backend);
const char* backend_name(Backend backend);

/// Override the dispatch choice (test hook). Unsupported requests fall back to
/// Scalar. Not safe while compute is running on other threads.
void force_backend(Backend backend);

/// out[j] = sum_i w[i] * (q[i] - X(i,j))^2 for j = 0..n-1.
/// X is column-major d x n: each point occupies d contiguous doubles.
void scaled_sqdist(const double* q, const double* X, const double* w, int d,
                   int n, double* out);

/// x[i] := exp(x[i]) for i = 0..n-1.
void exp_inplace(double* x, int n);

/// Returns sum_i w[i] * cos(z[i]).
double weighted_cos_sum(const double* z, const double* w, int n);

namespace detail {

struct Kernels {
  void (*scaled_sqdist)(const double*, const double*, const double*, int, int,
                        double*);
  void (*exp_inplace)(double*, int);
  double (*weighted_cos_sum)(const double*, const double*, int);
};

const Kernels& scalar_kernels();
const Kernels* avx2_kernels();  // nullptr when unavailable on this build/CPU

}  // namespace detail

}  // namespace bayesqp::simd
