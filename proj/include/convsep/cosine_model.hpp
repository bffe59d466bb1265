#pragma once

// Closed-form objective, gradient and Hessian for the linear-plus-cosine
// predictor  p_w(x) = c_k w_1.x_1 + cos(sum_i w_i.x_i)  under standard Gaussian
// patches, against the teacher p_{u0} that repeats u0 in every patch.

#include "convsep/kernel.hpp"

#include <random>

namespace convsep {

enum class Arch { WS, FC };

const char* to_string(Arch arch);
Arch arch_from_string(const std::string& name);

struct CosineParams {
    int k = 2;
    int d = 1;
    double c_k = 0.0;
    RealVector u0;

    /// Validates c_k >= 3 sqrt(k) and |u0| > 0. A non-positive c_k selects the
    /// default 3 sqrt(k).
    static CosineParams make(int k, RealVector u0, double c_k = 0.0);
};

/// WS holds a single d-vector; FC holds the k patch filters stacked into d*k.
struct CosineWeights {
    Arch arch = Arch::WS;
    RealVector w;
};

/// E[(cos(w.x) - cos(v.x))^2] in closed form.
double cos_squared_diff_mean(const RealVector& w, const RealVector& v);

double cosine_objective(const CosineWeights& weights, const CosineParams& params);

/// Same shape as weights.w.
RealVector cosine_gradient(const CosineWeights& weights, const CosineParams& params);

/// d x d Hessian of the weight-shared objective.
Matrix cosine_hessian_ws(const RealVector& w0, const CosineParams& params);

/// Teacher weights: u0 (WS) or u0 repeated k times (FC).
CosineWeights cosine_teacher(const CosineParams& params, Arch arch);

struct EigenRange {
    double min;
    double max;
};

EigenRange symmetric_eigen_range(const Matrix& m);

/// Global bounds on the WS Hessian spectrum, c_k^2 -/+ (2k + sqrt k).
EigenRange cosine_ws_hessian_bounds(const CosineParams& params);

// -- FC ring diagnostics -----------------------------------------------------

/// |dF/d(w_2..w_k)| at an FC point.
double ring_gradient_norm(const RealVector& stacked, const CosineParams& params);

/// Closed-form upper envelope of ring_gradient_norm in terms of w_hat = (w_2..w_k):
/// (1/2)(e^{-|w^|^2/2}|w^| + e^{-|w^-u^|^2/2}|w^-u^| + e^{-|w^+u^|^2/2}|w^+u^|).
double ring_gradient_envelope(const RealVector& stacked, const CosineParams& params);

/// FC point with |(w_2..w_k)| = radius along a uniform direction, w_1 uniform
/// in the ball of radius |u0|.
RealVector sample_ring_point(const CosineParams& params, double radius, std::mt19937_64& rng);

/// FC point with (w_2..w_k) uniform in the ball of radius sqrt(k-1)|u0|/2 and
/// w_1 uniform in the ball of radius |u0|.
RealVector sample_inner_ball_point(const CosineParams& params, std::mt19937_64& rng);

RealVector uniform_in_ball(int dim, double radius, std::mt19937_64& rng);

}  // namespace convsep
