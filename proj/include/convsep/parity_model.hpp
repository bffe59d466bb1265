#pragma once

// The erf-product predictor p_w(x) = prod_l erf(w_l.x_l) and its
// sum-of-frequencies extension erf(w_1.x_1) + prod_l erf(w_l.x_l), with
// closed-form objectives and exact gradients under standard Gaussian patches.

#include "convsep/cosine_model.hpp"
#include "convsep/kernel.hpp"

#include <span>
#include <vector>

namespace convsep {

enum class ParityMode { KOnly, OnePlusK };

const char* to_string(ParityMode mode);
ParityMode parity_mode_from_string(const std::string& name);

struct ParityParams {
    int k = 2;
    int d = 1;
    RealVector u0;

    static ParityParams make(int k, RealVector u0);

    /// |u0|^2 >= 12 k^2 / pi^2.
    bool non_degenerate() const;
};

/// WS: blocks holds the single shared filter w0. FC: one filter per patch.
struct ParityWeights {
    Arch arch = Arch::FC;
    std::vector<RealVector> blocks;

    static ParityWeights ws(RealVector w0);
    static ParityWeights fc(std::vector<RealVector> blocks);
    static ParityWeights fc_from_stacked(const RealVector& stacked, int k);

    /// Filter applied to patch l.
    const RealVector& filter(int l) const { return arch == Arch::WS ? blocks.front() : blocks[l]; }
    RealVector stacked() const;
};

/// Sign and log-magnitude running product; keeps exponentially small kernel
/// products representable at large k.
class SignedLogProduct {
public:
    void multiply(double factor);
    double value() const;
    double log_abs() const { return log_abs_; }
    int sign() const { return sign_; }

private:
    double log_abs_ = 0.0;
    int sign_ = 1;
};

double signed_power(double base, int exponent);

double parity_objective(const ParityWeights& weights, const ParityParams& params, ParityMode mode);

/// Coefficient c1(|w|) in E[erf(w.x) erf'(w.x) x] = c1 w. Closed form
/// (4/pi) / ((1 + 2|w|^2) sqrt(1 + 4|w|^2)).
double self_coefficient(double norm);

/// Same coefficient from 1D Gauss-Hermite quadrature along w.
double self_coefficient_quadrature(double norm, const QuadratureRule& rule = gauss_hermite());

/// E[erf(w.x) erf'(w.x) x].
RealVector self_term(const RealVector& w);

/// E[erf(u.x) erf'(w.x) x], which lies in span{u, w}. Closed form via Stein's
/// lemma on the Gaussian reweighted by exp(-(w.x)^2).
RealVector cross_term(const RealVector& u, const RealVector& w);

/// Same expectation from 2D Gauss-Hermite quadrature in an orthonormal basis
/// of span{u, w}.
RealVector cross_term_quadrature(const RealVector& u, const RealVector& w,
                                 const QuadratureRule& rule = gauss_hermite());

struct GradientDecomposition {
    std::vector<RealVector> self_part;
    std::vector<RealVector> cross_part;
    /// prod_{j != l} V(w_j, w_j), per block.
    std::vector<double> self_products;
    /// prod_{j != l} V(u0, w_j), per block.
    std::vector<double> cross_products;

    std::vector<RealVector> gradient() const;
    RealVector stacked_gradient() const;
};

/// Blockwise FC gradient: self_part - cross_part.
GradientDecomposition parity_gradient(const ParityWeights& weights, const ParityParams& params,
                                      ParityMode mode);

struct WsGradientParts {
    double c1 = 0.0;
    RealVector b_tilde;
    /// Coefficient of c1 w0 and of b_tilde; the one-plus-k mode adds 1 to each.
    double self_coefficient = 0.0;
    double cross_coefficient = 0.0;

    RealVector gradient(const RealVector& w0) const;
};

WsGradientParts ws_gradient_parts(const RealVector& w0, const ParityParams& params, ParityMode mode);

RealVector ws_gradient(const RealVector& w0, const ParityParams& params, ParityMode mode);

struct NonDegeneracy {
    double threshold;
    double kernel_value;
    double verified_second_moment;
};

/// Threshold 12k^2/pi^2 and V(u0,u0), V(u0,u0)^k evaluated at |u0|^2 = threshold.
NonDegeneracy nondegeneracy_floor(int k);

/// Angle in [0, pi] via atan2, accurate near 0 and pi.
double angle_between(const RealVector& w, const RealVector& u);

/// Predictor value on one stacked input x (k patches of dimension d).
double parity_predict(const ParityWeights& weights, const RealVector& x, int k, ParityMode mode);

/// Gradient of the k-only predictor with respect to the weights at x; stacked
/// per block for FC, summed over duplicates for WS.
RealVector parity_predictor_gradient(const ParityWeights& weights, const RealVector& x, int k);

/// max over xs of |p_w(x) g_w'(x) - p_w(-x) g_w'(-x)|_inf for the k-only predictor.
double symmetry_identity_check(const ParityWeights& weights, const ParityWeights& weights_prime,
                               std::span<const RealVector> xs, int k);

/// Squared-residual integrand (1/2)(p_w - p_u0)^2 for the Monte Carlo oracle.
ScalarIntegrand parity_residual_integrand(const ParityWeights& weights, const ParityParams& params,
                                          ParityMode mode);

/// Teacher u0 in the requested architecture.
ParityWeights parity_teacher(const ParityParams& params, Arch arch);

/// u0 with |u0|^2 = 12 k^2 / pi^2 along a given direction.
RealVector nondegenerate_teacher(int k, const RealVector& direction);

}  // namespace convsep
