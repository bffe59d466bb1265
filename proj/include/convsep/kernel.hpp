#pragma once

// Scalar activations, closed-form Gaussian expectations, Gauss-Hermite
// quadrature and a seeded Monte Carlo oracle. Every expectation here is over
// a standard Gaussian input.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace convsep {

using RealVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SigmaValue {
    double value;
    double derivative;
};

/// erf and its derivative 2/sqrt(pi) * exp(-x^2).
SigmaValue sigma_eval(double x);

/// Arcsine kernel E[erf(u.x) erf(v.x)] for x ~ N(0, I).
double v_sigma(const RealVector& u, const RealVector& v);

/// Same kernel from precomputed inner products; the hot path of the GD loops.
double v_sigma_from_dots(double uv, double uu, double vv);

/// exp(-|a|^2/2) * a, which equals E[sin(a.z) z].
RealVector phi_map(const RealVector& a);

/// E[cos(z.x)] = exp(-|z|^2/2).
double cos_gaussian_mean(const RealVector& z);

// ---------------------------------------------------------------------------
// Quadrature

/// Gauss-Hermite rule normalized to the standard Gaussian measure: the
/// weights sum to one and E[f(y)] ~= sum_i weights[i] * f(nodes[i]).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int order = 0;
};

inline constexpr int kDefaultQuadratureOrder = 64;

/// Builds (and caches per order) the probabilists' Gauss-Hermite rule.
const QuadratureRule& gauss_hermite(int order = kDefaultQuadratureOrder);

using Integrand1D = std::function<double(double)>;
using Integrand2D = std::function<double(double, double)>;

/// E[f(y)], y ~ N(0,1). Throws EvaluationError on a non-finite node value.
double expect_quadrature(const Integrand1D& f, const QuadratureRule& rule);

/// E[f(y1, y2)] over a tensor grid, (y1, y2) ~ N(0, I_2).
double expect_quadrature(const Integrand2D& f, const QuadratureRule& rule);

// ---------------------------------------------------------------------------
// Monte Carlo

struct KernelEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct VectorEstimate {
    RealVector value;
    RealVector std_error;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

using ScalarIntegrand = std::function<double(const RealVector&)>;
using VectorIntegrand = std::function<RealVector(const RealVector&)>;

/// Sample mean of f(x) over n draws x ~ N(0, I_dim), with the standard error
/// sample-std / sqrt(n). Deterministic in `seed`.
KernelEstimate mc_expect(const ScalarIntegrand& f, int dim, std::int64_t n, std::uint64_t seed);

/// Componentwise version of mc_expect for vector-valued integrands.
VectorEstimate mc_expect_vector(const VectorIntegrand& f, int dim, std::int64_t n,
                                std::uint64_t seed);

/// Independent, reproducible seed for a named sub-stream of a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Standard-normal vector from the generator used by every seeded routine.
RealVector gaussian_vector(int dim, std::mt19937_64& rng);

/// Uniformly distributed unit vector.
RealVector random_direction(int dim, std::mt19937_64& rng);

}  // namespace convsep
