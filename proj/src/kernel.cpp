#include "convsep/kernel.hpp"

#include "convsep/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace convsep {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// Rounding can push the arcsine argument marginally past 1 when u == v has a
// large norm.
constexpr double kAsinClampTolerance = 1e-12;

void require_same_dim(const RealVector& u, const RealVector& v, const char* op) {
    if (u.size() != v.size()) {
        throw ContractError(std::string(op) + ": dimension mismatch (" +
                            std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
    }
}

// Nodes start from the eigenvalues of the Jacobi matrix and are polished by
// Newton steps on the orthonormal Hermite functions (the recurrence carries the
// exp(-z^2/2) factor, so nothing overflows at high order). Weights follow from
// the derivative at each node. Physicists' convention until the final rescale.
QuadratureRule build_gauss_hermite(int n) {
    if (n < 2) throw ContractError("gauss_hermite: order must be >= 2");
    RealVector diag = RealVector::Zero(n);
    RealVector sub(n - 1);
    for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(j / 2.0);
    Eigen::SelfAdjointEigenSolver<Matrix> jacobi;
    jacobi.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const RealVector& guess = jacobi.eigenvalues();

    const double pim4 = std::pow(std::numbers::pi, -0.25);
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = guess[i];
        double pp = 0.0;
        for (int iter = 0; iter < 20; ++iter) {
            double p1 = pim4 * std::exp(-0.5 * z * z);
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            // d/dz of the unweighted polynomial, still scaled by exp(-z^2/2).
            pp = std::sqrt(2.0 * n) * p2;
            const double step = p1 / pp;
            z -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[i] = z;
        // 2 / P'(z)^2 with P' = pp exp(z^2/2).
        w[i] = 2.0 * std::exp(-z * z) / (pp * pp);
    }
    // Enforce exact symmetry of the rule.
    for (int i = 0; i < n / 2; ++i) {
        const double node = 0.5 * (x[n - 1 - i] - x[i]);
        const double weight = 0.5 * (w[i] + w[n - 1 - i]);
        x[i] = -node;
        x[n - 1 - i] = node;
        w[i] = w[n - 1 - i] = weight;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    QuadratureRule rule;
    rule.order = n;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Physicists' node t maps to y = sqrt(2) t.
        rule.nodes[i] = std::numbers::sqrt2 * x[i];
        rule.weights[i] = w[i] * std::numbers::inv_sqrtpi;
    }
    return rule;
}

}  // namespace

SigmaValue sigma_eval(double x) {
    return {std::erf(x), kTwoOverSqrtPi * std::exp(-x * x)};
}

double v_sigma_from_dots(double uv, double uu, double vv) {
    double arg = 2.0 * uv / (std::sqrt(1.0 + 2.0 * uu) * std::sqrt(1.0 + 2.0 * vv));
    if (arg > 1.0 && arg <= 1.0 + kAsinClampTolerance) arg = 1.0;
    if (arg < -1.0 && arg >= -1.0 - kAsinClampTolerance) arg = -1.0;
    return 2.0 * std::numbers::inv_pi * std::asin(arg);
}

double v_sigma(const RealVector& u, const RealVector& v) {
    require_same_dim(u, v, "v_sigma");
    return v_sigma_from_dots(u.dot(v), u.squaredNorm(), v.squaredNorm());
}

RealVector phi_map(const RealVector& a) {
    return std::exp(-0.5 * a.squaredNorm()) * a;
}

double cos_gaussian_mean(const RealVector& z) {
    return std::exp(-0.5 * z.squaredNorm());
}

const QuadratureRule& gauss_hermite(int order) {
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_gauss_hermite(order)).first;
    return it->second;
}

double expect_quadrature(const Integrand1D& f, const QuadratureRule& rule) {
    if (rule.order < 2) throw ContractError("expect_quadrature: rule order must be >= 2");
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        const double v = f(rule.nodes[i]);
        if (!std::isfinite(v)) {
            throw EvaluationError("expect_quadrature: non-finite integrand at node " +
                                  std::to_string(rule.nodes[i]));
        }
        acc += rule.weights[i] * v;
    }
    return acc;
}

double expect_quadrature(const Integrand2D& f, const QuadratureRule& rule) {
    if (rule.order < 2) throw ContractError("expect_quadrature: rule order must be >= 2");
    double acc = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        double row = 0.0;
        for (int j = 0; j < rule.order; ++j) {
            const double v = f(rule.nodes[i], rule.nodes[j]);
            if (!std::isfinite(v)) {
                throw EvaluationError("expect_quadrature: non-finite integrand at node (" +
                                      std::to_string(rule.nodes[i]) + ", " +
                                      std::to_string(rule.nodes[j]) + ")");
            }
            row += rule.weights[j] * v;
        }
        acc += rule.weights[i] * row;
    }
    return acc;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over the combined words.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RealVector gaussian_vector(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    RealVector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = normal(rng);
    return x;
}

RealVector random_direction(int dim, std::mt19937_64& rng) {
    RealVector x = gaussian_vector(dim, rng);
    while (x.norm() == 0.0) x = gaussian_vector(dim, rng);
    return x.normalized();
}

KernelEstimate mc_expect(const ScalarIntegrand& f, int dim, std::int64_t n, std::uint64_t seed) {
    if (n < 2) throw ContractError("mc_expect: need n >= 2 samples");
    if (dim < 1) throw ContractError("mc_expect: dim must be >= 1");
    std::mt19937_64 rng(seed);
    // Welford accumulation keeps the variance stable for large n.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = f(gaussian_vector(dim, rng));
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n)), n, seed};
}

VectorEstimate mc_expect_vector(const VectorIntegrand& f, int dim, std::int64_t n,
                                std::uint64_t seed) {
    if (n < 2) throw ContractError("mc_expect_vector: need n >= 2 samples");
    if (dim < 1) throw ContractError("mc_expect_vector: dim must be >= 1");
    std::mt19937_64 rng(seed);
    RealVector mean;
    RealVector m2;
    for (std::int64_t i = 0; i < n; ++i) {
        const RealVector v = f(gaussian_vector(dim, rng));
        if (i == 0) {
            mean = RealVector::Zero(v.size());
            m2 = RealVector::Zero(v.size());
        }
        const RealVector delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta.cwiseProduct(v - mean);
    }
    RealVector se = (m2 / static_cast<double>(n - 1) / static_cast<double>(n)).cwiseSqrt();
    return {mean, se, n, seed};
}

}  // namespace convsep
