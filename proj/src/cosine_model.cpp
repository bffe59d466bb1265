#include "convsep/cosine_model.hpp"

#include "convsep/errors.hpp"

#include <cmath>
#include <string>

namespace convsep {

namespace {

RealVector repeat(const RealVector& v, int times) {
    RealVector out(v.size() * times);
    for (int i = 0; i < times; ++i) out.segment(i * v.size(), v.size()) = v;
    return out;
}

void check_weights(const CosineWeights& weights, const CosineParams& params, const char* op) {
    const Eigen::Index expected =
        weights.arch == Arch::WS ? params.d : static_cast<Eigen::Index>(params.d) * params.k;
    if (weights.w.size() != expected) {
        throw ContractError(std::string(op) + ": expected " + std::to_string(expected) +
                            " weights for " + to_string(weights.arch) + ", got " +
                            std::to_string(weights.w.size()));
    }
}

// Gradient of (1/2) E[(cos(b w.z) - cos(b u.z))^2] with respect to w.
RealVector cosine_term_gradient(const RealVector& w, const RealVector& u, double b) {
    return -0.5 * b * (phi_map(2.0 * b * w) - phi_map(b * (w - u)) - phi_map(b * (w + u)));
}

// Jacobian of phi_map at a: exp(-|a|^2/2) (I - a a^T).
Matrix phi_jacobian(const RealVector& a) {
    const Eigen::Index n = a.size();
    return std::exp(-0.5 * a.squaredNorm()) * (Matrix::Identity(n, n) - a * a.transpose());
}

}  // namespace

const char* to_string(Arch arch) {
    return arch == Arch::WS ? "WS" : "FC";
}

Arch arch_from_string(const std::string& name) {
    if (name == "WS" || name == "ws") return Arch::WS;
    if (name == "FC" || name == "fc") return Arch::FC;
    throw ContractError("unknown architecture '" + name + "' (expected WS or FC)");
}

CosineParams CosineParams::make(int k, RealVector u0, double c_k) {
    if (k < 1) throw ContractError("CosineParams: k must be >= 1");
    if (u0.size() < 1) throw ContractError("CosineParams: u0 must be non-empty");
    if (!(u0.norm() > 0.0)) throw ContractError("CosineParams: |u0| must be positive");
    const double floor = 3.0 * std::sqrt(static_cast<double>(k));
    if (c_k <= 0.0) c_k = floor;
    if (c_k < floor * (1.0 - 1e-12)) {
        throw ContractError("CosineParams: c_k must be >= 3 sqrt(k) = " + std::to_string(floor));
    }
    CosineParams p;
    p.k = k;
    p.d = static_cast<int>(u0.size());
    p.c_k = c_k;
    p.u0 = std::move(u0);
    return p;
}

double cos_squared_diff_mean(const RealVector& w, const RealVector& v) {
    if (w.size() != v.size()) throw ContractError("cos_squared_diff_mean: dimension mismatch");
    const double value = 1.0 + 0.5 * std::exp(-2.0 * w.squaredNorm()) +
                         0.5 * std::exp(-2.0 * v.squaredNorm()) -
                         std::exp(-0.5 * (w - v).squaredNorm()) -
                         std::exp(-0.5 * (w + v).squaredNorm());
    // Exact value is non-negative; cancellation can leave a tiny negative residue.
    return value < 0.0 ? 0.0 : value;
}

double cosine_objective(const CosineWeights& weights, const CosineParams& params) {
    check_weights(weights, params, "cosine_objective");
    const double half_c2 = 0.5 * params.c_k * params.c_k;
    if (weights.arch == Arch::WS) {
        const double b = std::sqrt(static_cast<double>(params.k));
        return half_c2 * (weights.w - params.u0).squaredNorm() +
               0.5 * cos_squared_diff_mean(b * weights.w, b * params.u0);
    }
    const RealVector u_bar = repeat(params.u0, params.k);
    return half_c2 * (weights.w.head(params.d) - params.u0).squaredNorm() +
           0.5 * cos_squared_diff_mean(weights.w, u_bar);
}

RealVector cosine_gradient(const CosineWeights& weights, const CosineParams& params) {
    check_weights(weights, params, "cosine_gradient");
    const double c2 = params.c_k * params.c_k;
    if (weights.arch == Arch::WS) {
        const double b = std::sqrt(static_cast<double>(params.k));
        return c2 * (weights.w - params.u0) + cosine_term_gradient(weights.w, params.u0, b);
    }
    RealVector g = cosine_term_gradient(weights.w, repeat(params.u0, params.k), 1.0);
    g.head(params.d) += c2 * (weights.w.head(params.d) - params.u0);
    return g;
}

Matrix cosine_hessian_ws(const RealVector& w0, const CosineParams& params) {
    if (w0.size() != params.d) throw ContractError("cosine_hessian_ws: dimension mismatch");
    const double b = std::sqrt(static_cast<double>(params.k));
    const double b2 = b * b;
    const RealVector& u = params.u0;
    Matrix h = params.c_k * params.c_k * Matrix::Identity(params.d, params.d);
    h += -b2 * phi_jacobian(2.0 * b * w0);
    h += 0.5 * b2 * (phi_jacobian(b * (w0 - u)) + phi_jacobian(b * (w0 + u)));
    return 0.5 * (h + h.transpose());
}

CosineWeights cosine_teacher(const CosineParams& params, Arch arch) {
    return {arch, arch == Arch::WS ? params.u0 : repeat(params.u0, params.k)};
}

EigenRange symmetric_eigen_range(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

EigenRange cosine_ws_hessian_bounds(const CosineParams& params) {
    const double c2 = params.c_k * params.c_k;
    const double spread = 2.0 * params.k + std::sqrt(static_cast<double>(params.k));
    return {c2 - spread, c2 + spread};
}

double ring_gradient_norm(const RealVector& stacked, const CosineParams& params) {
    const RealVector g = cosine_gradient({Arch::FC, stacked}, params);
    return g.tail(static_cast<Eigen::Index>(params.d) * (params.k - 1)).norm();
}

double ring_gradient_envelope(const RealVector& stacked, const CosineParams& params) {
    const Eigen::Index tail = static_cast<Eigen::Index>(params.d) * (params.k - 1);
    if (stacked.size() != tail + params.d) throw ContractError("ring_gradient_envelope: dimension mismatch");
    const RealVector w_hat = stacked.tail(tail);
    const RealVector u_hat = repeat(params.u0, params.k - 1);
    auto term = [](double norm) { return std::exp(-0.5 * norm * norm) * norm; };
    return 0.5 * (term(w_hat.norm()) + term((w_hat - u_hat).norm()) + term((w_hat + u_hat).norm()));
}

RealVector uniform_in_ball(int dim, double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const RealVector dir = random_direction(dim, rng);
    return radius * std::pow(unit(rng), 1.0 / dim) * dir;
}

RealVector sample_ring_point(const CosineParams& params, double radius, std::mt19937_64& rng) {
    const int tail = params.d * (params.k - 1);
    RealVector w(params.d + tail);
    w.head(params.d) = uniform_in_ball(params.d, params.u0.norm(), rng);
    w.tail(tail) = radius * random_direction(tail, rng);
    return w;
}

RealVector sample_inner_ball_point(const CosineParams& params, std::mt19937_64& rng) {
    const int tail = params.d * (params.k - 1);
    const double outer = std::sqrt(params.k - 1.0) * params.u0.norm() / 2.0;
    RealVector w(params.d + tail);
    w.head(params.d) = uniform_in_ball(params.d, params.u0.norm(), rng);
    w.tail(tail) = uniform_in_ball(tail, outer, rng);
    return w;
}

}  // namespace convsep
