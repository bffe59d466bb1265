#include "convsep/parity_model.hpp"

#include "convsep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace convsep {

namespace {

constexpr double kFourOverPi = 4.0 * std::numbers::inv_pi;
constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

void check_weights(const ParityWeights& weights, const ParityParams& params, const char* op) {
    const std::size_t expected = weights.arch == Arch::WS ? 1 : static_cast<std::size_t>(params.k);
    if (weights.blocks.size() != expected) {
        throw ContractError(std::string(op) + ": expected " + std::to_string(expected) +
                            " blocks, got " + std::to_string(weights.blocks.size()));
    }
    for (const auto& b : weights.blocks) {
        if (b.size() != params.d) {
            throw ContractError(std::string(op) + ": block dimension " + std::to_string(b.size()) +
                                " != d = " + std::to_string(params.d));
        }
    }
}

// Orthonormal basis (e1, e2) of span{u, w} with e1 along w (along u when w = 0).
// e2 is zero when the span is one-dimensional.
std::pair<RealVector, RealVector> span_basis(const RealVector& u, const RealVector& w) {
    const RealVector& lead = w.norm() > 0.0 ? w : u;
    RealVector e1 = lead.normalized();
    RealVector rest = u - u.dot(e1) * e1;
    const double rest_norm = rest.norm();
    RealVector e2 = rest_norm > 1e-14 * std::max(1.0, u.norm()) ? RealVector(rest / rest_norm)
                                                               : RealVector::Zero(u.size());
    return {std::move(e1), std::move(e2)};
}

}  // namespace

const char* to_string(ParityMode mode) {
    return mode == ParityMode::KOnly ? "k-only" : "one-plus-k";
}

ParityMode parity_mode_from_string(const std::string& name) {
    if (name == "k-only" || name == "k_only" || name == "k") return ParityMode::KOnly;
    if (name == "one-plus-k" || name == "one_plus_k" || name == "1+k") return ParityMode::OnePlusK;
    throw ContractError("unknown parity mode '" + name + "'");
}

ParityParams ParityParams::make(int k, RealVector u0) {
    if (k < 2) throw ContractError("ParityParams: k must be >= 2");
    if (u0.size() < 1) throw ContractError("ParityParams: u0 must be non-empty");
    ParityParams p;
    p.k = k;
    p.d = static_cast<int>(u0.size());
    p.u0 = std::move(u0);
    return p;
}

bool ParityParams::non_degenerate() const {
    return u0.squaredNorm() >= 12.0 * k * k / (std::numbers::pi * std::numbers::pi) * (1.0 - 1e-12);
}

ParityWeights ParityWeights::ws(RealVector w0) {
    ParityWeights w;
    w.arch = Arch::WS;
    w.blocks.push_back(std::move(w0));
    return w;
}

ParityWeights ParityWeights::fc(std::vector<RealVector> blocks) {
    ParityWeights w;
    w.arch = Arch::FC;
    w.blocks = std::move(blocks);
    return w;
}

ParityWeights ParityWeights::fc_from_stacked(const RealVector& stacked, int k) {
    if (k < 1 || stacked.size() % k != 0) throw ContractError("fc_from_stacked: size not divisible by k");
    const Eigen::Index d = stacked.size() / k;
    std::vector<RealVector> blocks;
    for (int l = 0; l < k; ++l) blocks.emplace_back(stacked.segment(l * d, d));
    return fc(std::move(blocks));
}

RealVector ParityWeights::stacked() const {
    const Eigen::Index d = blocks.front().size();
    RealVector out(d * static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t l = 0; l < blocks.size(); ++l) out.segment(static_cast<Eigen::Index>(l) * d, d) = blocks[l];
    return out;
}

void SignedLogProduct::multiply(double factor) {
    if (factor == 0.0 || sign_ == 0) {
        sign_ = 0;
        return;
    }
    if (factor < 0.0) sign_ = -sign_;
    log_abs_ += std::log(std::abs(factor));
}

double SignedLogProduct::value() const {
    return sign_ == 0 ? 0.0 : sign_ * std::exp(log_abs_);
}

double signed_power(double base, int exponent) {
    if (exponent == 0) return 1.0;
    if (base == 0.0) return 0.0;
    const int sign = (base < 0.0 && exponent % 2 != 0) ? -1 : 1;
    return sign * std::exp(exponent * std::log(std::abs(base)));
}

double parity_objective(const ParityWeights& weights, const ParityParams& params, ParityMode mode) {
    check_weights(weights, params, "parity_objective");
    const RealVector& u = params.u0;
    const double uu = u.squaredNorm();
    const double v_uu = v_sigma_from_dots(uu, uu, uu);
    SignedLogProduct self_product;
    SignedLogProduct cross_product;
    for (int l = 0; l < params.k; ++l) {
        const RealVector& w = weights.filter(l);
        const double ww = w.squaredNorm();
        self_product.multiply(v_sigma_from_dots(ww, ww, ww));
        cross_product.multiply(v_sigma_from_dots(u.dot(w), uu, ww));
    }
    double value = 0.5 * (self_product.value() - 2.0 * cross_product.value() + signed_power(v_uu, params.k));
    if (mode == ParityMode::OnePlusK) {
        const RealVector& w1 = weights.filter(0);
        const double ww = w1.squaredNorm();
        value += 0.5 * (v_sigma_from_dots(ww, ww, ww) - 2.0 * v_sigma_from_dots(u.dot(w1), uu, ww) + v_uu);
    }
    return std::max(value, 0.0);
}

double self_coefficient(double norm) {
    const double r2 = norm * norm;
    return kFourOverPi / ((1.0 + 2.0 * r2) * std::sqrt(1.0 + 4.0 * r2));
}

double self_coefficient_quadrature(double norm, const QuadratureRule& rule) {
    if (norm == 0.0) {
        // Limit r -> 0 of E[erf(r y) erf'(r y) y] / r.
        return kFourOverPi;
    }
    const double moment = expect_quadrature(
        [norm](double y) {
            const SigmaValue s = sigma_eval(norm * y);
            return s.value * s.derivative * y;
        },
        rule);
    return moment / norm;
}

RealVector self_term(const RealVector& w) {
    return self_coefficient(w.norm()) * w;
}

RealVector cross_term(const RealVector& u, const RealVector& w) {
    if (u.size() != w.size()) throw ContractError("cross_term: dimension mismatch");
    // Reweighting N(0, I) by exp(-(w.x)^2) gives N(0, S) with
    // S = I - 2 w w^T / (1 + 2|w|^2) and mass (1 + 2|w|^2)^{-1/2}; Stein's lemma
    // then gives E_S[erf(u.x) x] = S u E[erf'(u.x)].
    const double a = 1.0 + 2.0 * w.squaredNorm();
    const RealVector su = u - (2.0 * w.dot(u) / a) * w;
    const double u_su = u.dot(su);
    return (kFourOverPi / std::sqrt(a * (1.0 + 2.0 * u_su))) * su;
}

RealVector cross_term_quadrature(const RealVector& u, const RealVector& w, const QuadratureRule& rule) {
    if (u.size() != w.size()) throw ContractError("cross_term_quadrature: dimension mismatch");
    if (u.norm() == 0.0 && w.norm() == 0.0) return RealVector::Zero(u.size());
    const auto [e1, e2] = span_basis(u, w);
    const double u1 = u.dot(e1);
    const double u2 = u.dot(e2);
    const double w1 = w.dot(e1);
    const double w2 = w.dot(e2);
    auto weight = [&](double y1, double y2) {
        return std::erf(u1 * y1 + u2 * y2) * kTwoOverSqrtPi * std::exp(-std::pow(w1 * y1 + w2 * y2, 2));
    };
    const double m1 = expect_quadrature([&](double y1, double y2) { return weight(y1, y2) * y1; }, rule);
    const double m2 = expect_quadrature([&](double y1, double y2) { return weight(y1, y2) * y2; }, rule);
    return m1 * e1 + m2 * e2;
}

std::vector<RealVector> GradientDecomposition::gradient() const {
    std::vector<RealVector> out;
    out.reserve(self_part.size());
    for (std::size_t l = 0; l < self_part.size(); ++l) out.push_back(self_part[l] - cross_part[l]);
    return out;
}

RealVector GradientDecomposition::stacked_gradient() const {
    return ParityWeights::fc(gradient()).stacked();
}

GradientDecomposition parity_gradient(const ParityWeights& weights, const ParityParams& params,
                                      ParityMode mode) {
    if (weights.arch != Arch::FC) throw ContractError("parity_gradient: expects FC weights");
    check_weights(weights, params, "parity_gradient");
    const int k = params.k;
    const RealVector& u = params.u0;
    const double uu = u.squaredNorm();

    std::vector<double> v_self(k);
    std::vector<double> v_cross(k);
    for (int j = 0; j < k; ++j) {
        const RealVector& w = weights.blocks[j];
        const double ww = w.squaredNorm();
        v_self[j] = v_sigma_from_dots(ww, ww, ww);
        v_cross[j] = v_sigma_from_dots(u.dot(w), uu, ww);
    }

    GradientDecomposition out;
    for (int l = 0; l < k; ++l) {
        SignedLogProduct ps;
        SignedLogProduct pc;
        for (int j = 0; j < k; ++j) {
            if (j == l) continue;
            ps.multiply(v_self[j]);
            pc.multiply(v_cross[j]);
        }
        const RealVector& w = weights.blocks[l];
        const RealVector s = self_term(w);
        const RealVector c = cross_term(u, w);
        out.self_products.push_back(ps.value());
        out.cross_products.push_back(pc.value());
        double self_scale = ps.value();
        double cross_scale = pc.value();
        if (mode == ParityMode::OnePlusK && l == 0) {
            self_scale += 1.0;
            cross_scale += 1.0;
        }
        out.self_part.push_back(self_scale * s);
        out.cross_part.push_back(cross_scale * c);
    }
    return out;
}

RealVector WsGradientParts::gradient(const RealVector& w0) const {
    return self_coefficient * c1 * w0 - cross_coefficient * b_tilde;
}

WsGradientParts ws_gradient_parts(const RealVector& w0, const ParityParams& params, ParityMode mode) {
    if (w0.size() != params.d) throw ContractError("ws_gradient: dimension mismatch");
    const int k = params.k;
    const double ww = w0.squaredNorm();
    const double uu = params.u0.squaredNorm();
    WsGradientParts parts;
    parts.c1 = self_coefficient(std::sqrt(ww));
    parts.b_tilde = cross_term(params.u0, w0);
    parts.self_coefficient = k * signed_power(v_sigma_from_dots(ww, ww, ww), k - 1);
    parts.cross_coefficient = k * signed_power(v_sigma_from_dots(params.u0.dot(w0), uu, ww), k - 1);
    if (mode == ParityMode::OnePlusK) {
        parts.self_coefficient += 1.0;
        parts.cross_coefficient += 1.0;
    }
    return parts;
}

RealVector ws_gradient(const RealVector& w0, const ParityParams& params, ParityMode mode) {
    return ws_gradient_parts(w0, params, mode).gradient(w0);
}

NonDegeneracy nondegeneracy_floor(int k) {
    if (k < 2) throw ContractError("nondegeneracy_floor: k must be >= 2");
    const double threshold = 12.0 * k * k / (std::numbers::pi * std::numbers::pi);
    const double v = v_sigma_from_dots(threshold, threshold, threshold);
    return {threshold, v, signed_power(v, k)};
}

double angle_between(const RealVector& w, const RealVector& u) {
    if (w.size() != u.size()) throw ContractError("angle_between: dimension mismatch");
    const double wn = w.norm();
    const double un = u.norm();
    if (wn == 0.0 || un == 0.0) throw ContractError("angle_between: undefined angle for a zero vector");
    const RealVector a = w / wn;
    const RealVector b = u / un;
    // 2 atan2(|a - b|, |a + b|) keeps full relative precision at both ends.
    return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

double parity_predict(const ParityWeights& weights, const RealVector& x, int k, ParityMode mode) {
    const Eigen::Index d = weights.blocks.front().size();
    if (x.size() != d * k) throw ContractError("parity_predict: input dimension mismatch");
    double product = 1.0;
    for (int l = 0; l < k; ++l) product *= std::erf(weights.filter(l).dot(x.segment(l * d, d)));
    if (mode == ParityMode::OnePlusK) product += std::erf(weights.filter(0).dot(x.head(d)));
    return product;
}

RealVector parity_predictor_gradient(const ParityWeights& weights, const RealVector& x, int k) {
    const Eigen::Index d = weights.blocks.front().size();
    if (x.size() != d * k) throw ContractError("parity_predictor_gradient: input dimension mismatch");
    std::vector<double> s(k);
    std::vector<double> ds(k);
    for (int l = 0; l < k; ++l) {
        const SigmaValue v = sigma_eval(weights.filter(l).dot(x.segment(l * d, d)));
        s[l] = v.value;
        ds[l] = v.derivative;
    }
    RealVector stacked = RealVector::Zero(d * k);
    for (int l = 0; l < k; ++l) {
        double others = 1.0;
        for (int j = 0; j < k; ++j) {
            if (j != l) others *= s[j];
        }
        stacked.segment(l * d, d) = others * ds[l] * x.segment(l * d, d);
    }
    if (weights.arch == Arch::FC) return stacked;
    RealVector sum = RealVector::Zero(d);
    for (int l = 0; l < k; ++l) sum += stacked.segment(l * d, d);
    return sum;
}

double symmetry_identity_check(const ParityWeights& weights, const ParityWeights& weights_prime,
                               std::span<const RealVector> xs, int k) {
    double worst = 0.0;
    for (const RealVector& x : xs) {
        const RealVector neg = -x;
        const RealVector lhs = parity_predict(weights, x, k, ParityMode::KOnly) *
                               parity_predictor_gradient(weights_prime, x, k);
        const RealVector rhs = parity_predict(weights, neg, k, ParityMode::KOnly) *
                               parity_predictor_gradient(weights_prime, neg, k);
        worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

ScalarIntegrand parity_residual_integrand(const ParityWeights& weights, const ParityParams& params,
                                          ParityMode mode) {
    check_weights(weights, params, "parity_residual_integrand");
    ParityWeights teacher = parity_teacher(params, Arch::WS);
    return [weights, teacher, k = params.k, mode](const RealVector& x) {
        const double r = parity_predict(weights, x, k, mode) - parity_predict(teacher, x, k, mode);
        return 0.5 * r * r;
    };
}

ParityWeights parity_teacher(const ParityParams& params, Arch arch) {
    if (arch == Arch::WS) return ParityWeights::ws(params.u0);
    return ParityWeights::fc(std::vector<RealVector>(params.k, params.u0));
}

RealVector nondegenerate_teacher(int k, const RealVector& direction) {
    const double norm = std::sqrt(12.0) * k / std::numbers::pi;
    return norm * direction.normalized();
}

}  // namespace convsep
