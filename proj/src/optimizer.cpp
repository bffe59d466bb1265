#include "convsep/optimizer.hpp"

#include "convsep/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace convsep {

ModelSpec ModelSpec::cosine_model(CosineParams params, Arch arch) {
    ModelSpec m;
    m.kind = ModelKind::Cosine;
    m.arch = arch;
    m.cosine = std::move(params);
    return m;
}

ModelSpec ModelSpec::parity_model(ParityParams params, Arch arch, ParityMode mode) {
    ModelSpec m;
    m.kind = ModelKind::Parity;
    m.arch = arch;
    m.parity = std::move(params);
    m.mode = mode;
    return m;
}

int ModelSpec::k() const { return kind == ModelKind::Cosine ? cosine.k : parity.k; }
int ModelSpec::d() const { return kind == ModelKind::Cosine ? cosine.d : parity.d; }
const RealVector& ModelSpec::u0() const { return kind == ModelKind::Cosine ? cosine.u0 : parity.u0; }

Eigen::Index ModelSpec::dim() const {
    return arch == Arch::WS ? d() : static_cast<Eigen::Index>(d()) * k();
}

double ModelSpec::loss(const RealVector& w) const {
    if (kind == ModelKind::Cosine) return cosine_objective({arch, w}, cosine);
    const ParityWeights pw = arch == Arch::WS ? ParityWeights::ws(w) : ParityWeights::fc_from_stacked(w, parity.k);
    return parity_objective(pw, parity, mode);
}

RealVector ModelSpec::gradient(const RealVector& w) const {
    if (kind == ModelKind::Cosine) return cosine_gradient({arch, w}, cosine);
    if (arch == Arch::WS) return ws_gradient(w, parity, mode);
    return parity_gradient(ParityWeights::fc_from_stacked(w, parity.k), parity, mode).stacked_gradient();
}

RealVector ModelSpec::teacher() const {
    if (arch == Arch::WS) return u0();
    RealVector out(dim());
    for (int l = 0; l < k(); ++l) out.segment(static_cast<Eigen::Index>(l) * d(), d()) = u0();
    return out;
}

std::vector<double> ModelSpec::block_norms(const RealVector& w) const {
    if (arch == Arch::WS) return {w.norm()};
    std::vector<double> norms;
    for (int l = 0; l < k(); ++l) norms.push_back(w.segment(static_cast<Eigen::Index>(l) * d(), d()).norm());
    return norms;
}

double StepRule::at(std::size_t iter) const {
    if (schedule.empty()) return constant;
    return iter < schedule.size() ? schedule[iter] : schedule.back();
}

void StepRule::validate() const {
    auto ok = [](double eta) { return eta > 0.0 && eta <= 1.0; };
    if (schedule.empty() && !ok(constant)) {
        throw ContractError("step size must lie in (0, 1], got " + std::to_string(constant));
    }
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        if (!ok(schedule[t])) {
            throw ContractError("step schedule entry " + std::to_string(t) + " outside (0, 1]");
        }
    }
}

void GdConfig::validate() const {
    step.validate();
    if (max_iters < 1) throw ContractError("max_iters must be >= 1");
    if (projection_radius && !(*projection_radius > 0.0)) throw ContractError("projection radius must be > 0");
    if (!(stop_tolerance > 0.0)) throw ContractError("stop_tolerance must be > 0");
    if (record_every < 1) throw ContractError("record_every must be >= 1");
}

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::Converged: return "converged";
        case StopReason::GradientVanished: return "gradient_vanished";
        case StopReason::BudgetExhausted: return "budget_exhausted";
    }
    return "unknown";
}

TrajectoryRecord make_record(const ModelSpec& model, const RealVector& w, std::size_t iter,
                             const RealVector& gradient) {
    TrajectoryRecord r;
    r.iter = iter;
    r.loss = model.loss(w);
    r.grad_norm = gradient.norm();
    if (model.arch == Arch::WS && w.norm() > 0.0) r.alpha = angle_between(w, model.u0());
    r.weight_norms = model.block_norms(w);
    r.dist_to_teacher = (w - model.teacher()).norm();
    return r;
}

GdResult gd_run(const ModelSpec& model, const RealVector& init, const GdConfig& config,
                const StepObserver& observer) {
    config.validate();
    if (init.size() != model.dim()) {
        throw ContractError("gd_run: init has " + std::to_string(init.size()) + " entries, model expects " +
                            std::to_string(model.dim()));
    }
    GdResult result;
    RealVector w = init;
    RealVector grad = model.gradient(w);
    const RealVector teacher = model.teacher();

    auto check_finite = [](const TrajectoryRecord& rec) {
        if (!std::isfinite(rec.loss)) throw DivergenceError("non-finite loss", rec.iter);
        if (!std::isfinite(rec.grad_norm)) throw DivergenceError("non-finite gradient", rec.iter);
    };

    TrajectoryRecord rec = make_record(model, w, 0, grad);
    check_finite(rec);
    result.records.push_back(rec);

    std::size_t iter = 0;
    auto stopped = [&](const TrajectoryRecord& r) {
        if (r.dist_to_teacher <= config.stop_tolerance) {
            result.stop_reason = StopReason::Converged;
            return true;
        }
        if (r.grad_norm < config.grad_tolerance) {
            result.stop_reason = StopReason::GradientVanished;
            return true;
        }
        return false;
    };

    bool done = stopped(rec);
    while (!done && iter < config.max_iters) {
        const double eta = config.step.at(iter);
        RealVector next = w - eta * grad;
        if (config.projection_radius) next = project_to_ball(next, *config.projection_radius);
        ++iter;
        if (observer) observer(StepView{iter, next, grad, eta});
        w = std::move(next);
        grad = model.gradient(w);

        // Cheap stop test on every step; full records only when kept.
        const double dist = (w - teacher).norm();
        const double gnorm = grad.norm();
        if (!std::isfinite(gnorm)) throw DivergenceError("non-finite gradient", iter);
        const bool last = iter == config.max_iters || dist <= config.stop_tolerance ||
                          gnorm < config.grad_tolerance;
        if (last || iter % config.record_every == 0) {
            rec = make_record(model, w, iter, grad);
            check_finite(rec);
            result.records.push_back(rec);
            done = stopped(rec);
        }
    }
    result.iterations = iter;
    result.final_weights = std::move(w);
    return result;
}

RealVector project_to_ball(const RealVector& w, double radius) {
    if (!(radius > 0.0)) throw ContractError("project_to_ball: radius must be > 0");
    const double n = w.norm();
    if (n <= radius) return w;
    return (radius / n) * w;
}

RealVector rademacher_init(int d, int k, double c, std::uint64_t seed) {
    if (!(c > 0.0)) throw ContractError("rademacher_init: c must be > 0");
    if (d < 1 || k < 1) throw ContractError("rademacher_init: d and k must be >= 1");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    RealVector w(static_cast<Eigen::Index>(d) * k);
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = coin(rng) ? c : -c;
    return w;
}

double alignment(const RealVector& w, const RealVector& u) {
    const double wn = w.norm();
    const double un = u.norm();
    if (wn == 0.0 || un == 0.0) return 0.0;
    return std::abs(w.dot(u)) / (wn * un);
}

double phase2_step(double eps, int k, double multiplier) {
    return multiplier * eps * eps / std::pow(static_cast<double>(k), 5);
}

}  // namespace convsep
