#pragma once

// Deterministic (projected) gradient descent over the analytic models, with
// per-iteration instrumentation.

#include "convsep/cosine_model.hpp"
#include "convsep/parity_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace convsep {

enum class ModelKind { Cosine, Parity };

/// Which analytic objective is optimized and in which parameterization. The
/// optimization variable is always a flat vector: d entries for WS, d*k
/// stacked patch filters for FC.
struct ModelSpec {
    ModelKind kind = ModelKind::Parity;
    Arch arch = Arch::WS;
    CosineParams cosine;
    ParityParams parity;
    ParityMode mode = ParityMode::OnePlusK;

    static ModelSpec cosine_model(CosineParams params, Arch arch);
    static ModelSpec parity_model(ParityParams params, Arch arch, ParityMode mode);

    int k() const;
    int d() const;
    const RealVector& u0() const;
    Eigen::Index dim() const;

    double loss(const RealVector& w) const;
    RealVector gradient(const RealVector& w) const;
    RealVector teacher() const;
    /// Norm of each patch filter (one entry for WS).
    std::vector<double> block_norms(const RealVector& w) const;
};

/// Constant step, or an explicit schedule whose last entry repeats.
struct StepRule {
    double constant = 0.1;
    std::vector<double> schedule;

    double at(std::size_t iter) const;
    void validate() const;
};

struct GdConfig {
    StepRule step;
    std::size_t max_iters = 1000;
    std::optional<double> projection_radius;
    /// Stop once dist_to_teacher <= stop_tolerance.
    double stop_tolerance = 1e-6;
    /// Stop once grad_norm < grad_tolerance.
    double grad_tolerance = 1e-8;
    std::uint64_t seed = 0;
    /// Keep every n-th record (the initial and final states are always kept).
    std::size_t record_every = 1;

    void validate() const;
};

struct TrajectoryRecord {
    std::size_t iter = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    /// Angle to u0 in radians for WS runs; empty for FC.
    std::optional<double> alpha;
    std::vector<double> weight_norms;
    double dist_to_teacher = 0.0;
};

enum class StopReason { Converged, GradientVanished, BudgetExhausted };

const char* to_string(StopReason reason);

/// Per-step view passed to an observer after each update.
struct StepView {
    std::size_t iter;
    const RealVector& weights;
    const RealVector& gradient;  // gradient evaluated at the previous iterate
    double step_size;
};

struct GdResult {
    std::vector<TrajectoryRecord> records;
    RealVector final_weights;
    std::size_t iterations = 0;
    StopReason stop_reason = StopReason::BudgetExhausted;
};

using StepObserver = std::function<void(const StepView&)>;

/// Runs w <- project(w - eta_t grad F(w)) from `init`. Throws DivergenceError
/// naming the iteration when the loss or gradient becomes non-finite.
GdResult gd_run(const ModelSpec& model, const RealVector& init, const GdConfig& config,
                const StepObserver& observer = {});

TrajectoryRecord make_record(const ModelSpec& model, const RealVector& w, std::size_t iter,
                             const RealVector& gradient);

/// Radial projection onto the closed ball; identity inside it.
RealVector project_to_ball(const RealVector& w, double radius);

/// FC weights with every coordinate drawn uniformly from {+c, -c}, stacked
/// block by block.
RealVector rademacher_init(int d, int k, double c, std::uint64_t seed);

/// |cos angle(w, u)|; zero for a zero w.
double alignment(const RealVector& w, const RealVector& u);

/// Constant step used for the weight-shared parity runs:
/// multiplier * eps^2 / k^5.
double phase2_step(double eps, int k, double multiplier);

}  // namespace convsep
