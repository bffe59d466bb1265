#include "convsep/theorems.hpp"

#include "convsep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace convsep {

namespace {

enum SeedStream : std::uint64_t {
    kIdentityStream = 11,
    kCosineWsStream = 12,
    kRingStream = 13,
    kFcStuckStream = 14,
    kWsConvergeStream = 15,
};

RealVector repeat(const RealVector& v, int times) {
    RealVector out(v.size() * times);
    for (int i = 0; i < times; ++i) out.segment(i * v.size(), v.size()) = v;
    return out;
}

// E[erf(w.x)] along the one-dimensional projection.
double erf_mean(const RealVector& w) {
    const double n = w.norm();
    return expect_quadrature([n](double y) { return std::erf(n * y); }, gauss_hermite());
}

double single_patch_objective(const RealVector& w1, const RealVector& u) {
    return 0.5 * (v_sigma(w1, w1) - 2.0 * v_sigma(u, w1) + v_sigma(u, u));
}

std::string key(const std::string& prefix, const std::string& name) { return prefix + "." + name; }

std::string short_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

// Least-squares slope and coefficient of determination.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double slope = sxy / sxx;
    const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return {slope, r2};
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

nlohmann::json CheckReport::to_json() const {
    nlohmann::json measured_json = nlohmann::json::object();
    for (const auto& [name, value] : measured) {
        if (std::isfinite(value)) {
            measured_json[name] = value;
        } else {
            measured_json[name] = nullptr;
        }
    }
    return {{"check_id", check_id}, {"passed", passed}, {"measured", measured_json},
            {"budget", budget},     {"seed", seed}};
}

double parity_objective_expanded(const ParityWeights& weights, const ParityParams& params) {
    const RealVector& u = params.u0;
    const int k = params.k;
    const RealVector& w1 = weights.filter(0);
    double self_prod = 1.0;
    double cross_prod = 1.0;
    double student_tail_mean = 1.0;
    for (int l = 0; l < k; ++l) {
        self_prod *= v_sigma(weights.filter(l), weights.filter(l));
        cross_prod *= v_sigma(u, weights.filter(l));
        if (l > 0) student_tail_mean *= erf_mean(weights.filter(l));
    }
    const double teacher_tail_mean = std::pow(erf_mean(u), k - 1);
    const double vuu = v_sigma(u, u);
    // p = A + P for the student, A* + P* for the teacher; expand E[(p - p*)^2].
    const double aa = v_sigma(w1, w1);
    const double a_as = v_sigma(w1, u);
    const double asas = vuu;
    const double pp = self_prod;
    const double p_ps = cross_prod;
    const double psps = std::pow(vuu, k);
    const double a_p = aa * student_tail_mean;
    const double a_ps = a_as * teacher_tail_mean;
    const double as_p = a_as * student_tail_mean;
    const double as_ps = vuu * teacher_tail_mean;
    return 0.5 * (aa + pp + asas + psps + 2.0 * a_p - 2.0 * a_as - 2.0 * a_ps - 2.0 * as_p - 2.0 * p_ps +
                  2.0 * as_ps);
}

std::size_t fc_proof_budget(int d, int k, double eta) {
    const double t = std::pow(static_cast<double>(d), k / 3.0 - 3.0) / (eta * k);
    return static_cast<std::size_t>(std::floor(t));
}

double alignment_envelope(int d, int k, double eta, std::size_t t) {
    const double dd = static_cast<double>(d);
    return std::pow(dd, -1.0 / 3.0) + eta * static_cast<double>(t) * std::pow(dd, -(k - 2) / 3.0 + 2.0);
}

double angle_precondition(double eps, double u0_norm) {
    return std::min(std::atan(eps / (2.0 * u0_norm)), std::sqrt(eps / u0_norm));
}

// ---------------------------------------------------------------------------

CheckReport check_identities(std::uint64_t seed, const IdentityOptions& options) {
    std::mt19937_64 rng(derive_seed(seed, kIdentityStream));
    std::uniform_int_distribution<int> dim_dist(1, 8);
    std::uniform_int_distribution<int> k_dist(2, 4);
    std::uniform_real_distribution<double> scale_dist(0.2, 2.5);
    std::bernoulli_distribution coin(0.5);

    double max_decomposition = 0.0;
    double max_implementation = 0.0;
    double max_symmetry = 0.0;
    int ws_configs = 0;
    for (int c = 0; c < options.configurations; ++c) {
        const int d = dim_dist(rng);
        const int k = k_dist(rng);
        const Arch arch = coin(rng) ? Arch::WS : Arch::FC;
        if (arch == Arch::WS) ++ws_configs;
        const ParityParams params = ParityParams::make(k, scale_dist(rng) * random_direction(d, rng));
        auto draw = [&]() {
            std::vector<RealVector> blocks;
            const int n = arch == Arch::WS ? 1 : k;
            for (int l = 0; l < n; ++l) blocks.push_back(scale_dist(rng) * gaussian_vector(d, rng) / std::sqrt(d));
            return arch == Arch::WS ? ParityWeights::ws(blocks.front()) : ParityWeights::fc(blocks);
        };
        const ParityWeights w = draw();
        const ParityWeights w_prime = draw();

        double single = single_patch_objective(w.filter(0), params.u0);
        if (options.corrupt_single_term) single *= 1.001;
        const double k_only = parity_objective(w, params, ParityMode::KOnly);
        const double combined = parity_objective(w, params, ParityMode::OnePlusK);
        const double expanded = parity_objective_expanded(w, params);
        max_decomposition = std::max(max_decomposition, std::abs(expanded - single - k_only));
        max_implementation = std::max(max_implementation, std::abs(combined - single - k_only));

        std::vector<RealVector> xs;
        for (int i = 0; i < options.inputs_per_config; ++i) xs.push_back(gaussian_vector(d * k, rng));
        max_symmetry = std::max(max_symmetry, symmetry_identity_check(w, w_prime, xs, k));
    }

    CheckReport r;
    r.check_id = "identities";
    r.seed = seed;
    r.budget = options.configurations;
    r.measured["max_decomposition_residual"] = max_decomposition;
    r.measured["max_implementation_residual"] = max_implementation;
    r.measured["max_symmetry_deviation"] = max_symmetry;
    r.measured["tolerance"] = options.tolerance;
    r.measured["configurations"] = options.configurations;
    r.measured["ws_configurations"] = ws_configs;
    r.passed = max_decomposition < options.tolerance && max_implementation < options.tolerance &&
               max_symmetry < options.tolerance;
    return r;
}

CheckReport check_cosine_ws(std::uint64_t seed, const CosineWsOptions& options) {
    std::mt19937_64 rng(derive_seed(seed, kCosineWsStream));
    std::uniform_real_distribution<double> norm_dist(0.5, 2.0);
    std::uniform_real_distribution<double> offset_dist(0.1, 3.0);

    CheckReport r;
    r.check_id = "cosine_ws";
    r.seed = seed;
    double min_margin = std::numeric_limits<double>::infinity();  // lambda_min - 3k/2
    double max_ratio = 0.0;
    double max_iter_slack = -std::numeric_limits<double>::infinity();  // iterations - bound
    double max_bound_violation = -std::numeric_limits<double>::infinity();
    int points = 0;
    int gd_failures = 0;
    std::int64_t total_iters = 0;
    for (int k = options.k_min; k <= options.k_max; ++k) {
        double k_min_eig = std::numeric_limits<double>::infinity();
        double k_max_eig = 0.0;
        for (int p = 0; p < options.points_per_k; ++p) {
            const RealVector u0 = norm_dist(rng) * random_direction(options.d, rng);
            const CosineParams params = CosineParams::make(k, u0);
            const RealVector w0 = u0 + offset_dist(rng) * random_direction(options.d, rng);
            const EigenRange eig = symmetric_eigen_range(cosine_hessian_ws(w0, params));
            const EigenRange bounds = cosine_ws_hessian_bounds(params);
            k_min_eig = std::min(k_min_eig, eig.min);
            k_max_eig = std::max(k_max_eig, eig.max);
            min_margin = std::min(min_margin, eig.min - 1.5 * k);
            max_ratio = std::max(max_ratio, eig.max / eig.min);
            max_bound_violation = std::max({max_bound_violation, bounds.min - eig.min, eig.max - bounds.max});

            const double lipschitz = bounds.max;
            GdConfig cfg;
            cfg.step.constant = 1.0 / lipschitz;
            cfg.stop_tolerance = options.eps;
            cfg.grad_tolerance = 0.0;
            const double dist0 = (w0 - u0).norm();
            const auto bound = static_cast<std::size_t>(std::ceil(5.0 * std::log(dist0 / options.eps)) + 2);
            cfg.max_iters = std::max<std::size_t>(bound * 4, 1);
            cfg.record_every = cfg.max_iters;
            const GdResult res = gd_run(ModelSpec::cosine_model(params, Arch::WS), w0, cfg);
            total_iters += static_cast<std::int64_t>(res.iterations);
            const bool converged = res.stop_reason == StopReason::Converged;
            if (!converged || res.iterations > bound) ++gd_failures;
            max_iter_slack = std::max(max_iter_slack, static_cast<double>(res.iterations) - static_cast<double>(bound));
            ++points;
        }
        r.measured[key("k" + std::to_string(k), "lambda_min")] = k_min_eig;
        r.measured[key("k" + std::to_string(k), "lambda_max")] = k_max_eig;
    }
    r.budget = total_iters;
    r.measured["points"] = points;
    r.measured["min_lambda_margin"] = min_margin;
    r.measured["max_condition_ratio"] = max_ratio;
    r.measured["max_iterations_minus_bound"] = max_iter_slack;
    r.measured["gd_failures"] = gd_failures;
    r.measured["max_spectral_bound_violation"] = max_bound_violation;
    r.measured["tolerance"] = options.tol;
    r.passed = points >= 100 && min_margin >= -options.tol && max_ratio <= 5.0 + options.tol && gd_failures == 0;
    return r;
}

CheckReport check_cosine_fc_ring(std::uint64_t seed, const CosineRingOptions& options) {
    std::mt19937_64 rng(derive_seed(seed, kRingStream));
    const int k = options.k;
    const double radius_factors[] = {1.0 / 3.0, 5.0 / 12.0, 0.5};

    CheckReport r;
    r.check_id = "cosine_fc_ring";
    r.seed = seed;
    std::int64_t samples = 0;

    std::vector<double> xs;
    std::vector<double> log_norms;
    double max_envelope_ratio = 0.0;
    for (double s : options.slope_norms) {
        const CosineParams params = CosineParams::make(k, s * random_direction(options.d, rng));
        double max_norm = 0.0;
        for (double f : radius_factors) {
            const double radius = f * std::sqrt(k - 1.0) * s;
            for (int i = 0; i < options.samples_per_radius; ++i) {
                const RealVector w = sample_ring_point(params, radius, rng);
                const double g = ring_gradient_norm(w, params);
                max_norm = std::max(max_norm, g);
                max_envelope_ratio = std::max(max_envelope_ratio, g / ring_gradient_envelope(w, params));
                ++samples;
            }
        }
        const double x = k * s * s;
        xs.push_back(x);
        log_norms.push_back(std::log(max_norm));
        r.measured["log_max_ring_grad@k|u0|^2=" + short_number(x)] = std::log(max_norm);
    }
    bool strictly_decreasing = true;
    for (std::size_t i = 1; i < log_norms.size(); ++i) {
        if (!(log_norms[i] < log_norms[i - 1])) strictly_decreasing = false;
    }
    const auto [slope, r2] = linear_fit(xs, log_norms);

    double min_gap = std::numeric_limits<double>::infinity();
    int gap_regimes = 0;
    std::vector<double> all_norms = options.slope_norms;
    all_norms.insert(all_norms.end(), options.gap_norms.begin(), options.gap_norms.end());
    for (double s : all_norms) {
        if (k * s * s < options.gap_regime) continue;
        ++gap_regimes;
        const CosineParams params = CosineParams::make(k, s * random_direction(options.d, rng));
        const double teacher_loss = cosine_objective(cosine_teacher(params, Arch::FC), params);
        double gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < options.inner_samples; ++i) {
            const RealVector w = sample_inner_ball_point(params, rng);
            gap = std::min(gap, cosine_objective({Arch::FC, w}, params) - teacher_loss);
            ++samples;
        }
        r.measured["min_loss_gap@k|u0|^2=" + short_number(k * s * s)] = gap;
        min_gap = std::min(min_gap, gap);
    }

    r.budget = samples;
    r.measured["slope"] = slope;
    r.measured["fit_r2"] = r2;
    r.measured["strictly_decreasing"] = strictly_decreasing ? 1.0 : 0.0;
    r.measured["slope_threshold"] = options.slope_threshold;
    r.measured["min_loss_gap"] = min_gap;
    r.measured["gap_regimes"] = gap_regimes;
    r.measured["max_grad_over_envelope"] = max_envelope_ratio;
    r.passed = strictly_decreasing && slope < options.slope_threshold && gap_regimes > 0 &&
               min_gap >= options.gap_threshold;
    return r;
}

CheckReport check_parity_fc_stuck(std::uint64_t seed, const FcStuckOptions& options) {
    CheckReport r;
    r.check_id = "parity_fc_stuck";
    r.seed = seed;
    const int k = options.k;
    bool all_pass = true;
    std::int64_t total_iters = 0;
    for (int d : options.dims) {
        const std::string prefix = "d" + std::to_string(d);
        std::mt19937_64 rng(derive_seed(seed, kFcStuckStream * 1000 + static_cast<std::uint64_t>(d)));
        const ParityParams params = ParityParams::make(k, nondegenerate_teacher(k, random_direction(d, rng)));
        const ModelSpec model = ModelSpec::parity_model(params, Arch::FC, ParityMode::OnePlusK);
        const double c = options.c > 0.0 ? options.c : 1.0 / std::sqrt(static_cast<double>(d));
        const std::size_t proof_budget = fc_proof_budget(d, k, options.eta);
        const double init_bound = std::pow(static_cast<double>(d), -1.0 / 3.0);

        int loss_passes = 0;
        int out_of_hypothesis = 0;
        int all_block_out = 0;
        int envelope_violations = 0;
        double min_window_loss = std::numeric_limits<double>::infinity();
        double max_envelope_ratio = 0.0;
        double max_init_alignment = 0.0;
        std::vector<double> crossings;
        int never_crossed = 0;
        const double small_norm = 1.0 / d;
        const double norm_drift = options.eta * std::pow(static_cast<double>(d), -(k - 2) / 3.0 + 1.0);
        for (int s = 0; s < options.seeds; ++s) {
            const RealVector init = options.adversarial_init
                                        ? repeat(params.u0, k)
                                        : rademacher_init(d, k, c, derive_seed(seed, 1000u * d + s));
            // The induction tracks blocks l >= 2; block 1 carries the
            // single-patch term and is free to align.
            bool in_hypothesis = true;
            bool all_blocks_in = true;
            for (int l = 0; l < k; ++l) {
                const double a = alignment(init.segment(l * d, d), params.u0);
                if (a >= init_bound) {
                    all_blocks_in = false;
                    if (l > 0) in_hypothesis = false;
                }
                if (l > 0) max_init_alignment = std::max(max_init_alignment, a);
            }
            if (!all_blocks_in) ++all_block_out;
            if (!in_hypothesis) ++out_of_hypothesis;

            // Per block: the alignment envelope, or the norm has dropped
            // below 1/d at some t' and grown at most eta (t - t') d^(-(k-2)/3+1).
            bool envelope_ok = true;
            std::vector<std::optional<std::size_t>> collapsed(k);
            auto check_envelope = [&](const RealVector& w, std::size_t t) {
                const double env = alignment_envelope(d, k, options.eta, t);
                for (int l = 1; l < k; ++l) {
                    const RealVector block = w.segment(l * d, d);
                    const double n = block.norm();
                    if (!collapsed[l] && n < small_norm) collapsed[l] = t;
                    const double a = alignment(block, params.u0);
                    if (in_hypothesis) max_envelope_ratio = std::max(max_envelope_ratio, a / env);
                    const bool aligned_ok = a <= env;
                    const bool norm_ok =
                        collapsed[l] && n < small_norm + norm_drift * static_cast<double>(t - *collapsed[l]);
                    if (!aligned_ok && !norm_ok) envelope_ok = false;
                }
            };
            GdConfig cfg;
            cfg.step.constant = options.eta;
            cfg.max_iters = std::max(proof_budget, options.extended_horizon);
            cfg.stop_tolerance = 1e-12;
            cfg.grad_tolerance = 0.0;
            check_envelope(init, 0);
            const GdResult res =
                gd_run(model, init, cfg, [&](const StepView& v) {
                    if (v.iter <= proof_budget) check_envelope(v.weights, v.iter);
                });
            total_iters += static_cast<std::int64_t>(res.iterations);

            bool window_ok = true;
            std::optional<std::size_t> crossing;
            for (const auto& rec : res.records) {
                if (rec.iter <= proof_budget) {
                    min_window_loss = std::min(min_window_loss, rec.loss);
                    if (rec.loss < 0.125) window_ok = false;
                }
                if (!crossing && rec.loss < 0.125) crossing = rec.iter;
            }
            if (crossing) {
                crossings.push_back(static_cast<double>(*crossing));
            } else {
                ++never_crossed;
            }
            if (in_hypothesis && !envelope_ok) ++envelope_violations;
            if (window_ok) ++loss_passes;
        }
        const int in_hypothesis_seeds = options.seeds - out_of_hypothesis;
        const double fraction = static_cast<double>(loss_passes) / options.seeds;
        r.measured[key(prefix, "pass_fraction")] = fraction;
        r.measured[key(prefix, "in_hypothesis_seeds")] = in_hypothesis_seeds;
        r.measured[key(prefix, "all_block_out_of_hypothesis")] = all_block_out;
        r.measured[key(prefix, "proof_budget")] = static_cast<double>(proof_budget);
        r.measured[key(prefix, "out_of_hypothesis")] = out_of_hypothesis;
        r.measured[key(prefix, "envelope_violations")] = envelope_violations;
        r.measured[key(prefix, "min_loss_in_budget")] = min_window_loss;
        r.measured[key(prefix, "max_envelope_ratio")] = max_envelope_ratio;
        r.measured[key(prefix, "max_init_alignment")] = max_init_alignment;
        r.measured[key(prefix, "init_alignment_bound")] = init_bound;
        r.measured[key(prefix, "median_loss_crossing_iter")] = median(crossings);
        r.measured[key(prefix, "runs_never_crossing")] = never_crossed;
        r.measured[key(prefix, "extended_horizon")] = static_cast<double>(options.extended_horizon);
        r.measured[key(prefix, "d^(k/4)")] = std::pow(static_cast<double>(d), k / 4.0);
        if (fraction < options.pass_fraction || envelope_violations > 0 || in_hypothesis_seeds == 0) {
            all_pass = false;
        }
    }
    r.measured["pass_fraction_threshold"] = options.pass_fraction;
    r.measured["seeds"] = options.seeds;
    r.budget = total_iters;
    r.passed = all_pass && options.seeds >= 20;
    return r;
}

CheckReport check_parity_ws_converges(std::uint64_t seed, const WsConvergeOptions& options) {
    CheckReport r;
    r.check_id = "parity_ws_converges";
    r.seed = seed;
    bool all_pass = true;
    std::int64_t total_iters = 0;
    for (int k : options.ks) {
        const std::string prefix = "k" + std::to_string(k);
        std::mt19937_64 rng(derive_seed(seed, kWsConvergeStream * 1000 + static_cast<std::uint64_t>(k)));
        const ParityParams params =
            ParityParams::make(k, nondegenerate_teacher(k, random_direction(options.d, rng)));
        const RealVector& u0 = params.u0;
        const double u_norm = u0.norm();
        const ModelSpec model = ModelSpec::parity_model(params, Arch::WS, ParityMode::OnePlusK);
        const double eta = phase2_step(options.eps, k, options.eta_multiplier);
        const auto budget = static_cast<std::size_t>(
            std::ceil(options.budget_multiplier * std::pow(k / options.eps, 3)));
        const double eps_angle = angle_precondition(options.eps, u_norm);

        int violations = 0;
        double max_increase = 0.0;
        double min_ratio = std::numeric_limits<double>::infinity();
        std::size_t max_precondition_iter = 0;
        int precondition_missed = 0;
        double max_final_dist = 0.0;
        std::size_t max_iters = 0;
        int seeds_passed = 0;
        for (int s = 0; s < options.seeds; ++s) {
            RealVector init;
            if (options.aligned_init) {
                init = 0.5 * u0;
            } else {
                do {
                    init = random_direction(options.d, rng);
                } while (init.dot(u0) == 0.0);
                if (init.dot(u0) < 0.0) init = -init;
            }

            RealVector prev = init;
            double prev_alpha = angle_between(init, u0);
            std::optional<std::size_t> reached;
            if (prev_alpha < eps_angle) reached = 0;
            int run_violations = 0;
            double run_min_ratio = std::numeric_limits<double>::infinity();
            auto observer = [&](const StepView& v) {
                // v.gradient was evaluated at prev.
                if (prev_alpha < eps_angle) {
                    const RealVector diff = prev - u0;
                    const double dn2 = diff.squaredNorm();
                    if (dn2 > 0.0) run_min_ratio = std::min(run_min_ratio, diff.dot(v.gradient) / dn2);
                }
                const double alpha = angle_between(v.weights, u0);
                const double increase = alpha - prev_alpha;
                max_increase = std::max(max_increase, increase);
                if (increase > options.angle_rounding) ++run_violations;
                if (!reached && alpha < eps_angle) reached = v.iter;
                prev = v.weights;
                prev_alpha = alpha;
            };
            GdConfig cfg;
            cfg.step.constant = eta;
            cfg.max_iters = budget;
            cfg.projection_radius = u_norm;
            cfg.stop_tolerance = options.eps;
            cfg.grad_tolerance = 0.0;
            cfg.record_every = budget;
            const GdResult res = gd_run(model, init, cfg, observer);
            total_iters += static_cast<std::int64_t>(res.iterations);
            max_iters = std::max(max_iters, res.iterations);

            const double final_dist = (res.final_weights - u0).norm();
            max_final_dist = std::max(max_final_dist, final_dist);
            violations += run_violations;
            min_ratio = std::min(min_ratio, run_min_ratio);
            if (reached) {
                max_precondition_iter = std::max(max_precondition_iter, *reached);
            } else {
                ++precondition_missed;
            }
            const bool ok = run_violations == 0 && reached && final_dist <= options.eps &&
                            !(run_min_ratio <= 0.0);
            if (ok) ++seeds_passed;
        }

        // Correlation battery: random points inside the angle cone and the
        // projection ball.
        double battery_min = std::numeric_limits<double>::infinity();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < options.correlation_samples; ++i) {
            const RealVector e1 = u0 / u_norm;
            RealVector perp = random_direction(options.d, rng);
            perp -= perp.dot(e1) * e1;
            perp.normalize();
            const double angle = eps_angle * unit(rng);
            const double norm = u_norm * (0.1 + 0.9 * unit(rng));
            const RealVector w = norm * (std::cos(angle) * e1 + std::sin(angle) * perp);
            const RealVector diff = w - u0;
            const double dn2 = diff.squaredNorm();
            if (dn2 == 0.0) continue;
            battery_min = std::min(battery_min, diff.dot(model.gradient(w)) / dn2);
        }

        const double kappa = k * std::min(min_ratio, battery_min);
        r.measured[key(prefix, "eta")] = eta;
        r.measured[key(prefix, "budget")] = static_cast<double>(budget);
        r.measured[key(prefix, "eps_angle")] = eps_angle;
        r.measured[key(prefix, "angle_violations")] = violations;
        r.measured[key(prefix, "max_angle_increase")] = max_increase;
        r.measured[key(prefix, "max_precondition_iter")] = static_cast<double>(max_precondition_iter);
        r.measured[key(prefix, "precondition_missed")] = precondition_missed;
        r.measured[key(prefix, "trajectory_min_correlation")] = min_ratio;
        r.measured[key(prefix, "battery_min_correlation")] = battery_min;
        r.measured[key(prefix, "kappa")] = kappa;
        r.measured[key(prefix, "max_final_dist")] = max_final_dist;
        r.measured[key(prefix, "max_iterations")] = static_cast<double>(max_iters);
        r.measured[key(prefix, "seeds_passed")] = seeds_passed;
        if (seeds_passed != options.seeds || !(kappa > 0.0)) all_pass = false;
    }
    r.measured["eps"] = options.eps;
    r.measured["angle_rounding"] = options.angle_rounding;
    r.measured["seeds"] = options.seeds;
    r.budget = total_iters;
    r.passed = all_pass;
    return r;
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"identities", "cosine_ws", "cosine_fc_ring", "parity_fc_stuck",
                                                "parity_ws_converges"};
    return names;
}

CheckReport run_check(const std::string& name, std::uint64_t seed) {
    if (name == "identities") return check_identities(seed);
    if (name == "cosine_ws") return check_cosine_ws(seed);
    if (name == "cosine_fc_ring") return check_cosine_fc_ring(seed);
    if (name == "parity_fc_stuck") return check_parity_fc_stuck(seed);
    if (name == "parity_ws_converges") return check_parity_ws_converges(seed);
    throw ContractError("unknown check '" + name + "'");
}

std::vector<CheckReport> run_all_checks(std::uint64_t seed) {
    std::vector<std::future<CheckReport>> futures;
    for (const auto& name : check_names()) {
        futures.push_back(std::async(std::launch::async, [name, seed] { return run_check(name, seed); }));
    }
    std::vector<CheckReport> out;
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

}  // namespace convsep
