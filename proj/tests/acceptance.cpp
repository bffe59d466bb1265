// End-to-end acceptance run: one PASS/FAIL line per criterion, followed by the
// measured values it was judged on. Exit status is non-zero if any line fails.

#include "convsep/cosine_model.hpp"
#include "convsep/nets.hpp"
#include "convsep/optimizer.hpp"
#include "convsep/parity_model.hpp"
#include "convsep/report.hpp"
#include "convsep/theorems.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace convsep;

namespace {

struct Verdict {
    bool passed = false;
    std::string summary;
    std::vector<std::string> details;
};

std::string fmt(double v) { return format_double(v); }

// One Monte Carlo pass per case: every integrand is averaged over the same
// draws, so the battery costs one Gaussian stream per case.
struct Welford {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void push(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    KernelEstimate estimate() const {
        return {mean, std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)), n};
    }
};

struct KernelCase {
    RealVector u;
    RealVector v;
    std::vector<double> closed;  // v_sigma, cos mean, cos squared diff, self along u, cross along each basis vector
    std::vector<RealVector> basis;
};

KernelCase make_case(int d, std::mt19937_64& rng, std::uniform_real_distribution<double>& scale) {
    KernelCase c;
    c.u = scale(rng) * random_direction(d, rng);
    c.v = scale(rng) * random_direction(d, rng);
    // cross_term lies in span{u, v}: compare both coordinates in an orthonormal basis.
    const RealVector e1 = c.v.normalized();
    const RealVector rest = c.u - c.u.dot(e1) * e1;
    c.basis.push_back(e1);
    if (rest.norm() > 1e-8) c.basis.push_back(rest.normalized());
    // self_term is parallel to its argument, so its component along u carries all of it.
    c.closed = {v_sigma(c.u, c.v), cos_gaussian_mean(c.u), cos_squared_diff_mean(c.u, c.v),
                self_term(c.u).dot(c.u.normalized())};
    const RealVector b = cross_term(c.u, c.v);
    for (const RealVector& e : c.basis) c.closed.push_back(b.dot(e));
    return c;
}

std::vector<KernelEstimate> estimate_case(const KernelCase& c, std::int64_t n, std::uint64_t seed) {
    const auto d = c.u.size();
    const RealVector un = c.u.normalized();
    std::vector<Welford> acc(c.closed.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    RealVector x(d);
    for (std::int64_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x[j] = normal(rng);
        const double a = c.u.dot(x);
        const double b = c.v.dot(x);
        const double ea = std::erf(a);
        const double eb = std::erf(b);
        const double diff = std::cos(a) - std::cos(b);
        const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
        acc[0].push(ea * eb);
        acc[1].push(std::cos(a));
        acc[2].push(diff * diff);
        acc[3].push(ea * two_over_sqrt_pi * std::exp(-a * a) * un.dot(x));
        const double lean = ea * two_over_sqrt_pi * std::exp(-b * b);
        for (std::size_t e = 0; e < c.basis.size(); ++e) acc[4 + e].push(lean * c.basis[e].dot(x));
    }
    std::vector<KernelEstimate> out;
    for (const Welford& w : acc) out.push_back(w.estimate());
    return out;
}

double z_score(double closed, const KernelEstimate& est) {
    return std::abs(closed - est.value) / std::max(est.std_error, 1e-300);
}

Verdict kernel_correctness() {
    constexpr int kCases = 100;
    constexpr std::int64_t kSamples = 1000000;
    const std::vector<std::string> names{"v_sigma", "cos_gaussian_mean", "cos_squared_diff_mean", "self_term",
                                         "cross_term"};
    std::mt19937_64 rng(20240101);
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_real_distribution<double> scale(0.2, 2.0);

    std::vector<int> comparisons(names.size(), 0);
    std::vector<int> outside(names.size(), 0);
    std::vector<double> max_z(names.size(), 0.0);
    std::vector<std::string> retests;
    bool retests_clean = true;
    int total = 0;
    int total_outside = 0;
    for (int c = 0; c < kCases; ++c) {
        const KernelCase kc = make_case(dim(rng), rng, scale);
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(c);
        const std::vector<KernelEstimate> est = estimate_case(kc, kSamples, seed);
        std::vector<KernelEstimate> again;
        for (std::size_t q = 0; q < est.size(); ++q) {
            const std::size_t name = std::min<std::size_t>(q, 4);
            const double z = z_score(kc.closed[q], est[q]);
            ++comparisons[name];
            ++total;
            max_z[name] = std::max(max_z[name], z);
            if (oracle::within_se(kc.closed[q], est[q].value, est[q].std_error)) continue;
            ++outside[name];
            ++total_outside;
            // A biased closed form stays outside on an independent stream.
            if (again.empty()) again = estimate_case(kc, kSamples, derive_seed(seed, 7));
            const double z2 = z_score(kc.closed[q], again[q]);
            const bool ok = oracle::within_se(kc.closed[q], again[q].value, again[q].std_error);
            retests_clean = retests_clean && ok;
            retests.push_back("retest case " + std::to_string(c) + " " + names[name] + ": |z| " + fmt(z) +
                              " -> " + fmt(z2) + (ok ? "" : " (still outside)"));
        }
    }

    // Upper tail of the exceedance count for an exact closed form.
    const double p = std::erfc(3.0 / std::numbers::sqrt2);
    double tail = 0.0;
    double term = std::pow(1.0 - p, total);
    for (int m = 0; m <= total; ++m) {
        if (m >= total_outside) tail += term;
        term *= (total - m) * p / ((m + 1) * (1.0 - p));
    }

    Verdict out;
    for (std::size_t q = 0; q < names.size(); ++q) {
        out.details.push_back(names[q] + ": " + std::to_string(outside[q]) + " of " + std::to_string(comparisons[q]) +
                              " outside 3 SE, max |z| = " + fmt(max_z[q]));
    }
    out.details.push_back("expected exceedances for an exact closed form: " + fmt(total * p) +
                          ", P(count >= observed) = " + fmt(tail));
    out.details.insert(out.details.end(), retests.begin(), retests.end());
    out.passed = retests_clean && tail >= 1e-3;
    out.summary = std::to_string(total - total_outside) + "/" + std::to_string(total) +
                  " comparisons within 3 SE at n = 1e6; exceedances retested on a fresh stream";
    return out;
}

Verdict gradient_correctness() {
    constexpr int kConfigs = 50;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_int_distribution<int> patches(2, 5);
    double worst_cos = 0.0, worst_par = 0.0, worst_ws = 0.0, worst_net = 0.0;
    for (int c = 0; c < kConfigs; ++c) {
        const int d = dim(rng);
        const int k = patches(rng);
        {
            const CosineParams p = CosineParams::make(k, gaussian_vector(d, rng));
            const Arch arch = c % 2 ? Arch::WS : Arch::FC;
            const RealVector w = 0.8 * gaussian_vector(arch == Arch::WS ? d : d * k, rng);
            const RealVector fd = oracle::central_difference(
                [&](const RealVector& v) { return cosine_objective({arch, v}, p); }, w, 1e-5);
            worst_cos = std::max(worst_cos, oracle::relative_error(cosine_gradient({arch, w}, p), fd));
        }
        const ParityMode mode = c % 2 ? ParityMode::OnePlusK : ParityMode::KOnly;
        const ParityParams pp = ParityParams::make(k, 1.2 * gaussian_vector(d, rng));
        {
            const RealVector w = 0.8 * gaussian_vector(d * k, rng);
            const RealVector fd = oracle::central_difference(
                [&](const RealVector& s) { return parity_objective(ParityWeights::fc_from_stacked(s, k), pp, mode); },
                w, 1e-6);
            const RealVector g = parity_gradient(ParityWeights::fc_from_stacked(w, k), pp, mode).stacked_gradient();
            worst_par = std::max(worst_par, oracle::relative_error(g, fd));
        }
        {
            const RealVector w0 = 0.8 * gaussian_vector(d, rng);
            const RealVector fd = oracle::central_difference(
                [&](const RealVector& v) { return parity_objective(ParityWeights::ws(v), pp, mode); }, w0, 1e-6);
            worst_ws = std::max(worst_ws, oracle::relative_error(ws_gradient(w0, pp, mode), fd));
        }
        {
            const int nk = 5;
            const Arch arch = c % 2 ? Arch::WS : Arch::FC;
            const HeadKind head = (c / 2) % 2 ? HeadKind::Learnable : HeadKind::Known;
            const GMode gm = static_cast<GMode>(c % 3);
            const TargetSpec target{gm, make_teacher(d, 3.0, rng())};
            const NetParams params = NetInit::make(arch, head, gm, nk, d, rng());
            const RealVector x = gaussian_vector(nk * d, rng);
            const double r = net_forward(params, x) - target_eval(target, x, nk);
            const RealVector fd = oracle::central_difference(
                [&](const RealVector& t) {
                    NetParams q = params;
                    assign_params(q, t);
                    const double rr = net_forward(q, x) - target_eval(target, x, nk);
                    return 0.5 * rr * rr;
                },
                flatten_params(params), 1e-6);
            worst_net = std::max(worst_net, oracle::relative_error(net_backward(params, x, r).flatten(), fd));
        }
    }
    Verdict out;
    out.passed = worst_cos < 1e-5 && worst_par < 1e-5 && worst_ws < 1e-5 && worst_net < 1e-4;
    out.summary = "max relative error over 50 configs each";
    out.details = {"cosine_gradient: " + fmt(worst_cos) + " (< 1e-5)",
                   "parity_gradient: " + fmt(worst_par) + " (< 1e-5)",
                   "ws_gradient: " + fmt(worst_ws) + " (< 1e-5)",
                   "net_backward: " + fmt(worst_net) + " (< 1e-4)"};
    return out;
}

Verdict from_check(const CheckReport& r, const std::vector<std::string>& keys, std::string summary) {
    Verdict out;
    out.passed = r.passed;
    out.summary = std::move(summary);
    for (const std::string& key : keys) {
        const auto it = r.measured.find(key);
        out.details.push_back(key + " = " + (it == r.measured.end() ? std::string("(missing)") : fmt(it->second)));
    }
    return out;
}

Verdict cosine_ws_convergence(std::uint64_t seed) {
    const CheckReport r = check_cosine_ws(seed);
    return from_check(r,
                      {"points", "min_lambda_margin", "max_condition_ratio", "max_iterations_minus_bound",
                       "gd_failures", "max_spectral_bound_violation"},
                      "Hessian spectrum and GD iteration bound, k = 2..8");
}

Verdict cosine_ring(std::uint64_t seed) {
    const CheckReport r = check_cosine_fc_ring(seed);
    std::vector<std::string> keys;
    for (const auto& [key, value] : r.measured) keys.push_back(key);
    return from_check(r, keys, "ring gradient decays with k|u0|^2; loss gap inside the ball");
}

Verdict non_degeneracy() {
    Verdict out;
    out.passed = true;
    for (int k = 2; k <= 6; ++k) {
        const NonDegeneracy f = nondegeneracy_floor(k);
        const double t = 12.0 * k * k / (std::numbers::pi * std::numbers::pi);
        const double direct = 2.0 / std::numbers::pi * std::asin(2.0 * t / (1.0 + 2.0 * t));
        const bool ok = f.kernel_value > 1.0 - 1.0 / k && f.verified_second_moment > 0.25 &&
                        std::abs(direct - f.kernel_value) < 1e-15;
        out.passed = out.passed && ok;
        out.details.push_back("k=" + std::to_string(k) + ": V = " + fmt(f.kernel_value) + " > " +
                              fmt(1.0 - 1.0 / k) + ", V^k = " + fmt(f.verified_second_moment) + " > 0.25");
    }
    out.summary = "k = 2..6 at |u0|^2 = 12k^2/pi^2";
    return out;
}

Verdict fc_stuck(std::uint64_t seed) {
    FcStuckOptions opt;
    opt.dims = {50};
    const CheckReport r = check_parity_fc_stuck(seed, opt);
    Verdict out = from_check(r,
                             {"d50.proof_budget", "d50.pass_fraction", "d50.envelope_violations",
                              "d50.in_hypothesis_seeds", "d50.out_of_hypothesis", "d50.max_envelope_ratio",
                              "d50.min_loss_in_budget", "d50.median_loss_crossing_iter", "d50.d^(k/4)"},
                             "d=50, k=3, eta=1, 20 seeds, Rademacher init");
    const double fraction = r.measured.at("d50.pass_fraction");
    out.summary += ": " + std::to_string(static_cast<int>(std::lround(fraction * 20))) + "/20 seeds keep loss >= 1/8";
    out.passed = r.passed && fraction * 20 >= 18 - 1e-9;
    return out;
}

Verdict ws_converges(std::uint64_t seed) {
    const CheckReport r = check_parity_ws_converges(seed);
    std::vector<std::string> keys;
    for (int k : {2, 3, 4}) {
        for (const char* suffix : {".seeds_passed", ".angle_violations", ".precondition_missed",
                                   ".max_precondition_iter", ".max_iterations", ".budget", ".max_final_dist"}) {
            keys.push_back("k" + std::to_string(k) + suffix);
        }
    }
    return from_check(r, keys, "k = 2, 3, 4, eps = 0.05, 10 seeds each");
}

Verdict figure_separation(int seeds, std::uint64_t base_seed) {
    const int k = 10;
    const int d = 75;
    const RealVector u0 = make_teacher(d, 3.0, base_seed);
    const KernelEstimate b_both = target_second_moment(GMode::Both, u0, k, 1000000, derive_seed(base_seed, 91));
    const KernelEstimate b_high = target_second_moment(GMode::High, u0, k, 1000000, derive_seed(base_seed, 92));
    const double B = b_both.value;

    Verdict out;
    out.details.push_back("B = E[(g_both o h*)^2] = " + fmt(B) + " +- " + fmt(b_both.std_error));
    out.details.push_back("(informational) E[(g_high o h*)^2] = " + fmt(b_high.value) + " +- " +
                          fmt(b_high.std_error));
    bool all = true;
    for (HeadKind head : {HeadKind::Known, HeadKind::Learnable}) {
        for (GMode gm : {GMode::Low, GMode::High, GMode::Both}) {
            for (Arch arch : {Arch::WS, Arch::FC}) {
                std::vector<double> finals;
                std::vector<double> initials;
                for (int s = 0; s < seeds; ++s) {
                    SgdConfig cfg;
                    cfg.arch = arch;
                    cfg.gmode = gm;
                    cfg.head = head;
                    cfg.seed = base_seed + static_cast<std::uint64_t>(s);
                    const TrainResult r = sgd_train(cfg);
                    finals.push_back(r.final_loss);
                    initials.push_back(r.initial_loss);
                }
                std::sort(finals.begin(), finals.end());
                std::sort(initials.begin(), initials.end());
                const double median = finals[finals.size() / 2];
                const double median_init = initials[initials.size() / 2];
                std::string rule;
                bool ok = false;
                if (gm == GMode::Low) {
                    ok = median < 0.1 * B;
                    rule = "< 0.1 B";
                } else if (gm == GMode::High) {
                    ok = median >= 0.6 * B;
                    rule = ">= 0.6 B";
                } else if (arch == Arch::WS) {
                    ok = median < 0.1 * B;
                    rule = "< 0.1 B";
                } else {
                    ok = median >= 0.3 * B;
                    rule = ">= 0.3 B";
                }
                all = all && ok;
                out.details.push_back(std::string(ok ? "ok   " : "MISS ") + to_string(head) + "/" + to_string(gm) +
                                      "/" + to_string(arch) + ": median final " + fmt(median) + " = " +
                                      fmt(median / B) + " B (rule " + rule + "), " + fmt(median / b_high.value) +
                                      " x high-mode moment, median initial " + fmt(median_init));
            }
        }
    }
    out.passed = all;
    out.summary = "median over " + std::to_string(seeds) + " seeds, 12 cells, d=75, k=10, eta=0.5, batch 128, 3000 iters";
    return out;
}

Verdict identity_suite(std::uint64_t seed) {
    const CheckReport good = check_identities(seed);
    IdentityOptions corrupt;
    corrupt.corrupt_single_term = true;
    const CheckReport bad = check_identities(seed, corrupt);

    // The negation identity does not extend to the sum predictor with an even
    // number of patches; the check has to see that.
    std::mt19937_64 rng(derive_seed(seed, 55));
    const int k = 2;
    const int d = 3;
    double sum_predictor_deviation = 0.0;
    for (int i = 0; i < 200; ++i) {
        const ParityWeights w = ParityWeights::fc({gaussian_vector(d, rng), gaussian_vector(d, rng)});
        const ParityWeights wp = ParityWeights::fc({gaussian_vector(d, rng), gaussian_vector(d, rng)});
        const RealVector x = gaussian_vector(k * d, rng);
        const RealVector neg = -x;
        const RealVector lhs =
            parity_predict(w, x, k, ParityMode::OnePlusK) * parity_predictor_gradient(wp, x, k);
        const RealVector rhs =
            parity_predict(w, neg, k, ParityMode::OnePlusK) * parity_predictor_gradient(wp, neg, k);
        sum_predictor_deviation = std::max(sum_predictor_deviation, (lhs - rhs).lpNorm<Eigen::Infinity>());
    }

    Verdict out = from_check(good,
                             {"configurations", "max_decomposition_residual", "max_implementation_residual",
                              "max_symmetry_deviation"},
                             "decomposition and negation identities below 1e-10; controls fail");
    out.details.push_back("corrupted single-patch term: check " + std::string(bad.passed ? "PASSED (bad)" : "failed") +
                          ", residual " + fmt(bad.measured.at("max_decomposition_residual")));
    out.details.push_back("sum predictor with k=2: max negation deviation " + fmt(sum_predictor_deviation));
    out.passed = good.passed && !bad.passed && sum_predictor_deviation > 1e-3;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    std::uint64_t seed = 0;
    int figure_seeds = 5;
    app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 9));
    app.add_option("--seed", seed, "base seed");
    app.add_option("--figure-seeds", figure_seeds, "seeds per cell for criterion 8")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    const std::set<int> selected(only.begin(), only.end());

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"kernel correctness", [] { return kernel_correctness(); }},
        {"gradient correctness", [] { return gradient_correctness(); }},
        {"cosine WS convergence", [&] { return cosine_ws_convergence(seed); }},
        {"cosine FC ring signature", [&] { return cosine_ring(seed); }},
        {"non-degeneracy", [] { return non_degeneracy(); }},
        {"FC parity hardness", [&] { return fc_stuck(seed); }},
        {"WS parity convergence", [&] { return ws_converges(seed); }},
        {"architecture separation", [&] { return figure_separation(figure_seeds, seed); }},
        {"identity suite", [&] { return identity_suite(seed); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.passed = false;
            v.summary = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.passed ? "PASS" : "FAIL", id, criteria[i].first,
                    v.summary.c_str(), secs);
        for (const std::string& line : v.details) std::printf("    %s\n", line.c_str());
        std::fflush(stdout);
        if (!v.passed) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
