#pragma once

// Numeric checks for the convergence and hardness statements. Each check is
// deterministic in its seed and reports every quantity its predicate uses.

#include "convsep/optimizer.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace convsep {

struct CheckReport {
    std::string check_id;
    bool passed = false;
    std::map<std::string, double> measured;
    /// Iterations or samples consumed.
    std::int64_t budget = 0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

struct IdentityOptions {
    int configurations = 1000;
    double tolerance = 1e-10;
    /// Negative control: perturbs the single-patch term of the decomposition.
    bool corrupt_single_term = false;
    /// Inputs per configuration for the symmetry identity.
    int inputs_per_config = 4;
};

struct CosineWsOptions {
    int points_per_k = 15;
    int k_min = 2;
    int k_max = 8;
    int d = 5;
    double eps = 1e-6;
    double tol = 1e-6;
};

struct CosineRingOptions {
    int k = 5;
    int d = 4;
    /// Teacher norms for the ring-gradient fit.
    std::vector<double> slope_norms{1.0, 1.5, 2.0, 2.5};
    /// Additional teacher norms used only for the loss-gap predicate.
    std::vector<double> gap_norms{3.2, 4.0};
    int samples_per_radius = 200;
    int inner_samples = 500;
    double slope_threshold = -0.05;
    double gap_threshold = 0.9;
    double gap_regime = 50.0;
};

struct FcStuckOptions {
    std::vector<int> dims{50, 30};
    int k = 3;
    int seeds = 20;
    double eta = 1.0;
    /// Rademacher magnitude; <= 0 selects 1/sqrt(d).
    double c = 0.0;
    double pass_fraction = 0.9;
    /// Horizon for the diagnostic run past the proof budget.
    std::size_t extended_horizon = 200;
    /// Negative control: every block starts at u0.
    bool adversarial_init = false;
};

struct WsConvergeOptions {
    std::vector<int> ks{2, 3, 4};
    int d = 8;
    int seeds = 10;
    double eps = 0.05;
    double eta_multiplier = 1000.0;
    /// Budget multiplier on (k/eps)^3.
    double budget_multiplier = 10.0;
    /// Floor below which an angle increase is treated as rounding.
    double angle_rounding = 1e-12;
    int correlation_samples = 200;
    /// Start every run at u0/2 instead of a random unit vector.
    bool aligned_init = false;
};

CheckReport check_identities(std::uint64_t seed, const IdentityOptions& options = {});
CheckReport check_cosine_ws(std::uint64_t seed, const CosineWsOptions& options = {});
CheckReport check_cosine_fc_ring(std::uint64_t seed, const CosineRingOptions& options = {});
CheckReport check_parity_fc_stuck(std::uint64_t seed, const FcStuckOptions& options = {});
CheckReport check_parity_ws_converges(std::uint64_t seed, const WsConvergeOptions& options = {});

/// F^(1,k) expanded from the squared sum, with the patch-mean factors taken by
/// quadrature; independent of the F^(1) + F^(k) split.
double parity_objective_expanded(const ParityWeights& weights, const ParityParams& params);

/// Proof budget floor((1 / (eta k)) d^(k/3 - 3)).
std::size_t fc_proof_budget(int d, int k, double eta);

/// d^(-1/3) + eta t d^(-(k-2)/3 + 2).
double alignment_envelope(int d, int k, double eta, std::size_t t);

/// min(atan(eps / (2|u0|)), sqrt(eps / |u0|)).
double angle_precondition(double eps, double u0_norm);

/// Every check with default options, run concurrently.
std::vector<CheckReport> run_all_checks(std::uint64_t seed);

/// Names accepted by run_check.
const std::vector<std::string>& check_names();
CheckReport run_check(const std::string& name, std::uint64_t seed);

}  // namespace convsep
