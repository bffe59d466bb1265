#pragma once

// Teacher-student SGD on k patches: a tanh first layer with either one shared
// filter (WS) or one filter per patch (FC), followed by a fixed target head
// g* or a learnable FC-50 / ReLU / FC-1 head.

#include "convsep/cosine_model.hpp"
#include "convsep/kernel.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace convsep {

enum class GMode { Low, High, Both };
enum class HeadKind { Known, Learnable };

const char* to_string(GMode mode);
const char* to_string(HeadKind head);
GMode gmode_from_string(const std::string& name);
HeadKind head_from_string(const std::string& name);

/// Number of leading patches in the high-frequency product.
inline constexpr int kHighOrder = 5;
inline constexpr int kHiddenUnits = 50;

/// n examples, each k patches of dimension d, stored patch-major.
struct PatchDataset {
    int n = 0;
    int k = 0;
    int d = 0;
    std::vector<double> values;
    std::string source;

    Eigen::Map<const RealVector> example(int i) const;
};

PatchDataset sample_gaussian_batch(int n, int k, int d, std::uint64_t seed);

/// Reads the patch CSV format: a `#k=<k>,d=<d>` header line, then one example
/// per row with k*d comma-separated floats in patch-major order. Each patch is
/// mean-centred. Throws ParseError naming the row on malformed input.
PatchDataset load_patch_file(const std::filesystem::path& path);

struct TargetSpec {
    GMode gmode = GMode::Both;
    RealVector u0;

    void validate(int k) const;
};

/// g*(z) with z_i = tanh(u0.x_i).
double target_eval(const TargetSpec& spec, const RealVector& x, int k);

/// g* applied to a feature vector z.
double g_star(GMode mode, const RealVector& z);

struct NetParams {
    Arch arch = Arch::WS;
    int k = 1;
    int d = 1;
    /// One filter for WS, k filters for FC.
    std::vector<RealVector> conv;
    HeadKind head = HeadKind::Known;
    GMode gmode = GMode::Both;  // used by the known head
    Matrix w1;                  // kHiddenUnits x k
    RealVector b1;              // kHiddenUnits
    RealVector w2;              // kHiddenUnits
    double b2 = 0.0;

    const RealVector& filter(int l) const { return arch == Arch::WS ? conv.front() : conv[l]; }
    void validate() const;
};

/// Gradient with the same layout as NetParams (head entries empty / zero for
/// a known head).
struct NetGradient {
    std::vector<RealVector> conv;
    Matrix w1;
    RealVector b1;
    RealVector w2;
    double b2 = 0.0;

    NetGradient& operator+=(const NetGradient& other);
    NetGradient& operator*=(double s);
    /// Flattened in the order conv blocks, w1 (column-major), b1, w2, b2.
    RealVector flatten() const;
};

RealVector net_features(const NetParams& params, const RealVector& x);
double net_forward(const NetParams& params, const RealVector& x);

/// Gradient of (1/2)(net_forward(x) - target)^2 given residual = net_forward(x) - target.
NetGradient net_backward(const NetParams& params, const RealVector& x, double residual);

/// Flatten / unflatten trainable parameters in NetGradient::flatten order.
RealVector flatten_params(const NetParams& params);
void assign_params(NetParams& params, const RealVector& flat);

struct NetInit {
    /// Student filters i.i.d. N(0, 1/d) (expected squared norm 1); head entries
    /// uniform in +-1/sqrt(fan_in).
    static NetParams make(Arch arch, HeadKind head, GMode gmode, int k, int d, std::uint64_t seed);
};

struct SgdConfig {
    Arch arch = Arch::WS;
    GMode gmode = GMode::Both;
    HeadKind head = HeadKind::Known;
    int k = 10;
    int d = 75;
    double u0_norm = 3.0;
    double eta = 0.5;
    int batch = 128;
    int iters = 3000;
    std::uint64_t seed = 0;
    /// Empty for Gaussian data.
    std::optional<std::filesystem::path> data_file;
    /// Size of the evaluation set used for the initial/final loss.
    int eval_samples = 8192;

    void validate() const;
};

struct TrainResult {
    /// Minibatch mean squared error before each update, plus the final state
    /// on a fresh batch: iters + 1 entries.
    std::vector<double> loss_curve;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    NetParams final_params;
    RealVector u0;
};

/// Minibatch SGD on the mean squared error. Gaussian data draws a fresh batch
/// every step; file data cycles through the dataset in order.
TrainResult sgd_train(const SgdConfig& config);

/// Teacher filter: standard Gaussian direction rescaled to `norm`.
RealVector make_teacher(int d, double norm, std::uint64_t seed);

/// Monte Carlo estimate of E[(g*(h*(x)))^2] over Gaussian patches.
KernelEstimate target_second_moment(GMode mode, const RealVector& u0, int k, std::int64_t n,
                                    std::uint64_t seed);

/// Mean squared error of the net over a dataset.
double dataset_mse(const NetParams& params, const TargetSpec& target, const PatchDataset& data);

}  // namespace convsep
