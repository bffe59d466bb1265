#include "convsep/nets.hpp"

#include "convsep/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace convsep {

namespace {

enum SeedStream : std::uint64_t { kTeacherStream = 1, kInitStream = 2, kBatchStream = 3, kEvalStream = 4 };

double relu(double v) { return v > 0.0 ? v : 0.0; }

// Accumulates scale * d/dtheta (1/2)(f(x) - y)^2, with residual = f(x) - y.
void accumulate_backward(const NetParams& p, const RealVector& x, double residual, double scale,
                         NetGradient& acc) {
    const int k = p.k;
    const int d = p.d;
    RealVector z(k);
    for (int l = 0; l < k; ++l) z[l] = std::tanh(p.filter(l).dot(x.segment(l * d, d)));

    // d out / d z
    RealVector dz = RealVector::Zero(k);
    const double r = residual * scale;
    if (p.head == HeadKind::Known) {
        if (p.gmode != GMode::High) dz[0] += 1.0;
        if (p.gmode != GMode::Low) {
            for (int i = 0; i < kHighOrder; ++i) {
                double others = 1.0;
                for (int j = 0; j < kHighOrder; ++j) {
                    if (j != i) others *= z[j];
                }
                dz[i] += others;
            }
        }
        dz *= r;
    } else {
        const RealVector pre = p.w1 * z + p.b1;
        RealVector dh(kHiddenUnits);
        for (int h = 0; h < kHiddenUnits; ++h) {
            const double act = relu(pre[h]);
            acc.w2[h] += r * act;
            // Subgradient of ReLU at 0 is taken as 0.
            dh[h] = pre[h] > 0.0 ? r * p.w2[h] : 0.0;
        }
        acc.b2 += r;
        acc.w1.noalias() += dh * z.transpose();
        acc.b1 += dh;
        dz.noalias() = p.w1.transpose() * dh;
    }
    for (int l = 0; l < k; ++l) {
        const double coef = dz[l] * (1.0 - z[l] * z[l]);
        if (coef == 0.0) continue;
        RealVector& target = p.arch == Arch::WS ? acc.conv.front() : acc.conv[l];
        target.noalias() += coef * x.segment(l * d, d);
    }
}

NetGradient zero_gradient(const NetParams& p) {
    NetGradient g;
    for (const auto& c : p.conv) g.conv.push_back(RealVector::Zero(c.size()));
    if (p.head == HeadKind::Learnable) {
        g.w1 = Matrix::Zero(p.w1.rows(), p.w1.cols());
        g.b1 = RealVector::Zero(p.b1.size());
        g.w2 = RealVector::Zero(p.w2.size());
    }
    return g;
}

void apply_step(NetParams& p, const NetGradient& g, double eta) {
    for (std::size_t i = 0; i < p.conv.size(); ++i) p.conv[i] -= eta * g.conv[i];
    if (p.head == HeadKind::Learnable) {
        p.w1 -= eta * g.w1;
        p.b1 -= eta * g.b1;
        p.w2 -= eta * g.w2;
        p.b2 -= eta * g.b2;
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(GMode mode) {
    switch (mode) {
        case GMode::Low: return "low";
        case GMode::High: return "high";
        case GMode::Both: return "both";
    }
    return "unknown";
}

const char* to_string(HeadKind head) {
    return head == HeadKind::Known ? "known" : "learnable";
}

GMode gmode_from_string(const std::string& name) {
    if (name == "low") return GMode::Low;
    if (name == "high") return GMode::High;
    if (name == "both") return GMode::Both;
    throw ContractError("unknown gmode '" + name + "' (expected low, high or both)");
}

HeadKind head_from_string(const std::string& name) {
    if (name == "known") return HeadKind::Known;
    if (name == "learnable" || name == "unknown") return HeadKind::Learnable;
    throw ContractError("unknown head '" + name + "' (expected known or learnable)");
}

Eigen::Map<const RealVector> PatchDataset::example(int i) const {
    const std::size_t stride = static_cast<std::size_t>(k) * d;
    return Eigen::Map<const RealVector>(values.data() + stride * i, static_cast<Eigen::Index>(stride));
}

PatchDataset sample_gaussian_batch(int n, int k, int d, std::uint64_t seed) {
    if (n < 1 || k < 1 || d < 1) throw ContractError("sample_gaussian_batch: n, k, d must be >= 1");
    PatchDataset ds;
    ds.n = n;
    ds.k = k;
    ds.d = d;
    ds.source = "gaussian(" + std::to_string(seed) + ")";
    ds.values.resize(static_cast<std::size_t>(n) * k * d);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : ds.values) v = normal(rng);
    return ds;
}

PatchDataset load_patch_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open patch file '" + path.string() + "'");
    std::string line;
    int k = 0;
    int d = 0;
    std::size_t line_no = 0;
    std::size_t row = 0;
    bool have_header = false;
    PatchDataset ds;
    ds.source = "file(" + path.string() + ")";
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (!have_header) {
            if (std::sscanf(line.c_str(), "#k=%d,d=%d", &k, &d) != 2 || k < 1 || d < 1) {
                throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                                 ": expected header '#k=<k>,d=<d>'");
            }
            have_header = true;
            continue;
        }
        ++row;
        const std::string where =
            path.string() + ": line " + std::to_string(line_no) + " (data row " + std::to_string(row) + ")";
        const std::size_t expected = static_cast<std::size_t>(k) * d;
        std::vector<double> fields;
        fields.reserve(expected);
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell = trim(cell);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
                throw ParseError(where + ": non-numeric field '" + cell + "'");
            }
            fields.push_back(v);
        }
        if (fields.size() != expected) {
            throw ParseError(where + ": expected " + std::to_string(expected) + " fields, got " +
                             std::to_string(fields.size()));
        }
        for (int l = 0; l < k; ++l) {
            auto first = fields.begin() + static_cast<std::ptrdiff_t>(l) * d;
            double mean = 0.0;
            for (int i = 0; i < d; ++i) mean += first[i];
            mean /= d;
            for (int i = 0; i < d; ++i) first[i] -= mean;
        }
        ds.values.insert(ds.values.end(), fields.begin(), fields.end());
        ++ds.n;
    }
    if (!have_header) throw ParseError(path.string() + ": missing '#k=<k>,d=<d>' header");
    if (ds.n == 0) throw ParseError(path.string() + ": no data rows");
    ds.k = k;
    ds.d = d;
    return ds;
}

void TargetSpec::validate(int k) const {
    if (gmode != GMode::Low && k < kHighOrder) throw ContractError("high mode requires k ≥ 5");
    if (u0.size() < 1) throw ContractError("target: u0 must be non-empty");
}

double g_star(GMode mode, const RealVector& z) {
    double out = 0.0;
    if (mode != GMode::High) out += z[0];
    if (mode != GMode::Low) {
        double prod = 1.0;
        for (int i = 0; i < kHighOrder; ++i) prod *= z[i];
        out += prod;
    }
    return out;
}

double target_eval(const TargetSpec& spec, const RealVector& x, int k) {
    spec.validate(k);
    const Eigen::Index d = spec.u0.size();
    if (x.size() != d * k) throw ContractError("target_eval: input dimension mismatch");
    RealVector z(k);
    for (int l = 0; l < k; ++l) z[l] = std::tanh(spec.u0.dot(x.segment(l * d, d)));
    return g_star(spec.gmode, z);
}

void NetParams::validate() const {
    if (k < 1 || d < 1) throw ContractError("NetParams: k and d must be >= 1");
    const std::size_t blocks = arch == Arch::WS ? 1 : static_cast<std::size_t>(k);
    if (conv.size() != blocks) throw ContractError("NetParams: wrong number of filters");
    for (const auto& c : conv) {
        if (c.size() != d) throw ContractError("NetParams: filter dimension mismatch");
    }
    if (head == HeadKind::Known) {
        if (gmode != GMode::Low && k < kHighOrder) throw ContractError("high mode requires k ≥ 5");
    } else if (w1.rows() != kHiddenUnits || w1.cols() != k || b1.size() != kHiddenUnits ||
               w2.size() != kHiddenUnits) {
        throw ContractError("NetParams: learnable head has wrong shape");
    }
}

NetGradient& NetGradient::operator+=(const NetGradient& other) {
    for (std::size_t i = 0; i < conv.size(); ++i) conv[i] += other.conv[i];
    if (w1.size() > 0) {
        w1 += other.w1;
        b1 += other.b1;
        w2 += other.w2;
    }
    b2 += other.b2;
    return *this;
}

NetGradient& NetGradient::operator*=(double s) {
    for (auto& c : conv) c *= s;
    w1 *= s;
    b1 *= s;
    w2 *= s;
    b2 *= s;
    return *this;
}

RealVector NetGradient::flatten() const {
    Eigen::Index n = 0;
    for (const auto& c : conv) n += c.size();
    const bool learnable = w1.size() > 0;
    if (learnable) n += w1.size() + b1.size() + w2.size() + 1;
    RealVector out(n);
    Eigen::Index at = 0;
    for (const auto& c : conv) {
        out.segment(at, c.size()) = c;
        at += c.size();
    }
    if (learnable) {
        out.segment(at, w1.size()) = Eigen::Map<const RealVector>(w1.data(), w1.size());
        at += w1.size();
        out.segment(at, b1.size()) = b1;
        at += b1.size();
        out.segment(at, w2.size()) = w2;
        at += w2.size();
        out[at] = b2;
    }
    return out;
}

RealVector net_features(const NetParams& params, const RealVector& x) {
    const Eigen::Index d = params.d;
    if (x.size() != d * params.k) throw ContractError("net_features: input dimension mismatch");
    RealVector z(params.k);
    for (int l = 0; l < params.k; ++l) z[l] = std::tanh(params.filter(l).dot(x.segment(l * d, d)));
    return z;
}

double net_forward(const NetParams& params, const RealVector& x) {
    const RealVector z = net_features(params, x);
    if (params.head == HeadKind::Known) return g_star(params.gmode, z);
    const RealVector pre = params.w1 * z + params.b1;
    return params.w2.dot(pre.unaryExpr([](double v) { return relu(v); })) + params.b2;
}

NetGradient net_backward(const NetParams& params, const RealVector& x, double residual) {
    if (x.size() != static_cast<Eigen::Index>(params.d) * params.k) {
        throw ContractError("net_backward: input dimension mismatch");
    }
    NetGradient g = zero_gradient(params);
    accumulate_backward(params, x, residual, 1.0, g);
    return g;
}

RealVector flatten_params(const NetParams& params) {
    NetGradient view;
    view.conv = params.conv;
    if (params.head == HeadKind::Learnable) {
        view.w1 = params.w1;
        view.b1 = params.b1;
        view.w2 = params.w2;
        view.b2 = params.b2;
    }
    return view.flatten();
}

void assign_params(NetParams& params, const RealVector& flat) {
    Eigen::Index at = 0;
    for (auto& c : params.conv) {
        c = flat.segment(at, c.size());
        at += c.size();
    }
    if (params.head == HeadKind::Learnable) {
        params.w1 = Eigen::Map<const Matrix>(flat.data() + at, params.w1.rows(), params.w1.cols());
        at += params.w1.size();
        params.b1 = flat.segment(at, params.b1.size());
        at += params.b1.size();
        params.w2 = flat.segment(at, params.w2.size());
        at += params.w2.size();
        params.b2 = flat[at];
        ++at;
    }
    if (at != flat.size()) throw ContractError("assign_params: size mismatch");
}

NetParams NetInit::make(Arch arch, HeadKind head, GMode gmode, int k, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    NetParams p;
    p.arch = arch;
    p.k = k;
    p.d = d;
    p.head = head;
    p.gmode = gmode;
    const int blocks = arch == Arch::WS ? 1 : k;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int l = 0; l < blocks; ++l) p.conv.push_back(scale * gaussian_vector(d, rng));
    if (head == HeadKind::Learnable) {
        auto uniform = [&rng](double bound) {
            return std::uniform_real_distribution<double>(-bound, bound)(rng);
        };
        const double bound1 = 1.0 / std::sqrt(static_cast<double>(k));
        const double bound2 = 1.0 / std::sqrt(static_cast<double>(kHiddenUnits));
        p.w1.resize(kHiddenUnits, k);
        for (Eigen::Index j = 0; j < p.w1.cols(); ++j) {
            for (Eigen::Index i = 0; i < p.w1.rows(); ++i) p.w1(i, j) = uniform(bound1);
        }
        p.b1.resize(kHiddenUnits);
        for (Eigen::Index i = 0; i < p.b1.size(); ++i) p.b1[i] = uniform(bound1);
        p.w2.resize(kHiddenUnits);
        for (Eigen::Index i = 0; i < p.w2.size(); ++i) p.w2[i] = uniform(bound2);
        p.b2 = uniform(bound2);
    }
    p.validate();
    return p;
}

void SgdConfig::validate() const {
    if (k < 1 || d < 1) throw ContractError("k and d must be >= 1");
    if (gmode != GMode::Low && k < kHighOrder) throw ContractError("high mode requires k ≥ 5");
    if (!(eta > 0.0)) throw ContractError("eta must be > 0");
    if (batch < 1) throw ContractError("batch must be >= 1");
    if (iters < 0) throw ContractError("iters must be >= 0");
    if (!(u0_norm > 0.0)) throw ContractError("u0_norm must be > 0");
    if (eval_samples < 1) throw ContractError("eval_samples must be >= 1");
}

RealVector make_teacher(int d, double norm, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return norm * random_direction(d, rng);
}

KernelEstimate target_second_moment(GMode mode, const RealVector& u0, int k, std::int64_t n,
                                    std::uint64_t seed) {
    const TargetSpec spec{mode, u0};
    spec.validate(k);
    return mc_expect(
        [&spec, k](const RealVector& x) {
            const double t = target_eval(spec, x, k);
            return t * t;
        },
        static_cast<int>(u0.size()) * k, n, seed);
}

double dataset_mse(const NetParams& params, const TargetSpec& target, const PatchDataset& data) {
    double acc = 0.0;
    for (int i = 0; i < data.n; ++i) {
        const RealVector x = data.example(i);
        const double r = net_forward(params, x) - target_eval(target, x, data.k);
        acc += r * r;
    }
    return acc / data.n;
}

TrainResult sgd_train(const SgdConfig& config) {
    config.validate();
    std::optional<PatchDataset> file_data;
    int d = config.d;
    if (config.data_file) {
        file_data = load_patch_file(*config.data_file);
        if (file_data->k != config.k) {
            throw ContractError("patch file has k=" + std::to_string(file_data->k) + ", config k=" +
                                std::to_string(config.k));
        }
        if (file_data->d != config.d) {
            throw ContractError("patch file has d=" + std::to_string(file_data->d) + ", config d=" +
                                std::to_string(config.d));
        }
        d = file_data->d;
    }
    const int k = config.k;
    TrainResult result;
    result.u0 = make_teacher(d, config.u0_norm, derive_seed(config.seed, kTeacherStream));
    const TargetSpec target{config.gmode, result.u0};
    NetParams params = NetInit::make(config.arch, config.head, config.gmode, k, d,
                                     derive_seed(config.seed, kInitStream));

    const PatchDataset eval = file_data ? *file_data
                                        : sample_gaussian_batch(config.eval_samples, k, d,
                                                                derive_seed(config.seed, kEvalStream));
    result.initial_loss = dataset_mse(params, target, eval);

    std::mt19937_64 batch_rng(derive_seed(config.seed, kBatchStream));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t stride = static_cast<std::size_t>(k) * d;
    std::vector<double> batch_values(stride * config.batch);
    std::size_t cursor = 0;
    auto next_batch = [&]() {
        if (file_data) {
            for (int b = 0; b < config.batch; ++b) {
                std::copy_n(file_data->values.begin() + static_cast<std::ptrdiff_t>(stride * cursor), stride,
                            batch_values.begin() + static_cast<std::ptrdiff_t>(stride * b));
                cursor = (cursor + 1) % static_cast<std::size_t>(file_data->n);
            }
        } else {
            for (double& v : batch_values) v = normal(batch_rng);
        }
    };

    // Minibatch objective is mean (f - y)^2, so its gradient is twice the mean
    // of net_backward.
    const double grad_scale = 2.0 / config.batch;
    result.loss_curve.reserve(static_cast<std::size_t>(config.iters) + 1);
    for (int it = 0; it <= config.iters; ++it) {
        next_batch();
        NetGradient grad = zero_gradient(params);
        double sse = 0.0;
        for (int b = 0; b < config.batch; ++b) {
            const Eigen::Map<const RealVector> x(batch_values.data() + stride * b,
                                                 static_cast<Eigen::Index>(stride));
            const RealVector xv = x;
            const double r = net_forward(params, xv) - target_eval(target, xv, k);
            sse += r * r;
            if (it < config.iters) accumulate_backward(params, xv, r, grad_scale, grad);
        }
        const double loss = sse / config.batch;
        if (!std::isfinite(loss)) throw DivergenceError("non-finite training loss", static_cast<std::size_t>(it));
        result.loss_curve.push_back(loss);
        if (it < config.iters) apply_step(params, grad, config.eta);
    }
    result.final_loss = dataset_mse(params, target, eval);
    result.final_params = std::move(params);
    return result;
}

}  // namespace convsep
