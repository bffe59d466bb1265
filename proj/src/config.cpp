#include "convsep/config.hpp"

#include "convsep/errors.hpp"
#include "convsep/report.hpp"
#include "convsep/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace convsep {

namespace {

using nlohmann::json;

const std::set<std::string> kTopLevelKeys{
    "command", "model", "arch", "mode", "gmode", "head", "data", "k", "d", "u0_norm", "c_k", "optimizer",
    "seed", "out_dir", "eval_samples", "checks", "quantity", "samples", "cells", "grid", "max_parallel",
    "description", "u", "v", "name", "negative_control"};
const std::set<std::string> kOptimizerKeys{"eta", "iters", "batch", "projection_radius", "stop_tolerance",
                                           "record_every", "init", "init_scale"};

template <typename T>
T get_field(const json& doc, const char* name) {
    try {
        return doc.at(name).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("config field '") + name + "': " + e.what());
    }
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [name, _] : doc.items()) {
        if (!allowed.count(name)) throw ParseError("unknown config key '" + name + "' in " + where);
    }
}

struct Resolved {
    int k;
    int d;
    double u0_norm;
    double eta;
    int iters;
    std::optional<double> projection;
};

// Fills model-specific defaults for zero / unset fields.
Resolved resolve(const ExperimentConfig& c) {
    Resolved r{c.k, c.d, c.u0_norm, c.optimizer.eta, c.optimizer.iters, c.optimizer.projection_radius};
    switch (c.model) {
        case ModelChoice::Net:
            if (r.k == 0) r.k = 10;
            if (r.d == 0) r.d = c.data_file ? 100 : 75;
            if (r.u0_norm <= 0.0) r.u0_norm = 3.0;
            if (r.eta <= 0.0) r.eta = 0.5;
            if (r.iters == 0) r.iters = 3000;
            break;
        case ModelChoice::Cosine:
            if (r.k == 0) r.k = 4;
            if (r.d == 0) r.d = 5;
            if (r.u0_norm <= 0.0) r.u0_norm = 1.0;
            if (r.eta <= 0.0) {
                const double ck = c.c_k > 0.0 ? c.c_k : 3.0 * std::sqrt(static_cast<double>(r.k));
                r.eta = 1.0 / (ck * ck + 2.0 * r.k + std::sqrt(static_cast<double>(r.k)));
            }
            if (r.iters == 0) r.iters = 1000;
            break;
        case ModelChoice::Parity:
            if (r.k == 0) r.k = 3;
            if (r.d == 0) r.d = 8;
            if (r.u0_norm <= 0.0) r.u0_norm = std::sqrt(12.0) * r.k / std::numbers::pi;
            if (r.eta <= 0.0) r.eta = c.arch == Arch::WS ? phase2_step(0.05, r.k, 1000.0) : 1.0;
            if (r.iters == 0) r.iters = c.arch == Arch::WS ? 20000 : 200;
            if (!r.projection && c.arch == Arch::WS) r.projection = r.u0_norm;
            break;
    }
    return r;
}

std::string cell_name(const json& cell, std::size_t index) {
    if (cell.contains("name")) return cell.at("name").get<std::string>();
    std::string name;
    for (const char* key : {"gmode", "arch", "head", "model", "mode", "k", "d", "seed"}) {
        if (!cell.contains(key)) continue;
        if (!name.empty()) name += "_";
        const json& v = cell.at(key);
        name += v.is_string() ? v.get<std::string>() : v.dump();
    }
    return name.empty() ? "cell" + std::to_string(index) : name;
}

void write_json(const json& doc, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

RealVector random_vector(int d, double norm, std::mt19937_64& rng) { return norm * random_direction(d, rng); }

RealVector vector_field(const json& doc, const char* key, int d, double norm, std::mt19937_64& rng) {
    if (!doc.is_null() && doc.contains(key)) {
        const auto v = doc.at(key).get<std::vector<double>>();
        if (static_cast<int>(v.size()) != d) {
            throw ContractError(std::string("estimate: '") + key + "' must have d entries");
        }
        return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return random_vector(d, norm, rng);
}

json vector_json(const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// -- commands ------------------------------------------------------------------

int run_analytic_experiment(const ExperimentConfig& c, std::ostream& log) {
    const Resolved r = resolve(c);
    std::mt19937_64 rng(derive_seed(c.seed, 1));
    const RealVector u0 = random_vector(r.d, r.u0_norm, rng);
    ModelSpec model = c.model == ModelChoice::Cosine
                          ? ModelSpec::cosine_model(CosineParams::make(r.k, u0, c.c_k), c.arch)
                          : ModelSpec::parity_model(ParityParams::make(r.k, u0), c.arch, c.mode);

    RealVector init;
    const std::string& how = c.optimizer.init;
    if (how == "teacher_half") {
        init = 0.5 * model.teacher();
    } else if (how == "rademacher") {
        const double cc = c.optimizer.init_scale > 0.0 ? c.optimizer.init_scale : 1.0 / std::sqrt(r.d);
        init = c.arch == Arch::WS ? rademacher_init(r.d, 1, cc, derive_seed(c.seed, 2))
                                  : rademacher_init(r.d, r.k, cc, derive_seed(c.seed, 2));
    } else {
        std::mt19937_64 init_rng(derive_seed(c.seed, 2));
        init = random_vector(static_cast<int>(model.dim()), c.optimizer.init_scale, init_rng);
        // Weight-shared parity runs start in the half-space w0.u0 > 0.
        if (c.model == ModelChoice::Parity && c.arch == Arch::WS && init.dot(u0) < 0.0) init = -init;
    }

    GdConfig gd;
    gd.step.constant = r.eta;
    gd.max_iters = static_cast<std::size_t>(r.iters);
    gd.projection_radius = r.projection;
    gd.stop_tolerance = c.optimizer.stop_tolerance;
    gd.record_every = static_cast<std::size_t>(c.optimizer.record_every);
    gd.seed = c.seed;
    const GdResult res = gd_run(model, init, gd);

    emit_csv(res.records, c.out_dir / "trajectory.csv");
    const auto& last = res.records.back();
    json summary{{"model", to_string(c.model)},
                 {"arch", to_string(c.arch)},
                 {"k", r.k},
                 {"d", r.d},
                 {"u0_norm", r.u0_norm},
                 {"eta", r.eta},
                 {"iterations", res.iterations},
                 {"stop_reason", to_string(res.stop_reason)},
                 {"initial_loss", res.records.front().loss},
                 {"final_loss", last.loss},
                 {"final_dist_to_teacher", last.dist_to_teacher},
                 {"seed", c.seed}};
    if (c.model == ModelChoice::Parity) summary["mode"] = to_string(c.mode);
    write_json(summary, c.out_dir / "summary.json");
    log << to_string(c.model) << '/' << to_string(c.arch) << ": " << res.iterations << " iterations, loss "
        << format_double(res.records.front().loss) << " -> " << format_double(last.loss) << " ("
        << to_string(res.stop_reason) << ")\n";
    return kExitOk;
}

int run_net_experiment(const ExperimentConfig& c, std::ostream& log) {
    const Resolved r = resolve(c);
    SgdConfig s;
    s.arch = c.arch;
    s.gmode = c.gmode;
    s.head = c.head;
    s.k = r.k;
    s.d = r.d;
    s.u0_norm = r.u0_norm;
    s.eta = r.eta;
    s.batch = c.optimizer.batch;
    s.iters = r.iters;
    s.seed = c.seed;
    s.data_file = c.data_file;
    s.eval_samples = c.eval_samples;
    const TrainResult res = sgd_train(s);
    emit_csv(res.loss_curve, c.out_dir / "loss.csv");
    json summary{{"model", "net"},
                 {"arch", to_string(c.arch)},
                 {"gmode", to_string(c.gmode)},
                 {"head", to_string(c.head)},
                 {"k", r.k},
                 {"d", r.d},
                 {"u0_norm", r.u0_norm},
                 {"eta", r.eta},
                 {"batch", s.batch},
                 {"iters", r.iters},
                 {"data", c.data_file ? c.data_file->string() : std::string("gaussian")},
                 {"initial_loss", res.initial_loss},
                 {"final_loss", res.final_loss},
                 {"seed", c.seed}};
    write_json(summary, c.out_dir / "summary.json");
    log << "net " << to_string(c.gmode) << '/' << to_string(c.arch) << '/' << to_string(c.head) << ": loss "
        << format_double(res.initial_loss) << " -> " << format_double(res.final_loss) << '\n';
    return kExitOk;
}

int run_verify(const ExperimentConfig& c, std::ostream& log) {
    const std::vector<std::string> names = c.checks.empty() ? check_names() : c.checks;
    std::vector<std::future<CheckReport>> futures;
    for (const auto& name : names) {
        futures.push_back(std::async(std::launch::async, [name, seed = c.seed, negative = c.negative_control] {
            if (negative && name == "identities") return check_identities(seed, {.corrupt_single_term = true});
            if (negative && name == "parity_fc_stuck") return check_parity_fc_stuck(seed, {.adversarial_init = true});
            return run_check(name, seed);
        }));
    }
    json checks = json::array();
    bool all = true;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const CheckReport rep = futures[i].get();
        all = all && rep.passed;
        checks.push_back(rep.to_json());
        log << (rep.passed ? "PASS " : "FAIL ") << rep.check_id << '\n';
    }
    write_json({{"seed", c.seed}, {"passed", all}, {"checks", checks}}, c.out_dir / "report.json");
    return all ? kExitOk : kExitVerifyFailed;
}

int run_estimate(const ExperimentConfig& c, const json& raw, std::ostream& log) {
    const int d = c.d > 0 ? c.d : 4;
    const double norm = c.u0_norm > 0.0 ? c.u0_norm : 1.0;
    std::mt19937_64 rng(derive_seed(c.seed, 3));
    const std::uint64_t mc_seed = derive_seed(c.seed, 4);
    json out{{"quantity", c.quantity}, {"d", d}, {"samples", c.samples}, {"seed", c.seed}};
    RealVector closed;
    VectorEstimate mc;
    if (c.quantity == "v_sigma" || c.quantity == "cos_squared_diff_mean") {
        const RealVector u = vector_field(raw, "u", d, norm, rng);
        const RealVector v = vector_field(raw, "v", d, norm, rng);
        out["u"] = vector_json(u);
        out["v"] = vector_json(v);
        const bool kernel = c.quantity == "v_sigma";
        closed = RealVector::Constant(1, kernel ? v_sigma(u, v) : cos_squared_diff_mean(u, v));
        mc = mc_expect_vector(
            [&](const RealVector& x) {
                const double val = kernel ? std::erf(u.dot(x)) * std::erf(v.dot(x))
                                          : std::pow(std::cos(u.dot(x)) - std::cos(v.dot(x)), 2);
                return RealVector::Constant(1, val);
            },
            d, c.samples, mc_seed);
    } else if (c.quantity == "cos_gaussian_mean") {
        const RealVector z = vector_field(raw, "u", d, norm, rng);
        out["u"] = vector_json(z);
        closed = RealVector::Constant(1, cos_gaussian_mean(z));
        mc = mc_expect_vector([&](const RealVector& x) { return RealVector::Constant(1, std::cos(z.dot(x))); }, d,
                              c.samples, mc_seed);
    } else if (c.quantity == "self_term" || c.quantity == "cross_term") {
        const bool self = c.quantity == "self_term";
        const RealVector w = vector_field(raw, "u", d, norm, rng);
        const RealVector u = self ? w : vector_field(raw, "v", d, norm, rng);
        out["w"] = vector_json(w);
        if (!self) out["u"] = vector_json(u);
        closed = self ? self_term(w) : cross_term(u, w);
        mc = mc_expect_vector(
            [&](const RealVector& x) {
                return RealVector(std::erf(u.dot(x)) * sigma_eval(w.dot(x)).derivative * x);
            },
            d, c.samples, mc_seed);
    } else if (c.quantity == "target_second_moment") {
        const Resolved r = resolve(c);
        const RealVector u0 = make_teacher(r.d, r.u0_norm, derive_seed(c.seed, 1));
        const KernelEstimate est = target_second_moment(c.gmode, u0, r.k, c.samples, mc_seed);
        out["gmode"] = to_string(c.gmode);
        out["mc"] = {est.value};
        out["std_error"] = {est.std_error};
        write_json(out, c.out_dir / "estimate.json");
        log << "target_second_moment(" << to_string(c.gmode) << ") = " << format_double(est.value) << " +- "
            << format_double(est.std_error) << '\n';
        return kExitOk;
    } else {
        throw ContractError("unknown estimate quantity '" + c.quantity + "'");
    }
    double max_z = 0.0;
    for (Eigen::Index i = 0; i < closed.size(); ++i) {
        const double se = mc.std_error[i];
        const double diff = std::abs(closed[i] - mc.value[i]);
        max_z = std::max(max_z, se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY));
    }
    out["closed_form"] = vector_json(closed);
    out["mc"] = vector_json(mc.value);
    out["std_error"] = vector_json(mc.std_error);
    out["max_abs_z"] = std::isfinite(max_z) ? json(max_z) : json(nullptr);
    write_json(out, c.out_dir / "estimate.json");
    log << c.quantity << ": closed form vs Monte Carlo, max |z| = " << format_double(max_z) << '\n';
    return kExitOk;
}

int run_sweep(const ExperimentConfig& c, std::ostream& log, std::ostream& err) {
    std::vector<ExperimentConfig> cells;
    for (std::size_t i = 0; i < c.cells.size(); ++i) {
        ExperimentConfig cell = parse_config(c.cells[i], {}, &c);
        cell.command = Command::Experiment;
        cell.cells.clear();
        cell.out_dir = c.out_dir / c.cell_names[i];
        cell.validate();
        cells.push_back(std::move(cell));
    }
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t width = c.max_parallel > 0 ? static_cast<std::size_t>(c.max_parallel) : hw;
    std::vector<int> codes(cells.size(), kExitOk);
    std::vector<std::string> messages(cells.size());
    for (std::size_t start = 0; start < cells.size(); start += width) {
        std::vector<std::future<void>> running;
        for (std::size_t i = start; i < std::min(cells.size(), start + width); ++i) {
            running.push_back(std::async(std::launch::async, [&, i] {
                std::ostringstream cell_log;
                std::ostringstream cell_err;
                codes[i] = run_command(cells[i], cell_log, cell_err);
                messages[i] = cell_log.str() + cell_err.str();
            }));
        }
        for (auto& f : running) f.get();
    }
    json index = json::array();
    int worst = kExitOk;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        log << '[' << c.cell_names[i] << "] " << messages[i];
        index.push_back({{"name", c.cell_names[i]}, {"exit_code", codes[i]}, {"dir", c.cell_names[i]}});
        worst = std::max(worst, codes[i]);
    }
    write_json({{"cells", index}}, c.out_dir / "sweep.json");
    if (worst != kExitOk) err << "sweep: at least one cell failed\n";
    return worst;
}

}  // namespace

const char* to_string(Command command) {
    switch (command) {
        case Command::Experiment: return "experiment";
        case Command::Verify: return "verify";
        case Command::Estimate: return "estimate";
        case Command::Sweep: return "sweep";
    }
    return "unknown";
}

Command command_from_string(const std::string& name) {
    if (name == "experiment") return Command::Experiment;
    if (name == "verify") return Command::Verify;
    if (name == "estimate") return Command::Estimate;
    if (name == "sweep") return Command::Sweep;
    throw ContractError("unknown command '" + name + "'");
}

const char* to_string(ModelChoice model) {
    switch (model) {
        case ModelChoice::Cosine: return "cosine";
        case ModelChoice::Parity: return "parity";
        case ModelChoice::Net: return "net";
    }
    return "unknown";
}

ModelChoice model_from_string(const std::string& name) {
    if (name == "cosine") return ModelChoice::Cosine;
    if (name == "parity") return ModelChoice::Parity;
    if (name == "net") return ModelChoice::Net;
    throw ContractError("unknown model '" + name + "' (expected cosine, parity or net)");
}

void ExperimentConfig::validate() const {
    const Resolved r = resolve(*this);
    if (r.k < 1 || r.k > 64) throw ContractError("k must lie in [1, 64]");
    if (r.d < 1 || r.d > 100000) throw ContractError("d must lie in [1, 100000]");
    if (model == ModelChoice::Net && gmode != GMode::Low && r.k < kHighOrder) {
        throw ContractError("high mode requires k ≥ 5");
    }
    if (model != ModelChoice::Net && r.k < 2) throw ContractError("analytic models need k >= 2");
    if (model == ModelChoice::Net && !(r.eta > 0.0)) throw ContractError("optimizer.eta must be > 0");
    if (model != ModelChoice::Net && !(r.eta > 0.0 && r.eta <= 1.0)) {
        throw ContractError("optimizer.eta must lie in (0, 1]");
    }
    if (r.iters < 1) throw ContractError("optimizer.iters must be >= 1");
    if (optimizer.batch < 1) throw ContractError("optimizer.batch must be >= 1");
    if (optimizer.record_every < 1) throw ContractError("optimizer.record_every must be >= 1");
    if (!(optimizer.stop_tolerance > 0.0)) throw ContractError("optimizer.stop_tolerance must be > 0");
    if (r.projection && !(*r.projection > 0.0)) throw ContractError("optimizer.projection_radius must be > 0");
    if (optimizer.init != "random" && optimizer.init != "rademacher" && optimizer.init != "teacher_half") {
        throw ContractError("optimizer.init must be random, rademacher or teacher_half");
    }
    if (eval_samples < 1) throw ContractError("eval_samples must be >= 1");
    if (samples < 2) throw ContractError("samples must be >= 2");
    if (data_file) {
        if (model != ModelChoice::Net) throw ContractError("file data applies to the net model only");
        if (!std::filesystem::exists(*data_file)) {
            throw ContractError("data file '" + data_file->string() + "' does not exist");
        }
    }
    if (model == ModelChoice::Cosine && c_k > 0.0 && c_k < 3.0 * std::sqrt(static_cast<double>(r.k))) {
        throw ContractError("c_k must be >= 3 sqrt(k)");
    }
    for (const auto& name : checks) {
        if (std::find(check_names().begin(), check_names().end(), name) == check_names().end()) {
            throw ContractError("unknown check '" + name + "'");
        }
    }
    if (command == Command::Sweep && cells.empty()) throw ContractError("sweep needs at least one cell");
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir, const ExperimentConfig* base) {
    if (!doc.is_object()) throw ParseError("config must be a JSON object");
    reject_unknown(doc, kTopLevelKeys, "config");
    ExperimentConfig c = base ? *base : ExperimentConfig{};
    if (doc.contains("command")) c.command = command_from_string(get_field<std::string>(doc, "command"));
    if (doc.contains("model")) c.model = model_from_string(get_field<std::string>(doc, "model"));
    if (doc.contains("arch")) c.arch = arch_from_string(get_field<std::string>(doc, "arch"));
    if (doc.contains("mode")) c.mode = parity_mode_from_string(get_field<std::string>(doc, "mode"));
    if (doc.contains("gmode")) c.gmode = gmode_from_string(get_field<std::string>(doc, "gmode"));
    if (doc.contains("head")) c.head = head_from_string(get_field<std::string>(doc, "head"));
    if (doc.contains("data")) {
        const json& data = doc.at("data");
        if (data.is_string() && data.get<std::string>() == "gaussian") {
            c.data_file.reset();
        } else if (data.is_object() && data.contains("file")) {
            std::filesystem::path p = data.at("file").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            c.data_file = p;
        } else {
            throw ParseError("config field 'data' must be \"gaussian\" or {\"file\": <path>}");
        }
    }
    if (doc.contains("k")) c.k = get_field<int>(doc, "k");
    if (doc.contains("d")) c.d = get_field<int>(doc, "d");
    if (doc.contains("u0_norm")) c.u0_norm = get_field<double>(doc, "u0_norm");
    if (doc.contains("c_k")) c.c_k = get_field<double>(doc, "c_k");
    if (doc.contains("seed")) c.seed = get_field<std::uint64_t>(doc, "seed");
    if (doc.contains("out_dir")) c.out_dir = get_field<std::string>(doc, "out_dir");
    if (doc.contains("eval_samples")) c.eval_samples = get_field<int>(doc, "eval_samples");
    if (doc.contains("negative_control")) c.negative_control = get_field<bool>(doc, "negative_control");
    if (doc.contains("checks")) c.checks = get_field<std::vector<std::string>>(doc, "checks");
    if (doc.contains("quantity")) c.quantity = get_field<std::string>(doc, "quantity");
    if (doc.contains("samples")) c.samples = get_field<std::int64_t>(doc, "samples");
    if (doc.contains("max_parallel")) c.max_parallel = get_field<int>(doc, "max_parallel");
    if (doc.contains("optimizer")) {
        const json& o = doc.at("optimizer");
        if (!o.is_object()) throw ParseError("config field 'optimizer' must be an object");
        reject_unknown(o, kOptimizerKeys, "optimizer");
        auto& s = c.optimizer;
        if (o.contains("eta")) s.eta = get_field<double>(o, "eta");
        if (o.contains("iters")) s.iters = get_field<int>(o, "iters");
        if (o.contains("batch")) s.batch = get_field<int>(o, "batch");
        if (o.contains("projection_radius")) {
            if (o.at("projection_radius").is_null()) {
                s.projection_radius.reset();
            } else {
                s.projection_radius = get_field<double>(o, "projection_radius");
            }
        }
        if (o.contains("stop_tolerance")) s.stop_tolerance = get_field<double>(o, "stop_tolerance");
        if (o.contains("record_every")) s.record_every = get_field<int>(o, "record_every");
        if (o.contains("init")) s.init = get_field<std::string>(o, "init");
        if (o.contains("init_scale")) s.init_scale = get_field<double>(o, "init_scale");
    }
    if (doc.contains("cells") || doc.contains("grid")) {
        c.cells.clear();
        c.cell_names.clear();
        if (doc.contains("cells")) {
            const json& cells = doc.at("cells");
            if (!cells.is_array()) throw ParseError("config field 'cells' must be an array");
            for (const auto& cell : cells) c.cells.push_back(cell);
        }
        if (doc.contains("grid")) {
            // Cartesian product over the listed keys, in key order.
            std::vector<json> expanded{json::object()};
            for (const auto& [name, values] : doc.at("grid").items()) {
                if (!values.is_array() || values.empty()) {
                    throw ParseError("grid entry '" + name + "' must be a non-empty array");
                }
                std::vector<json> next;
                for (const auto& partial : expanded) {
                    for (const auto& v : values) {
                        json cell = partial;
                        cell[name] = v;
                        next.push_back(cell);
                    }
                }
                expanded = std::move(next);
            }
            for (auto& cell : expanded) c.cells.push_back(cell);
        }
        for (std::size_t i = 0; i < c.cells.size(); ++i) {
            if (!c.cells[i].is_object()) throw ParseError("sweep cell " + std::to_string(i) + " is not an object");
            c.cell_names.push_back(cell_name(c.cells[i], i));
            c.cells[i].erase("name");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

int run_command(const ExperimentConfig& config, std::ostream& log, std::ostream& err) {
    try {
        config.validate();
        switch (config.command) {
            case Command::Experiment:
                return config.model == ModelChoice::Net ? run_net_experiment(config, log)
                                                        : run_analytic_experiment(config, log);
            case Command::Verify: return run_verify(config, log);
            case Command::Estimate: return run_estimate(config, json(), log);
            case Command::Sweep: return run_sweep(config, log, err);
        }
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const EvaluationError& e) {
        err << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const ContractError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

int run(const std::filesystem::path& config_path, std::optional<Command> command, std::optional<std::uint64_t> seed,
        std::optional<std::filesystem::path> out_dir, std::ostream& log, std::ostream& err) {
    ExperimentConfig config;
    json raw;
    try {
        std::ifstream in(config_path);
        if (!in) throw ParseError("cannot open config '" + config_path.string() + "'");
        try {
            raw = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError("config '" + config_path.string() + "': " + e.what());
        }
        config = parse_config(raw, config_path.parent_path());
        if (command) {
            if (raw.contains("command") && config.command != *command) {
                throw ContractError(std::string("config is for '") + to_string(config.command) +
                                    "' but the command line asked for '" + to_string(*command) + "'");
            }
            config.command = *command;
        }
        if (seed) config.seed = *seed;
        if (out_dir) config.out_dir = *out_dir;
    } catch (const std::exception& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kExitValidation;
    }
    if (config.command == Command::Estimate) {
        try {
            config.validate();
            return run_estimate(config, raw, log);
        } catch (const ContractError& e) {
            err << "invalid configuration: " << e.what() << '\n';
            return kExitValidation;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitValidation;
        }
    }
    return run_command(config, log, err);
}

}  // namespace convsep
