#pragma once

// JSON run configuration and the command dispatcher behind the convsep tool.

#include "convsep/nets.hpp"
#include "convsep/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace convsep {

enum class Command { Experiment, Verify, Estimate, Sweep };
enum class ModelChoice { Cosine, Parity, Net };

const char* to_string(Command command);
Command command_from_string(const std::string& name);
const char* to_string(ModelChoice model);
ModelChoice model_from_string(const std::string& name);

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitDivergence = 2,
    kExitVerifyFailed = 3,
};

struct OptimizerSettings {
    /// <= 0 selects the model default.
    double eta = 0.0;
    int iters = 0;
    int batch = 128;
    std::optional<double> projection_radius;
    double stop_tolerance = 1e-6;
    int record_every = 1;
    /// Analytic models: random | rademacher | teacher_half.
    std::string init = "random";
    /// Norm of a random init, or the Rademacher magnitude (<= 0: 1/sqrt(d)).
    double init_scale = 1.0;
};

struct ExperimentConfig {
    Command command = Command::Experiment;
    ModelChoice model = ModelChoice::Net;
    Arch arch = Arch::WS;
    ParityMode mode = ParityMode::OnePlusK;
    GMode gmode = GMode::Both;
    HeadKind head = HeadKind::Known;
    std::optional<std::filesystem::path> data_file;
    int k = 0;
    int d = 0;
    /// <= 0 selects the model default (parity: the non-degeneracy threshold).
    double u0_norm = 0.0;
    double c_k = 0.0;
    OptimizerSettings optimizer;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    int eval_samples = 8192;

    /// verify: subset of check names (empty: all).
    std::vector<std::string> checks;
    /// verify: run the deliberately violated variants, which must fail.
    bool negative_control = false;
    /// estimate: quantity name and Monte Carlo sample count.
    std::string quantity = "v_sigma";
    std::int64_t samples = 1000000;
    /// sweep: one JSON object of overrides per cell.
    std::vector<nlohmann::json> cells;
    std::vector<std::string> cell_names;
    int max_parallel = 0;

    /// Throws ContractError on out-of-range fields.
    void validate() const;
};

/// Applies `doc` on top of `base`. Relative data paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                              const ExperimentConfig* base = nullptr);

/// Reads and parses a config file; ParseError on malformed JSON.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Runs one command; writes outputs under config.out_dir and diagnostics to err.
int run_command(const ExperimentConfig& config, std::ostream& log, std::ostream& err);

/// Full entry point used by the tool: load, apply overrides, validate, run.
int run(const std::filesystem::path& config_path, std::optional<Command> command,
        std::optional<std::uint64_t> seed, std::optional<std::filesystem::path> out_dir, std::ostream& log,
        std::ostream& err);

}  // namespace convsep
