#pragma once

// CSV trajectories with round-trip decimal output.

#include "convsep/optimizer.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace convsep {

inline constexpr const char* kCsvHeader = "iter,loss,grad_norm,alpha,dist_to_teacher";

/// One parsed CSV row; absent fields are empty optionals.
struct CsvRow {
    std::size_t iter = 0;
    std::optional<double> loss;
    std::optional<double> grad_norm;
    std::optional<double> alpha;
    std::optional<double> dist_to_teacher;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

void write_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records);
/// Loss curve rows: iter and loss only.
void write_csv(std::ostream& out, const std::vector<double>& loss_curve);

/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path);
void emit_csv(const std::vector<double>& loss_curve, const std::filesystem::path& path);

/// Reads a file written by emit_csv. Throws ParseError on malformed rows.
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

}  // namespace convsep
