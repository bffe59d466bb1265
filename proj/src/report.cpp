#include "convsep/report.hpp"

#include "convsep/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace convsep {

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> parse_field(const std::string& cell, std::size_t row) {
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric field '" + cell + "'");
    }
    return v;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw EvaluationError("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.iter << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
            << optional_field(r.alpha) << ',' << format_double(r.dist_to_teacher) << '\n';
    }
}

void write_csv(std::ostream& out, const std::vector<double>& loss_curve) {
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < loss_curve.size(); ++i) out << i << ',' << format_double(loss_curve[i]) << ",,,\n";
}

void emit_csv(const std::vector<TrajectoryRecord>& records, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_csv(out, records);
    finish(out, path);
}

void emit_csv(const std::vector<double>& loss_curve, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_csv(out, loss_curve);
    finish(out, path);
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw ParseError(path.string() + ": missing header '" + std::string(kCsvHeader) + "'");
    }
    std::vector<CsvRow> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 5) {
            throw ParseError(path.string() + ": row " + std::to_string(row) + ": expected 5 fields");
        }
        CsvRow r;
        const auto iter = parse_field(cells[0], row);
        if (!iter) throw ParseError(path.string() + ": row " + std::to_string(row) + ": missing iter");
        r.iter = static_cast<std::size_t>(*iter);
        r.loss = parse_field(cells[1], row);
        r.grad_norm = parse_field(cells[2], row);
        r.alpha = parse_field(cells[3], row);
        r.dist_to_teacher = parse_field(cells[4], row);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace convsep
