#pragma once

// CSV and binary writers for command outputs. Every CSV starts with
// "# eqpide schema=1 config_hash=<hex>" and numbers use the shortest
// round-trip representation, so identical inputs give identical bytes.

#include "eqpide/pide_solver.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eqpide {

inline constexpr int kCsvSchemaVersion = 1;

std::string format_number(double v);

class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, const std::string& config_hash, const std::vector<std::string>& columns,
              const std::vector<std::string>& notes = {});
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(std::string_view v);
    CsvWriter& operator<<(const char* v) { return *this << std::string_view(v); }
    CsvWriter& operator<<(std::size_t v);
    CsvWriter& operator<<(bool v) { return *this << std::string_view(v ? "1" : "0"); }
    void end_row();
    /// Writes the buffer to disk; called by the destructor if not done.
    void close();

private:
    void separator();

    std::filesystem::path path_;
    std::string buffer_;
    bool row_open_ = false;
    bool closed_ = false;
};

/// Header: "EQPF", u32 version, "LE", u16 zero, u64 n_t, n_x, n_z, then
/// f64 t_min, t_max, x_min, x_max, z_min, z_max, followed by the field as
/// row-major f64 [t][x][z], all little-endian.
void write_field_binary(const std::filesystem::path& path, const PideSolution& sol, bool theta);

struct FieldFile {
    std::size_t n_t = 0, n_x = 0, n_z = 0;
    double t_min = 0, t_max = 0, x_min = 0, x_max = 0, z_min = 0, z_max = 0;
    std::vector<double> data;
};
FieldFile read_field_binary(const std::filesystem::path& path);

}  // namespace eqpide
