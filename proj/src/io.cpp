#include "eqpide/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace eqpide {

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::filesystem::path path, const std::string& config_hash,
                     const std::vector<std::string>& columns, const std::vector<std::string>& notes)
    : path_(std::move(path)) {
    buffer_ = "# eqpide schema=" + std::to_string(kCsvSchemaVersion) + " config_hash=" + config_hash + "\n";
    for (const auto& n : notes) buffer_ += "# " + n + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

void CsvWriter::separator() {
    if (row_open_) buffer_ += ',';
    row_open_ = true;
}

CsvWriter& CsvWriter::operator<<(double v) {
    separator();
    buffer_ += format_number(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view v) {
    separator();
    buffer_ += v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::size_t v) {
    separator();
    buffer_ += std::to_string(v);
    return *this;
}

void CsvWriter::end_row() {
    buffer_ += '\n';
    row_open_ = false;
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path_.string());
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw std::runtime_error("write failed for " + path_.string());
}

namespace {

template <class T>
void put_le(std::string& out, T value) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.append(bytes.data(), bytes.size());
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("truncated field file");
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    pos += sizeof(T);
    T v;
    std::memcpy(&v, bytes.data(), sizeof(T));
    return v;
}

}  // namespace

void write_field_binary(const std::filesystem::path& path, const PideSolution& sol, bool theta) {
    const StateGrid2D& g = sol.grid();
    std::string out = "EQPF";
    put_le<std::uint32_t>(out, 1);
    out += "LE";
    put_le<std::uint16_t>(out, 0);
    put_le<std::uint64_t>(out, g.n_time + 1);
    put_le<std::uint64_t>(out, g.n_space);
    put_le<std::uint64_t>(out, g.n_space);
    for (double v : {0.0, g.horizon, g.lower, g.upper, g.lower, g.upper}) put_le<double>(out, v);
    for (double v : theta ? sol.theta_data() : sol.g_data()) put_le<double>(out, v);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

FieldFile read_field_binary(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (in.size() < 4 || in.compare(0, 4, "EQPF") != 0) throw std::runtime_error("not a field file");
    std::size_t pos = 4;
    if (get_le<std::uint32_t>(in, pos) != 1) throw std::runtime_error("unsupported field file version");
    if (in.compare(pos, 2, "LE") != 0) throw std::runtime_error("unexpected endianness tag");
    pos += 2;
    get_le<std::uint16_t>(in, pos);
    FieldFile ff;
    ff.n_t = get_le<std::uint64_t>(in, pos);
    ff.n_x = get_le<std::uint64_t>(in, pos);
    ff.n_z = get_le<std::uint64_t>(in, pos);
    ff.t_min = get_le<double>(in, pos);
    ff.t_max = get_le<double>(in, pos);
    ff.x_min = get_le<double>(in, pos);
    ff.x_max = get_le<double>(in, pos);
    ff.z_min = get_le<double>(in, pos);
    ff.z_max = get_le<double>(in, pos);
    const std::size_t count = ff.n_t * ff.n_x * ff.n_z;
    ff.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) ff.data[i] = get_le<double>(in, pos);
    if (pos != in.size()) throw std::runtime_error("trailing bytes in field file");
    return ff;
}

}  // namespace eqpide
