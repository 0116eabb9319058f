#include "hedgeratio/serialize.hpp"

#include "hedgeratio/error.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hr::io {
namespace {

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
    return v;
}

RawTensor make_raw(std::uint64_t d0, std::uint64_t d1, std::uint64_t d2, const double* data) {
    RawTensor t;
    t.dims = {d0, d1, d2};
    t.values.assign(data, data + d0 * d1 * d2);
    return t;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw IoError("cannot parse number '" + s + "' in " + path.string());
    }
    return v;
}

/// Reads a CSV with a "path" first column into (column names, values).
std::pair<std::vector<std::string>, Matrix> read_path_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV file " + path.string());
    std::vector<std::string> header = split_csv(line);
    if (header.empty() || header.front() != "path") throw IoError("CSV " + path.string() + " must start with a 'path' column");
    header.erase(header.begin());
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size() + 1) throw IoError("ragged row in " + path.string());
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k) row.push_back(parse_double(cells[k], path));
        rows.push_back(std::move(row));
    }
    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
    for (std::size_t l = 0; l < rows.size(); ++l) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            values(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) = rows[l][c];
        }
    }
    return {std::move(header), std::move(values)};
}

}  // namespace

void write_table(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "path";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (Eigen::Index l = 0; l < values.rows(); ++l) {
        out << l;
        for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(l, c));
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}


std::vector<unsigned char> encode_tensor(const RawTensor& t) {
    const std::uint64_t count = t.dims[0] * t.dims[1] * t.dims[2];
    if (count != t.values.size()) throw DimensionError("dims", "tensor dims do not match value count");
    std::vector<unsigned char> out;
    out.reserve(kTensorHeaderLen + 8 * t.values.size());
    out.insert(out.end(), kTensorMagic, kTensorMagic + kTensorMagicLen);
    for (auto d : t.dims) put_u64(out, d);
    for (double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

RawTensor decode_tensor(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < kTensorHeaderLen) throw CorruptFileError("tensor file shorter than its header");
    if (std::memcmp(bytes.data(), kTensorMagic, kTensorMagicLen) != 0) throw CorruptFileError("bad tensor magic");
    RawTensor t;
    for (int k = 0; k < 3; ++k) t.dims[static_cast<std::size_t>(k)] = get_u64(bytes.data() + kTensorMagicLen + 8 * k);
    const std::uint64_t count = t.dims[0] * t.dims[1] * t.dims[2];
    if ((t.dims[1] != 0 && t.dims[2] != 0 && count / t.dims[1] / t.dims[2] != t.dims[0]) ||
        count > (bytes.size() - kTensorHeaderLen) / 8 || bytes.size() != kTensorHeaderLen + 8 * count) {
        throw CorruptFileError("tensor payload size does not match header dims");
    }
    t.values.resize(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        t.values[k] = std::bit_cast<double>(get_u64(bytes.data() + kTensorHeaderLen + 8 * k));
    }
    return t;
}

void write_tensor(const std::filesystem::path& path, const RawTensor& t) {
    const auto bytes = encode_tensor(t);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

RawTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

RawTensor to_raw(const SensitivityTensor& a) {
    return make_raw(a.n_paths(), a.n_primitives(), a.n_instruments(), a.values().data());
}

RawTensor to_raw(const PrimitiveSensitivities& b) { return make_raw(b.n_paths(), b.n_primitives(), 1, b.values().data()); }

RawTensor to_raw(const Matrix& m) {
    return make_raw(static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()), 1, m.data());
}

SensitivityTensor sensitivity_from_raw(RawTensor t) {
    return SensitivityTensor(t.dims[0], t.dims[1], t.dims[2], std::move(t.values));
}

PrimitiveSensitivities primitive_from_raw(RawTensor t) {
    if (t.dims[2] != 1) throw DimensionError("m", "primitive sensitivities must be stored with a unit last axis");
    return PrimitiveSensitivities(t.dims[0], t.dims[1], std::move(t.values));
}

Matrix matrix_from_raw(const RawTensor& t) {
    if (t.dims[2] != 1) throw DimensionError("cols", "matrix must be stored with a unit last axis");
    Matrix m(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
    std::copy(t.values.begin(), t.values.end(), m.data());
    return m;
}

RawTensor to_raw(const NormalSystem& s) {
    Matrix aug(s.g.rows(), s.g.cols() + 1);
    aug << s.g, s.h;
    return to_raw(aug);
}

RawTensor to_raw(const ProjectedSystem& s) {
    Matrix aug(s.b.rows(), s.b.cols() + 1);
    aug << s.b, s.beta;
    return to_raw(aug);
}

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityTensor& a) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "path,primitive";
    for (std::size_t j = 0; j < a.n_instruments(); ++j) out << ",instrument_" << j;
    out << '\n';
    for (std::size_t l = 0; l < a.n_paths(); ++l) {
        for (std::size_t i = 0; i < a.n_primitives(); ++i) {
            out << l << ',' << i;
            for (double v : a.row(l, i)) out << ',' << format_double(v);
            out << '\n';
        }
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw IoError("cannot format number");
    return {buf, ptr};
}

void write_states_csv(const std::filesystem::path& path, const StateTable& states) {
    write_table(path, states.names, states.values);
}

StateTable read_states_csv(const std::filesystem::path& path) {
    auto [names, values] = read_path_csv(path);
    return StateTable{std::move(names), std::move(values)};
}

void write_hedge_csv(const std::filesystem::path& path, const HedgeRatioMatrix& phi,
                     const std::vector<std::string>& instrument_names) {
    if (instrument_names.size() != phi.n_instruments()) throw DimensionError("m", "instrument names vs hedge columns");
    write_table(path, instrument_names, phi.values);
}

HedgeRatioMatrix read_hedge_csv(const std::filesystem::path& path) { return HedgeRatioMatrix{read_path_csv(path).second}; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hr::io
