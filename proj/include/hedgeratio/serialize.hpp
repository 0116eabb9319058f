#pragma once

#include "hedgeratio/basis.hpp"
#include "hedgeratio/reduce_ls.hpp"
#include "hedgeratio/reduce_projected.hpp"
#include "hedgeratio/tensors.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hr::io {

/// Tensor container: the 7 bytes "HRTENS1", dims (d0, d1, d2) as uint64
/// little-endian, then d0*d1*d2 float64 little-endian values, last index fastest.
inline constexpr char kTensorMagic[] = "HRTENS1";
inline constexpr std::size_t kTensorMagicLen = 7;
inline constexpr std::size_t kTensorHeaderLen = kTensorMagicLen + 3 * 8;

struct RawTensor {
    std::array<std::uint64_t, 3> dims{};
    std::vector<double> values;
};

[[nodiscard]] std::vector<unsigned char> encode_tensor(const RawTensor& t);
/// Throws CorruptFileError on a short or malformed buffer.
[[nodiscard]] RawTensor decode_tensor(const std::vector<unsigned char>& bytes);

void write_tensor(const std::filesystem::path& path, const RawTensor& t);
[[nodiscard]] RawTensor read_tensor(const std::filesystem::path& path);

// Typed views. PrimitiveSensitivities is stored as (N, n, 1), matrices as (rows, cols, 1).
[[nodiscard]] RawTensor to_raw(const SensitivityTensor& a);
[[nodiscard]] RawTensor to_raw(const PrimitiveSensitivities& b);
[[nodiscard]] RawTensor to_raw(const Matrix& m);
[[nodiscard]] SensitivityTensor sensitivity_from_raw(RawTensor t);
[[nodiscard]] PrimitiveSensitivities primitive_from_raw(RawTensor t);
[[nodiscard]] Matrix matrix_from_raw(const RawTensor& t);

/// [G | h] as an (mr, mr + 1, 1) tensor.
[[nodiscard]] RawTensor to_raw(const NormalSystem& s);
/// [B | beta] as an (np, mr + 1, 1) tensor.
[[nodiscard]] RawTensor to_raw(const ProjectedSystem& s);

/// One row per (path, primitive) with m instrument columns.
void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityTensor& a);

/// Shortest decimal text that reads back to the identical double.
[[nodiscard]] std::string format_double(double v);

/// Header "path,<name>...", then one row per path of `values`.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& names, const Matrix& values);

void write_states_csv(const std::filesystem::path& path, const StateTable& states);
[[nodiscard]] StateTable read_states_csv(const std::filesystem::path& path);

/// Header "path,<instrument>...", one row per path.
void write_hedge_csv(const std::filesystem::path& path, const HedgeRatioMatrix& phi,
                     const std::vector<std::string>& instrument_names);
[[nodiscard]] HedgeRatioMatrix read_hedge_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

}  // namespace hr::io
