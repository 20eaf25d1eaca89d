#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ptycho/core.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

enum class DType : std::uint8_t { Complex = 1, Real = 2 };

/// Layout: "PTYC", version 1, dtype, ndim, ndim x u64 dims, float64 payload,
/// all little-endian. Complex payloads interleave re/im.
struct ArrayFile {
    DType dtype = DType::Real;
    std::vector<std::uint64_t> dims;
    std::vector<double> payload;

    std::size_t element_count() const;
    friend bool operator==(const ArrayFile&, const ArrayFile&) = default;
};

std::string encode_array(const ArrayFile& f);
/// Throws FormatError on bad magic, version, dtype or length.
ArrayFile decode_array(const std::string& bytes);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
void write_array(const std::filesystem::path& path, const ArrayFile& f);
ArrayFile read_array(const std::filesystem::path& path);

ArrayFile to_array(const ComplexGrid& g);
ArrayFile to_array(const MeasurementStack& a);
/// [K, 2] real; column 0 is x (column offset), column 1 is y (row offset).
ArrayFile to_array(const std::vector<Position>& positions);

ComplexGrid as_complex_grid(const ArrayFile& f);
MeasurementStack as_measurements(const ArrayFile& f);
std::vector<Position> as_positions(const ArrayFile& f);

}  // namespace ptycho
