#include "ptycho/array_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

namespace ptycho {

static_assert(std::endian::native == std::endian::little, "ArrayFile I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'T', 'Y', 'C'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
    if (in.size() - pos < sizeof(T)) throw FormatError("array file truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

std::size_t scalars_per_element(DType t) { return t == DType::Complex ? 2 : 1; }

void expect(const ArrayFile& f, DType t, std::size_t ndim, const char* what) {
    if (f.dtype != t || f.dims.size() != ndim)
        throw FormatError(fmt::format("array file does not hold {} (dtype {}, ndim {})", what,
                                      static_cast<int>(f.dtype), f.dims.size()));
}

}  // namespace

std::size_t ArrayFile::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

std::string encode_array(const ArrayFile& f) {
    if (f.dims.size() > 255) throw FormatError("too many dimensions");
    if (f.payload.size() != f.element_count() * scalars_per_element(f.dtype))
        throw FormatError("payload length does not match dims");
    std::string out(kMagic, 4);
    put<std::uint8_t>(out, kVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(f.dtype));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(f.dims.size()));
    for (auto d : f.dims) put<std::uint64_t>(out, d);
    const auto* bytes = reinterpret_cast<const char*>(f.payload.data());
    out.append(bytes, f.payload.size() * sizeof(double));
    return out;
}

ArrayFile decode_array(const std::string& in) {
    if (in.size() < 7 || std::memcmp(in.data(), kMagic, 4) != 0) throw FormatError("bad array file magic");
    std::size_t pos = 4;
    const auto version = take<std::uint8_t>(in, pos);
    if (version != kVersion) throw FormatError(fmt::format("unsupported array file version {}", version));
    const auto dtype = take<std::uint8_t>(in, pos);
    if (dtype != 1 && dtype != 2) throw FormatError(fmt::format("unknown dtype {}", dtype));
    ArrayFile f;
    f.dtype = static_cast<DType>(dtype);
    const auto ndim = take<std::uint8_t>(in, pos);
    for (std::size_t k = 0; k < ndim; ++k) f.dims.push_back(take<std::uint64_t>(in, pos));
    const std::size_t count = f.element_count() * scalars_per_element(f.dtype);
    if (in.size() - pos != count * sizeof(double))
        throw FormatError(fmt::format("payload is {} bytes, dims require {}", in.size() - pos, count * sizeof(double)));
    f.payload.resize(count);
    std::memcpy(f.payload.data(), in.data() + pos, count * sizeof(double));
    return f;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(fmt::format("cannot open {} for writing", tmp.string()));
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw Error(fmt::format("write to {} failed", tmp.string()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(fmt::format("cannot rename into {}", path.string()));
    }
}

void write_array(const std::filesystem::path& path, const ArrayFile& f) { write_atomic(path, encode_array(f)); }

ArrayFile read_array(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << is.rdbuf();
    try {
        return decode_array(ss.str());
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

ArrayFile to_array(const ComplexGrid& g) {
    ArrayFile f{DType::Complex, {g.rows, g.cols}, {}};
    f.payload.reserve(2 * g.data.size());
    for (const cplx& v : g.data) {
        f.payload.push_back(v.real());
        f.payload.push_back(v.imag());
    }
    return f;
}

ArrayFile to_array(const MeasurementStack& a) {
    return {DType::Real, {a.frames, a.side, a.side}, a.data};
}

ArrayFile to_array(const std::vector<Position>& positions) {
    ArrayFile f{DType::Real, {positions.size(), 2}, {}};
    for (const Position& p : positions) {
        f.payload.push_back(p.x);
        f.payload.push_back(p.y);
    }
    return f;
}

ComplexGrid as_complex_grid(const ArrayFile& f) {
    expect(f, DType::Complex, 2, "a complex 2D grid");
    ComplexGrid g(f.dims[0], f.dims[1]);
    for (std::size_t p = 0; p < g.data.size(); ++p) g.data[p] = {f.payload[2 * p], f.payload[2 * p + 1]};
    return g;
}

MeasurementStack as_measurements(const ArrayFile& f) {
    expect(f, DType::Real, 3, "a real [K, m, m] stack");
    if (f.dims[1] != f.dims[2]) throw FormatError("measurement frames must be square");
    MeasurementStack a(f.dims[0], f.dims[1]);
    a.data = f.payload;
    return a;
}

std::vector<Position> as_positions(const ArrayFile& f) {
    expect(f, DType::Real, 2, "a real [K, 2] position table");
    if (f.dims[1] != 2) throw FormatError("position table must have two columns");
    std::vector<Position> out(f.dims[0]);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {f.payload[2 * k], f.payload[2 * k + 1]};
    return out;
}

}  // namespace ptycho
