#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptycho {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument lies outside the domain of a mathematical map (e.g. a zero entry
/// where a phase is required).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The forward model or a derived operator is singular where it must not be.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Malformed file or configuration.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Dense row-major 2D array.
template <class T>
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }

    friend bool operator==(const Grid&, const Grid&) = default;
};

using ComplexGrid = Grid<cplx>;
using RealGrid = Grid<double>;

/// K contiguous m x m blocks; block k occupies [k m^2, (k+1) m^2).
template <class T>
struct Stack {
    std::size_t frames = 0;
    std::size_t side = 0;
    std::vector<T> data;

    Stack() = default;
    Stack(std::size_t k, std::size_t m, T fill = T{}) : frames(k), side(m), data(k * m * m, fill) {}

    std::size_t frame_size() const { return side * side; }
    std::span<T> frame(std::size_t k) { return {data.data() + k * frame_size(), frame_size()}; }
    std::span<const T> frame(std::size_t k) const { return {data.data() + k * frame_size(), frame_size()}; }
    std::size_t size() const { return data.size(); }

    friend bool operator==(const Stack&, const Stack&) = default;
};

using FrameStack = Stack<cplx>;
using MeasurementStack = Stack<double>;

}  // namespace ptycho
