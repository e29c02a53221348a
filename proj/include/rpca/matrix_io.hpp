#pragma once

// Matrix files.
//
//   CSV     one matrix row per line, comma separated, printed with 17
//           significant digits so values round-trip exactly.
//   binary  16-byte header "DMAT" | u32 rows | u32 cols | u32 reserved (0),
//           then rows*cols f64, all little-endian, row-major.
//
// read_matrix() sniffs the magic; write_matrix() picks CSV for a ".csv"
// extension and binary otherwise.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rpca/matcore.hpp"

namespace rpca {

inline constexpr std::array<char, 4> kDmatMagic = {'D', 'M', 'A', 'T'};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <typename T>
T byteswap_if_big(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        std::array<unsigned char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), &value, sizeof(T));
        std::reverse(bytes.begin(), bytes.end());
        std::memcpy(&value, bytes.data(), sizeof(T));
    }
    return value;
}

template <typename T>
void put_le(std::ostream& out, T value) {
    value = byteswap_if_big(value);
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw ParseError("dmat: truncated file " + path);
    return byteswap_if_big(value);
}

}  // namespace detail

inline DenseMatrix parse_csv(std::istream& in, const std::string& source = "<stream>") {
    std::vector<double> values;
    Index rows = 0;
    Index cols = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        Index count = 0;
        std::size_t pos = 0;
        for (;;) {
            const std::size_t comma = body.find(',', pos);
            const std::string_view field =
                detail::trim(body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos));
            double v = 0.0;
            const char* first = field.data();
            const char* last = field.data() + field.size();
            if (!field.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
                throw ParseError(source + ":" + std::to_string(line_no) + ": bad value '" +
                                 std::string(field) + "'");
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (cols >= 0 && count != cols)
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(cols) + " values, found " + std::to_string(count));
        cols = count;
        ++rows;
    }
    if (rows == 0) return DenseMatrix(0, 0);
    return Eigen::Map<const DenseMatrix>(values.data(), rows, cols);
}

inline DenseMatrix read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_csv(in, path);
}

inline void write_csv(std::ostream& out, const DenseMatrix& m) {
    std::array<char, 32> buf{};
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out.put(',');
            const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), m(i, j),
                                                 std::chars_format::general, 17);
            out.write(buf.data(), ptr - buf.data());
        }
        out.put('\n');
    }
}

inline void write_csv(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_csv(out, m);
    if (!out) throw Error("write failed for " + path);
}

inline DenseMatrix read_dmat(std::istream& in, const std::string& source = "<stream>") {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kDmatMagic)
        throw ParseError("dmat: bad magic in " + source);
    const auto rows = detail::get_le<std::uint32_t>(in, source);
    const auto cols = detail::get_le<std::uint32_t>(in, source);
    if (detail::get_le<std::uint32_t>(in, source) != 0)
        throw ParseError("dmat: nonzero reserved header word in " + source);
    DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = detail::get_le<double>(in, source);
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError("dmat: trailing bytes in " + source);
    if (!m.allFinite()) throw ParseError("dmat: non-finite value in " + source);
    return m;
}

inline DenseMatrix read_dmat(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return read_dmat(in, path);
}

inline void write_dmat(std::ostream& out, const DenseMatrix& m) {
    if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX)
        throw DimensionError("dmat: dimensions exceed u32");
    out.write(kDmatMagic.data(), 4);
    detail::put_le(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_le(out, static_cast<std::uint32_t>(m.cols()));
    detail::put_le(out, std::uint32_t{0});
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) detail::put_le(out, m(i, j));
}

inline void write_dmat(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_dmat(out, m);
    if (!out) throw Error("write failed for " + path);
}

inline bool has_csv_extension(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline DenseMatrix read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::array<char, 4> head{};
    in.read(head.data(), 4);
    const bool binary = in.gcount() == 4 && head == kDmatMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_dmat(in, path) : parse_csv(in, path);
}

inline void write_matrix(const std::string& path, const DenseMatrix& m) {
    if (has_csv_extension(path))
        write_csv(path, m);
    else
        write_dmat(path, m);
}

}  // namespace rpca
