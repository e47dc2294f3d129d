#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "daf/evaluation.hpp"
#include "daf/types.hpp"

namespace daf {

enum class FileFormat { binary, csv };

inline FileFormat parse_file_format(std::string_view text) {
    if (text == "binary") return FileFormat::binary;
    if (text == "csv") return FileFormat::csv;
    throw InvalidParameterError("format must be \"binary\" or \"csv\", got \"" +
                                std::string(text) + "\"");
}

inline std::string_view to_string(FileFormat format) {
    return format == FileFormat::binary ? "binary" : "csv";
}

namespace detail {

inline constexpr char kFeatureMagic[4] = {'D', 'A', 'F', '1'};

inline std::uint32_t read_u32le(const unsigned char* b) {
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void append_u32le(std::uint32_t v, std::string& out) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(path + ": cannot open file");
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0) throw LoadError(path + ": cannot determine file size");
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
        throw LoadError(path + ": read failed");
    }
    return bytes;
}

inline std::string_view strip(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() &&
           (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

inline double parse_double(std::string_view token, const std::string& path,
                           std::size_t line_number) {
    token = strip(token);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size() || token.empty()) {
        throw LoadError(path + ": line " + std::to_string(line_number) +
                        ": cannot parse value \"" + std::string(token) + "\"");
    }
    if (!std::isfinite(value)) {
        throw LoadError(path + ": line " + std::to_string(line_number) +
                        ": non-finite value \"" + std::string(token) + "\"");
    }
    return value;
}

inline std::int64_t parse_int(std::string_view token, const std::string& path,
                              std::size_t line_number) {
    token = strip(token);
    std::int64_t value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size() || token.empty()) {
        throw LoadError(path + ": line " + std::to_string(line_number) +
                        ": cannot parse integer \"" + std::string(token) + "\"");
    }
    return value;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline FeatureMatrix load_features_binary(const std::string& path, Role role) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() < 12) {
        throw LoadError(path + ": truncated header at byte " + std::to_string(bytes.size()) +
                        " (need 12 bytes: magic + counts)");
    }
    if (std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
        throw LoadError(path + ": bad magic at byte 0 (expected \"DAF1\")");
    }
    const std::uint32_t n = read_u32le(bytes.data() + 4);
    const std::uint32_t m = read_u32le(bytes.data() + 8);
    const std::uint64_t values = static_cast<std::uint64_t>(n) * m;
    const std::uint64_t expected = 12 + values * 4;
    if (bytes.size() < expected) {
        throw LoadError(path + ": truncated payload at byte " + std::to_string(bytes.size()) +
                        " (header declares " + std::to_string(n) + "x" + std::to_string(m) +
                        " = " + std::to_string(expected) + " bytes)");
    }
    if (bytes.size() > expected) {
        throw LoadError(path + ": trailing data at byte " + std::to_string(expected));
    }

    FeatureMatrix features;
    features.role = role;
    features.values = Matrix(n, m);
    double* out = features.values.data();
    for (std::uint64_t i = 0; i < values; ++i) {
        const std::uint64_t offset = 12 + i * 4;
        const float value = std::bit_cast<float>(read_u32le(bytes.data() + offset));
        if (!std::isfinite(value)) {
            throw LoadError(path + ": non-finite value at byte " + std::to_string(offset));
        }
        out[i] = value;
    }
    return features;
}

inline FeatureMatrix load_features_csv(const std::string& path, Role role) {
    std::ifstream in(path);
    if (!in) throw LoadError(path + ": cannot open file");

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (strip(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (rows == 0) {
            cols = fields.size();
        } else if (fields.size() != cols) {
            throw LoadError(path + ": line " + std::to_string(line_number) + " has " +
                            std::to_string(fields.size()) + " values, expected " +
                            std::to_string(cols));
        }
        for (const auto field : fields) {
            values.push_back(parse_double(field, path, line_number));
        }
        ++rows;
    }
    if (rows == 0) throw LoadError(path + ": no data rows");

    FeatureMatrix features;
    features.role = role;
    features.values = Matrix(rows, cols);
    std::copy(values.begin(), values.end(), features.values.data());
    return features;
}

}  // namespace detail

/// Reads a feature matrix. Binary layout: magic "DAF1", then
/// little-endian uint32 row count and column count, then row-major
/// little-endian float32 values. CSV layout: one comma-separated row of
/// decimal values per entity. Rejects non-finite values either way.
inline FeatureMatrix load_features(const std::string& path, FileFormat format, Role role) {
    return format == FileFormat::binary ? detail::load_features_binary(path, role)
                                        : detail::load_features_csv(path, role);
}

/// Writes a feature matrix in the format load_features reads. Binary
/// storage is 32-bit floats; values already representable in 32 bits
/// survive a save/load round trip bit for bit. CSV uses the shortest
/// decimal form that reparses to the same double.
inline void save_features(const std::string& path, const FeatureMatrix& features,
                          FileFormat format) {
    std::ofstream out(path, format == FileFormat::binary
                                ? std::ios::binary | std::ios::trunc
                                : std::ios::trunc);
    if (!out) throw Error(path + ": cannot open file for writing");

    const Matrix& m = features.values;
    if (format == FileFormat::binary) {
        std::string buffer;
        buffer.reserve(12 + m.rows() * m.cols() * 4);
        buffer.append(detail::kFeatureMagic, 4);
        detail::append_u32le(static_cast<std::uint32_t>(m.rows()), buffer);
        detail::append_u32le(static_cast<std::uint32_t>(m.cols()), buffer);
        for (std::size_t i = 0; i < m.rows() * m.cols(); ++i) {
            detail::append_u32le(std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i])),
                                 buffer);
        }
        out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    } else {
        char digits[64];
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                const auto [end, ec] = std::to_chars(digits, digits + sizeof(digits), m(r, c));
                if (ec != std::errc()) throw Error(path + ": value formatting failed");
                if (c > 0) out.put(',');
                out.write(digits, end - digits);
            }
            out.put('\n');
        }
    }
    if (!out) throw Error(path + ": write failed");
}

/// Reads the label table: header "index,person_id,camera_id", then one
/// row per entity whose index column must equal its row position (this
/// rejects gaps, duplicates and reordering in one check).
inline GroundTruth load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(path + ": cannot open file");

    std::string line;
    std::size_t line_number = 0;
    bool saw_header = false;
    GroundTruth truth;
    while (std::getline(in, line)) {
        ++line_number;
        const auto stripped = detail::strip(line);
        if (stripped.empty()) continue;
        if (!saw_header) {
            if (stripped != "index,person_id,camera_id") {
                throw LoadError(path + ": line " + std::to_string(line_number) +
                                ": expected header \"index,person_id,camera_id\"");
            }
            saw_header = true;
            continue;
        }
        const auto fields = detail::split_csv_line(stripped);
        if (fields.size() != 3) {
            throw LoadError(path + ": line " + std::to_string(line_number) + " has " +
                            std::to_string(fields.size()) + " columns, expected 3");
        }
        const std::int64_t index = detail::parse_int(fields[0], path, line_number);
        if (index != static_cast<std::int64_t>(truth.size())) {
            throw LoadError(path + ": line " + std::to_string(line_number) + ": index " +
                            std::to_string(index) + " does not match row position " +
                            std::to_string(truth.size()));
        }
        truth.push_back({detail::parse_int(fields[1], path, line_number),
                         detail::parse_int(fields[2], path, line_number)});
    }
    if (!saw_header) throw LoadError(path + ": missing header");
    return truth;
}

}  // namespace daf
