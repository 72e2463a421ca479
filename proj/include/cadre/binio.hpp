#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

// Little-endian binary IO primitives shared by the dataset and checkpoint
// formats. Multi-byte values are composed bytewise so files are portable
// across hosts; doubles travel as their IEEE-754 bit patterns, which makes
// write/read round trips bit-exact.

namespace cadre {

class IOError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64(std::ostream& os, double v) {
    write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw IOError(std::string("truncated file while reading ") + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& is, const char* what) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw IOError(std::string("truncated file while reading ") + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is, const char* what) {
    return std::bit_cast<double>(read_u64(is, what));
}

inline void write_byte(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline std::uint8_t read_byte(std::istream& is, const char* what) {
    int c = is.get();
    if (c == std::istream::traits_type::eof())
        throw IOError(std::string("truncated file while reading ") + what);
    return static_cast<std::uint8_t>(c);
}

inline void write_magic(std::ostream& os, const char magic[4]) {
    os.write(magic, 4);
}

inline void expect_magic(std::istream& is, const char magic[4], const char* format_name) {
    char got[4];
    if (!is.read(got, 4) || got[0] != magic[0] || got[1] != magic[1] || got[2] != magic[2] ||
        got[3] != magic[3])
        throw IOError(std::string("not a ") + format_name + " file (bad magic)");
}

/// Writes through a sibling temp file and renames into place, so a crash
/// mid-write never leaves a half-written file at `path`.
template <typename WriteFn>
void atomic_write_file(const std::filesystem::path& path, WriteFn&& write_fn) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IOError("cannot open " + tmp.string() + " for writing");
        write_fn(os);
        os.flush();
        if (!os) throw IOError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IOError("cannot move " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

}  // namespace cadre
