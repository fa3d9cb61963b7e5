// rwvote - small file helpers shared by the library sources

#ifndef RWVOTE_IO_UTIL_HPP
#define RWVOTE_IO_UTIL_HPP

#include <rwvote/error.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace rwvote::detail {

inline std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path,
                                                  std::size_t limit = static_cast<std::size_t>(-1)) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        throw error(error_code::not_found, path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error(error_code::io_error, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> out;
    char buf[65536];
    while (out.size() < limit && in) {
        const std::size_t want = std::min<std::size_t>(sizeof(buf), limit - out.size());
        in.read(buf, static_cast<std::streamsize>(want));
        out.insert(out.end(), buf, buf + in.gcount());
    }
    if (in.bad()) {
        throw error(error_code::io_error, "read failed: " + path.string());
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    const auto bytes = read_binary_file(path);
    return {bytes.begin(), bytes.end()};
}

inline void write_binary_file(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw error(error_code::io_error, "cannot create " + path.string());
    }
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw error(error_code::io_error, "write failed: " + path.string());
    }
}

} // namespace rwvote::detail

#endif // RWVOTE_IO_UTIL_HPP
