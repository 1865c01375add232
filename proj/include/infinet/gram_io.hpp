#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "infinet/gram.hpp"

namespace infinet {

// IKGRAM01 binary layout (little-endian):
//   8 bytes   magic "IKGRAM01"
//   u64       n
//   u32       fingerprint length, then that many bytes
//   f64 * n(n+1)/2   upper triangle, row-major
//   u64       FNV-1a checksum of everything after the magic

inline constexpr char kGramMagic[8] = {'I', 'K', 'G', 'R', 'A', 'M', '0', '1'};

namespace detail {

template <typename T>
void append_raw(std::vector<unsigned char>& buf, const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T read_raw(const std::vector<unsigned char>& buf, std::size_t& offset, const std::string& path) {
    if (offset + sizeof(T) > buf.size()) throw DataError("gram file truncated: " + path);
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    offset += sizeof(T);
    return v;
}

}  // namespace detail

inline void save_gram(const std::string& path, const GramMatrix& gram) {
    const long n = gram.size();
    std::vector<unsigned char> payload;
    payload.reserve(static_cast<std::size_t>(n) * (n + 1) / 2 * 8 + gram.fingerprint.size() + 32);
    detail::append_raw(payload, static_cast<std::uint64_t>(n));
    detail::append_raw(payload, static_cast<std::uint32_t>(gram.fingerprint.size()));
    payload.insert(payload.end(), gram.fingerprint.begin(), gram.fingerprint.end());
    for (long i = 0; i < n; ++i)
        for (long j = i; j < n; ++j) detail::append_raw(payload, gram.values(i, j));
    const std::uint64_t checksum = fnv1a64(payload.data(), payload.size());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kGramMagic, sizeof(kGramMagic));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
    if (!out) throw DataError("write failed for " + path);
}

inline GramMatrix load_gram(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>()};
    if (bytes.size() < sizeof(kGramMagic) + 8 || std::memcmp(bytes.data(), kGramMagic, 8) != 0)
        throw DataError("not an IKGRAM01 file: " + path);

    const std::uint64_t stored_checksum = [&] {
        std::uint64_t v;
        std::memcpy(&v, bytes.data() + bytes.size() - 8, 8);
        return v;
    }();
    const std::uint64_t actual =
        fnv1a64(bytes.data() + 8, bytes.size() - 16);
    if (stored_checksum != actual) throw DataError("gram checksum mismatch: " + path);

    std::vector<unsigned char> payload(bytes.begin() + 8, bytes.end() - 8);
    std::size_t offset = 0;
    const auto n = static_cast<long>(detail::read_raw<std::uint64_t>(payload, offset, path));
    const auto fp_len = detail::read_raw<std::uint32_t>(payload, offset, path);
    if (offset + fp_len > payload.size()) throw DataError("gram file truncated: " + path);
    GramMatrix out;
    out.fingerprint.assign(payload.begin() + static_cast<long>(offset),
                           payload.begin() + static_cast<long>(offset + fp_len));
    offset += fp_len;
    out.values.resize(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = i; j < n; ++j) {
            const double v = detail::read_raw<double>(payload, offset, path);
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    if (offset != payload.size()) throw DataError("gram file has trailing bytes: " + path);
    return out;
}

}  // namespace infinet
