#include "ahpc/bitstream.hpp"

#include <bit>
#include <cstring>

#include "ahpc/errors.hpp"

namespace ahpc {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void BitWriter::put(std::uint64_t value, int nbits) {
    for (int i = nbits - 1; i >= 0; --i) {
        const std::size_t byte = bit_count_ >> 3;
        if (byte == bytes_.size()) bytes_.push_back(0);
        if ((value >> i) & 1u) bytes_[byte] |= static_cast<std::uint8_t>(0x80u >> (bit_count_ & 7));
        ++bit_count_;
    }
}

void BitWriter::put_f64(double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    put(bits, 64);
}

std::vector<std::uint8_t> BitWriter::finish() { return std::move(bytes_); }

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::size_t nbits)
    : bytes_(bytes), nbits_(nbits) {
    if (bytes.size() * 8 < nbits) fail(Errc::truncated, "bit buffer shorter than declared");
}

std::uint64_t BitReader::get(int nbits) {
    if (bits_left() < static_cast<std::size_t>(nbits))
        fail(Errc::truncated, "payload exhausted");
    std::uint64_t v = 0;
    for (int i = 0; i < nbits; ++i) {
        const std::uint8_t byte = bytes_[pos_ >> 3];
        v = (v << 1) | ((byte >> (7 - (pos_ & 7))) & 1u);
        ++pos_;
    }
    return v;
}

double BitReader::get_f64() {
    const std::uint64_t bits = get(64);
    double value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

} // namespace ahpc
