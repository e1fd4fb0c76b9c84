#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ahpc {

std::uint64_t fnv1a64(std::string_view text);

// MSB-first bit packing: the first bit written lands in the most
// significant bit of the first byte. The final byte is zero-padded.
class BitWriter {
public:
    void put(std::uint64_t value, int nbits);
    void put_f64(double value); // IEEE-754 bit pattern, MSB first

    std::size_t bit_count() const { return bit_count_; }
    std::vector<std::uint8_t> finish();

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bit_count_ = 0;
};

class BitReader {
public:
    BitReader(std::span<const std::uint8_t> bytes, std::size_t nbits);

    std::uint64_t get(int nbits);
    double get_f64();
    std::size_t bits_left() const { return nbits_ - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t nbits_ = 0;
    std::size_t pos_ = 0;
};

} // namespace ahpc
