#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tokleak {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class NoResponseFound : public Error {
public:
    using Error::Error;
};

class InvalidSequence : public Error {
public:
    using Error::Error;
};

class OverheadTooLarge : public Error {
public:
    using Error::Error;
};

class CandidateExplosion : public Error {
public:
    using Error::Error;
};

// All randomness in the toolkit flows through this engine so that a fixed
// seed gives bit-identical results on every platform. std::mt19937_64 output
// is portable; the std::* distributions are not, so we roll our own draws.
using Rng = std::mt19937_64;

inline double next_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t next_below(Rng& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

inline bool next_bernoulli(Rng& rng, double p) {
    return next_double(rng) < p;
}

// Number of Unicode scalar values in a UTF-8 string. Counts every byte that
// is not a continuation byte; invalid sequences degrade to byte counting.
inline std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

// Byte length of the UTF-8 code point starting at s[pos].
inline std::size_t utf8_advance(std::string_view s, std::size_t pos) {
    std::size_t len = 1;
    while (pos + len < s.size() &&
           (static_cast<unsigned char>(s[pos + len]) & 0xC0) == 0x80) {
        ++len;
    }
    return len;
}

}  // namespace tokleak
