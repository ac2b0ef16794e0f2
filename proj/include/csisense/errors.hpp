#pragma once

#include <stdexcept>
#include <string>

namespace csisense {

// Invalid value for a physical or numerical domain (bad window size,
// non-positive wavelength, label mismatch, ...).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data. byte_offset() points at the offending position
// when the source is a binary stream, or -1 when not applicable.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long long byte_offset = -1)
        : std::runtime_error(byte_offset >= 0
                                 ? what + " (byte offset " + std::to_string(byte_offset) + ")"
                                 : what),
          offset_(byte_offset) {}
    long long byte_offset() const { return offset_; }

private:
    long long offset_;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace csisense
