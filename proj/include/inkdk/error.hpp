#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inkdk {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define INKDK_DEFINE_ERROR(Name)                 \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

INKDK_DEFINE_ERROR(InvalidInk);
INKDK_DEFINE_ERROR(InvalidArgument);
INKDK_DEFINE_ERROR(DegenerateInk);
INKDK_DEFINE_ERROR(InvalidSpacing);
INKDK_DEFINE_ERROR(UnrepresentableValue);
INKDK_DEFINE_ERROR(FormatError);
INKDK_DEFINE_ERROR(InvalidAlpha);
INKDK_DEFINE_ERROR(IndexOutOfRange);
INKDK_DEFINE_ERROR(TooShort);
INKDK_DEFINE_ERROR(NotUnit);
INKDK_DEFINE_ERROR(OutOfGrid);
INKDK_DEFINE_ERROR(DimensionMismatch);
INKDK_DEFINE_ERROR(ShapeError);
INKDK_DEFINE_ERROR(ShapeMismatch);
INKDK_DEFINE_ERROR(ConfigError);
INKDK_DEFINE_ERROR(IoError);

#undef INKDK_DEFINE_ERROR

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t offset, const std::string& reason)
        : Error("malformed POT record at byte " + std::to_string(offset) + ": " + reason),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SyntaxError : public Error {
public:
    explicit SyntaxError(const std::string& token)
        : Error("unexpected token '" + token + "' in architecture string"), token_(token) {}

    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

} // namespace inkdk
