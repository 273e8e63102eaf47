#pragma once

#include <stdexcept>
#include <string>

namespace cmfa {

/// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Reading a file failed at the OS level (missing, unreadable, short write).
class IoError : public Error {
  public:
    using Error::Error;
};

/// Bad header, bad CRC, truncated payload, or otherwise corrupt image stream.
class MalformedImage : public Error {
  public:
    using Error::Error;
};

/// Stream is valid but not one of the formats this library reads
/// (PNG 8-bit gray/RGB, binary PGM/PPM). 16-bit rasters land here too.
class UnsupportedFormat : public Error {
  public:
    using Error::Error;
};

/// Two rasters that must share dimensions do not.
class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

/// Image smaller than an operation's minimum working size.
class ImageTooSmall : public Error {
  public:
    using Error::Error;
};

/// A requested intensity offset would push pixels outside [0, 255].
class OffsetWouldClip : public Error {
  public:
    using Error::Error;
};

/// Fewer than two usable components in a copy-move mask.
class NotEnoughRegions : public Error {
  public:
    using Error::Error;
};

/// A boundary band came out empty (region too thin or fully clipped).
class EmptyBand : public Error {
  public:
    using Error::Error;
};

/// A forgery spec places its footprints out of bounds or too close together.
class GeometryViolation : public Error {
  public:
    using Error::Error;
};

/// Corpus sampling could not place a forgery after the retry budget.
class SampleExhausted : public Error {
  public:
    using Error::Error;
};

/// A dataset directory does not match the declared layout.
class LayoutError : public Error {
  public:
    using Error::Error;
};

} // namespace cmfa
