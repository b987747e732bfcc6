#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "compactseg/fields.hpp"

namespace compactseg::io {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Reads an 8- or 16-bit PNG (any color type, converted to gray) or a binary
/// PGM (P5). Values are scaled to [0,1].
ScalarField read_image(const std::filesystem::path& path);

/// Reads an image and keeps pixels brighter than mid-gray.
BinaryMask read_mask(const std::filesystem::path& path);

/// Writes values clamped to [0,1] as 8-bit gray; format follows the
/// extension (.png or .pgm).
void write_image(const std::filesystem::path& path, const ScalarField& field);

/// Writes a mask as 0/255.
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace compactseg::io
