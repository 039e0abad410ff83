#pragma once

#include <filesystem>
#include <string>

#include "amreg/image.hpp"

namespace amreg {

/// Reads a binary "P5" PGM with maxval 255. Header comments are skipped.
GrayImage load_pgm(const std::filesystem::path& path);
GrayImage decode_pgm(const std::string& bytes);

/// Writes "P5\n<cols> <rows>\n255\n" followed by the raw pixels.
void save_pgm(GrayView image, const std::filesystem::path& path);
std::string encode_pgm(GrayView image);

}  // namespace amreg
