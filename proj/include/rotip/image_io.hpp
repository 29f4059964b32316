#pragma once

#include "rotip/render.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rotip {

/// Binary PPM (P6, maxval 255); channels stored as round(c × 255).
std::string encode_ppm(const TactileImage& img);
TactileImage decode_ppm(const std::string& bytes);

/// Binary PGM (P5, maxval 255) of values in [0, 1].
std::string encode_pgm(int width, int height, const std::vector<double>& values);

void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

void write_ppm(const std::filesystem::path& path, const TactileImage& img);
TactileImage read_ppm(const std::filesystem::path& path);

} // namespace rotip
