#include "rotip/image_io.hpp"

#include "rotip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace rotip {

namespace {

unsigned char to_byte(double v)
{
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

std::string encode_ppm(const TactileImage& img)
{
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels)
        out.push_back(static_cast<char>(to_byte(v)));
    return out;
}

std::string encode_pgm(int width, int height, const std::vector<double>& values)
{
    if (values.size() != static_cast<std::size_t>(width) * height)
        throw DimensionMismatch("PGM value count does not match dimensions");
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for (double v : values)
        out.push_back(static_cast<char>(to_byte(v)));
    return out;
}

TactileImage decode_ppm(const std::string& bytes)
{
    std::istringstream in(bytes);
    auto next_token = [&in]() {
        std::string tok;
        while (in >> std::ws && in.peek() == '#')
            in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        in >> tok;
        return tok;
    };
    if (next_token() != "P6")
        throw Error("not a binary PPM (P6) image");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stoi(next_token());
    } catch (const std::exception&) {
        throw Error("malformed PPM header");
    }
    if (w <= 0 || h <= 0 || maxval != 255)
        throw Error("unsupported PPM dimensions or maxval");
    in.get(); // single whitespace before the raster
    const std::size_t offset = static_cast<std::size_t>(in.tellg());
    const std::size_t n = static_cast<std::size_t>(w) * h * 3;
    if (bytes.size() < offset + n)
        throw Error("truncated PPM raster");
    TactileImage img(w, h);
    for (std::size_t k = 0; k < n; ++k)
        img.pixels[k] = static_cast<unsigned char>(bytes[offset + k]) / 255.0;
    return img;
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_ppm(const std::filesystem::path& path, const TactileImage& img) { write_file(path, encode_ppm(img)); }

TactileImage read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

} // namespace rotip
