#include "isoprefs/range_image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "isoprefs/common.hpp"

namespace isoprefs {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ofstream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated range image: " + path);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

float get_f32(std::ifstream& in, const std::string& path) {
    const std::uint32_t bits = get_u32(in, path);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

void write_range_image(const std::string& path, const RangeImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("RIMG", 4);
    put_u32(out, static_cast<std::uint32_t>(image.height));
    put_u32(out, static_cast<std::uint32_t>(image.width));
    for (const double v : image.xyz) put_f32(out, static_cast<float>(v));
    out.write(reinterpret_cast<const char*>(image.valid.data()),
              static_cast<std::streamsize>(image.valid.size()));
    if (image.has_gt())
        out.write(reinterpret_cast<const char*>(image.gt_mask.data()),
                  static_cast<std::streamsize>(image.gt_mask.size()));
    if (!out) throw IoError("write failed: " + path);
}

RangeImage read_range_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "RIMG", 4) != 0)
        throw IoError("not a range image (bad magic): " + path);
    const std::uint32_t h = get_u32(in, path);
    const std::uint32_t w = get_u32(in, path);
    if (h == 0 || w == 0) throw IoError("empty range image: " + path);

    RangeImage image(h, w);
    for (double& v : image.xyz) v = get_f32(in, path);
    if (!in.read(reinterpret_cast<char*>(image.valid.data()),
                 static_cast<std::streamsize>(image.valid.size())))
        throw IoError("truncated range image: " + path);

    // The ground-truth mask is present iff bytes remain.
    std::vector<std::uint8_t> gt(image.pixels());
    in.read(reinterpret_cast<char*>(gt.data()), static_cast<std::streamsize>(gt.size()));
    const std::streamsize got = in.gcount();
    if (got == static_cast<std::streamsize>(gt.size())) {
        image.gt_mask = std::move(gt);
        if (in.peek() != std::ifstream::traits_type::eof())
            throw IoError("trailing bytes in range image: " + path);
    } else if (got != 0) {
        throw IoError("truncated ground-truth mask: " + path);
    }

    for (std::size_t i = 0; i < image.pixels(); ++i) {
        if (!image.valid[i]) continue;
        for (int a = 0; a < 3; ++a)
            if (!std::isfinite(image.xyz[i * 3 + a]))
                throw IoError("non-finite coordinates on a valid pixel: " + path);
    }
    return image;
}

} // namespace isoprefs
