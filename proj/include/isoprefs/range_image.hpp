#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

// Grid-structured 3D data: one (x,y,z) sample per pixel plus a validity mask,
// optionally carrying a ground-truth anomaly mask for evaluation.

namespace isoprefs {

struct RangeImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> xyz;     // height*width*3, row-major (x,y,z per pixel)
    std::vector<std::uint8_t> valid;   // height*width
    std::vector<std::uint8_t> gt_mask; // height*width, or empty when absent

    RangeImage() = default;
    RangeImage(std::size_t h, std::size_t w)
        : height(h), width(w), xyz(h * w * 3, 0.0), valid(h * w, 1) {}

    std::size_t pixels() const { return height * width; }
    std::size_t index(std::size_t r, std::size_t c) const { return r * width + c; }
    double* point(std::size_t r, std::size_t c) { return xyz.data() + index(r, c) * 3; }
    const double* point(std::size_t r, std::size_t c) const { return xyz.data() + index(r, c) * 3; }
    bool is_valid(std::size_t r, std::size_t c) const { return valid[index(r, c)] != 0; }
    bool has_gt() const { return !gt_mask.empty(); }
};

// Binary format: magic "RIMG", little-endian u32 height and width, then
// height*width*3 little-endian f32 (x,y,z row-major), then height*width u8
// valid flags, then optionally height*width u8 ground-truth flags.
void write_range_image(const std::string& path, const RangeImage& image);
RangeImage read_range_image(const std::string& path);

} // namespace isoprefs
