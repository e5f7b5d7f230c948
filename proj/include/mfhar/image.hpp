#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfhar/geometry.hpp"

namespace mfhar {

/// Immutable interleaved 8-bit RGB image. Pixel storage is shared, so copies
/// are cheap.
class Image {
public:
    Image() = default;
    Image(int width, int height, std::vector<std::uint8_t> rgb);

    /// Image of the given size with every channel set to `fill`.
    static Image filled(int width, int height, std::uint8_t fill);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }
    Extent extent() const noexcept { return Extent{double(width_), double(height_)}; }
    std::span<const std::uint8_t> pixels() const noexcept;

    /// FNV-1a hash of dimensions and pixel bytes.
    std::uint64_t content_hash() const noexcept;

private:
    int width_ = 0;
    int height_ = 0;
    std::shared_ptr<const std::vector<std::uint8_t>> rgb_;
};

/// A decoded frame from one stream.
struct Frame {
    std::string stream_id;
    std::int64_t index = 0;
    std::int64_t timestamp_ms = 0;
    Image image;
};

/// Renders `src` into the transform's destination canvas (bilinear resize,
/// `fill` in the padding).
Image letterbox_image(const Image& src, const LetterboxTransform& t, std::uint8_t fill);

/// Cuts `box` out of `src` and letterboxes it into `canvas` (classifier input).
Image crop_to_canvas(const Image& src, const Box& box, Extent canvas, std::uint8_t fill);

/// Planar float tensor (3 x H x W) of `img` scaled to [0, 1], via the active SIMD kernel.
std::vector<float> to_planar_unit(const Image& img);

}  // namespace mfhar
