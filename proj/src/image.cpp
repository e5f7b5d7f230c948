#include "mfhar/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "mfhar/error.hpp"
#include "mfhar/simd/kernels.hpp"

namespace mfhar {

Image::Image(int width, int height, std::vector<std::uint8_t> rgb) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw PreconditionError("image dimensions must be non-negative");
    }
    if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
        throw PreconditionError("image buffer size does not match width*height*3");
    }
    rgb_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(rgb));
}

Image Image::filled(int width, int height, std::uint8_t fill) {
    return Image(width, height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3, fill));
}

std::span<const std::uint8_t> Image::pixels() const noexcept {
    if (!rgb_) {
        return {};
    }
    return {rgb_->data(), rgb_->size()};
}

std::uint64_t Image::content_hash() const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int shift = 0; shift < 32; shift += 8) {
        mix(static_cast<std::uint8_t>(width_ >> shift));
        mix(static_cast<std::uint8_t>(height_ >> shift));
    }
    for (std::uint8_t byte : pixels()) {
        mix(byte);
    }
    return h;
}

namespace {

cv::Mat as_mat(const Image& img) {
    // OpenCV only reads from this header; the const_cast never leads to a write.
    return cv::Mat(img.height(), img.width(), CV_8UC3,
                   const_cast<std::uint8_t*>(img.pixels().data()));
}

Image render(const cv::Mat& region, const LetterboxTransform& t, std::uint8_t fill) {
    const int dst_w = static_cast<int>(std::lround(t.dst_size.w));
    const int dst_h = static_cast<int>(std::lround(t.dst_size.h));
    std::vector<std::uint8_t> out(static_cast<std::size_t>(dst_w) * dst_h * 3, fill);
    cv::Mat canvas(dst_h, dst_w, CV_8UC3, out.data());
    cv::Mat target = canvas(cv::Rect(t.pad_x, t.pad_y, t.scaled_w, t.scaled_h));
    if (region.cols == t.scaled_w && region.rows == t.scaled_h) {
        region.copyTo(target);
    } else {
        cv::resize(region, target, target.size(), 0, 0, cv::INTER_LINEAR);
    }
    return Image(dst_w, dst_h, std::move(out));
}

}  // namespace

Image letterbox_image(const Image& src, const LetterboxTransform& t, std::uint8_t fill) {
    if (src.empty()) {
        throw PreconditionError("cannot letterbox an empty image");
    }
    return render(as_mat(src), t, fill);
}

Image crop_to_canvas(const Image& src, const Box& box, Extent canvas, std::uint8_t fill) {
    if (src.empty()) {
        throw PreconditionError("cannot crop from an empty image");
    }
    const int x1 = std::clamp(static_cast<int>(std::floor(box.x())), 0, src.width() - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor(box.y())), 0, src.height() - 1);
    const int x2 = std::clamp(static_cast<int>(std::ceil(box.right())), x1 + 1, src.width());
    const int y2 = std::clamp(static_cast<int>(std::ceil(box.bottom())), y1 + 1, src.height());
    const cv::Mat region = as_mat(src)(cv::Rect(x1, y1, x2 - x1, y2 - y1));
    return render(region, classifier_crop_geometry(box, canvas), fill);
}

std::vector<float> to_planar_unit(const Image& img) {
    std::vector<float> planes(img.pixels().size());
    simd::rgb_to_planar(img.pixels(), planes, 1.0f / 255.0f);
    return planes;
}

}  // namespace mfhar
