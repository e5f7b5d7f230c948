#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mfhar/error.hpp"
#include "mfhar/geometry.hpp"
#include "mfhar/simd/kernels.hpp"

using namespace mfhar;

namespace {

std::vector<Box> random_boxes(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> pos(-50, 650), ext(0.25, 300);
    std::vector<Box> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(pos(rng), pos(rng), ext(rng), ext(rng));
    return out;
}

}  // namespace

TEST(Simd, ScalarIsAlwaysAvailable) {
    const auto levels = simd::available_levels();
    ASSERT_FALSE(levels.empty());
    EXPECT_EQ(levels.front(), simd::Level::Scalar);
    EXPECT_NE(simd::table_for(simd::Level::Scalar), nullptr);
    const auto& active = simd::active();
    EXPECT_EQ(simd::table_for(active.level), &active);
}

TEST(Simd, IouKernelsMatchScalarExactlyIncludingTails) {
    std::mt19937_64 rng(21);
    const auto* ref = simd::table_for(simd::Level::Scalar);
    for (auto level : simd::available_levels()) {
        SCOPED_TRACE(std::string(simd::to_string(level)));
        const auto* table = simd::table_for(level);
        ASSERT_NE(table, nullptr);
        for (std::size_t n = 0; n <= 67; ++n) {
            const auto boxes = random_boxes(rng, n);
            const simd::BoxColumns cols(boxes);
            const Box query = random_boxes(rng, 1).front();
            std::vector<double> got(n + 1, -7.0), want(n + 1, -7.0);
            table->iou_one_to_many(query, cols.view(), got.data());
            ref->iou_one_to_many(query, cols.view(), want.data());
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_EQ(got[i], want[i]) << "index " << i << " of " << n;
                EXPECT_EQ(want[i], iou(query, boxes[i]));
            }
            EXPECT_EQ(got[n], -7.0) << "kernel wrote past the end";
        }
    }
}

TEST(Simd, IouKernelsHandleContainedAndIdenticalBoxes) {
    const std::vector<Box> boxes = {Box(0, 0, 10, 10), Box(2, 2, 3, 3), Box(0, 0, 10, 10), Box(100, 100, 1, 1),
                                    Box(5, 0, 10, 10)};
    const simd::BoxColumns cols(boxes);
    for (auto level : simd::available_levels()) {
        std::vector<double> out(boxes.size());
        simd::table_for(level)->iou_one_to_many(Box(0, 0, 10, 10), cols.view(), out.data());
        EXPECT_EQ(out[0], 1.0);
        EXPECT_EQ(out[1], 0.09);
        EXPECT_EQ(out[2], 1.0);
        EXPECT_EQ(out[3], 0.0);
        EXPECT_EQ(out[4], 50.0 / 150.0);
    }
}

TEST(Simd, PlanarKernelsAreBitIdentical) {
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<int> byte(0, 255);
    const auto* ref = simd::table_for(simd::Level::Scalar);
    for (auto level : simd::available_levels()) {
        SCOPED_TRACE(std::string(simd::to_string(level)));
        for (std::size_t px : {0, 1, 2, 7, 15, 16, 17, 31, 32, 33, 63, 64, 65, 100, 1000, 4099}) {
            std::vector<std::uint8_t> rgb(px * 3);
            for (auto& b : rgb) b = static_cast<std::uint8_t>(byte(rng));
            std::vector<float> got(px * 3 + 1, -1.0f), want(px * 3 + 1, -1.0f);
            simd::table_for(level)->rgb_to_planar(rgb.data(), px, got.data(), 1.0f / 255.0f);
            ref->rgb_to_planar(rgb.data(), px, want.data(), 1.0f / 255.0f);
            EXPECT_EQ(std::memcmp(got.data(), want.data(), got.size() * sizeof(float)), 0) << px << " pixels";
            for (std::size_t i = 0; i < px; ++i) {
                EXPECT_EQ(want[i], float(rgb[3 * i]) * (1.0f / 255.0f));
                EXPECT_EQ(want[px + i], float(rgb[3 * i + 1]) * (1.0f / 255.0f));
                EXPECT_EQ(want[2 * px + i], float(rgb[3 * i + 2]) * (1.0f / 255.0f));
            }
        }
    }
}

TEST(Simd, WrappersCheckSpanSizes) {
    const simd::BoxColumns cols(std::vector<Box>{Box(0, 0, 1, 1), Box(1, 1, 1, 1)});
    std::vector<double> short_out(1);
    EXPECT_THROW(simd::iou_one_to_many(Box(0, 0, 1, 1), cols.view(), short_out), PreconditionError);
    std::vector<std::uint8_t> rgb(7);
    std::vector<float> planes(7);
    EXPECT_THROW(simd::rgb_to_planar(rgb, planes, 1.0f), PreconditionError);
}
