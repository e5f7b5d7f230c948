#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "mfhar/config.hpp"
#include "mfhar/image.hpp"

namespace mfhar {

/// Pull-based frame producer for one stream.
class FrameSource {
public:
    virtual ~FrameSource() = default;

    /// Next frame, or nullopt at end of stream. A frame that cannot be decoded
    /// throws after the source has advanced past it, so callers may continue.
    virtual std::optional<Frame> next() = 0;
};

/// `frames` copies of one uniform image, indices 0..frames-1.
class SyntheticSource final : public FrameSource {
public:
    SyntheticSource(std::string stream_id, int width, int height, std::uint8_t gray, std::int64_t frames,
                    double fps);

    std::optional<Frame> next() override;

private:
    std::string stream_id_;
    Image image_;
    std::int64_t frames_;
    double fps_;
    std::int64_t cursor_ = 0;
};

/// Image files listed in `<dir>/manifest.txt` as `<frame_index> <file>` lines.
class DirectorySource final : public FrameSource {
public:
    DirectorySource(std::string stream_id, const std::filesystem::path& dir, double fps,
                    std::optional<std::int64_t> limit = std::nullopt);

    std::optional<Frame> next() override;

private:
    std::string stream_id_;
    std::filesystem::path dir_;
    double fps_;
    std::vector<std::pair<std::int64_t, std::string>> entries_;
    std::size_t cursor_ = 0;
};

/// Raw frame protocol: per frame a 16-byte little-endian header
/// ("MFHR", u32 width, u32 height, u32 frame_index) then width*height*3 RGB bytes.
inline constexpr char kRawMagic[4] = {'M', 'F', 'H', 'R'};

struct RawFrame {
    std::uint32_t frame_index = 0;
    Image image;
};

/// Reads one frame. Returns nullopt on clean end of input; throws ParseError
/// on a bad magic, zero size or truncated payload.
std::optional<RawFrame> read_raw_frame(std::istream& in);
void write_raw_frame(std::ostream& out, const Image& image, std::uint32_t frame_index);

/// Raw-protocol reader over a file, or stdin when `path` is "-".
class RawStreamSource final : public FrameSource {
public:
    RawStreamSource(std::string stream_id, const std::filesystem::path& path, double fps,
                    std::optional<std::int64_t> limit = std::nullopt);
    ~RawStreamSource() override;

    std::optional<Frame> next() override;

private:
    std::string stream_id_;
    std::unique_ptr<std::istream> owned_;
    std::istream* in_;
    double fps_;
    std::optional<std::int64_t> limit_;
    std::int64_t produced_ = 0;
    bool done_ = false;
};

/// Builds the source for `stream`. `frames` overrides the synthetic frame count
/// and caps the other kinds.
std::unique_ptr<FrameSource> open_source(const StreamConfig& stream, const ValidatedConfig& config,
                                         std::optional<std::int64_t> frames = std::nullopt);

}  // namespace mfhar
