#include "mfhar/frame_source.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "mfhar/error.hpp"
#include "text_util.hpp"

namespace mfhar {

namespace {

std::int64_t timestamp_for(std::int64_t index, double fps) {
    return static_cast<std::int64_t>(std::llround(static_cast<double>(index) * 1000.0 / fps));
}

std::uint32_t load_u32le(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

void store_u32le(unsigned char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

}  // namespace

SyntheticSource::SyntheticSource(std::string stream_id, int width, int height, std::uint8_t gray,
                                 std::int64_t frames, double fps)
    : stream_id_(std::move(stream_id)), image_(Image::filled(width, height, gray)), frames_(frames), fps_(fps) {}

std::optional<Frame> SyntheticSource::next() {
    if (cursor_ >= frames_) return std::nullopt;
    const auto i = cursor_++;
    return Frame{stream_id_, i, timestamp_for(i, fps_), image_};
}

DirectorySource::DirectorySource(std::string stream_id, const std::filesystem::path& dir, double fps,
                                 std::optional<std::int64_t> limit)
    : stream_id_(std::move(stream_id)), dir_(dir), fps_(fps) {
    const auto manifest = dir / "manifest.txt";
    detail::for_each_record(detail::read_text_file(manifest),
                            [&](std::size_t line_no, const std::vector<std::string_view>& f) {
                                const std::string where = manifest.string() + " line " + std::to_string(line_no);
                                if (f.size() != 2) throw ParseError(where, "expected '<frame_index> <file>'");
                                const auto index = detail::parse_int(f[0], where, "frame index");
                                if (index < 0) throw ParseError(where, "frame index must be non-negative");
                                if (!entries_.empty() && index <= entries_.back().first) {
                                    throw ParseError(where, "frame indices must increase");
                                }
                                entries_.emplace_back(index, std::string(f[1]));
                            });
    if (limit && static_cast<std::int64_t>(entries_.size()) > *limit) {
        entries_.resize(static_cast<std::size_t>(*limit));
    }
}

std::optional<Frame> DirectorySource::next() {
    if (cursor_ >= entries_.size()) return std::nullopt;
    const auto& [index, file] = entries_[cursor_++];
    const auto path = dir_ / file;
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) {
        throw Error("cannot decode image " + path.string() + " (frame " + stream_id_ + "#" +
                    std::to_string(index) + ")");
    }
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    std::vector<std::uint8_t> px(rgb.total() * 3);
    for (int r = 0; r < rgb.rows; ++r) {
        std::memcpy(px.data() + std::size_t(r) * rgb.cols * 3, rgb.ptr(r), std::size_t(rgb.cols) * 3);
    }
    return Frame{stream_id_, index, timestamp_for(index, fps_), Image(rgb.cols, rgb.rows, std::move(px))};
}

std::optional<RawFrame> read_raw_frame(std::istream& in) {
    unsigned char header[16];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    const auto got = in.gcount();
    if (got == 0) return std::nullopt;
    if (got != sizeof header) throw ParseError("raw header", "truncated header");
    if (std::memcmp(header, kRawMagic, 4) != 0) throw ParseError("raw header", "bad magic, expected MFHR");
    const auto w = load_u32le(header + 4);
    const auto h = load_u32le(header + 8);
    const auto index = load_u32le(header + 12);
    const std::string where = "raw frame " + std::to_string(index);
    if (w == 0 || h == 0) throw ParseError(where, "zero frame size");
    if (w > 1u << 15 || h > 1u << 15) throw ParseError(where, "frame size exceeds 32768");
    std::vector<std::uint8_t> px(std::size_t(w) * h * 3);
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (static_cast<std::size_t>(in.gcount()) != px.size()) throw ParseError(where, "truncated payload");
    return RawFrame{index, Image(static_cast<int>(w), static_cast<int>(h), std::move(px))};
}

void write_raw_frame(std::ostream& out, const Image& image, std::uint32_t frame_index) {
    unsigned char header[16];
    std::memcpy(header, kRawMagic, 4);
    store_u32le(header + 4, static_cast<std::uint32_t>(image.width()));
    store_u32le(header + 8, static_cast<std::uint32_t>(image.height()));
    store_u32le(header + 12, frame_index);
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    const auto px = image.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

RawStreamSource::RawStreamSource(std::string stream_id, const std::filesystem::path& path, double fps,
                                 std::optional<std::int64_t> limit)
    : stream_id_(std::move(stream_id)), fps_(fps), limit_(limit) {
    if (path == "-") {
        in_ = &std::cin;
    } else {
        owned_ = std::make_unique<std::ifstream>(path, std::ios::binary);
        if (!*owned_) throw Error("cannot open raw stream " + path.string());
        in_ = owned_.get();
    }
}

RawStreamSource::~RawStreamSource() = default;

std::optional<Frame> RawStreamSource::next() {
    if (done_ || (limit_ && produced_ >= *limit_)) return std::nullopt;
    std::optional<RawFrame> raw;
    try {
        raw = read_raw_frame(*in_);
    } catch (...) {
        // A framing error leaves the byte stream unsynchronized.
        done_ = true;
        throw;
    }
    if (!raw) {
        done_ = true;
        return std::nullopt;
    }
    ++produced_;
    const std::int64_t index = raw->frame_index;
    return Frame{stream_id_, index, timestamp_for(index, fps_), std::move(raw->image)};
}

std::unique_ptr<FrameSource> open_source(const StreamConfig& stream, const ValidatedConfig& config,
                                         std::optional<std::int64_t> frames) {
    const auto& s = stream.source;
    switch (s.kind) {
        case SourceConfig::Kind::Synthetic:
            return std::make_unique<SyntheticSource>(stream.id, s.width, s.height, static_cast<std::uint8_t>(s.gray),
                                                     frames.value_or(s.frames), s.fps);
        case SourceConfig::Kind::Directory:
            return std::make_unique<DirectorySource>(stream.id, config.resolve(s.path), s.fps, frames);
        case SourceConfig::Kind::Raw:
            return std::make_unique<RawStreamSource>(stream.id, config.resolve(s.path), s.fps, frames);
    }
    throw PreconditionError("unknown source kind");
}

}  // namespace mfhar
