#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "mfhar/config.hpp"
#include "mfhar/temporal.hpp"

namespace mfhar {

/// One line of the event log.
struct EventLogEntry {
    /// Wall-clock milliseconds since the epoch; 0 under the fixed clock.
    std::int64_t timestamp_ms = 0;
    /// Source timestamp of the frame that closed the window.
    std::int64_t frame_timestamp_ms = 0;
    ActionEvent event;
    /// Verdicts for the event's action inside the window.
    std::vector<DetectionVerdict> support;

    /// Single-line JSON with sorted keys.
    std::string to_json() const;
    /// Dedup key for at-least-once delivery: stream:action:window_end.
    std::string idempotency_key() const;
};

struct SinkStats {
    std::int64_t delivered = 0;
    /// Entries lost to a full queue.
    std::int64_t dropped_overflow = 0;
    /// Entries lost after exhausting retries.
    std::int64_t dropped_failed = 0;
    std::int64_t retries = 0;

    std::int64_t dropped() const noexcept { return dropped_overflow + dropped_failed; }
};

class EventSink {
public:
    virtual ~EventSink() = default;

    /// Must not block for long; slow sinks queue.
    virtual void publish(const EventLogEntry& entry) = 0;
    /// Delivers everything accepted so far, then stops.
    virtual void close() {}
    virtual SinkStats stats() const = 0;
};

/// Synchronous JSON-lines writer; safe to share between stream contexts.
class JsonlSink final : public EventSink {
public:
    /// Writes to `out`, which must outlive the sink.
    explicit JsonlSink(std::ostream& out);
    explicit JsonlSink(const std::filesystem::path& path);
    ~JsonlSink() override;

    void publish(const EventLogEntry& entry) override;
    void close() override;
    SinkStats stats() const override;

private:
    std::unique_ptr<std::ostream> owned_;
    std::ostream* out_;
    mutable std::mutex mu_;
    SinkStats stats_;
};

/// Sends one serialized entry; true when delivered.
using Transport = std::function<bool(const EventLogEntry& entry, const std::string& body)>;

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff{50};
};

/// Bounded queue drained by one worker thread. When the queue is full the new
/// entry is dropped and counted; producers never block.
class QueuedSink final : public EventSink {
public:
    QueuedSink(Transport transport, std::size_t capacity, RetryPolicy retry);
    ~QueuedSink() override;

    void publish(const EventLogEntry& entry) override;
    void close() override;
    SinkStats stats() const override;

private:
    void work();

    Transport transport_;
    std::size_t capacity_;
    RetryPolicy retry_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<EventLogEntry> queue_;
    bool closing_ = false;
    SinkStats stats_;
    std::thread worker_;
};

/// HTTP POST of the entry JSON to `url` (http://host[:port]/path), with an
/// Idempotency-Key header. 2xx counts as delivered.
Transport http_transport(const std::string& url, std::chrono::milliseconds timeout = std::chrono::seconds(2));

/// Forwards entries whose action is in `actions` (all when empty).
class FilteredSink final : public EventSink {
public:
    FilteredSink(std::unique_ptr<EventSink> inner, std::vector<std::string> actions);

    void publish(const EventLogEntry& entry) override;
    void close() override { inner_->close(); }
    SinkStats stats() const override { return inner_->stats(); }

private:
    std::unique_ptr<EventSink> inner_;
    std::set<std::string> actions_;
};

std::unique_ptr<EventSink> make_sink(const SinkConfig& sink, const ValidatedConfig& config);

}  // namespace mfhar
