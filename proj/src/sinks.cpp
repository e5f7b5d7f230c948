#include "mfhar/sinks.hpp"

#include <fstream>
#include <ostream>

#include <httplib.h>
#include <json.hpp>

#include "mfhar/error.hpp"

namespace mfhar {

using nlohmann::json;

std::string EventLogEntry::to_json() const {
    json support_json = json::array();
    for (const auto& v : support) {
        const auto& b = v.detection.box;
        support_json.push_back({{"box", {b.x(), b.y(), b.w(), b.h()}},
                                {"confidence", v.detection.confidence},
                                {"detection_index", v.detection_index},
                                {"form", std::string(to_string(v.detection.form))},
                                {"positive", v.positive},
                                {"score", v.score},
                                {"top_label", v.top_label}});
    }
    json count = nullptr;
    if (event.count) {
        count = {{"compliant", event.count->compliant},
                 {"count", event.count->count},
                 {"direction", std::string(to_string(event.count->direction))}};
    }
    const json j = {{"timestamp_ms", timestamp_ms},
                    {"frame_timestamp_ms", frame_timestamp_ms},
                    {"stream_id", event.stream_id},
                    {"action", event.action.str()},
                    {"state", std::string(to_string(event.state))},
                    {"window_start", event.window_start},
                    {"window_end", event.window_end},
                    {"vote_count", event.vote_count},
                    {"window_size", event.window_size},
                    {"count", count},
                    {"support", support_json}};
    return j.dump();
}

std::string EventLogEntry::idempotency_key() const {
    return event.stream_id + ":" + event.action.str() + ":" + std::to_string(event.window_end);
}

JsonlSink::JsonlSink(std::ostream& out) : out_(&out) {}

JsonlSink::JsonlSink(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    owned_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*owned_) throw Error("cannot open event log " + path.string());
    out_ = owned_.get();
}

JsonlSink::~JsonlSink() = default;

void JsonlSink::publish(const EventLogEntry& entry) {
    const auto line = entry.to_json() + "\n";
    std::lock_guard lock(mu_);
    *out_ << line;
    out_->flush();
    if (*out_) {
        ++stats_.delivered;
    } else {
        ++stats_.dropped_failed;
    }
}

void JsonlSink::close() {
    std::lock_guard lock(mu_);
    out_->flush();
}

SinkStats JsonlSink::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

QueuedSink::QueuedSink(Transport transport, std::size_t capacity, RetryPolicy retry)
    : transport_(std::move(transport)), capacity_(capacity), retry_(retry) {
    if (capacity_ == 0) throw PreconditionError("sink queue capacity must be >= 1");
    worker_ = std::thread([this] { work(); });
}

QueuedSink::~QueuedSink() { close(); }

void QueuedSink::publish(const EventLogEntry& entry) {
    {
        std::lock_guard lock(mu_);
        if (closing_ || queue_.size() >= capacity_) {
            ++stats_.dropped_overflow;
            return;
        }
        queue_.push_back(entry);
    }
    cv_.notify_one();
}

void QueuedSink::close() {
    {
        std::lock_guard lock(mu_);
        closing_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
}

SinkStats QueuedSink::stats() const {
    std::lock_guard lock(mu_);
    return stats_;
}

void QueuedSink::work() {
    for (;;) {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return closing_ || !queue_.empty(); });
        if (queue_.empty()) return;
        const EventLogEntry entry = std::move(queue_.front());
        queue_.pop_front();
        lock.unlock();

        const auto body = entry.to_json();
        bool ok = false;
        auto backoff = retry_.backoff;
        for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
                std::lock_guard retry_lock(mu_);
                ++stats_.retries;
            }
            try {
                ok = transport_(entry, body);
            } catch (const std::exception&) {
                ok = false;
            }
            if (ok) break;
        }
        lock.lock();
        ++(ok ? stats_.delivered : stats_.dropped_failed);
    }
}

Transport http_transport(const std::string& url, std::chrono::milliseconds timeout) {
    constexpr std::string_view kScheme = "http://";
    if (!std::string_view(url).starts_with(kScheme)) {
        throw PreconditionError("webhook url must start with http://: " + url);
    }
    const auto slash = url.find('/', kScheme.size());
    const std::string origin = url.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : url.substr(slash);
    auto client = std::make_shared<httplib::Client>(origin);
    client->set_connection_timeout(timeout);
    client->set_read_timeout(timeout);
    client->set_write_timeout(timeout);
    // The transport runs on the single worker thread of its QueuedSink.
    return [client, path](const EventLogEntry& entry, const std::string& body) {
        const httplib::Headers headers = {{"Idempotency-Key", entry.idempotency_key()}};
        const auto res = client->Post(path, headers, body, "application/json");
        return res && res->status >= 200 && res->status < 300;
    };
}

FilteredSink::FilteredSink(std::unique_ptr<EventSink> inner, std::vector<std::string> actions)
    : inner_(std::move(inner)), actions_(actions.begin(), actions.end()) {}

void FilteredSink::publish(const EventLogEntry& entry) {
    if (actions_.empty() || actions_.contains(entry.event.action.str())) inner_->publish(entry);
}

std::unique_ptr<EventSink> make_sink(const SinkConfig& sink, const ValidatedConfig& config) {
    std::unique_ptr<EventSink> inner;
    if (sink.kind == "log") {
        inner = std::make_unique<JsonlSink>(config.resolve(sink.path));
    } else if (sink.kind == "webhook") {
        inner = std::make_unique<QueuedSink>(http_transport(sink.url), static_cast<std::size_t>(sink.queue_capacity),
                                             RetryPolicy{sink.max_retries, std::chrono::milliseconds(sink.backoff_ms)});
    } else {
        throw PreconditionError("unknown sink kind '" + sink.kind + "'");
    }
    return std::make_unique<FilteredSink>(std::move(inner), sink.actions);
}

}  // namespace mfhar
