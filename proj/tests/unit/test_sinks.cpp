#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "mfhar/config.hpp"
#include "mfhar/error.hpp"
#include "mfhar/pipeline.hpp"
#include "mfhar/sinks.hpp"

using namespace mfhar;
using namespace std::chrono_literals;

namespace {

EventLogEntry entry(std::int64_t window_end, std::string action = "fall") {
    ActionEvent ev{.stream_id = "cam", .action = ActionKind(std::move(action)), .count = std::nullopt};
    ev.window_start = window_end - 20;
    ev.window_end = window_end;
    ev.vote_count = 5;
    ev.window_size = 5;
    return EventLogEntry{123, 456, ev, {}};
}

// Local HTTP endpoint that fails the first `failures` requests.
class Endpoint {
public:
    explicit Endpoint(int failures = 0) : failures_(failures) {
        server_.Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu_);
            keys_.push_back(req.get_header_value("Idempotency-Key"));
            bodies_.push_back(req.body);
            res.status = failures_-- > 0 ? 503 : 204;
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~Endpoint() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/events"; }
    std::vector<std::string> keys() {
        std::lock_guard lock(mu_);
        return keys_;
    }
    std::vector<std::string> bodies() {
        std::lock_guard lock(mu_);
        return bodies_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    int failures_;
    std::mutex mu_;
    std::vector<std::string> keys_;
    std::vector<std::string> bodies_;
};

}  // namespace

TEST(EventLogEntryTest, JsonHasSortedKeysAndSupport) {
    auto e = entry(20);
    e.support.push_back(DetectionVerdict{Detection(Box(1, 2, 3, 4), BodyForm::Whole, 0.5), 2, ActionKind("fall"),
                                         true, 0.9, "fall"});
    e.event.count = CountVerdict{0, false, CountDirection::Under};
    EXPECT_EQ(e.to_json(),
              R"({"action":"fall","count":{"compliant":false,"count":0,"direction":"under"},)"
              R"("frame_timestamp_ms":456,"state":"raised","stream_id":"cam",)"
              R"("support":[{"box":[1.0,2.0,3.0,4.0],"confidence":0.5,"detection_index":2,"form":"whole",)"
              R"("positive":true,"score":0.9,"top_label":"fall"}],"timestamp_ms":123,"vote_count":5,)"
              R"("window_end":20,"window_size":5,"window_start":0})");
    EXPECT_EQ(e.idempotency_key(), "cam:fall:20");
}

TEST(JsonlSinkTest, OneLinePerEntry) {
    std::ostringstream out;
    JsonlSink sink(out);
    sink.publish(entry(20));
    sink.publish(entry(25));
    sink.close();
    EXPECT_EQ(out.str(), entry(20).to_json() + "\n" + entry(25).to_json() + "\n");
    EXPECT_EQ(sink.stats().delivered, 2);
}

TEST(QueuedSinkTest, DeliversInOrder) {
    std::mutex mu;
    std::vector<std::int64_t> seen;
    QueuedSink sink(
        [&](const EventLogEntry& e, const std::string&) {
            std::lock_guard lock(mu);
            seen.push_back(e.event.window_end);
            return true;
        },
        16, RetryPolicy{0, 1ms});
    for (int i = 0; i < 10; ++i) sink.publish(entry(20 + i));
    sink.close();
    EXPECT_EQ(seen.size(), 10u);
    EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
    EXPECT_EQ(sink.stats().delivered, 10);
    EXPECT_EQ(sink.stats().dropped(), 0);
}

TEST(QueuedSinkTest, SlowTransportDropsInsteadOfBlocking) {
    std::atomic<int> calls{0};
    QueuedSink sink(
        [&](const EventLogEntry&, const std::string&) {
            ++calls;
            std::this_thread::sleep_for(20ms);
            return true;
        },
        4, RetryPolicy{0, 1ms});
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 200; ++i) sink.publish(entry(20 + i));
    const auto publish_time = std::chrono::steady_clock::now() - start;
    EXPECT_LT(publish_time, 500ms);  // producers never wait on the transport
    sink.close();
    const auto s = sink.stats();
    EXPECT_GT(s.dropped_overflow, 0);
    EXPECT_EQ(s.delivered + s.dropped_overflow, 200);
    EXPECT_EQ(calls.load(), s.delivered);
}

TEST(QueuedSinkTest, RetriesThenDrops) {
    std::atomic<int> calls{0};
    QueuedSink sink([&](const EventLogEntry&, const std::string&) { return ++calls % 3 == 0; }, 8,
                    RetryPolicy{1, 1ms});
    sink.publish(entry(20));  // fails, fails -> dropped
    sink.publish(entry(25));  // succeeds on the first call
    sink.close();
    const auto s = sink.stats();
    EXPECT_EQ(s.dropped_failed, 1);
    EXPECT_EQ(s.delivered, 1);
    EXPECT_EQ(s.retries, 1);
}

TEST(FilteredSinkTest, PassesOnlyListedActions) {
    auto out = std::make_shared<std::ostringstream>();
    FilteredSink sink(std::make_unique<JsonlSink>(*out), {"fall"});
    sink.publish(entry(20, "fall"));
    sink.publish(entry(20, "sleep"));
    EXPECT_EQ(sink.stats().delivered, 1);
}

TEST(Webhook, PostsJsonWithIdempotencyKeyAndRetries) {
    Endpoint server(2);
    QueuedSink sink(http_transport(server.url()), 8, RetryPolicy{3, 1ms});
    sink.publish(entry(20));
    sink.publish(entry(25));
    sink.close();
    EXPECT_EQ(server.keys(), (std::vector<std::string>{"cam:fall:20", "cam:fall:20", "cam:fall:20", "cam:fall:25"}));
    EXPECT_EQ(server.bodies().back(), entry(25).to_json());
    EXPECT_EQ(sink.stats().delivered, 2);
    EXPECT_EQ(sink.stats().retries, 2);
}

TEST(Webhook, UnreachableEndpointIsCountedNotFatal) {
    int port;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    QueuedSink sink(http_transport("http://127.0.0.1:" + std::to_string(port) + "/x", 200ms), 4, RetryPolicy{1, 1ms});
    sink.publish(entry(20));
    sink.close();
    EXPECT_EQ(sink.stats().dropped_failed, 1);
    EXPECT_THROW(http_transport("https://example.com"), PreconditionError);
}

TEST(Webhook, ConfiguredSinkReceivesPipelineEvents) {
    Endpoint server;
    const auto vc = validate(R"({
        "streams": [{"id": "cam", "source": {"kind": "synthetic", "frames": 50}}],
        "sinks": [{"kind": "webhook", "url": ")" + server.url() + R"(", "actions": ["on_duty"]}]
    })");
    RunOptions options;
    options.fixed_clock = true;
    const auto summary = run_pipeline(vc, options);
    ASSERT_EQ(summary.sinks.size(), 1u);
    EXPECT_EQ(summary.sinks[0].delivered, 1);
    ASSERT_EQ(server.keys().size(), 1u);
    EXPECT_EQ(server.keys()[0], "cam:on_duty:20");
    EXPECT_EQ(nlohmann::json::parse(server.bodies()[0])["state"], "raised");
}
