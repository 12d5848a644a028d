#pragma once

#include "sentinel/types.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace sentinel {

/// "mqtt://host:port" (or bare "host:port") -> (host, port).
std::pair<std::string, std::uint16_t> parse_broker_uri(const std::string& uri);

/// Flat JSON object of numeric fields -> one reading per field, all sharing
/// one timestamp (payload "timestamp" if present, else the arrival time).
/// Throws ParseError on malformed payloads.
std::vector<SensorReading> parse_payload(const std::string& topic, const std::string& payload,
                                         Timestamp arrival_time);

namespace mqtt {

// MQTT 3.1.1 control packets, QoS 0 only.
std::vector<std::uint8_t> encode_connect(const std::string& client_id, std::uint16_t keepalive);
std::vector<std::uint8_t> encode_subscribe(std::uint16_t packet_id,
                                           const std::vector<std::string>& topics);
std::vector<std::uint8_t> encode_pingreq();
std::vector<std::uint8_t> encode_disconnect();

struct Packet {
    std::uint8_t type = 0;  // high nibble of the fixed header
    std::vector<std::uint8_t> payload;
};

/// Parses a PUBLISH packet body into (topic, payload). QoS is taken from the
/// fixed-header flags; QoS > 0 packet-id bytes are skipped.
std::pair<std::string, std::string> decode_publish(std::uint8_t flags,
                                                   const std::vector<std::uint8_t>& body);

}  // namespace mqtt

enum class SubscriptionState { Connecting, Connected, Reconnecting, Stopped };

struct SubscriptionStats {
    std::uint64_t delivered = 0;
    std::uint64_t malformed = 0;
    std::uint64_t reconnects = 0;
};

/// Live MQTT subscription. Runs a reader thread that connects with bounded
/// exponential backoff, subscribes to the configured topics at QoS 0, and
/// delivers parsed readings to the sink in arrival order. stop() performs an
/// orderly shutdown and joins the thread, flushing in-flight readings first.
class MqttSubscription {
public:
    using Sink = std::function<void(const SensorReading&)>;

    MqttSubscription(std::string broker_uri, std::vector<std::string> topics, Sink sink);
    ~MqttSubscription();

    MqttSubscription(const MqttSubscription&) = delete;
    MqttSubscription& operator=(const MqttSubscription&) = delete;

    void stop();
    SubscriptionState state() const { return state_.load(); }
    SubscriptionStats stats() const;

private:
    void run();
    bool session(int fd);

    std::string host_;
    std::uint16_t port_;
    std::vector<std::string> topics_;
    Sink sink_;
    std::atomic<SubscriptionState> state_{SubscriptionState::Connecting};
    std::atomic<bool> stop_{false};
    std::atomic<std::uint64_t> delivered_{0};
    std::atomic<std::uint64_t> malformed_{0};
    std::atomic<std::uint64_t> reconnects_{0};
    std::thread thread_;
};

}  // namespace sentinel
