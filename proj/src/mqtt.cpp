#include "sentinel/mqtt.hpp"

#include "sentinel/io.hpp"

#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <ctime>

namespace sentinel {

std::pair<std::string, std::uint16_t> parse_broker_uri(const std::string& uri) {
    std::string rest = uri;
    const std::string scheme = "mqtt://";
    if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
        throw ParseError("broker URI must be mqtt://host:port, got: " + uri);
    }
    const std::string host = rest.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
        throw ParseError("bad broker port in: " + uri);
    }
    if (port <= 0 || port > 65535) throw ParseError("bad broker port in: " + uri);
    return {host, static_cast<std::uint16_t>(port)};
}

std::vector<SensorReading> parse_payload(const std::string& topic, const std::string& payload,
                                         Timestamp arrival_time) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed payload: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("payload is not a JSON object");

    Timestamp ts = arrival_time;
    std::string device = topic;
    if (j.contains("timestamp")) {
        const auto& t = j["timestamp"];
        ts = t.is_string() ? parse_timestamp(t.get<std::string>()) : t.get<Timestamp>();
    }
    if (j.contains("device_id") && j["device_id"].is_string()) {
        device = j["device_id"].get<std::string>();
    }

    std::vector<SensorReading> readings;
    for (const auto& [key, value] : j.items()) {
        if (key == "timestamp" || key == "device_id") continue;
        if (!value.is_number()) continue;  // non-numeric fields are skipped, not fatal
        SensorReading r;
        r.timestamp = ts;
        r.device_id = device;
        r.topic = topic;
        r.stream = key;
        r.value = value.get<Scalar>();
        readings.push_back(std::move(r));
    }
    return readings;
}

namespace mqtt {

namespace {

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void append_string(std::vector<std::uint8_t>& out, const std::string& s) {
    append_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

std::vector<std::uint8_t> with_fixed_header(std::uint8_t type_flags,
                                            std::vector<std::uint8_t> body) {
    std::vector<std::uint8_t> out{type_flags};
    std::size_t len = body.size();
    do {
        std::uint8_t byte = len % 128;
        len /= 128;
        if (len > 0) byte |= 0x80;
        out.push_back(byte);
    } while (len > 0);
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_connect(const std::string& client_id, std::uint16_t keepalive) {
    std::vector<std::uint8_t> body;
    append_string(body, "MQTT");
    body.push_back(4);     // protocol level 3.1.1
    body.push_back(0x02);  // clean session
    append_u16(body, keepalive);
    append_string(body, client_id);
    return with_fixed_header(0x10, std::move(body));
}

std::vector<std::uint8_t> encode_subscribe(std::uint16_t packet_id,
                                           const std::vector<std::string>& topics) {
    std::vector<std::uint8_t> body;
    append_u16(body, packet_id);
    for (const auto& t : topics) {
        append_string(body, t);
        body.push_back(0);  // QoS 0
    }
    return with_fixed_header(0x82, std::move(body));
}

std::vector<std::uint8_t> encode_pingreq() { return {0xc0, 0x00}; }

std::vector<std::uint8_t> encode_disconnect() { return {0xe0, 0x00}; }

std::pair<std::string, std::string> decode_publish(std::uint8_t flags,
                                                   const std::vector<std::uint8_t>& body) {
    if (body.size() < 2) throw ParseError("truncated PUBLISH");
    const std::size_t topic_len = (static_cast<std::size_t>(body[0]) << 8) | body[1];
    std::size_t pos = 2 + topic_len;
    if (body.size() < pos) throw ParseError("truncated PUBLISH topic");
    std::string topic(body.begin() + 2, body.begin() + static_cast<std::ptrdiff_t>(pos));
    const int qos = (flags >> 1) & 0x3;
    if (qos > 0) {
        if (body.size() < pos + 2) throw ParseError("truncated PUBLISH packet id");
        pos += 2;
    }
    std::string payload(body.begin() + static_cast<std::ptrdiff_t>(pos), body.end());
    return {std::move(topic), std::move(payload)};
}

}  // namespace mqtt

namespace {

int connect_tcp(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) return -1;
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd >= 0) {
        timeval tv{0, 500000};  // bounded recv so stop() stays responsive
        setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    }
    return fd;
}

bool send_all(int fd, const std::vector<std::uint8_t>& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

// Returns: 1 packet read, 0 timeout, -1 connection error.
int read_packet(int fd, std::atomic<bool>& stop, mqtt::Packet& pkt) {
    std::uint8_t header;
    ssize_t n = recv(fd, &header, 1, 0);
    if (n == 0) return -1;
    if (n < 0) return (errno == EAGAIN || errno == EWOULDBLOCK) ? 0 : -1;

    std::size_t len = 0;
    std::size_t mult = 1;
    for (int i = 0; i < 4; ++i) {
        std::uint8_t b;
        if (recv(fd, &b, 1, MSG_WAITALL) != 1) return -1;
        len += static_cast<std::size_t>(b & 0x7f) * mult;
        if (!(b & 0x80)) break;
        mult *= 128;
    }

    pkt.type = header;
    pkt.payload.resize(len);
    std::size_t got = 0;
    while (got < len && !stop.load()) {
        ssize_t m = recv(fd, pkt.payload.data() + got, len - got, 0);
        if (m == 0) return -1;
        if (m < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) continue;
            return -1;
        }
        got += static_cast<std::size_t>(m);
    }
    return got == len ? 1 : -1;
}

}  // namespace

MqttSubscription::MqttSubscription(std::string broker_uri, std::vector<std::string> topics,
                                   Sink sink)
    : topics_(std::move(topics)), sink_(std::move(sink)) {
    auto [host, port] = parse_broker_uri(broker_uri);
    host_ = std::move(host);
    port_ = port;
    thread_ = std::thread([this] { run(); });
}

MqttSubscription::~MqttSubscription() { stop(); }

void MqttSubscription::stop() {
    stop_.store(true);
    if (thread_.joinable()) thread_.join();
    state_.store(SubscriptionState::Stopped);
}

SubscriptionStats MqttSubscription::stats() const {
    return {delivered_.load(), malformed_.load(), reconnects_.load()};
}

void MqttSubscription::run() {
    using namespace std::chrono_literals;
    auto backoff = 100ms;
    const auto max_backoff = 5000ms;
    bool first = true;
    while (!stop_.load()) {
        if (!first) {
            reconnects_.fetch_add(1);
            state_.store(SubscriptionState::Reconnecting);
            for (auto waited = 0ms; waited < backoff && !stop_.load(); waited += 50ms) {
                std::this_thread::sleep_for(50ms);
            }
            backoff = std::min(backoff * 2, max_backoff);
        }
        first = false;
        if (stop_.load()) break;

        int fd = connect_tcp(host_, port_);
        if (fd < 0) continue;
        backoff = 100ms;
        if (session(fd)) {
            // orderly shutdown requested
            send_all(fd, mqtt::encode_disconnect());
            close(fd);
            break;
        }
        close(fd);
    }
    state_.store(SubscriptionState::Stopped);
}

/// Returns true on orderly stop, false on connection loss.
bool MqttSubscription::session(int fd) {
    if (!send_all(fd, mqtt::encode_connect("sentinel-ingest", 60))) return false;
    if (!send_all(fd, mqtt::encode_subscribe(1, topics_))) return false;

    bool connacked = false;
    while (!stop_.load()) {
        mqtt::Packet pkt;
        const int r = read_packet(fd, stop_, pkt);
        if (r < 0) return false;
        if (r == 0) continue;
        const std::uint8_t type = pkt.type & 0xf0;
        if (type == 0x20) {  // CONNACK
            if (pkt.payload.size() < 2 || pkt.payload[1] != 0) return false;
            connacked = true;
            state_.store(SubscriptionState::Connected);
        } else if (type == 0x30) {  // PUBLISH
            if (!connacked) return false;
            try {
                auto [topic, payload] = mqtt::decode_publish(pkt.type & 0x0f, pkt.payload);
                const Timestamp arrival = static_cast<Timestamp>(std::time(nullptr));
                for (const auto& reading : parse_payload(topic, payload, arrival)) {
                    sink_(reading);
                    delivered_.fetch_add(1);
                }
            } catch (const ParseError&) {
                malformed_.fetch_add(1);
            }
        } else if (type == 0xd0) {  // PINGRESP
        } else if (type == 0x90) {  // SUBACK
        }
    }
    return true;
}

}  // namespace sentinel
