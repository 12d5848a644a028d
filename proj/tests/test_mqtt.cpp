#include "sentinel/mqtt.hpp"

#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

using namespace sentinel;

TEST_CASE("broker uri parsing") {
    auto [host, port] = parse_broker_uri("mqtt://broker.local:1883");
    CHECK(host == "broker.local");
    CHECK(port == 1883);
    auto bare = parse_broker_uri("127.0.0.1:8883");
    CHECK(bare.first == "127.0.0.1");
    CHECK(bare.second == 8883);
    CHECK_THROWS_AS(parse_broker_uri("mqtt://no-port"), ParseError);
    CHECK_THROWS_AS(parse_broker_uri("mqtt://host:notaport"), ParseError);
}

TEST_CASE("payload parsing fans numeric fields into readings") {
    auto rs = parse_payload("sense-hat", R"({"temp": 21.5, "humidity": 40, "device_id": "sh-1"})",
                            1000);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].topic == "sense-hat");
    CHECK(rs[0].timestamp == 1000);
    bool saw_temp = false;
    for (const auto& r : rs) {
        CHECK(r.device_id == "sh-1");
        if (r.stream == "temp") {
            saw_temp = true;
            CHECK(r.value == 21.5);
        }
    }
    CHECK(saw_temp);

    auto stamped = parse_payload("t", R"({"x": 1, "timestamp": 555})", 1000);
    REQUIRE(stamped.size() == 1);
    CHECK(stamped[0].timestamp == 555);

    CHECK_THROWS_AS(parse_payload("t", "not json", 0), ParseError);
    CHECK_THROWS_AS(parse_payload("t", "[1,2]", 0), ParseError);
}

TEST_CASE("connect packet bytes follow the 3.1.1 layout") {
    auto pkt = mqtt::encode_connect("cid", 30);
    // fixed header: CONNECT, remaining length 10 (variable header) + 5 (payload)
    REQUIRE(pkt.size() == 17);
    CHECK(pkt[0] == 0x10);
    CHECK(pkt[1] == 15);
    const std::uint8_t header[] = {0x00, 0x04, 'M', 'Q', 'T', 'T', 0x04, 0x02, 0x00, 30};
    CHECK(std::memcmp(pkt.data() + 2, header, sizeof header) == 0);
    const std::uint8_t payload[] = {0x00, 0x03, 'c', 'i', 'd'};
    CHECK(std::memcmp(pkt.data() + 12, payload, sizeof payload) == 0);
}

TEST_CASE("subscribe packet carries packet id, filters and QoS 0") {
    auto pkt = mqtt::encode_subscribe(7, {"a/#"});
    REQUIRE(pkt.size() == 10);
    CHECK(pkt[0] == 0x82);
    CHECK(pkt[1] == 8);
    CHECK(pkt[2] == 0x00);
    CHECK(pkt[3] == 7);
    const std::uint8_t filter[] = {0x00, 0x03, 'a', '/', '#', 0x00};
    CHECK(std::memcmp(pkt.data() + 4, filter, sizeof filter) == 0);
}

TEST_CASE("publish decoding extracts topic and payload") {
    std::vector<std::uint8_t> body = {0x00, 0x03, 't', '/', 'x', '{', '}'};
    auto [topic, payload] = mqtt::decode_publish(0x00, body);
    CHECK(topic == "t/x");
    CHECK(payload == "{}");

    // QoS 1 flags insert a two-byte packet id before the payload
    std::vector<std::uint8_t> qos1 = {0x00, 0x01, 't', 0x12, 0x34, 'h', 'i'};
    auto [t2, p2] = mqtt::decode_publish(0x02, qos1);
    CHECK(t2 == "t");
    CHECK(p2 == "hi");

    CHECK_THROWS_AS(mqtt::decode_publish(0x00, {0x00}), ParseError);
}

namespace {

/// Minimal in-process broker: accepts one session, answers CONNACK/SUBACK,
/// pushes the queued PUBLISH packets, then closes the connection.
class FakeBroker {
public:
    explicit FakeBroker(std::vector<std::vector<std::uint8_t>> publishes)
        : publishes_(std::move(publishes)) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(listen_fd_ >= 0);
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        REQUIRE(::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        REQUIRE(::listen(listen_fd_, 1) == 0);
        thread_ = std::thread([this] { serve(); });
    }

    ~FakeBroker() {
        if (thread_.joinable()) thread_.join();
        ::close(listen_fd_);
    }

    std::uint16_t port() const { return port_; }
    int sessions() const { return sessions_.load(); }

private:
    void serve() {
        for (int session = 0; session < 2; ++session) {
            const int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) return;
            ++sessions_;
            drain_packet(fd);  // CONNECT
            const std::uint8_t connack[] = {0x20, 0x02, 0x00, 0x00};
            ::send(fd, connack, sizeof connack, 0);
            drain_packet(fd);  // SUBSCRIBE
            const std::uint8_t suback[] = {0x90, 0x03, 0x00, 0x01, 0x00};
            ::send(fd, suback, sizeof suback, 0);
            if (session == 0) {
                for (const auto& p : publishes_) {
                    ::send(fd, p.data(), p.size(), 0);
                }
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(200));
            ::close(fd);
            if (session == 1) return;
        }
    }

    static void drain_packet(int fd) {
        std::uint8_t header[2];
        if (::recv(fd, header, 2, MSG_WAITALL) != 2) return;
        std::size_t remaining = header[1];  // test packets stay under 128 bytes
        std::vector<std::uint8_t> body(remaining);
        if (remaining > 0) ::recv(fd, body.data(), remaining, MSG_WAITALL);
    }

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::vector<std::vector<std::uint8_t>> publishes_;
    std::atomic<int> sessions_{0};
    std::thread thread_;
};

std::vector<std::uint8_t> make_publish(const std::string& topic, const std::string& payload) {
    std::vector<std::uint8_t> pkt = {0x30, 0x00};
    pkt.push_back(static_cast<std::uint8_t>(topic.size() >> 8));
    pkt.push_back(static_cast<std::uint8_t>(topic.size() & 0xff));
    pkt.insert(pkt.end(), topic.begin(), topic.end());
    pkt.insert(pkt.end(), payload.begin(), payload.end());
    pkt[1] = static_cast<std::uint8_t>(pkt.size() - 2);
    return pkt;
}

}  // namespace

TEST_CASE("a live subscription delivers parsed readings and survives a dropped session") {
    FakeBroker broker({
        make_publish("room/a", R"({"x": 1.5})"),
        make_publish("room/a", "garbage"),  // counted as malformed, never delivered
        make_publish("room/b", R"({"y": -2, "timestamp": 42})"),
    });

    std::mutex mu;
    std::vector<SensorReading> got;
    MqttSubscription sub("mqtt://127.0.0.1:" + std::to_string(broker.port()), {"room/#"},
                         [&](const SensorReading& r) {
                             std::lock_guard<std::mutex> lock(mu);
                             got.push_back(r);
                         });

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
    while (std::chrono::steady_clock::now() < deadline) {
        {
            std::lock_guard<std::mutex> lock(mu);
            if (got.size() >= 2 && broker.sessions() >= 2) break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    sub.stop();
    CHECK(sub.state() == SubscriptionState::Stopped);

    std::lock_guard<std::mutex> lock(mu);
    REQUIRE(got.size() == 2);
    CHECK(got[0].topic == "room/a");
    CHECK(got[0].stream == "x");
    CHECK(got[0].value == 1.5);
    CHECK(got[1].timestamp == 42);
    CHECK(sub.stats().delivered == 2);
    CHECK(sub.stats().malformed == 1);
    CHECK(sub.stats().reconnects >= 1);  // the broker dropped the first session
    CHECK(broker.sessions() == 2);
}
