#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "netfc/errors.hpp"
#include "netfc/pipeline.hpp"

// The in-band compute protocol: a fixed 12-byte header carried in UDP
// payloads.  All 16-bit fields are network byte order.
//
//   magic(2) = 0x4FC1 | version(1) | op(1) | format(1) | flags(1)
//   x(2) | y(2) | result(2)
//
// op: 0 forward, 1 add, 2 sub, 3 mul, 4 div, 5 register query.
// flags: bit0 = a corner case fired, bit1 = error.  Packets that do not
// parse as NetFC (short, wrong magic) pass through the switch untouched,
// as does any version other than 1.

namespace netfc {

inline constexpr std::uint16_t kMagic = 0x4FC1;
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kPacketBytes = 12;
inline constexpr std::uint16_t kDefaultPort = 9474;

inline constexpr std::uint8_t kFlagCorner = 0x01;
inline constexpr std::uint8_t kFlagError = 0x02;

enum class PacketOp : std::uint8_t { Forward = 0, Add = 1, Sub = 2, Mul = 3, Div = 4, Query = 5 };

struct NetFcPacket {
    std::uint8_t version = kVersion;
    std::uint8_t op = 0;
    std::uint8_t format = 0;  // 0 float16, 1 posit16
    std::uint8_t flags = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint16_t result = 0;

    friend bool operator==(const NetFcPacket&, const NetFcPacket&) = default;
};

inline std::array<std::uint8_t, kPacketBytes> serialize(const NetFcPacket& p) {
    std::array<std::uint8_t, kPacketBytes> out{};
    out[0] = kMagic >> 8;
    out[1] = kMagic & 0xFF;
    out[2] = p.version;
    out[3] = p.op;
    out[4] = p.format;
    out[5] = p.flags;
    out[6] = p.x >> 8;
    out[7] = p.x & 0xFF;
    out[8] = p.y >> 8;
    out[9] = p.y & 0xFF;
    out[10] = p.result >> 8;
    out[11] = p.result & 0xFF;
    return out;
}

// NotNetFc (short payload or wrong magic) means: forward untouched.
inline std::optional<NetFcPacket> parse(const std::uint8_t* data, std::size_t len) {
    if (len < kPacketBytes) return std::nullopt;
    if ((static_cast<std::uint16_t>(data[0]) << 8 | data[1]) != kMagic) return std::nullopt;
    NetFcPacket p;
    p.version = data[2];
    p.op = data[3];
    p.format = data[4];
    p.flags = data[5];
    p.x = static_cast<std::uint16_t>(data[6] << 8 | data[7]);
    p.y = static_cast<std::uint16_t>(data[8] << 8 | data[9]);
    p.result = static_cast<std::uint16_t>(data[10] << 8 | data[11]);
    return p;
}

struct CounterSnapshot {
    std::uint64_t received = 0;
    std::uint64_t not_netfc = 0;
    std::uint64_t processed = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t corners = 0;
    std::uint64_t errors = 0;
    std::array<std::uint64_t, 6> per_op{};
};

// Per-packet compute against one immutable table set.
class SwitchEmulator {
  public:
    explicit SwitchEmulator(const TableSet& tables) : tables_(&tables) {}

    NetFcPacket process(NetFcPacket p) const {
        if (p.version != kVersion) return p;  // unknown version: forward untouched
        if (p.op == static_cast<std::uint8_t>(PacketOp::Forward)) return p;
        if (p.op < 1 || p.op > 4) {
            p.flags |= kFlagError;
            p.result = 0;
            return p;
        }
        const Format fmt = p.format == 0 ? Format::Float16 : Format::Posit16;
        if (fmt != tables_->format) {
            p.flags |= kFlagError;
            p.result = 0;
            return p;
        }
        static constexpr OpKind kOps[] = {OpKind::Add, OpKind::Sub, OpKind::Mul, OpKind::Div};
        try {
            const PipelineResult r = run_op(kOps[p.op - 1], Bits16{p.x, fmt}, Bits16{p.y, fmt},
                                            *tables_);
            p.result = r.value.raw;
            if (r.corner != Corner::None) p.flags |= kFlagCorner;
        } catch (const error&) {
            p.flags |= kFlagError;
            p.result = 0;
        }
        return p;
    }

    // Rewrites the NetFC header inside a datagram; non-NetFC bytes pass through.
    // Returns whether the payload parsed as NetFC.
    bool process_datagram(std::vector<std::uint8_t>& payload, CounterSnapshot& c) const {
        ++c.received;
        const auto parsed = parse(payload.data(), payload.size());
        if (!parsed) {
            ++c.not_netfc;
            return false;
        }
        const NetFcPacket out = process(*parsed);
        ++c.processed;
        if (out.op <= 5) ++c.per_op[out.op];
        if (out.flags & kFlagCorner) ++c.corners;
        if (out.flags & kFlagError) ++c.errors;
        const auto bytes = serialize(out);
        std::copy(bytes.begin(), bytes.end(), payload.begin());  // trailing bytes preserved
        return true;
    }

  private:
    const TableSet* tables_;
};

// ---- sockets ----

struct socket_error : error {
    using error::error;
};

inline sockaddr_in parse_hostport(const std::string& spec, std::uint16_t default_port = kDefaultPort) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    std::string host = spec;
    std::uint16_t port = default_port;
    if (const auto colon = spec.rfind(':'); colon != std::string::npos) {
        host = spec.substr(0, colon);
        port = static_cast<std::uint16_t>(std::stoi(spec.substr(colon + 1)));
    }
    if (host.empty()) host = "0.0.0.0";
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw socket_error("bad address: " + spec);
    return addr;
}

class UdpSocket {
  public:
    UdpSocket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
        if (fd_ < 0) throw socket_error("socket() failed");
    }
    ~UdpSocket() {
        if (fd_ >= 0) ::close(fd_);
    }
    UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    void bind(const sockaddr_in& addr) {
        if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0)
            throw socket_error("bind() failed");
    }

    std::uint16_t local_port() const {
        sockaddr_in addr{};
        socklen_t len = sizeof addr;
        if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
            throw socket_error("getsockname() failed");
        return ntohs(addr.sin_port);
    }

    void send_to(const void* data, std::size_t len, const sockaddr_in& dst) const {
        ::sendto(fd_, data, len, 0, reinterpret_cast<const sockaddr*>(&dst), sizeof dst);
    }

    // returns bytes received, or -1 on timeout
    ssize_t recv_timeout(std::vector<std::uint8_t>& buf, int timeout_ms) const {
        pollfd pfd{fd_, POLLIN, 0};
        const int n = ::poll(&pfd, 1, timeout_ms);
        if (n <= 0) return -1;
        buf.resize(65536);
        const ssize_t got = ::recv(fd_, buf.data(), buf.size(), 0);
        if (got >= 0) buf.resize(static_cast<std::size_t>(got));
        return got;
    }

    int fd() const { return fd_; }

  private:
    int fd_;
};

// Receive, process, forward; counters are observable while running.
class UdpService {
  public:
    UdpService(const TableSet& tables, const std::string& listen, const std::string& forward)
        : emulator_(tables), forward_(parse_hostport(forward)) {
        socket_.bind(parse_hostport(listen));
    }

    std::uint16_t local_port() const { return socket_.local_port(); }

    void start() {
        running_.store(true);
        worker_ = std::thread([this] { loop(); });
    }

    void stop() {
        running_.store(false);
        if (worker_.joinable()) worker_.join();
    }

    ~UdpService() { stop(); }

    CounterSnapshot counters() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return counters_;
    }

    // single-threaded service loop; pipeline calls themselves are pure
    void loop() {
        std::vector<std::uint8_t> buf;
        while (running_.load()) {
            const ssize_t got = socket_.recv_timeout(buf, 50);
            if (got < 0) continue;
            CounterSnapshot local;
            emulator_.process_datagram(buf, local);
            {
                std::lock_guard<std::mutex> lock(mutex_);
                counters_.received += local.received;
                counters_.not_netfc += local.not_netfc;
                counters_.processed += local.processed;
                counters_.corners += local.corners;
                counters_.errors += local.errors;
                for (std::size_t i = 0; i < local.per_op.size(); ++i)
                    counters_.per_op[i] += local.per_op[i];
                ++counters_.forwarded;
            }
            socket_.send_to(buf.data(), buf.size(), forward_);
        }
    }

  private:
    SwitchEmulator emulator_;
    sockaddr_in forward_;
    UdpSocket socket_;
    std::thread worker_;
    std::atomic<bool> running_{false};
    mutable std::mutex mutex_;
    CounterSnapshot counters_;
};

}  // namespace netfc
