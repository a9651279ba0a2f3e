#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selfsort/message.hpp"
#include "selfsort/wire.hpp"

namespace selfsort {

/// Splits a byte stream into LF-terminated lines.
class LineBuffer {
public:
    void feed(std::string_view bytes) { pending_.append(bytes); }
    std::optional<std::string> next_line();

private:
    std::string pending_;
};

/// Owns one TCP socket; closes it on destruction.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept
        : fd_(std::exchange(other.fd_, -1)), buffer_(std::move(other.buffer_)) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    void close();

    void write_line(const std::string& line);
    /// Blocks until a full line arrives; nullopt on EOF.
    std::optional<std::string> read_line();

private:
    int fd_ = -1;
    LineBuffer buffer_;
};

/// Listening socket on 127.0.0.1 with an OS-assigned port.
Socket listen_loopback(std::uint16_t& port_out);

/// Connects to 127.0.0.1:port, retrying refused connections a bounded
/// number of times before throwing TransportError.
Socket connect_with_retry(std::uint16_t port, int attempts = 20);

/// Per-endpoint loopback sockets. Endpoint 0 is the sorting list; agents use
/// their ids. A session is a (from, to) connection opened by `from` against
/// `to`'s acceptor and introduced with HELLO.
class LoopbackNetwork {
public:
    explicit LoopbackNetwork(std::size_t endpoint_count);
    ~LoopbackNetwork();

    LoopbackNetwork(const LoopbackNetwork&) = delete;
    LoopbackNetwork& operator=(const LoopbackNetwork&) = delete;

    std::uint16_t port_of(AgentId endpoint) const;

    /// Opens (or reuses) the session from -> peer.
    void connect_to(AgentId from, AgentId peer, std::size_t position = 0);

    /// Single-threaded delivery: writes the line on the session and reads it
    /// back off the acceptor side, returning what the peer decoded.
    Message deliver(AgentId from, AgentId to, const Message& message);

    /// Threaded delivery: writes only; the peer's serve_accept_loop reads.
    void send(AgentId from, AgentId to, const Message& message);

    /// Acceptor loop for one endpoint. Every decoded message goes to
    /// `on_message`; a malformed line drops that session and is reported to
    /// `on_error`. Returns after stop().
    void serve_accept_loop(AgentId endpoint, const std::function<void(Message)>& on_message,
                           const std::function<void(const std::exception&)>& on_error);

    void stop();

    /// Says BYE on every open session and closes them.
    void close_all();

    std::size_t open_sessions() const;

    /// Stops accepting on an endpoint (used to exercise connect failures).
    void close_listener(AgentId endpoint);

private:
    struct Session {
        Socket client;
        Socket server;  // only used by single-threaded delivery
        std::mutex write_mutex;
    };

    Session& session(AgentId from, AgentId to, std::size_t position, bool accept_inline);

    std::vector<Socket> listeners_;
    std::vector<std::uint16_t> ports_;
    mutable std::mutex sessions_mutex_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::unique_ptr<Session>> sessions_;
    std::atomic<bool> stopping_{false};
};

}  // namespace selfsort
