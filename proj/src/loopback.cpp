#include "selfsort/loopback.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include "selfsort/errors.hpp"

namespace selfsort {

namespace {

std::string errno_text(const char* what) {
    return std::string(what) + ": " + std::strerror(errno);
}

sockaddr_in loopback_addr(std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

std::optional<std::string> LineBuffer::next_line() {
    const auto lf = pending_.find('\n');
    if (lf == std::string::npos) return std::nullopt;
    std::string line = pending_.substr(0, lf);
    pending_.erase(0, lf + 1);
    return line;
}

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
        buffer_ = std::move(other.buffer_);
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void Socket::write_line(const std::string& line) {
    std::string data = line;
    data.push_back('\n');
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(errno_text("send"));
        }
        off += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> Socket::read_line() {
    while (true) {
        if (auto line = buffer_.next_line()) return line;
        char buf[4096];
        const auto n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(errno_text("recv"));
        }
        if (n == 0) return std::nullopt;
        buffer_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
}

Socket listen_loopback(std::uint16_t& port_out) {
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw TransportError(errno_text("socket"));
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    auto addr = loopback_addr(0);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        throw TransportError(errno_text("bind"));
    }
    if (::listen(s.fd(), 128) < 0) throw TransportError(errno_text("listen"));
    socklen_t len = sizeof(addr);
    ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_out = ntohs(addr.sin_port);
    return s;
}

Socket connect_with_retry(std::uint16_t port, int attempts) {
    for (int i = 0; i < attempts; ++i) {
        Socket s(::socket(AF_INET, SOCK_STREAM, 0));
        if (!s.valid()) throw TransportError(errno_text("socket"));
        auto addr = loopback_addr(port);
        if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
            set_nodelay(s.fd());
            return s;
        }
        if (errno != ECONNREFUSED && errno != EINTR && errno != EAGAIN) {
            throw TransportError(errno_text("connect"));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    throw TransportError("peer on port " + std::to_string(port) + " is not listening after " +
                         std::to_string(attempts) + " attempts");
}

LoopbackNetwork::LoopbackNetwork(std::size_t endpoint_count) {
    listeners_.reserve(endpoint_count);
    ports_.resize(endpoint_count);
    for (std::size_t i = 0; i < endpoint_count; ++i) {
        listeners_.push_back(listen_loopback(ports_[i]));
    }
}

LoopbackNetwork::~LoopbackNetwork() {
    stop();
    try {
        close_all();
    } catch (...) {
    }
}

std::uint16_t LoopbackNetwork::port_of(AgentId endpoint) const {
    return ports_.at(endpoint.value);
}

void LoopbackNetwork::close_listener(AgentId endpoint) { listeners_.at(endpoint.value).close(); }

LoopbackNetwork::Session& LoopbackNetwork::session(AgentId from, AgentId to, std::size_t position,
                                                   bool accept_inline) {
    std::lock_guard lock(sessions_mutex_);
    auto& slot = sessions_[{from.value, to.value}];
    if (!slot) {
        if (to.value >= ports_.size()) {
            sessions_.erase({from.value, to.value});
            throw RoutingError("no endpoint " + std::to_string(to.value));
        }
        auto s = std::make_unique<Session>();
        s->client = connect_with_retry(ports_[to.value]);
        s->client.write_line(encode_frame(Hello{from, position}));
        slot = std::move(s);
    }
    // Pending connections may belong to other sessions opened with
    // connect_to; hand each accepted socket to the session its HELLO names.
    while (accept_inline && !slot->server.valid()) {
        const int fd = ::accept(listeners_.at(to.value).fd(), nullptr, nullptr);
        if (fd < 0) throw TransportError(errno_text("accept"));
        Socket server(fd);
        auto hello = server.read_line();
        if (!hello) throw TransportError("session closed before HELLO");
        const auto frame = parse_frame(*hello);
        const auto* h = std::get_if<Hello>(&frame);
        if (!h) throw ProtocolError("session must open with HELLO", "HELLO");
        auto owner = sessions_.find({h->from.value, to.value});
        if (owner == sessions_.end() || !owner->second || owner->second->server.valid()) {
            throw ProtocolError("HELLO from " + std::to_string(h->from.value) + " matches no session", "HELLO");
        }
        owner->second->server = std::move(server);
    }
    return *slot;
}

void LoopbackNetwork::connect_to(AgentId from, AgentId peer, std::size_t position) {
    session(from, peer, position, /*accept_inline=*/false);
}

Message LoopbackNetwork::deliver(AgentId from, AgentId to, const Message& message) {
    auto& s = session(from, to, 0, /*accept_inline=*/true);
    s.client.write_line(encode_wire(message));
    auto line = s.server.read_line();
    if (!line) throw TransportError("session closed mid-message");
    return decode_wire(*line);
}

void LoopbackNetwork::send(AgentId from, AgentId to, const Message& message) {
    auto& s = session(from, to, 0, /*accept_inline=*/false);
    const auto line = encode_wire(message);
    std::lock_guard lock(s.write_mutex);
    s.client.write_line(line);
}

void LoopbackNetwork::serve_accept_loop(
    AgentId endpoint, const std::function<void(Message)>& on_message,
    const std::function<void(const std::exception&)>& on_error) {
    struct Peer {
        Socket socket;
        LineBuffer buffer;
        bool greeted = false;
    };
    std::vector<Peer> peers;
    const int listen_fd = listeners_.at(endpoint.value).fd();

    while (!stopping_.load()) {
        std::vector<pollfd> fds;
        fds.push_back({listen_fd, POLLIN, 0});
        for (auto& p : peers) fds.push_back({p.socket.fd(), POLLIN, 0});
        const int ready = ::poll(fds.data(), fds.size(), 20);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw TransportError(errno_text("poll"));
        }
        if (ready == 0) continue;

        if (fds[0].revents & POLLIN) {
            const int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd >= 0) peers.push_back({Socket(fd), {}, false});
        }
        for (std::size_t i = 1; i < fds.size(); ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            auto& peer = peers[i - 1];
            char buf[4096];
            const auto n = ::recv(peer.socket.fd(), buf, sizeof(buf), 0);
            if (n <= 0) {
                peer.socket.close();
                continue;
            }
            peer.buffer.feed(std::string_view(buf, static_cast<std::size_t>(n)));
            try {
                while (auto line = peer.buffer.next_line()) {
                    auto frame = parse_frame(*line);
                    if (!peer.greeted) {
                        if (!std::holds_alternative<Hello>(frame)) {
                            throw ProtocolError("session must open with HELLO");
                        }
                        peer.greeted = true;
                        continue;
                    }
                    if (std::holds_alternative<Bye>(frame)) {
                        peer.socket.close();
                        break;
                    }
                    if (auto* m = std::get_if<Message>(&frame)) on_message(std::move(*m));
                }
            } catch (const ProtocolError& e) {
                on_error(e);
                peer.socket.close();
            }
        }
        std::erase_if(peers, [](const Peer& p) { return !p.socket.valid(); });
    }
}

void LoopbackNetwork::stop() { stopping_.store(true); }

void LoopbackNetwork::close_all() {
    std::lock_guard lock(sessions_mutex_);
    for (auto& [key, s] : sessions_) {
        if (s->client.valid()) {
            try {
                s->client.write_line(encode_frame(Bye{AgentId{key.first}}));
            } catch (const TransportError&) {
            }
        }
        if (s->server.valid()) {
            // Drain to the BYE so the acceptor side closes in order.
            while (auto line = s->server.read_line()) {
                if (std::holds_alternative<Bye>(parse_frame(*line))) break;
            }
        }
        s->client.close();
        s->server.close();
    }
    sessions_.clear();
}

std::size_t LoopbackNetwork::open_sessions() const {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

}  // namespace selfsort
