#include "selfsort/wire.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

#include "selfsort/errors.hpp"

namespace selfsort {

namespace {

constexpr char kHex[] = "0123456789ABCDEF";

std::string percent_encode(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        if (c > 0x20 && c < 0x7F && c != '%') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    return out;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string percent_decode(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '%') {
            out.push_back(text[i]);
            continue;
        }
        if (i + 2 >= text.size()) {
            throw ProtocolError("truncated escape in text key");
        }
        const int hi = hex_value(text[i + 1]);
        const int lo = hex_value(text[i + 2]);
        if (hi < 0 || lo < 0) throw ProtocolError("bad escape in text key");
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
    }
    return out;
}

std::string id_str(AgentId id) { return std::to_string(id.value); }

class Fields {
public:
    Fields(std::string_view line) {
        if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
        for (unsigned char c : line) {
            if (c > 0x7E || (c < 0x20)) throw ProtocolError("non-ASCII or control byte on the wire");
        }
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto sp = line.find(' ', start);
            const auto end = sp == std::string_view::npos ? line.size() : sp;
            fields_.push_back(line.substr(start, end - start));
            if (sp == std::string_view::npos) break;
            start = sp + 1;
        }
        for (auto f : fields_) {
            if (f.empty()) throw ProtocolError("empty field on the wire", verb_or_empty());
        }
    }

    std::string verb() const { return std::string(fields_.front()); }
    std::string verb_or_empty() const {
        return fields_.empty() ? std::string{} : std::string(fields_.front());
    }

    void expect(std::size_t count) const {
        if (fields_.size() != count + 1) {
            throw ProtocolError(verb() + " expects " + std::to_string(count) + " fields, got " +
                                    std::to_string(fields_.size() - 1),
                                verb());
        }
    }

    std::string_view operator[](std::size_t i) const { return fields_[i]; }

    std::uint64_t number(std::size_t i) const {
        std::uint64_t v = 0;
        const auto f = fields_[i];
        auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || p != f.data() + f.size()) {
            throw ProtocolError(verb() + ": field " + std::to_string(i) + " is not a number",
                                verb());
        }
        return v;
    }

    AgentId id(std::size_t i) const {
        const auto v = number(i);
        if (v > UINT32_MAX) throw ProtocolError(verb() + ": agent id out of range", verb());
        return AgentId{static_cast<std::uint32_t>(v)};
    }

private:
    std::vector<std::string_view> fields_;
};

}  // namespace

std::string encode_key(const KeyValue& key) {
    switch (key.kind()) {
        case KeyKind::Numeric: return "N:" + key.str();
        case KeyKind::Text: return "T:" + percent_encode(key.str());
        case KeyKind::Missing: return "M:-";
    }
    return "M:-";
}

KeyValue decode_key(std::string_view field) {
    if (field.size() < 2 || field[1] != ':') throw ProtocolError("malformed key field");
    const auto body = field.substr(2);
    switch (field[0]) {
        case 'N': {
            auto k = KeyValue::from_numeric_literal(body);
            if (!k) throw ProtocolError("malformed numeric key");
            return *k;
        }
        case 'T': return KeyValue::text(percent_decode(body));
        case 'M':
            if (body != "-") throw ProtocolError("malformed missing key");
            return KeyValue::missing();
        default: throw ProtocolError("unknown key kind");
    }
}

std::string encode_wire(const Message& message) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Trigger>) {
                throw std::invalid_argument("Trigger is not carried on the wire");
            } else if constexpr (std::is_same_v<T, KeyExchange>) {
                return "KEY " + id_str(m.from) + " " + encode_key(m.key) + " " +
                       std::to_string(m.position);
            } else if constexpr (std::is_same_v<T, NeighborChanged>) {
                return "NOTIFY " + id_str(m.from) + (m.side == Side::Prev ? " P " : " N ") +
                       (m.neighbor ? id_str(*m.neighbor) : "-") + " " +
                       (m.key ? encode_key(*m.key) : "-") + " " + std::to_string(m.position) +
                       " " + std::to_string(m.version);
            } else if constexpr (std::is_same_v<T, SwapGranted>) {
                return "GRANT " + id_str(m.from) + " " + std::to_string(m.proposal_id);
            } else if constexpr (std::is_same_v<T, SwapDenied>) {
                return "DENY " + id_str(m.from) + " " + std::to_string(m.proposal_id) +
                       " " + std::string(to_string(m.reason));
            } else {
                const auto& p = m.proposal;
                return "PROPOSE " + id_str(m.from) + " " + std::to_string(p.id) +
                       (p.kind == ProposalKind::Adjacent ? " A " : " P ") +
                       std::to_string(p.lo) + " " + std::to_string(p.hi) + " " +
                       std::to_string(p.target) + " " + std::to_string(p.version) + " " +
                       id_str(p.expect_lo) + " " + id_str(p.expect_hi);
            }
        },
        message);
}

std::string encode_frame(const Frame& frame) {
    if (const auto* h = std::get_if<Hello>(&frame)) {
        return "HELLO " + id_str(h->from) + " " + std::to_string(h->position);
    }
    if (const auto* b = std::get_if<Bye>(&frame)) return "BYE " + id_str(b->from);
    return encode_wire(std::get<Message>(frame));
}

Frame parse_frame(std::string_view line) {
    if (line.empty() || line == "\n") throw ProtocolError("empty line");
    Fields f(line);
    const auto verb = f.verb();
    if (verb == "HELLO") {
        f.expect(2);
        return Hello{f.id(1), f.number(2)};
    }
    if (verb == "BYE") {
        f.expect(1);
        return Bye{f.id(1)};
    }
    if (verb == "KEY") {
        f.expect(3);
        return Message{KeyExchange{f.id(1), decode_key(f[2]), f.number(3)}};
    }
    if (verb == "NOTIFY") {
        f.expect(6);
        NeighborChanged m;
        m.from = f.id(1);
        if (f[2] == "P") {
            m.side = Side::Prev;
        } else if (f[2] == "N") {
            m.side = Side::Next;
        } else {
            throw ProtocolError("NOTIFY: side must be P or N", verb);
        }
        if (f[3] != "-") m.neighbor = f.id(3);
        if (f[4] != "-") m.key = decode_key(f[4]);
        m.position = f.number(5);
        m.version = f.number(6);
        return Message{m};
    }
    if (verb == "GRANT") {
        f.expect(2);
        return Message{SwapGranted{f.id(1), f.number(2)}};
    }
    if (verb == "DENY") {
        f.expect(3);
        const auto reason = parse_deny_reason(f[3]);
        if (!reason) throw ProtocolError("DENY: reason must be conflict, stale or asleep", verb);
        return Message{SwapDenied{f.id(1), f.number(2), *reason}};
    }
    if (verb == "PROPOSE") {
        f.expect(9);
        SwapProposal p;
        const auto from = f.id(1);
        p.id = f.number(2);
        p.proposer = from;
        if (f[3] == "A") {
            p.kind = ProposalKind::Adjacent;
        } else if (f[3] == "P") {
            p.kind = ProposalKind::AroundPivot;
        } else {
            throw ProtocolError("PROPOSE: kind must be A or P", verb);
        }
        p.lo = f.number(4);
        p.hi = f.number(5);
        p.target = f.number(6);
        p.version = f.number(7);
        p.expect_lo = f.id(8);
        p.expect_hi = f.id(9);
        return Message{Propose{from, p}};
    }
    throw ProtocolError("unknown verb " + verb, verb);
}

Message decode_wire(std::string_view line) {
    auto frame = parse_frame(line);
    if (auto* m = std::get_if<Message>(&frame)) return std::move(*m);
    throw ProtocolError("session-control line is not a message",
                        std::holds_alternative<Hello>(frame) ? "HELLO" : "BYE");
}

}  // namespace selfsort
