#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>

#include "selfsort/message.hpp"

namespace selfsort {

// Line protocol, one message per LF-terminated ASCII line, single spaces
// between fields:
//
//   HELLO   <from> <position>
//   KEY     <from> <key> <position>
//   PROPOSE <from> <id> <A|P> <lo> <hi> <target> <version> <expect_lo> <expect_hi>
//   GRANT   <from> <id>
//   DENY    <from> <id> <conflict|stale|asleep>
//   NOTIFY  <from> <P|N> <neighbor|-> <key|-> <position> <version>
//   BYE     <from>
//
// Keys: "N:<decimal literal>", "T:<percent-encoded text>", "M:-".
// Trigger is the environment's impulse and never crosses the wire.

struct Hello {
    AgentId from;
    std::size_t position = 0;
    friend bool operator==(const Hello&, const Hello&) = default;
};

struct Bye {
    AgentId from;
    friend bool operator==(const Bye&, const Bye&) = default;
};

using Frame = std::variant<Hello, Bye, Message>;

std::string encode_key(const KeyValue& key);
KeyValue decode_key(std::string_view field);

/// Encodes without the trailing LF. Throws std::invalid_argument for Trigger.
std::string encode_wire(const Message& message);
std::string encode_frame(const Frame& frame);

/// Accepts the line with or without its LF. Throws ProtocolError naming the
/// verb on unknown verbs or malformed fields.
Frame parse_frame(std::string_view line);

/// Like parse_frame but rejects session-control verbs.
Message decode_wire(std::string_view line);

}  // namespace selfsort
