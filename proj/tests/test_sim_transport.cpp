#include <atomic>
#include <random>
#include <thread>

#include "doctest.h"
#include "generators.hpp"
#include "selfsort/errors.hpp"
#include "selfsort/loopback.hpp"
#include "selfsort/simulation.hpp"
#include "selfsort/wire.hpp"

using namespace selfsort;
using testgen::random_message;

namespace {

KeyValue N(double v) { return KeyValue::numeric(v); }
AgentId A(std::uint32_t v) { return AgentId{v}; }

std::vector<KeyValue> numbers(std::initializer_list<double> xs) {
    std::vector<KeyValue> out;
    for (auto x : xs) out.push_back(N(x));
    return out;
}

std::vector<double> plain(const RunResult& r) {
    std::vector<double> out;
    for (const auto& k : r.keys()) out.push_back(k.number());
    return out;
}

}  // namespace

TEST_CASE("wire grammar instances") {
    const auto key = *KeyValue::from_numeric_literal("59.60");
    CHECK(encode_wire(KeyExchange{A(7), key, 3}) == "KEY 7 N:59.60 3");
    CHECK(encode_key(KeyValue::missing()) == "M:-");
    CHECK(encode_frame(Hello{A(7), 3}) == "HELLO 7 3");
    CHECK(encode_frame(Bye{A(7)}) == "BYE 7");
    CHECK(encode_wire(SwapDenied{kListEndpoint, 4, DenyReason::Asleep}) == "DENY 0 4 asleep");
    CHECK(std::get<Hello>(parse_frame("HELLO 7 3\n")) == Hello{A(7), 3});
    CHECK(decode_wire("KEY 7 N:59.60 3") == Message{KeyExchange{A(7), key, 3}});
    CHECK(decode_key("T:ADJEI%20Francis") == KeyValue::text("ADJEI Francis"));
    CHECK_THROWS_AS(encode_wire(Trigger{kListEndpoint, "VAL"}), std::invalid_argument);
}

TEST_CASE("malformed wire lines") {
    try {
        decode_wire("FROB 1 2");
        FAIL("unknown verb accepted");
    } catch (const ProtocolError& e) {
        CHECK(e.verb() == "FROB");
        CHECK(std::string(e.what()).find("FROB") != std::string::npos);
    }
    CHECK_THROWS_AS(decode_wire("KEY"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("KEY 7 N:1"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("KEY 7 N:abc 3"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("KEY  7 N:1 3"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("GRANT x 1"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("DENY 0 4 busy"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("HELLO 1 1"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("KEY 7 T:%4 3"), ProtocolError);
    CHECK_THROWS_AS(decode_wire("KEY 7 T:\xc3\xa9 3"), ProtocolError);
}

TEST_CASE("wire round trip over generated messages") {
    std::mt19937_64 rng(20240601);
    for (int i = 0; i < 10000; ++i) {
        const auto m = random_message(rng);
        const auto line = encode_wire(m);
        CAPTURE(line);
        for (unsigned char c : line) REQUIRE((c >= 0x20 && c < 0x7f));
        REQUIRE(line.find("  ") == std::string::npos);
        REQUIRE(decode_wire(line) == m);
    }
}

TEST_CASE("trace lines round trip") {
    TraceEvent e{12, TraceKind::Swap, {{"id", "4"}, {"kind", "pivot"}, {"lo", "1"}, {"hi", "3"}}};
    const auto line = format_trace_line(e);
    CHECK(line == "12\tSwap\tid=4\tkind=pivot\tlo=1\thi=3");
    CHECK(parse_trace_line(line) == e);
    CHECK(e.get_number("hi") == 3);
    CHECK(e.get("missing").empty());
}

TEST_CASE("loopback delivery matches the sent message") {
    LoopbackNetwork net(8);
    net.connect_to(A(7), A(3), 3);
    const Message m = KeyExchange{A(7), *KeyValue::from_numeric_literal("59.60"), 3};
    CHECK(net.deliver(A(7), A(3), m) == m);
    CHECK(net.open_sessions() == 1);
    net.close_all();
    CHECK(net.open_sessions() == 0);
}

TEST_CASE("accept loop sessions") {
    LoopbackNetwork net(3);
    std::atomic<int> received{0};
    std::atomic<int> errors{0};
    std::thread server([&] {
        net.serve_accept_loop(
            A(1), [&](Message) { ++received; }, [&](const std::exception&) { ++errors; });
    });

    SUBCASE("malformed line drops the session") {
        auto s = connect_with_retry(net.port_of(A(1)));
        s.write_line("HELLO 2 2");
        s.write_line("KEY 2 N:5 2");
        s.write_line("KEY");
        CHECK_FALSE(s.read_line());  // server hung up
        CHECK(received == 1);
        CHECK(errors == 1);
    }
    SUBCASE("BYE closes the session") {
        auto s = connect_with_retry(net.port_of(A(1)));
        s.write_line("HELLO 2 2");
        s.write_line("BYE 2");
        CHECK_FALSE(s.read_line());
        CHECK(errors == 0);
    }
    SUBCASE("first line must be HELLO") {
        auto s = connect_with_retry(net.port_of(A(1)));
        s.write_line("GRANT 0 1");
        CHECK_FALSE(s.read_line());
        CHECK(received == 0);
        CHECK(errors == 1);
    }
    net.stop();
    server.join();
}

TEST_CASE("connecting to a closed listener fails after bounded retries") {
    LoopbackNetwork net(2);
    const auto port = net.port_of(A(1));
    net.close_listener(A(1));
    CHECK_THROWS_AS(connect_with_retry(port, 3), TransportError);
}

TEST_CASE("post_message routing") {
    Simulation sim(numbers({2, 1, 3}), RunConfig{});
    CHECK_THROWS_AS(sim.post_message(A(1), KeyExchange{A(2), N(1), 2}), RoutingError);  // before trigger
    sim.dispatch_trigger();
    CHECK(sim.pending_messages() == 3);
    sim.post_message(A(2), KeyExchange{A(1), N(2), 1});
    CHECK(sim.pending_messages() == 4);
    CHECK_THROWS_AS(sim.post_message(A(9), KeyExchange{A(1), N(2), 1}), RoutingError);
    CHECK_THROWS_AS(sim.post_message(kListEndpoint, SwapGranted{A(1), 1}), RoutingError);
    CHECK_THROWS_AS(sim.add_agent(N(4)), SealedListError);
}

TEST_CASE("run_until_quiescent basics") {
    auto r = run_sort(numbers({6, 5, 4, 3}), RunConfig{});
    CHECK(plain(r) == std::vector<double>{3, 4, 5, 6});
    REQUIRE_FALSE(r.trace.empty());
    CHECK(r.trace.back().kind == TraceKind::Quiescent);

    r = run_sort(numbers({1, 2, 3, 4, 5}), RunConfig{});
    CHECK(r.stats.swaps == 0);

    r = run_sort(numbers({2, 1}), RunConfig{});
    CHECK(r.stats.swaps == 1);
    CHECK(plain(r) == std::vector<double>{1, 2});

    RunConfig desc;
    desc.direction = SortDirection::Descending;
    r = run_sort(numbers({3, 6, 4, 5}), desc);
    CHECK(plain(r) == std::vector<double>{6, 5, 4, 3});
}

TEST_CASE("too few agents") {
    CHECK_THROWS_AS(run_sort(numbers({1}), RunConfig{}), Refusal);
}

TEST_CASE("same seed gives the same trace") {
    const auto keys = numbers({9, 3, 7, 1, 8, 2, 6, 4, 5});
    RunConfig a;
    a.seed = 42;
    const auto t1 = trace_to_string(run_sort(keys, a).trace);
    const auto t2 = trace_to_string(run_sort(keys, a).trace);
    CHECK(t1 == t2);
    a.seed = 43;
    const auto t3 = trace_to_string(run_sort(keys, a).trace);
    CHECK(t1 != t3);
}

TEST_CASE("step budget exhaustion carries the trace") {
    RunConfig cfg;
    cfg.max_steps = 5;
    try {
        run_sort(numbers({8, 7, 6, 5, 4, 3, 2, 1}), cfg);
        FAIL("expected NonTermination");
    } catch (const NonTermination& e) {
        CHECK(e.stats().steps == 5);
        CHECK_FALSE(e.trace().empty());
    }
}

TEST_CASE("step and quiescence") {
    Simulation sim(numbers({1, 2}), RunConfig{});
    CHECK_FALSE(sim.is_quiescent());
    while (sim.step() == StepStatus::Progressed) {
    }
    CHECK(sim.is_quiescent());
    CHECK(sim.step() == StepStatus::Quiescent);
    for (std::uint32_t i = 1; i <= 2; ++i) CHECK(sim.agent(A(i)).state().status == AgentStatus::Suspended);

    // A wake-up in flight keeps the run alive until it is handled.
    sim.post_message(A(1), NeighborChanged{kListEndpoint, Side::Next, A(2), N(2), 1, sim.list().version()});
    CHECK_FALSE(sim.is_quiescent());
    CHECK(sim.step() == StepStatus::Progressed);
    CHECK(sim.is_quiescent());
}

TEST_CASE("default budget is 50 n^2") {
    Simulation sim(numbers({3, 2, 1}), RunConfig{});
    CHECK(sim.max_steps() == 450);
}

TEST_CASE("loopback transport gives the same result as in-memory") {
    std::mt19937_64 rng(5);
    std::vector<KeyValue> keys;
    for (int i = 0; i < 20; ++i) keys.push_back(N(static_cast<double>(rng() % 50)));
    RunConfig mem;
    mem.seed = 9;
    RunConfig net = mem;
    net.transport = TransportKind::Loopback;
    const auto a = run_sort(keys, mem);
    const auto b = run_sort(keys, net);
    CHECK(a.order == b.order);
    CHECK(trace_to_string(a.trace) == trace_to_string(b.trace));
}

TEST_CASE("concurrent mode sorts") {
    for (auto transport : {TransportKind::InMemory, TransportKind::Loopback}) {
        std::mt19937_64 rng(11);
        std::vector<KeyValue> keys;
        for (int i = 0; i < 24; ++i) keys.push_back(N(static_cast<double>(rng() % 100)));
        RunConfig cfg;
        cfg.mode = RunMode::Concurrent;
        cfg.transport = transport;
        const auto r = run_sort(keys, cfg);
        auto got = plain(r);
        CHECK(std::is_sorted(got.begin(), got.end()));
        CHECK(r.stats.swaps <= r.stats.initial_inversions);
        REQUIRE_FALSE(r.trace.empty());
        CHECK(r.trace.back().kind == TraceKind::Quiescent);
    }
}

TEST_CASE("a suspended counterpart is not swapped before its wake-up arrives") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        RunConfig cfg;
        cfg.seed = seed;
        const auto r = run_sort(numbers({6, 5, 4, 3}), cfg);
        std::vector<bool> asleep(5, false);
        for (const auto& e : r.trace) {
            if (e.kind == TraceKind::Suspend) asleep.at(e.get_number("agent")) = true;
            if (e.kind == TraceKind::NeighborNotify) asleep.at(e.get_number("to")) = false;
            if (e.kind == TraceKind::Swap) {
                CAPTURE(seed);
                CHECK_FALSE(asleep.at(e.get_number("a")));
                CHECK_FALSE(asleep.at(e.get_number("b")));
            }
        }
    }
}
