#include <algorithm>
#include <array>

#include "doctest.h"
#include "selfsort/agent.hpp"
#include "selfsort/errors.hpp"

using namespace selfsort;

namespace {

KeyValue N(double v) { return KeyValue::numeric(v); }
KeyValue T(const char* s) { return KeyValue::text(s); }

constexpr auto Asc = SortDirection::Ascending;
constexpr auto Desc = SortDirection::Descending;

AgentState interior(double self) {
    AgentState s;
    s.id = AgentId{2};
    s.key_value = N(self);
    s.prev_neighbor = AgentId{1};
    s.next_neighbor = AgentId{3};
    s.position = 2;
    s.status = AgentStatus::Sorting;
    return s;
}

}  // namespace

TEST_CASE("key ordering") {
    CHECK(compare_keys(N(3), N(5), Asc) < 0);
    CHECK(compare_keys(N(3), N(5), Desc) > 0);
    CHECK(compare_keys(N(5), N(5), Asc) == 0);
    CHECK(compare_keys(T("adjei"), T("ADJEI"), Asc) == 0);
    CHECK(compare_keys(T("Bosompim"), T("adjei"), Asc) > 0);
    // Missing sorts last whichever way the list runs.
    CHECK(compare_keys(KeyValue::missing(), N(1), Asc) > 0);
    CHECK(compare_keys(KeyValue::missing(), N(1), Desc) > 0);
    CHECK(compare_keys(KeyValue::missing(), KeyValue::missing(), Asc) == 0);
    CHECK(compare_keys(N(100), T("a"), Asc) < 0);
    CHECK(compare_keys(N(100), T("a"), Desc) > 0);
}

TEST_CASE("numeric literals survive") {
    auto k = KeyValue::from_numeric_literal("59.60");
    REQUIRE(k);
    CHECK(k->number() == doctest::Approx(59.6));
    CHECK(k->str() == "59.60");
    CHECK_FALSE(KeyValue::from_numeric_literal("12abc"));
    CHECK_FALSE(KeyValue::from_numeric_literal("inf"));
    CHECK_FALSE(KeyValue::from_numeric_literal(""));
    CHECK(parse_direction("desc") == Desc);
    CHECK_FALSE(parse_direction("sideways"));
}

TEST_CASE("on_trigger") {
    const std::set<std::string> attrs{"NAME", "AVE"};
    auto s = interior(5);
    CHECK(on_trigger(s, "AVE", attrs) == AgentAction::Wait);
    CHECK(on_trigger(s, "HEIGHT", attrs) == AgentAction::IgnoreTrigger);
    CHECK(on_trigger(s, "ave", attrs) == AgentAction::IgnoreTrigger);

    auto head = s;
    head.prev_neighbor.reset();
    CHECK(on_trigger(head, "AVE", attrs) == AgentAction::SetPrevSorted);
    auto tail = s;
    tail.next_neighbor.reset();
    CHECK(on_trigger(tail, "AVE", attrs) == AgentAction::SetNextSorted);
    auto alone = head;
    alone.next_neighbor.reset();
    CHECK(on_trigger(alone, "AVE", attrs) == AgentAction::IgnoreTrigger);
}

TEST_CASE("evaluate_prev / evaluate_next") {
    CHECK(evaluate_prev(N(5), N(3), Asc) == AgentAction::SetPrevSorted);
    CHECK(evaluate_prev(N(3), N(5), Asc) == AgentAction::ProposeSwapWithPrev);
    CHECK(evaluate_prev(N(5), N(5), Asc) == AgentAction::SetPrevSorted);
    CHECK(evaluate_prev(N(5), N(3), Desc) == AgentAction::ProposeSwapWithPrev);
    CHECK(evaluate_next(N(5), N(7), Asc) == AgentAction::SetNextSorted);
    CHECK(evaluate_next(N(7), N(5), Asc) == AgentAction::ProposeSwapWithNext);
    CHECK(evaluate_next(N(5), N(5), Desc) == AgentAction::SetNextSorted);
}

TEST_CASE("classify_triple examples") {
    CHECK(classify_triple(N(7), N(5), N(3), Asc) == SwapDemand::AroundPivot);
    CHECK(classify_triple(N(3), N(5), N(7), Asc) == SwapDemand::None);
    CHECK(classify_triple(N(3), N(7), N(5), Asc) == SwapDemand::NextOnly);
    CHECK(classify_triple(std::nullopt, N(5), N(3), Asc) == SwapDemand::NextOnly);
    CHECK(classify_triple(N(5), N(5), N(5), Asc) == SwapDemand::None);
    CHECK_THROWS_AS(classify_triple(std::nullopt, N(5), std::nullopt, Asc), std::invalid_argument);
}

TEST_CASE("classify_triple over every ordering of a distinct triple") {
    std::array<int, 3> v{1, 2, 3};
    int seen = 0;
    do {
        for (auto dir : {Asc, Desc}) {
            // Oracle on raw ints: a side is bad when the pair is strictly inverted.
            auto before = [&](int a, int b) { return dir == Asc ? a < b : a > b; };
            const bool prev_bad = before(v[1], v[0]);
            const bool next_bad = before(v[2], v[1]);
            SwapDemand want = SwapDemand::None;
            if (prev_bad && next_bad) want = SwapDemand::AroundPivot;
            else if (prev_bad) want = SwapDemand::PrevOnly;
            else if (next_bad) want = SwapDemand::NextOnly;
            CAPTURE(v[0]);
            CAPTURE(v[1]);
            CAPTURE(v[2]);
            CHECK(classify_triple(N(v[0]), N(v[1]), N(v[2]), dir) == want);
            // AroundPivot exactly when the triple is fully reversed.
            const bool reversed = before(v[2], v[1]) && before(v[1], v[0]);
            CHECK((want == SwapDemand::AroundPivot) == reversed);
        }
        ++seen;
    } while (std::next_permutation(v.begin(), v.end()));
    CHECK(seen == 6);
}

TEST_CASE("detect_deadlock") {
    NeighborhoodSnapshot a{N(6), N(5), N(4), 1};
    NeighborhoodSnapshot b{N(6), N(5), N(4), 2};
    NeighborhoodSnapshot c{N(3), N(5), N(4), 3};
    CHECK(detect_deadlock(a, b));
    CHECK_FALSE(detect_deadlock(a, c));
    CHECK_FALSE(detect_deadlock(std::nullopt, a));
    CHECK_THROWS_AS(detect_deadlock(b, a), std::invalid_argument);
}

TEST_CASE("resolve_deadlock yields to the preceding neighbor") {
    // Agents holding 5 and 4 in [6,5,4,3].
    auto five = interior(5);
    auto four = interior(4);
    four.id = AgentId{3};
    four.prev_neighbor = AgentId{2};
    four.next_neighbor = AgentId{4};
    CHECK(resolve_deadlock(five) == AgentAction::ProposeSwapWithPrev);
    CHECK(resolve_deadlock(four) == AgentAction::ProposeSwapWithPrev);
    five.prev_neighbor.reset();
    CHECK_THROWS_AS(resolve_deadlock(five), ProtocolFault);
}

TEST_CASE("on_neighbor_changed wakes a suspended agent") {
    auto s = interior(5);
    s.prev_sorted = s.next_sorted = true;
    s.status = AgentStatus::Suspended;
    CHECK(should_suspend(s));

    CHECK(on_neighbor_changed(s, Side::Next, N(3), Asc) == AgentAction::ProposeSwapWithNext);
    CHECK(s.status == AgentStatus::Sorting);
    CHECK_FALSE(s.next_sorted);
    CHECK_FALSE(should_suspend(s));

    auto p = interior(5);
    CHECK(on_neighbor_changed(p, Side::Prev, N(2), Asc) == AgentAction::SetPrevSorted);
    auto e = interior(5);
    CHECK(on_neighbor_changed(e, Side::Next, N(5), Asc) == AgentAction::SetNextSorted);
}

TEST_CASE("agent replies to the trigger with its key") {
    auto attrs = std::make_shared<const std::set<std::string>>(std::set<std::string>{"VAL"});
    Agent a(AgentId{2}, N(5), attrs, Asc);
    a.link(AgentId{1}, AgentId{3}, 2);
    auto r = a.handle(Trigger{kListEndpoint, "VAL"});
    REQUIRE(r.outbox.size() == 2);
    CHECK(r.outbox[0].to == AgentId{1});
    CHECK(r.outbox[1].to == AgentId{3});
    CHECK(std::get<KeyExchange>(r.outbox[0].message) == KeyExchange{AgentId{2}, N(5), 2});
    CHECK(a.state().status == AgentStatus::Sorting);

    // Prev key 7 arrives: the prev side is out of order, so a swap is requested.
    r = a.handle(KeyExchange{AgentId{1}, N(7), 1});
    REQUIRE(r.proposal);
    CHECK(r.proposal->kind == ProposalKind::Adjacent);
    CHECK(r.proposal->lo == 1);
    CHECK(r.proposal->hi == 2);
    CHECK(r.proposal->target == 1);
    a.proposal_submitted(11);

    // While the proposal is pending, new knowledge does not trigger a second one.
    r = a.handle(KeyExchange{AgentId{3}, N(3), 3});
    CHECK_FALSE(r.proposal);

    // A denial makes the agent re-evaluate: 7 > 5 > 3 asks for the pivot swap.
    r = a.handle(SwapDenied{kListEndpoint, 11, DenyReason::Conflict});
    REQUIRE(r.proposal);
    CHECK(r.proposal->kind == ProposalKind::AroundPivot);
    CHECK(r.proposal->lo == 1);
    CHECK(r.proposal->hi == 3);
    CHECK(r.proposal->target == 2);
}

TEST_CASE("agent ignores a trigger for an unknown attribute") {
    auto attrs = std::make_shared<const std::set<std::string>>(std::set<std::string>{"VAL"});
    Agent a(AgentId{1}, N(5), attrs, Asc);
    a.link(std::nullopt, AgentId{2}, 1);
    auto r = a.handle(Trigger{kListEndpoint, "HEIGHT"});
    CHECK(r.actions == std::vector<AgentAction>{AgentAction::IgnoreTrigger});
    CHECK(r.outbox.empty());
    CHECK(a.settled());
}

TEST_CASE("agents refuse proposals") {
    Agent a(AgentId{1}, N(5), nullptr, Asc);
    CHECK_THROWS_AS(a.handle(Propose{AgentId{2}, SwapProposal{}}), ProtocolFault);
}

TEST_CASE("a repeated pivot neighborhood is resolved toward prev") {
    auto attrs = std::make_shared<const std::set<std::string>>(std::set<std::string>{"VAL"});
    Agent a(AgentId{2}, N(5), attrs, Asc);
    a.link(AgentId{1}, AgentId{3}, 2);
    a.handle(Trigger{kListEndpoint, "VAL"});
    a.handle(KeyExchange{AgentId{1}, N(6), 1});
    a.proposal_submitted(1);
    a.handle(KeyExchange{AgentId{3}, N(4), 3});
    auto r = a.handle(SwapDenied{kListEndpoint, 1, DenyReason::Conflict});
    REQUIRE(r.proposal);
    CHECK(r.proposal->kind == ProposalKind::AroundPivot);
    CHECK_FALSE(r.deadlock);
    a.proposal_submitted(2);

    // Denied again with nothing moved: same (6,5,4) neighborhood.
    r = a.handle(SwapDenied{kListEndpoint, 2, DenyReason::Conflict});
    REQUIRE(r.deadlock);
    REQUIRE(r.proposal);
    CHECK(r.proposal->kind == ProposalKind::Adjacent);
    CHECK(r.proposal->target == 1);
    CHECK_FALSE(a.state().next_sorted);
}

TEST_CASE("an asleep denial waits for the neighbor to move") {
    auto attrs = std::make_shared<const std::set<std::string>>(std::set<std::string>{"VAL"});
    Agent a(AgentId{2}, N(3), attrs, Asc);
    a.link(AgentId{1}, std::nullopt, 2);
    a.handle(Trigger{kListEndpoint, "VAL"});
    auto r = a.handle(KeyExchange{AgentId{1}, N(6), 1});
    REQUIRE(r.proposal);
    a.proposal_submitted(4);

    r = a.handle(SwapDenied{kListEndpoint, 4, DenyReason::Asleep});
    CHECK_FALSE(r.proposal);
    CHECK(r.actions == std::vector<AgentAction>{AgentAction::Wait});
    CHECK(a.state().status == AgentStatus::Sorting);
    CHECK_FALSE(a.settled());
}

TEST_CASE("an older NeighborChanged for the same side is dropped") {
    auto attrs = std::make_shared<const std::set<std::string>>(std::set<std::string>{"VAL"});
    Agent a(AgentId{2}, N(5), attrs, Asc);
    a.link(AgentId{1}, AgentId{3}, 2);
    a.handle(Trigger{kListEndpoint, "VAL"});
    a.handle(NeighborChanged{kListEndpoint, Side::Prev, AgentId{4}, N(4), 2, 7});
    a.handle(NeighborChanged{kListEndpoint, Side::Prev, AgentId{1}, N(9), 2, 6});
    CHECK(a.state().prev_neighbor == AgentId{4});
    CHECK(a.state().prev_key == N(4));

    // The other side keeps its own version.
    a.handle(NeighborChanged{kListEndpoint, Side::Next, AgentId{3}, N(6), 2, 5});
    CHECK(a.state().next_key == N(6));
    CHECK(a.state().status == AgentStatus::Suspended);
}
