#include "selfsort/simulation.hpp"

#include <chrono>
#include <thread>

#include "selfsort/errors.hpp"
#include "selfsort/wire.hpp"

namespace selfsort {

namespace {

using Payload = std::vector<std::pair<std::string, std::string>>;

std::string id_str(AgentId id) { return std::to_string(id.value); }
std::string opt_id(const std::optional<AgentId>& id) { return id ? id_str(*id) : "-"; }
std::string side_str(Side s) { return s == Side::Prev ? "prev" : "next"; }
std::string kind_str(ProposalKind k) { return k == ProposalKind::Adjacent ? "adjacent" : "pivot"; }

constexpr auto kConcurrentWallLimit = std::chrono::seconds(120);

}  // namespace

std::vector<KeyValue> RunResult::keys() const {
    std::vector<KeyValue> out;
    out.reserve(order.size());
    for (const auto& [id, key] : order) out.push_back(key);
    return out;
}

Simulation::Simulation(const std::vector<KeyValue>& keys, RunConfig config, std::string key_attribute)
    : Simulation(keys, config, key_attribute, std::set<std::string>{key_attribute}) {}

Simulation::Simulation(const std::vector<KeyValue>& keys, RunConfig config, std::string key_attribute,
                       std::set<std::string> attributes)
    : config_(config),
      key_attribute_(std::move(key_attribute)),
      attributes_(std::make_shared<const std::set<std::string>>(std::move(attributes))),
      list_(config.direction),
      rng_(config.seed) {
    agents_.reserve(keys.size());
    for (const auto& k : keys) add_agent(k);
}

Simulation::~Simulation() = default;

AgentId Simulation::add_agent(KeyValue key) {
    const AgentId id{static_cast<std::uint32_t>(agents_.size() + 1)};
    const auto pos = list_.insert(id, key);
    std::optional<AgentId> prev;
    if (!agents_.empty()) {
        auto& tail = agents_.back();
        prev = tail.id();
        tail.link(tail.state().prev_neighbor, id, tail.state().position);
    }
    agents_.emplace_back(id, std::move(key), attributes_, config_.direction);
    agents_.back().link(prev, std::nullopt, pos);
    inboxes_.push_back(std::make_unique<Mailbox>());
    return id;
}

std::uint64_t Simulation::max_steps() const noexcept {
    const std::uint64_t n = agents_.size();
    return config_.max_steps ? config_.max_steps : 50 * n * n;
}

void Simulation::dispatch_trigger() {
    list_.seal();
    triggered_ = true;
    const auto n = agents_.size();
    inboxes_.push_back(std::make_unique<Mailbox>());  // index n: the list's proposal inbox
    ready_slot_.assign(n + 1, -1);
    max_steps_ = max_steps();
    suspended_ = std::make_unique<std::atomic<bool>[]>(n);

    std::vector<KeyValue> initial;
    for (const auto& a : agents_) initial.push_back(a.state().key_value);
    stats_.initial_inversions = inversions(initial, config_.direction);

    if (config_.transport == TransportKind::Loopback) {
        net_ = std::make_unique<LoopbackNetwork>(n + 1);
    }
    // Broadcast impulse, in list order.
    for (const auto& a : agents_) post_message(a.id(), Trigger{kListEndpoint, key_attribute_});
}

void Simulation::record(TraceKind kind, Payload payload) {
    if (!config_.record_trace) return;
    std::lock_guard lock(events_mutex_);
    trace_.push_back({trace_.size() + 1, kind, std::move(payload)});
}

void Simulation::post_message(AgentId to, Message message) {
    const auto n = agents_.size();
    std::size_t index = 0;
    if (to == kListEndpoint) {
        if (!std::holds_alternative<Propose>(message)) {
            throw RoutingError("the sorting list only accepts proposals");
        }
        index = n;
    } else if (to.value >= 1 && to.value <= n) {
        index = to.value - 1;
    } else {
        throw RoutingError("unknown destination agent " + id_str(to));
    }
    if (!triggered_) throw RoutingError("messages flow only after the trigger is dispatched");
    {
        std::lock_guard lock(events_mutex_);
        ++stats_.messages;
    }
    const bool concurrent = config_.mode == RunMode::Concurrent;
    if (concurrent) outstanding_.fetch_add(1);

    if (net_ && !std::holds_alternative<Trigger>(message)) {
        const auto from = sender_of(message);
        if (concurrent) {
            net_->send(from, to, message);
            return;
        }
        message = net_->deliver(from, to, message);
    }
    enqueue(index, std::move(message));
}

void Simulation::enqueue(std::size_t index, Message message) {
    auto& mb = *inboxes_[index];
    {
        std::lock_guard lock(mb.mutex);
        mb.queue.push_back(std::move(message));
        if (config_.mode == RunMode::Deterministic) {
            ++queued_;
            if (ready_slot_[index] < 0) {
                ready_slot_[index] = static_cast<std::ptrdiff_t>(ready_.size());
                ready_.push_back(index);
            }
        }
    }
    mb.cv.notify_one();
}

std::optional<Message> Simulation::dequeue(std::size_t index) {
    auto& mb = *inboxes_[index];
    std::lock_guard lock(mb.mutex);
    if (mb.queue.empty()) return std::nullopt;
    Message m = std::move(mb.queue.front());
    mb.queue.pop_front();
    if (config_.mode == RunMode::Deterministic) {
        --queued_;
        if (mb.queue.empty()) {
            const auto slot = ready_slot_[index];
            ready_slot_[ready_.back()] = slot;
            ready_[static_cast<std::size_t>(slot)] = ready_.back();
            ready_.pop_back();
            ready_slot_[index] = -1;
        }
    }
    return m;
}

void Simulation::deliver_to_agent(std::size_t index, const Message& message) {
    auto& agent = agents_[index];
    const bool tracing = config_.record_trace;
    const bool was_settled = agent.settled();

    if (tracing) {
        if (const auto* t = std::get_if<Trigger>(&message)) {
            record(TraceKind::Trigger, {{"agent", id_str(agent.id())}, {"attr", t->key_attribute}});
        } else if (const auto* k = std::get_if<KeyExchange>(&message)) {
            record(TraceKind::KeyExchange, {{"from", id_str(k->from)},
                                            {"to", id_str(agent.id())},
                                            {"key", encode_key(k->key)},
                                            {"pos", std::to_string(k->position)}});
        } else if (const auto* c = std::get_if<NeighborChanged>(&message)) {
            record(TraceKind::NeighborNotify, {{"to", id_str(agent.id())},
                                               {"side", side_str(c->side)},
                                               {"neighbor", opt_id(c->neighbor)},
                                               {"key", c->key ? encode_key(*c->key) : "-"},
                                               {"pos", std::to_string(c->position)},
                                               {"version", std::to_string(c->version)}});
        }
    }

    Reaction r = agent.handle(message);

    if (r.deadlock) {
        {
            std::lock_guard lock(events_mutex_);
            ++stats_.deadlocks_resolved;
        }
        if (tracing) {
            const auto& s = *r.deadlock;
            record(TraceKind::Deadlock, {{"agent", id_str(agent.id())},
                                         {"prev", s.prev_key ? encode_key(*s.prev_key) : "-"},
                                         {"self", encode_key(s.self_key)},
                                         {"next", s.next_key ? encode_key(*s.next_key) : "-"}});
        }
    }
    auto log_actions = [&] {
        suspended_[index].store(agent.state().status == AgentStatus::Suspended);
        if (!tracing) return;
        for (auto action : r.actions) {
            if (action == AgentAction::Suspend) {
                record(TraceKind::Suspend, {{"agent", id_str(agent.id())}});
            } else {
                record(TraceKind::Evaluate,
                       {{"agent", id_str(agent.id())}, {"action", std::string(to_string(action))}});
            }
        }
    };
    // The arbiter must not see a Suspend in the trace before it sees the flag.
    if (config_.mode == RunMode::Concurrent) {
        list_.with_lock(log_actions);
    } else {
        log_actions();
    }
    for (auto& out : r.outbox) post_message(out.to, std::move(out.message));

    if (r.proposal) {
        SwapProposal p;
        {
            std::lock_guard lock(events_mutex_);
            p.id = next_proposal_id_++;
        }
        p.proposer = agent.id();
        p.kind = r.proposal->kind;
        p.lo = r.proposal->lo;
        p.hi = r.proposal->hi;
        p.target = r.proposal->target;
        p.expect_lo = r.proposal->expect_lo;
        p.expect_hi = r.proposal->expect_hi;
        p.version = list_.version();
        agent.proposal_submitted(p.id);
        if (tracing) {
            record(TraceKind::Propose, {{"id", std::to_string(p.id)},
                                        {"agent", id_str(p.proposer)},
                                        {"kind", kind_str(p.kind)},
                                        {"lo", std::to_string(p.lo)},
                                        {"hi", std::to_string(p.hi)},
                                        {"version", std::to_string(p.version)}});
        }
        post_message(kListEndpoint, Propose{p.proposer, p});
    }

    const bool now_settled = agent.settled();
    if (now_settled && !was_settled) {
        settled_.fetch_add(1);
    } else if (!now_settled && was_settled) {
        settled_.fetch_sub(1);
    }
}

bool Simulation::suspended(AgentId id) const {
    return id.value >= 1 && id.value <= agents_.size() && suspended_[id.value - 1].load();
}

void Simulation::arbitrate_batch(std::vector<SwapProposal> batch) {
    const bool tracing = config_.record_trace;
    auto result = list_.arbitrate(batch, [&](AgentId id) { return suspended(id); });
    for (const auto& d : result.denied) {
        if (tracing) {
            record(TraceKind::Deny, {{"id", std::to_string(d.proposal.id)},
                                     {"agent", id_str(d.proposal.proposer)},
                                     {"reason", std::string(to_string(d.reason))}});
        }
        post_message(d.proposal.proposer, SwapDenied{kListEndpoint, d.proposal.id, d.reason});
    }
    for (const auto& g : result.granted) {
        if (tracing) {
            record(TraceKind::Grant, {{"id", std::to_string(g.id)}, {"agent", id_str(g.proposer)}});
        }
        post_message(g.proposer, SwapGranted{kListEndpoint, g.id});
    }
    for (const auto& g : result.granted) {
        const auto outcome = config_.mode == RunMode::Concurrent ? list_.apply_swap_via_temp(g)
                                                                 : list_.apply_swap(g);
        notify_after_swap(outcome);
        {
            std::lock_guard lock(events_mutex_);
            ++stats_.swaps;
            if (g.kind == ProposalKind::Adjacent) {
                ++stats_.adjacent_swaps;
            } else {
                ++stats_.pivot_swaps;
            }
        }
        if (tracing) {
            record(TraceKind::Swap, {{"id", std::to_string(g.id)},
                                     {"kind", kind_str(g.kind)},
                                     {"lo", std::to_string(g.lo)},
                                     {"hi", std::to_string(g.hi)},
                                     {"a", id_str(outcome.moved_hi)},
                                     {"b", id_str(outcome.moved_lo)},
                                     {"version", std::to_string(outcome.version)}});
        }
    }
}

void Simulation::notify_after_swap(const SwapOutcome& outcome) {
    const auto from = outcome.proposal.proposer;
    auto send_side = [&](AgentId who, Side side) {
        const auto pos = list_.position_of(who);
        const auto [prev, next] = list_.neighbors_of(pos);
        const auto neighbor = side == Side::Prev ? prev : next;
        std::optional<KeyValue> key;
        if (neighbor) key = list_.key_of(*neighbor);
        post_message(who, NeighborChanged{from, side, neighbor, key, pos, outcome.version});
    };
    if (outcome.outer_prev) send_side(*outcome.outer_prev, Side::Next);
    for (auto who : {std::optional<AgentId>(outcome.moved_lo), outcome.pivot,
                     std::optional<AgentId>(outcome.moved_hi)}) {
        if (!who) continue;
        send_side(*who, Side::Prev);
        send_side(*who, Side::Next);
    }
    if (outcome.outer_next) send_side(*outcome.outer_next, Side::Prev);
}

bool Simulation::is_quiescent() const {
    if (!triggered_) return false;
    if (config_.mode == RunMode::Concurrent) {
        return outstanding_.load() == 0 && settled_.load() == agents_.size();
    }
    return queued_ == 0 && settled_.load() == agents_.size();
}

StepStatus Simulation::step() {
    if (config_.mode != RunMode::Deterministic) {
        throw std::logic_error("step() drives deterministic mode only");
    }
    if (!triggered_) dispatch_trigger();
    if (is_quiescent()) return StepStatus::Quiescent;
    if (stats_.steps >= max_steps_) {
        throw NonTermination("no quiescence within " + std::to_string(max_steps_) + " steps",
                             trace_, stats_);
    }
    if (ready_.empty()) {
        throw NonTermination("stalled: agents unsettled with no message in flight", trace_, stats_);
    }
    std::uniform_int_distribution<std::size_t> pick(0, ready_.size() - 1);
    const auto index = ready_[pick(rng_)];
    ++stats_.steps;
    if (index == agents_.size()) {
        std::vector<SwapProposal> batch;
        while (auto m = dequeue(index)) batch.push_back(std::get<Propose>(*m).proposal);
        arbitrate_batch(std::move(batch));
    } else {
        auto m = dequeue(index);
        deliver_to_agent(index, *m);
    }
    return StepStatus::Progressed;
}

void Simulation::finish_run(RunResult& result) {
    if (config_.record_trace) {
        record(TraceKind::Quiescent,
               {{"steps", std::to_string(stats_.steps)}, {"swaps", std::to_string(stats_.swaps)}});
    }
    if (net_) net_->close_all();
    result.order = list_.snapshot_order();
    result.stats = stats_;
    result.trace = trace_;
    result.trigger_ignored = std::all_of(agents_.begin(), agents_.end(), [](const Agent& a) {
        return a.state().trigger_ignored;
    });
}

RunResult Simulation::run_until_quiescent() {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result =
        config_.mode == RunMode::Deterministic ? run_deterministic() : run_concurrent();
    result.stats.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats_.wall_time = result.stats.wall_time;
    return result;
}

RunResult Simulation::run_deterministic() {
    if (!triggered_) dispatch_trigger();
    while (step() == StepStatus::Progressed) {
    }
    RunResult result;
    finish_run(result);
    return result;
}

void Simulation::message_done() {
    if (outstanding_.fetch_sub(1) == 1) {
        std::lock_guard lock(done_mutex_);
        done_cv_.notify_all();
    }
}

RunResult Simulation::run_concurrent() {
    if (!triggered_) dispatch_trigger();
    const auto n = agents_.size();
    std::atomic<bool> fault{false};
    std::string fault_reason;
    std::mutex fault_mutex;
    auto raise_fault = [&](std::string why) {
        {
            std::lock_guard lock(fault_mutex);
            if (fault_reason.empty()) fault_reason = std::move(why);
        }
        fault.store(true);
        std::lock_guard lock(done_mutex_);
        done_cv_.notify_all();
    };
    auto wait_pop = [&](std::size_t index) -> std::optional<Message> {
        auto& mb = *inboxes_[index];
        std::unique_lock lock(mb.mutex);
        mb.cv.wait(lock, [&] { return !mb.queue.empty() || stop_.load(); });
        if (stop_.load()) return std::nullopt;
        Message m = std::move(mb.queue.front());
        mb.queue.pop_front();
        return m;
    };

    std::vector<std::thread> acceptors;
    if (net_) {
        for (std::size_t e = 0; e <= n; ++e) {
            const std::size_t index = e == 0 ? n : e - 1;
            acceptors.emplace_back([this, e, index, &raise_fault] {
                net_->serve_accept_loop(
                    AgentId{static_cast<std::uint32_t>(e)},
                    [this, index](Message m) { enqueue(index, std::move(m)); },
                    [&raise_fault](const std::exception& ex) {
                        raise_fault(std::string("transport: ") + ex.what());
                    });
            });
        }
    }

    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < n; ++i) {
        workers.emplace_back([&, i] {
            while (auto m = wait_pop(i)) {
                if (delivered_.fetch_add(1) >= max_steps_) {
                    raise_fault("no quiescence within " + std::to_string(max_steps_) + " steps");
                    return;
                }
                try {
                    deliver_to_agent(i, *m);
                } catch (const std::exception& ex) {
                    raise_fault(ex.what());
                    return;
                }
                message_done();
            }
        });
    }
    std::atomic<std::uint64_t> batches{0};
    workers.emplace_back([&] {
        auto& mb = *inboxes_[n];
        while (true) {
            std::vector<SwapProposal> batch;
            {
                std::unique_lock lock(mb.mutex);
                mb.cv.wait(lock, [&] { return !mb.queue.empty() || stop_.load(); });
                if (stop_.load()) return;
                while (!mb.queue.empty()) {
                    batch.push_back(std::get<Propose>(mb.queue.front()).proposal);
                    mb.queue.pop_front();
                }
            }
            batches.fetch_add(1);
            const auto count = batch.size();
            try {
                list_.with_lock([&] { arbitrate_batch(std::move(batch)); });
            } catch (const std::exception& ex) {
                raise_fault(ex.what());
                return;
            }
            for (std::size_t k = 0; k < count; ++k) message_done();
        }
    });

    {
        std::unique_lock lock(done_mutex_);
        const bool finished = done_cv_.wait_for(lock, kConcurrentWallLimit, [&] {
            return outstanding_.load() == 0 || fault.load();
        });
        if (!finished) raise_fault("wall-clock limit reached");
    }

    stop_.store(true);
    for (auto& mb : inboxes_) {
        std::lock_guard lock(mb->mutex);
        mb->cv.notify_all();
    }
    for (auto& t : workers) t.join();
    if (net_) net_->stop();
    for (auto& t : acceptors) t.join();

    stats_.steps = delivered_.load() + batches.load();
    if (fault.load()) throw NonTermination(fault_reason, trace_, stats_);
    if (settled_.load() != n) {
        throw NonTermination("concurrent run drained with unsettled agents", trace_, stats_);
    }
    RunResult result;
    finish_run(result);
    return result;
}

RunResult run_sort(const std::vector<KeyValue>& keys, const RunConfig& config) {
    Simulation sim(keys, config);
    return sim.run_until_quiescent();
}

std::string_view to_string(RunMode mode) {
    return mode == RunMode::Deterministic ? "sim" : "concurrent";
}

std::string_view to_string(TransportKind transport) {
    return transport == TransportKind::InMemory ? "mem" : "loopback";
}

}  // namespace selfsort
