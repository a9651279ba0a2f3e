#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfsort/agent.hpp"
#include "selfsort/key_value.hpp"
#include "selfsort/loopback.hpp"
#include "selfsort/message.hpp"
#include "selfsort/oracle.hpp"
#include "selfsort/sorting_list.hpp"
#include "selfsort/trace.hpp"

namespace selfsort {

enum class RunMode { Deterministic, Concurrent };
enum class TransportKind { InMemory, Loopback };

struct RunConfig {
    std::uint64_t seed = 1;
    std::uint64_t max_steps = 0;  // 0: 50 * n^2
    RunMode mode = RunMode::Deterministic;
    SortDirection direction = SortDirection::Ascending;
    TransportKind transport = TransportKind::InMemory;
    bool record_trace = true;
};

struct RunResult {
    std::vector<std::pair<AgentId, KeyValue>> order;
    RunStats stats;
    Trace trace;
    bool trigger_ignored = false;

    std::vector<KeyValue> keys() const;
};

/// The scheduler ran out of budget. Carries what happened up to then.
class NonTermination : public std::runtime_error {
public:
    NonTermination(const std::string& message, Trace trace, RunStats stats)
        : std::runtime_error(message), trace_(std::move(trace)), stats_(stats) {}
    const Trace& trace() const noexcept { return trace_; }
    const RunStats& stats() const noexcept { return stats_; }

private:
    Trace trace_;
    RunStats stats_;
};

enum class StepStatus { Progressed, Quiescent };

/// Hosts one sorting list, its agents and their inboxes. In deterministic
/// mode a seeded scheduler picks one non-empty inbox per step; the sorting
/// list's proposal inbox is one of them and arbitrates everything pending
/// when chosen. Concurrent mode runs one thread per agent plus an arbiter.
class Simulation {
public:
    Simulation(const std::vector<KeyValue>& keys, RunConfig config,
               std::string key_attribute = "key");
    Simulation(const std::vector<KeyValue>& keys, RunConfig config, std::string key_attribute,
               std::set<std::string> attributes);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Appends one more agent. Throws SealedListError once triggered.
    AgentId add_agent(KeyValue key);

    /// Seals the list and broadcasts the trigger impulse to every agent.
    void dispatch_trigger();

    /// Queues a message; throws RoutingError for unknown destinations.
    void post_message(AgentId to, Message message);

    /// One scheduler quantum (deterministic mode only).
    StepStatus step();

    bool is_quiescent() const;

    /// Runs to quiescence in the configured mode.
    RunResult run_until_quiescent();

    const SortingList& list() const noexcept { return list_; }
    const Agent& agent(AgentId id) const { return agents_.at(id.value - 1); }
    std::size_t agent_count() const noexcept { return agents_.size(); }
    const Trace& trace() const noexcept { return trace_; }
    const RunStats& stats() const noexcept { return stats_; }
    /// Configured budget, or 50 * n^2 when the config leaves it at 0.
    std::uint64_t max_steps() const noexcept;
    std::size_t pending_messages() const noexcept { return queued_; }

private:
    struct Mailbox {
        std::mutex mutex;
        std::condition_variable cv;
        std::deque<Message> queue;
    };

    void record(TraceKind kind, std::vector<std::pair<std::string, std::string>> payload);
    void enqueue(std::size_t index, Message message);
    std::optional<Message> dequeue(std::size_t index);
    void deliver_to_agent(std::size_t index, const Message& message);
    void arbitrate_batch(std::vector<SwapProposal> batch);
    bool suspended(AgentId id) const;
    void notify_after_swap(const SwapOutcome& outcome);
    void finish_run(RunResult& result);
    RunResult run_deterministic();
    RunResult run_concurrent();
    void message_done();

    RunConfig config_;
    std::string key_attribute_;
    std::shared_ptr<const std::set<std::string>> attributes_;
    SortingList list_;
    std::vector<Agent> agents_;
    std::vector<std::unique_ptr<Mailbox>> inboxes_;  // agents, then the list's proposal inbox
    std::vector<std::size_t> ready_;
    std::vector<std::ptrdiff_t> ready_slot_;
    std::size_t queued_ = 0;
    bool triggered_ = false;
    std::uint64_t next_proposal_id_ = 1;
    std::uint64_t max_steps_ = 0;
    std::mt19937_64 rng_;
    std::unique_ptr<LoopbackNetwork> net_;
    std::unique_ptr<std::atomic<bool>[]> suspended_;  // by agent index, read by the arbiter

    mutable std::mutex events_mutex_;  // trace_, stats_, counters in concurrent mode
    Trace trace_;
    RunStats stats_;

    // Concurrent mode bookkeeping.
    std::atomic<std::int64_t> outstanding_{0};
    std::atomic<std::uint64_t> delivered_{0};
    std::atomic<std::size_t> settled_{0};
    std::atomic<bool> stop_{false};
    std::mutex done_mutex_;
    std::condition_variable done_cv_;
};

/// Builds a Simulation over `keys` and runs it to quiescence.
RunResult run_sort(const std::vector<KeyValue>& keys, const RunConfig& config);

std::string_view to_string(RunMode mode);
std::string_view to_string(TransportKind transport);

}  // namespace selfsort
