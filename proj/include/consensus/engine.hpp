#pragma once

#include "consensus/graph.hpp"
#include "consensus/rng.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace consensus {

using block_id = std::int32_t;
inline constexpr block_id GENESIS = 0;
inline constexpr block_id NO_BLOCK = -1;

struct block {
    block_id id;
    block_id parent; // NO_BLOCK for genesis
    std::int32_t height;
    std::int32_t origin; // node id, -1 for genesis
    std::int64_t minted_step;
};

/// What a committed node does with an arriving block of its own height:
/// `ignore` keeps the first-received block; `reevaluate` re-runs the
/// neighborhood-frequency choice between its tip and the arrival.
enum class equal_height_policy { ignore, reevaluate };

/// Winner of a two-block competition once propagation has quiesced:
/// `majority` takes the larger cluster (exact tie: uniform draw);
/// `mining_race` draws the winner proportionally to cluster computational
/// power, i.e. the side that would mine the resolving block first.
enum class win_rule { majority, mining_race };

enum class stop_reason { quiescent, all_committed, consensus, max_steps, step_limit };
enum class fork_winner { a, b, undecided, none };

std::string to_string(stop_reason r);
std::string to_string(fork_winner w);

struct sim_config {
    bool mining_enabled = false;
    double lambda = 0.0;          // base mining rate per step (> 0 when mining)
    std::vector<double> powers;   // per-node c_i; empty = all 1
    equal_height_policy policy = equal_height_policy::ignore;
    bool relay_ignored = false;
    bool rebroadcast_to_sender = false;
    bool stop_on_all_committed = false; // propagation stop: all committed vs quiescent
    bool record_steps = true;
    bool check_invariants = false;
    std::int64_t max_steps = 1'000'000;
};

/// Per-step counters; doubles as the cluster snapshot (committed_a/b,
/// uncommitted) and the trajectory log row.
struct step_record {
    std::int64_t step;
    std::int32_t committed_a;
    std::int32_t committed_b;
    std::int32_t uncommitted;
    std::int32_t new_blocks;
    std::int32_t delivered;
};

struct run_outcome {
    fork_winner winner = fork_winner::none;
    stop_reason reason = stop_reason::max_steps;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    std::string mode;
    std::int32_t final_a = 0;
    std::int32_t final_b = 0;
    std::int32_t final_uncommitted = 0;
};

/// lambda = 1/(n * t_sys): base rate for which the expected minimum of n
/// exponential clocks is t_sys.
double calibrate_lambda(std::int32_t n, double t_sys_steps);

/// ceil of an Exponential(rate) draw; always >= 1.
std::int64_t sample_mining_countdown(double rate, rng_t& rng);

/// Synchronous discrete-time simulator over a shared read-only graph. One
/// instance per run; runs are sequential, parallelism is across instances.
class sim_state {
public:
    sim_state(const graph& g, sim_config cfg, std::uint64_t seed);

    /// Force-mint a height-1 block at `node` during the mint phase of `step`,
    /// provided the node still sits on genesis. label is 'a' or 'b'.
    void schedule_seed(std::int32_t node, std::int64_t step, char label);

    void step();

    /// Two-block competition until the propagation quiesces (or every node is
    /// committed, per config), then applies `rule`.
    run_outcome run_competition(win_rule rule);
    /// Full-mining competition: runs until one seeded side is an ancestor of
    /// every tip.
    run_outcome run_mining_competition();
    /// Fixed horizon run (mining exploration).
    run_outcome run_steps(std::int64_t count);

    // observers
    std::int64_t now() const { return now_; }
    std::int32_t node_count() const { return n_; }
    std::int32_t height(std::int32_t v) const { return height_[v]; }
    block_id tip(std::int32_t v) const { return tip_[v]; }
    const block& block_at(block_id b) const { return blocks_[static_cast<std::size_t>(b)]; }
    std::int64_t block_count() const { return static_cast<std::int64_t>(blocks_.size()); }
    std::int64_t adoption_step(std::int32_t v) const { return first_adoption_[v]; }
    std::int32_t committed_a() const { return committed_a_; }
    std::int32_t committed_b() const { return committed_b_; }
    std::int32_t uncommitted() const { return n_ - committed_a_ - committed_b_; }
    std::int64_t in_flight() const { return in_flight_; }
    const std::vector<step_record>& records() const { return records_; }
    rng_t& rng() { return rng_; }

    // fork bookkeeping for mining runs
    std::int64_t steps_with_multiple_mints() const { return multi_mint_steps_; }
    std::int64_t blocks_minted() const { return mints_total_; }
    std::int64_t fork_episodes() const { return episodes_; }
    std::int64_t fork_episode_steps() const { return episode_steps_; }
    double mean_adoption_delay() const;

private:
    struct msg {
        block_id blk;
        std::int32_t from;
        std::int32_t to;
        std::int32_t delay;
    };
    struct seed_mint {
        std::int64_t step;
        std::int32_t node;
        char label;
    };

    void deliver_phase();
    void mint_phase();
    void process_arrivals(std::int32_t u, const std::vector<msg>& msgs);
    std::size_t contest(std::int32_t u, const std::vector<block_id>& candidates);
    void adopt(std::int32_t u, block_id blk, const std::vector<msg>& msgs, bool equal_height);
    void mint(std::int32_t u, char label);
    void set_tip(std::int32_t u, block_id blk);
    void broadcast(std::int32_t u, block_id blk, const std::vector<msg>* arrived);
    void schedule(const msg& m, std::int64_t arrival);
    block_id snapshot_tip(std::int32_t v) const;
    bool ancestry_contains(block_id tip, block_id candidate) const;
    double node_rate(std::int32_t v) const;
    void resample_countdown(std::int32_t v, std::int64_t fire_base);
    void finish_step();
    void check_invariants_now() const;
    run_outcome make_outcome(stop_reason reason, fork_winner w) const;
    fork_winner apply_win_rule(win_rule rule);

    const graph* g_;
    sim_config cfg_;
    std::uint64_t seed_;
    rng_t rng_;
    std::int32_t n_;
    std::int64_t now_ = 0;

    std::vector<block> blocks_;
    std::vector<signed char> block_label_; // 0 none, 1 a, 2 b
    std::vector<block_id> tip_;
    std::vector<std::int32_t> height_;
    std::vector<block_id> prev_tip_;
    std::vector<std::int64_t> tip_change_step_;
    std::vector<std::int64_t> first_adoption_;
    std::vector<std::int64_t> next_fire_; // absolute step; INT64_MAX if exhausted
    std::unordered_map<std::int64_t, std::vector<std::int32_t>> fire_buckets_;
    std::vector<double> rates_;

    // in-flight calendar ring, slot = arrival step % ring size
    std::vector<std::vector<msg>> ring_;
    std::int64_t in_flight_ = 0;

    std::vector<std::vector<msg>> arrivals_; // per-node scratch
    std::vector<std::int32_t> touched_;

    std::vector<seed_mint> seeds_;
    std::size_t seeds_done_ = 0;

    std::int32_t committed_a_ = 0;
    std::int32_t committed_b_ = 0;

    std::vector<step_record> records_;
    std::int32_t mints_this_step_ = 0;
    std::int32_t delivered_this_step_ = 0;
    bool changed_this_step_ = false;

    std::int64_t mints_total_ = 0;
    std::int64_t multi_mint_steps_ = 0;
    bool in_episode_ = false;
    std::int64_t episodes_ = 0;
    std::int64_t episode_steps_ = 0;
    std::int64_t adoption_delay_sum_ = 0;
    std::int64_t adoption_delay_count_ = 0;

    std::vector<std::int32_t> prev_height_; // invariant checking only
};

} // namespace consensus
