#include "consensus/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace consensus {

namespace {
constexpr std::int64_t EXHAUSTED = std::numeric_limits<std::int64_t>::max();
}

std::string to_string(stop_reason r) {
    switch (r) {
    case stop_reason::quiescent: return "quiescent";
    case stop_reason::all_committed: return "all_committed";
    case stop_reason::consensus: return "consensus";
    case stop_reason::max_steps: return "max_steps";
    case stop_reason::step_limit: return "step_limit";
    }
    return "max_steps";
}

std::string to_string(fork_winner w) {
    switch (w) {
    case fork_winner::a: return "A";
    case fork_winner::b: return "B";
    case fork_winner::undecided: return "Undecided";
    case fork_winner::none: return "None";
    }
    return "None";
}

double calibrate_lambda(std::int32_t n, double t_sys_steps) {
    if (n < 1 || !(t_sys_steps > 0))
        throw parameter_error("calibrate_lambda: need n >= 1 and t_sys > 0");
    return 1.0 / (static_cast<double>(n) * t_sys_steps);
}

std::int64_t sample_mining_countdown(double rate, rng_t& rng) {
    const double x = -std::log(uniform_unit(rng)) / rate;
    const auto c = static_cast<std::int64_t>(std::ceil(x));
    return c < 1 ? 1 : c;
}

sim_state::sim_state(const graph& g, sim_config cfg, std::uint64_t seed)
    : g_(&g), cfg_(std::move(cfg)), seed_(seed), rng_(seed), n_(g.node_count()) {
    if (cfg_.mining_enabled && !(cfg_.lambda > 0))
        throw parameter_error("sim_state: mining requires lambda > 0");
    if (!cfg_.powers.empty() && static_cast<std::int32_t>(cfg_.powers.size()) != n_)
        throw parameter_error("sim_state: powers size must match node count");
    for (double c : cfg_.powers)
        if (!(c > 0))
            throw parameter_error("sim_state: powers must be positive");

    blocks_.push_back({GENESIS, NO_BLOCK, 0, -1, 0});
    block_label_.push_back(0);
    tip_.assign(n_, GENESIS);
    height_.assign(n_, 0);
    prev_tip_.assign(n_, GENESIS);
    tip_change_step_.assign(n_, -1);
    first_adoption_.assign(n_, -1);
    next_fire_.assign(n_, EXHAUSTED);
    if (cfg_.mining_enabled) {
        rates_.resize(n_);
        for (std::int32_t v = 0; v < n_; ++v)
            rates_[v] = cfg_.lambda * (cfg_.powers.empty() ? 1.0 : cfg_.powers[v]);
        for (std::int32_t v = 0; v < n_; ++v) {
            const std::int64_t fire = sample_mining_countdown(rates_[v], rng_) - 1;
            next_fire_[v] = fire;
            fire_buckets_[fire].push_back(v);
        }
    }
    ring_.resize(static_cast<std::size_t>(g.max_delay()) + 1);
    arrivals_.resize(n_);
    if (cfg_.check_invariants)
        prev_height_.assign(n_, 0);
}

void sim_state::schedule_seed(std::int32_t node, std::int64_t step, char label) {
    if (node < 0 || node >= n_)
        throw parameter_error("schedule_seed: node out of range");
    if (step < now_)
        throw parameter_error("schedule_seed: step is in the past");
    if (label != 'a' && label != 'b')
        throw parameter_error("schedule_seed: label must be 'a' or 'b'");
    seeds_.push_back({step, node, label});
}

double sim_state::node_rate(std::int32_t v) const { return rates_[v]; }

block_id sim_state::snapshot_tip(std::int32_t v) const {
    return tip_change_step_[v] == now_ ? prev_tip_[v] : tip_[v];
}

bool sim_state::ancestry_contains(block_id t, block_id candidate) const {
    const std::int32_t ch = blocks_[static_cast<std::size_t>(candidate)].height;
    while (blocks_[static_cast<std::size_t>(t)].height > ch)
        t = blocks_[static_cast<std::size_t>(t)].parent;
    return t == candidate;
}

void sim_state::schedule(const msg& m, std::int64_t arrival) {
    ring_[static_cast<std::size_t>(arrival % static_cast<std::int64_t>(ring_.size()))].push_back(m);
    ++in_flight_;
}

void sim_state::set_tip(std::int32_t u, block_id b) {
    if (tip_change_step_[u] != now_) {
        prev_tip_[u] = tip_[u];
        tip_change_step_[u] = now_;
    }
    const signed char old_label = block_label_[static_cast<std::size_t>(tip_[u])];
    const signed char new_label = block_label_[static_cast<std::size_t>(b)];
    if (old_label != new_label) {
        if (old_label == 1) --committed_a_;
        if (old_label == 2) --committed_b_;
        if (new_label == 1) ++committed_a_;
        if (new_label == 2) ++committed_b_;
    }
    if (first_adoption_[u] < 0 && tip_[u] == GENESIS && b != GENESIS)
        first_adoption_[u] = now_;
    tip_[u] = b;
    changed_this_step_ = true;
}

void sim_state::broadcast(std::int32_t u, block_id blk, const std::vector<msg>* arrived) {
    for (const edge_ref& e : g_->neighbors(u)) {
        if (arrived && !cfg_.rebroadcast_to_sender) {
            bool is_sender = false;
            for (const msg& m : *arrived)
                if (m.blk == blk && m.from == e.to) {
                    is_sender = true;
                    break;
                }
            if (is_sender)
                continue;
        }
        schedule({blk, u, e.to, e.delay}, now_ + e.delay);
    }
}

void sim_state::resample_countdown(std::int32_t v, std::int64_t fire_base) {
    const std::int64_t fire = fire_base + sample_mining_countdown(rates_[v], rng_);
    next_fire_[v] = fire;
    fire_buckets_[fire].push_back(v);
}

std::size_t sim_state::contest(std::int32_t u, const std::vector<block_id>& candidates) {
    // neighborhood frequency over tips as of the start of the step; a
    // neighbor supports a candidate when the candidate sits in its
    // snapshot-tip ancestry. Uncommitted neighbors support nobody.
    static thread_local std::vector<std::int32_t> counts;
    counts.assign(candidates.size(), 0);
    for (const edge_ref& e : g_->neighbors(u)) {
        const block_id st = snapshot_tip(e.to);
        for (std::size_t k = 0; k < candidates.size(); ++k)
            if (ancestry_contains(st, candidates[k]))
                ++counts[k];
    }
    std::int32_t best = -1;
    for (std::int32_t c : counts)
        best = std::max(best, c);
    static thread_local std::vector<std::size_t> tied;
    tied.clear();
    for (std::size_t k = 0; k < candidates.size(); ++k)
        if (counts[k] == best)
            tied.push_back(k);
    return tied.size() == 1 ? tied[0]
                            : tied[uniform_below(rng_, tied.size())];
}

void sim_state::adopt(std::int32_t u, block_id blk, const std::vector<msg>& msgs,
                      bool equal_height) {
    const block& b = blocks_[static_cast<std::size_t>(blk)];
    if (cfg_.check_invariants) {
        if (b.parent == NO_BLOCK && blk != GENESIS)
            throw std::logic_error("adopt: block with unknown parent");
        if (!equal_height && b.height <= height_[u])
            throw std::logic_error("adopt: height rule violated");
    }
    set_tip(u, blk);
    height_[u] = b.height;
    adoption_delay_sum_ += now_ - b.minted_step;
    ++adoption_delay_count_;
    if (cfg_.mining_enabled)
        resample_countdown(u, now_ - 1); // countdown set before this step's decrement
    broadcast(u, blk, &msgs);
}

void sim_state::mint(std::int32_t u, char label) {
    const auto id = static_cast<block_id>(blocks_.size());
    const block_id parent = tip_[u];
    blocks_.push_back({id, parent, height_[u] + 1, u, now_});
    signed char lab = block_label_[static_cast<std::size_t>(parent)];
    if (label == 'a')
        lab = 1;
    else if (label == 'b')
        lab = 2;
    block_label_.push_back(lab);
    set_tip(u, id);
    ++height_[u];
    if (cfg_.mining_enabled)
        resample_countdown(u, now_); // countdown set after this step's decrement
    broadcast(u, id, nullptr);
    ++mints_this_step_;
    ++mints_total_;
}

void sim_state::process_arrivals(std::int32_t u, const std::vector<msg>& msgs) {
    static thread_local std::vector<block_id> higher;
    static thread_local std::vector<block_id> equal;
    higher.clear();
    equal.clear();
    const std::int32_t h = height_[u];
    for (const msg& m : msgs) {
        const std::int32_t bh = blocks_[static_cast<std::size_t>(m.blk)].height;
        if (bh > h) {
            if (std::find(higher.begin(), higher.end(), m.blk) == higher.end())
                higher.push_back(m.blk);
        } else if (bh == h && m.blk != tip_[u]) {
            if (std::find(equal.begin(), equal.end(), m.blk) == equal.end())
                equal.push_back(m.blk);
        }
    }
    block_id adopted = NO_BLOCK;
    if (!higher.empty()) {
        std::sort(higher.begin(), higher.end());
        const std::size_t pick = higher.size() == 1 ? 0 : contest(u, higher);
        adopted = higher[pick];
        adopt(u, adopted, msgs, false);
    } else if (cfg_.policy == equal_height_policy::reevaluate && !equal.empty() && h > 0) {
        static thread_local std::vector<block_id> cands;
        cands.assign(equal.begin(), equal.end());
        cands.push_back(tip_[u]);
        std::sort(cands.begin(), cands.end());
        const block_id pick = cands[contest(u, cands)];
        if (pick != tip_[u]) {
            adopted = pick;
            adopt(u, adopted, msgs, true);
        }
    }
    if (cfg_.relay_ignored) {
        static thread_local std::vector<block_id> seen;
        seen.clear();
        for (const msg& m : msgs) {
            if (m.blk == adopted || m.blk == tip_[u])
                continue;
            if (std::find(seen.begin(), seen.end(), m.blk) != seen.end())
                continue;
            seen.push_back(m.blk);
            broadcast(u, m.blk, &msgs);
        }
    }
}

void sim_state::deliver_phase() {
    auto& slot = ring_[static_cast<std::size_t>(now_ % static_cast<std::int64_t>(ring_.size()))];
    if (slot.empty())
        return;
    static thread_local std::vector<msg> drained;
    drained.clear();
    drained.swap(slot);
    in_flight_ -= static_cast<std::int64_t>(drained.size());
    delivered_this_step_ = static_cast<std::int32_t>(drained.size());
    for (const msg& m : drained) {
        if (cfg_.check_invariants) {
            bool edge_ok = false;
            for (const edge_ref& e : g_->neighbors(m.from))
                if (e.to == m.to && e.delay == m.delay)
                    edge_ok = true;
            if (!edge_ok)
                throw std::logic_error("delivery along a non-edge");
        }
        if (arrivals_[m.to].empty())
            touched_.push_back(m.to);
        arrivals_[m.to].push_back(m);
    }
    std::sort(touched_.begin(), touched_.end());
    for (std::int32_t u : touched_) {
        process_arrivals(u, arrivals_[u]);
        arrivals_[u].clear();
    }
    touched_.clear();
}

void sim_state::mint_phase() {
    if (seeds_done_ < seeds_.size()) {
        for (seed_mint& s : seeds_) {
            if (s.step != now_)
                continue;
            if (height_[s.node] == 0)
                mint(s.node, s.label);
            s.step = -1;
            ++seeds_done_;
        }
    }
    if (!cfg_.mining_enabled)
        return;
    const auto it = fire_buckets_.find(now_);
    if (it == fire_buckets_.end())
        return;
    static thread_local std::vector<std::int32_t> firing;
    firing.clear();
    for (std::int32_t v : it->second)
        if (next_fire_[v] == now_)
            firing.push_back(v);
    fire_buckets_.erase(it);
    std::sort(firing.begin(), firing.end());
    firing.erase(std::unique(firing.begin(), firing.end()), firing.end());
    for (std::int32_t v : firing)
        mint(v, 0);
}

void sim_state::check_invariants_now() const {
    for (std::int32_t v = 0; v < n_; ++v) {
        if (height_[v] < prev_height_[v])
            throw std::logic_error("height decreased");
        if (blocks_[static_cast<std::size_t>(tip_[v])].height != height_[v])
            throw std::logic_error("tip/height mismatch");
        block_id b = tip_[v];
        while (b != GENESIS) {
            const block& blk = blocks_[static_cast<std::size_t>(b)];
            const block& par = blocks_[static_cast<std::size_t>(blk.parent)];
            if (blk.height != par.height + 1)
                throw std::logic_error("non-consecutive chain heights");
            b = blk.parent;
        }
    }
}

void sim_state::finish_step() {
    if (cfg_.record_steps)
        records_.push_back({now_, committed_a_, committed_b_,
                            n_ - committed_a_ - committed_b_, mints_this_step_,
                            delivered_this_step_});
    if (mints_this_step_ >= 2)
        ++multi_mint_steps_;
    if (changed_this_step_) {
        std::int32_t max_h = 0;
        for (std::int32_t v = 0; v < n_; ++v)
            max_h = std::max(max_h, height_[v]);
        block_id first_tip = NO_BLOCK;
        bool competing = false;
        for (std::int32_t v = 0; v < n_ && !competing; ++v) {
            if (height_[v] != max_h)
                continue;
            if (first_tip == NO_BLOCK)
                first_tip = tip_[v];
            else if (tip_[v] != first_tip)
                competing = true;
        }
        if (competing && !in_episode_)
            ++episodes_;
        in_episode_ = competing;
    }
    if (in_episode_)
        ++episode_steps_;
    if (cfg_.check_invariants) {
        check_invariants_now();
        for (std::int32_t v = 0; v < n_; ++v)
            prev_height_[v] = height_[v];
    }
    ++now_;
}

void sim_state::step() {
    mints_this_step_ = 0;
    delivered_this_step_ = 0;
    changed_this_step_ = false;
    deliver_phase();
    mint_phase();
    finish_step();
}

double sim_state::mean_adoption_delay() const {
    return adoption_delay_count_ ? static_cast<double>(adoption_delay_sum_) /
                                       static_cast<double>(adoption_delay_count_)
                                 : 0.0;
}

run_outcome sim_state::make_outcome(stop_reason reason, fork_winner w) const {
    run_outcome o;
    o.winner = w;
    o.reason = reason;
    o.steps = now_;
    o.seed = seed_;
    o.mode = cfg_.mining_enabled ? "full_mining" : "propagation_only";
    o.final_a = committed_a_;
    o.final_b = committed_b_;
    o.final_uncommitted = n_ - committed_a_ - committed_b_;
    return o;
}

fork_winner sim_state::apply_win_rule(win_rule rule) {
    const bool a_alive = committed_a_ > 0;
    const bool b_alive = committed_b_ > 0;
    if (!a_alive && !b_alive)
        return fork_winner::none;
    if (a_alive != b_alive)
        return a_alive ? fork_winner::a : fork_winner::b;
    if (rule == win_rule::majority) {
        if (committed_a_ != committed_b_)
            return committed_a_ > committed_b_ ? fork_winner::a : fork_winner::b;
        return bernoulli(rng_, 0.5) ? fork_winner::a : fork_winner::b;
    }
    // mining_race: the side that mines the resolving block first wins; with
    // per-node powers that is a draw weighted by cluster power.
    double power_a = 0.0;
    double power_b = 0.0;
    for (std::int32_t v = 0; v < n_; ++v) {
        const signed char lab = block_label_[static_cast<std::size_t>(tip_[v])];
        const double c = cfg_.powers.empty() ? 1.0 : cfg_.powers[v];
        if (lab == 1)
            power_a += c;
        else if (lab == 2)
            power_b += c;
    }
    return bernoulli(rng_, power_a / (power_a + power_b)) ? fork_winner::a : fork_winner::b;
}

run_outcome sim_state::run_competition(win_rule rule) {
    if (cfg_.mining_enabled)
        throw parameter_error("run_competition: propagation mode requires mining disabled");
    while (now_ < cfg_.max_steps) {
        step();
        if (seeds_done_ < seeds_.size())
            continue;
        if (cfg_.stop_on_all_committed && committed_a_ + committed_b_ == n_)
            return make_outcome(stop_reason::all_committed, apply_win_rule(rule));
        if (in_flight_ == 0)
            return make_outcome(stop_reason::quiescent, apply_win_rule(rule));
    }
    return make_outcome(stop_reason::max_steps, fork_winner::undecided);
}

run_outcome sim_state::run_mining_competition() {
    if (!cfg_.mining_enabled)
        throw parameter_error("run_mining_competition: mining must be enabled");
    while (now_ < cfg_.max_steps) {
        step();
        if (seeds_done_ < seeds_.size())
            continue;
        if (committed_a_ == n_)
            return make_outcome(stop_reason::consensus, fork_winner::a);
        if (committed_b_ == n_)
            return make_outcome(stop_reason::consensus, fork_winner::b);
    }
    return make_outcome(stop_reason::max_steps, fork_winner::undecided);
}

run_outcome sim_state::run_steps(std::int64_t count) {
    const std::int64_t stop_at = now_ + count;
    while (now_ < stop_at)
        step();
    return make_outcome(stop_reason::step_limit, fork_winner::none);
}

} // namespace consensus
