#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pcn/core/event_queue.hpp"
#include "pcn/core/format.hpp"
#include "pcn/routing/congestion.hpp"
#include "pcn/routing/demand.hpp"
#include "pcn/routing/prices.hpp"
#include "pcn/routing/rates.hpp"
#include "pcn/simulator/config.hpp"
#include "pcn/simulator/metrics.hpp"
#include "pcn/simulator/network.hpp"
#include "pcn/simulator/workload.hpp"
#include "pcn/topology/paths.hpp"

namespace pcn {

// Global state as finalized at an epoch boundary. Routing decisions taken in
// epoch e may only read the snapshot of epoch e - 1.
class EpochSnapshot {
public:
    EpochSnapshot() = default;
    EpochSnapshot(std::uint64_t epoch, const PcnGraph& g) : epoch_(epoch), graph_(g) {}

    std::uint64_t epoch() const { return epoch_; }
    const PcnGraph& view(std::uint64_t reader_epoch) const {
        ensure(epoch_ + 1 == reader_epoch, "routing read epoch " + std::to_string(epoch_) + " state from epoch " +
                                               std::to_string(reader_epoch));
        return graph_;
    }

private:
    std::uint64_t epoch_ = 0;
    PcnGraph graph_;
};

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        auto net = build_network(cfg_.graph, cfg_.seed);
        Tokens largest = 0;
        for (const auto& c : net.graph.channels()) largest = std::max(largest, c.capacity);
        auto demands = generate_demands(cfg_.workload, net.endpoints, largest, cfg_.duration, cfg_.seed);
        init(std::move(net), std::move(demands));
    }

    Simulator(const SimConfig& cfg, Network net, std::vector<Demand> demands) : cfg_(cfg) {
        cfg_.validate();
        init(std::move(net), std::move(demands));
    }

    const PcnGraph& graph() const { return g_; }
    const Network& network() const { return net_; }

    SimOutcome run() {
        ensure(!ran_, "simulator instances run once");
        ran_ = true;
        const double tau = cfg_.routing.tau;
        for (const auto& t : txs_) q_.push(t.rec.demand.arrival, rank(Ev::Arrival), {Ev::Arrival, t.rec.demand.tid, 0});
        q_.push(tau, rank(Ev::Probe), {Ev::Probe, 0, 0});
        q_.push(tau, rank(Ev::PriceTick), {Ev::PriceTick, 0, 0});
        q_.push(cfg_.epoch, rank(Ev::Epoch), {Ev::Epoch, 0, 0});
        if (cfg_.processing.enabled) q_.push(cfg_.processing.batch_window, rank(Ev::Batch), {Ev::Batch, 0, 0});
        while (!q_.empty()) {
            const auto e = q_.pop();
            now_ = e.time;
            ++out_.events;
            dispatch(e.payload);
        }
        finish();
        return std::move(out_);
    }

private:
    enum class Ev : int { Deliver, Settle, MarkCheck, Timeout, Arrival, Release, Probe, PriceTick, Epoch, Batch };
    struct Event {
        Ev kind;
        std::uint64_t id;
        std::uint64_t aux;
    };
    static int rank(Ev k) { return static_cast<int>(k); }

    struct PathState {
        Path path;
        bool active = true;
        double rate = 0;
        double window = 0;
        double price = 0;
        Tokens outstanding = 0;
        double last_send = -std::numeric_limits<double>::infinity();
        Tokens last_amount = 0;
    };

    struct PairState {
        NodeId s{}, e{};
        std::vector<PathState> paths;
        ChannelQueue backlog;
        Tokens outstanding = 0;  // value of live units
        bool reselect = false;
        double wake = -1;
    };

    struct Unit {
        TransactionUnit tu;
        TxId tx = 0;
        std::size_t pair = 0;
        std::size_t pos = 0;     // hop the unit is at or about to take
        std::size_t locked = 0;  // hops [0, locked) hold locks
        std::vector<double> lock_time;
        bool in_backlog = false;
        bool queued = false;
        bool in_batch = false;
        std::uint64_t queue_gen = 0;
        Tokens queue_seen = 0;
    };

    struct TxState {
        TxRecord rec;
        std::vector<TuId> units;
        std::size_t pair = 0;
        std::size_t arrived = 0;
        std::size_t acked = 0;
    };

    struct ChanState {
        ChannelQueue queue[2];
        Tokens arrived[2] = {0, 0};
        double delta = 0;
    };

    void init(Network net, std::vector<Demand> demands) {
        net_ = std::move(net);
        g_ = net_.graph;
        prices_ = PriceState(g_.channel_count(), cfg_.routing.prices);
        chans_.resize(g_.channel_count());
        for (auto& c : chans_) {
            c.queue[0] = ChannelQueue(cfg_.routing.policy);
            c.queue[1] = ChannelQueue(cfg_.routing.policy);
            c.delta = cfg_.routing.initial_delta;
        }
        for (auto& d : demands) {
            d.validate();
            TxState t;
            t.rec.demand = d;
            ensure(d.tid == txs_.size(), "demand ids must be dense and in order");
            txs_.push_back(std::move(t));
        }
        snapshot_ = EpochSnapshot(0, g_);
        batch_.assign(g_.node_count(), ChannelQueue(cfg_.routing.policy));
        credit_.assign(g_.node_count(), 0.0);
        out_.generated = txs_.size();
        for (const auto& t : txs_) out_.generated_value += t.rec.demand.amount;
    }

    bool share() const { return cfg_.control == ControlMode::Share; }
    bool ticking() const { return now_ < cfg_.duration || live_txs_ > 0; }
    const Hop& hop_of(const Unit& u) const { return pairs_[u.pair].paths[u.tu.path].path.hops[u.pos]; }
    const Path& path_of(const Unit& u) const { return pairs_[u.pair].paths[u.tu.path].path; }

    void log(const std::string& line) {
        if (cfg_.log_events) out_.event_log.push_back(format_double(now_) + ' ' + line);
    }

    void check_channel(ChannelIdx c) {
        const auto& ch = g_.channel(c);
        ensure(ch.conserved() && ch.balance[0] >= 0 && ch.balance[1] >= 0,
               "conservation violated on channel " + std::to_string(c));
    }

    void dispatch(const Event& e) {
        switch (e.kind) {
            case Ev::Arrival: on_arrival(e.id); break;
            case Ev::Deliver: on_deliver(e.id); break;
            case Ev::Settle: on_settle(e.id, e.aux); break;
            case Ev::MarkCheck: on_mark_check(e.id, e.aux); break;
            case Ev::Timeout: on_timeout(e.id); break;
            case Ev::Release:
                pairs_[e.id].wake = -1;
                try_release(e.id);
                break;
            case Ev::Probe: on_probe(); break;
            case Ev::PriceTick: on_price_tick(); break;
            case Ev::Epoch: on_epoch(); break;
            case Ev::Batch: on_batch(); break;
        }
    }

    // ---- path selection -------------------------------------------------

    std::size_t pair_of(NodeId s, NodeId e) {
        auto key = std::make_pair(index(s), index(e));
        auto it = pair_index_.find(key);
        if (it != pair_index_.end()) return it->second;
        PairState p;
        p.s = s;
        p.e = e;
        p.backlog = ChannelQueue(cfg_.routing.policy);
        pairs_.push_back(std::move(p));
        pair_index_.emplace(key, pairs_.size() - 1);
        select_paths(pairs_.size() - 1);
        return pairs_.size() - 1;
    }

    void select_paths(std::size_t pi) {
        auto& p = pairs_[pi];
        const auto& view = snapshot_.view(epoch_);
        auto fresh = candidate_paths(view, p.s, p.e, cfg_.routing.k, cfg_.routing.path_kind);
        for (auto& old : p.paths) old.active = false;
        for (auto& np : fresh) {
            auto it = std::find_if(p.paths.begin(), p.paths.end(), [&](const PathState& x) { return x.path == np; });
            if (it != p.paths.end()) {
                it->active = true;
                continue;
            }
            PathState st;
            st.path = std::move(np);
            st.rate = cfg_.routing.initial_rate;
            st.window = cfg_.routing.congestion.initial_window;
            p.paths.push_back(std::move(st));
        }
        p.reselect = false;
    }

    std::vector<std::size_t> active_paths(const PairState& p) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < p.paths.size(); ++i)
            if (p.paths[i].active) out.push_back(i);
        return out;
    }

    // ---- transaction lifecycle ------------------------------------------

    void on_arrival(TxId id) {
        auto& t = txs_[id];
        const auto& d = t.rec.demand;
        t.pair = pair_of(d.source, d.dest);
        auto& p = pairs_[t.pair];
        const auto act = active_paths(p);
        ++live_txs_;
        log("arrive tid=" + std::to_string(id) + " " + std::to_string(index(d.source)) + "->" +
            std::to_string(index(d.dest)) + " amount=" + format_double(d.amount));
        if (act.empty()) {
            abort_tx(id, "no_path");
            return;
        }
        std::vector<double> weights;
        for (auto i : act) weights.push_back(share() ? p.paths[i].rate : 1.0);
        auto units = split_demand(d, cfg_.routing.min_tu, cfg_.routing.max_tu, weights, units_.size());
        t.rec.units = units.size();
        q_.push(std::max(d.deadline, now_), rank(Ev::Timeout), {Ev::Timeout, id, 0});
        for (auto& tu : units) {
            Unit u;
            u.tu = tu;
            u.tu.path = act[tu.path];
            u.tx = id;
            u.pair = t.pair;
            u.lock_time.assign(p.paths[u.tu.path].path.length(), 0);
            t.units.push_back(tu.tuid);
            p.outstanding += tu.amount;
            units_.push_back(std::move(u));
        }
        if (share()) {
            for (auto uid : t.units) {
                auto& u = units_[uid];
                u.in_backlog = true;
                p.backlog.push({uid, u.tu.amount, now_, d.deadline});
            }
            try_release(t.pair);
        } else {
            for (auto uid : t.units) send(uid, units_[uid].tu.path);
        }
    }

    // Paced release: a path may send when its rate allows and its window has room.
    void try_release(std::size_t pi) {
        if (!share()) return;
        auto& p = pairs_[pi];
        if (p.backlog.empty()) return;
        const auto rate = sending_rates(p);
        while (!p.backlog.empty()) {
            const auto head = p.backlog.front();
            std::optional<std::size_t> pick;
            double pick_ready = 0, next_ready = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < p.paths.size(); ++i) {
                const auto& ps = p.paths[i];
                if (!ps.active || rate[i] <= 0) continue;
                if (!window_allows(ps.window, ps.outstanding, head.amount)) continue;
                const double ready = ps.last_send + ps.last_amount / rate[i];
                if (ready <= now_ + 1e-12) {
                    if (!pick || ready < pick_ready) {
                        pick = i;
                        pick_ready = ready;
                    }
                } else {
                    next_ready = std::min(next_ready, ready);
                }
            }
            if (!pick) {
                if (next_ready < std::numeric_limits<double>::infinity() && (p.wake < 0 || next_ready < p.wake)) {
                    p.wake = next_ready;
                    q_.push(next_ready, rank(Ev::Release), {Ev::Release, pi, 0});
                }
                return;
            }
            p.backlog.pop();
            auto& ps = p.paths[*pick];
            ps.last_send = now_;
            ps.last_amount = head.amount;
            units_[head.tuid].in_backlog = false;
            units_[head.tuid].lock_time.assign(ps.path.length(), 0);
            send(head.tuid, *pick);
        }
    }

    void send(TuId uid, std::size_t path) {
        auto& u = units_[uid];
        u.tu.path = path;
        u.tu.status = TuStatus::InFlight;
        u.pos = 0;
        pairs_[u.pair].paths[path].outstanding += u.tu.amount;
        log("send tuid=" + std::to_string(uid) + " path=" + std::to_string(path));
        forward(uid);
    }

    bool hub_hop(const Hop& h) const {
        const auto& c = g_.channel(h.channel);
        return is_hub_role(g_.role(c.a)) && is_hub_role(g_.role(c.b));
    }

    // Unit stands at the sending end of hop pos.
    void forward(TuId uid) {
        auto& u = units_[uid];
        const Hop h = hop_of(u);
        chans_[h.channel].arrived[h.dir] += u.tu.amount;
        if (cfg_.processing.enabled && hub_hop(h)) {
            u.in_batch = true;
            batch_[index(g_.hop_from(h))].push({uid, u.tu.amount, now_, txs_[u.tx].rec.demand.deadline});
            return;
        }
        admit(uid);
    }

    void admit(TuId uid) {
        auto& u = units_[uid];
        const Hop h = hop_of(u);
        auto& q = chans_[h.channel].queue[h.dir];
        const double rate = share() ? pairs_[u.pair].paths[u.tu.path].rate : 0.0;
        switch (admit_tu(cfg_.routing.congestion, q, g_.can_lock(h, u.tu.amount), rate, u.tu.amount)) {
            case Admission::Admitted: lock_and_send(uid); break;
            case Admission::Queued:
                q.push({uid, u.tu.amount, now_, txs_[u.tx].rec.demand.deadline});
                u.queued = true;
                u.queue_seen = std::max(u.queue_seen, q.amount());
                ++u.queue_gen;
                q_.push(now_ + cfg_.routing.congestion.delay_threshold, rank(Ev::MarkCheck),
                        {Ev::MarkCheck, uid, u.queue_gen});
                log("queue tuid=" + std::to_string(uid) + " chan=" + std::to_string(h.channel));
                break;
            case Admission::Rejected: abort_tx(u.tx, "queue_full"); break;
        }
    }

    void lock_and_send(TuId uid) {
        auto& u = units_[uid];
        const Hop h = hop_of(u);
        g_.lock(h, u.tu.amount);
        check_channel(h.channel);
        u.lock_time[u.pos] = now_;
        u.locked = u.pos + 1;
        out_.fees += prices_.forwarding_fee(h) * u.tu.amount;
        q_.push(now_ + cfg_.routing.hop_latency, rank(Ev::Deliver), {Ev::Deliver, uid, 0});
    }

    void on_deliver(TuId uid) {
        auto& u = units_[uid];
        if (u.tu.status != TuStatus::InFlight) return;
        ++u.pos;
        if (u.pos < path_of(u).length()) {
            forward(uid);
            return;
        }
        auto& t = txs_[u.tx];
        if (++t.arrived == t.units.size()) commit(u.tx);
    }

    void commit(TxId id) {
        auto& t = txs_[id];
        ensure(now_ <= t.rec.demand.deadline, "transaction committed after its deadline");
        t.rec.status = TxStatus::Completed;
        t.rec.commit_time = now_;
        ++out_.completed;
        out_.completed_value += t.rec.demand.amount;
        --live_txs_;
        log("commit tid=" + std::to_string(id));
        for (auto uid : t.units) {
            const auto last = path_of(units_[uid]).length() - 1;
            q_.push(now_ + cfg_.routing.hop_latency, rank(Ev::Settle), {Ev::Settle, uid, last});
        }
    }

    void on_settle(TuId uid, std::size_t j) {
        auto& u = units_[uid];
        const Hop h = path_of(u).hops[j];
        g_.settle(h, u.tu.amount);
        check_channel(h.channel);
        auto& cs = chans_[h.channel];
        if (!cfg_.routing.pin_delta) {
            const double w = cfg_.routing.delta_smoothing;
            cs.delta = (1 - w) * cs.delta + w * (now_ - u.lock_time[j]);
        }
        service(h.channel, 1 - h.dir);
        if (j > 0) {
            q_.push(now_ + cfg_.routing.hop_latency, rank(Ev::Settle), {Ev::Settle, uid, j - 1});
            return;
        }
        u.tu.status = TuStatus::Completed;
        auto& p = pairs_[u.pair];
        auto& ps = p.paths[u.tu.path];
        ps.outstanding -= u.tu.amount;
        p.outstanding -= u.tu.amount;
        if (share() && !u.tu.marked) {
            double sum = 0;
            for (const auto& x : p.paths)
                if (x.active) sum += x.window;
            ps.window = window_after_success(ps.window, sum, cfg_.routing.congestion.gamma, u.queue_seen);
        }
        auto& t = txs_[u.tx];
        if (++t.acked == t.units.size()) {
            t.rec.ack_time = now_;
            log("ack tid=" + std::to_string(u.tx));
            latencies_.push_back(now_ - t.rec.demand.arrival);
        }
        try_release(u.pair);
    }

    void on_mark_check(TuId uid, std::uint64_t gen) {
        auto& u = units_[uid];
        if (u.queued && u.queue_gen == gen && !u.tu.marked) {
            u.tu.marked = true;
            log("mark tuid=" + std::to_string(uid));
        }
    }

    void on_timeout(TxId id) {
        if (txs_[id].rec.status == TxStatus::Pending) abort_tx(id, "deadline");
    }

    void abort_tx(TxId id, const std::string& reason) {
        auto& t = txs_[id];
        if (t.rec.status != TxStatus::Pending) return;
        t.rec.status = TxStatus::Aborted;
        t.rec.reason = reason;
        ++out_.aborted;
        --live_txs_;
        log("abort tid=" + std::to_string(id) + " reason=" + reason);
        std::vector<Hop> freed;
        auto& p = pairs_[t.pair];
        for (auto uid : t.units) {
            auto& u = units_[uid];
            if (u.tu.status == TuStatus::Aborted || u.tu.status == TuStatus::Completed) continue;
            if (u.in_backlog) p.backlog.erase(uid);
            u.in_backlog = false;
            if (u.queued) chans_[hop_of(u).channel].queue[hop_of(u).dir].erase(uid);
            u.queued = false;
            if (u.in_batch) batch_[index(g_.hop_from(hop_of(u)))].erase(uid);
            u.in_batch = false;
            const auto& hops = path_of(u).hops;
            for (std::size_t j = 0; j < u.locked; ++j) {
                g_.release(hops[j], u.tu.amount);
                check_channel(hops[j].channel);
                freed.push_back(hops[j]);
            }
            u.locked = 0;
            if (u.tu.status == TuStatus::InFlight) {
                auto& ps = p.paths[u.tu.path];
                ps.outstanding -= u.tu.amount;
                if (share() && u.tu.marked) {
                    ps.window = window_after_marked_abort(ps.window, cfg_.routing.congestion.beta);
                    p.reselect = true;
                }
            }
            p.outstanding -= u.tu.amount;
            u.tu.status = TuStatus::Aborted;
        }
        for (const auto& h : freed) service(h.channel, h.dir);
        try_release(t.pair);
    }

    // Head-of-line service after funds returned to direction dir.
    void service(ChannelIdx c, int dir) {
        auto& q = chans_[c].queue[dir];
        const Hop h{c, dir};
        while (!q.empty()) {
            const auto head = q.front();
            if (!g_.can_lock(h, head.amount)) break;
            q.pop();
            units_[head.tuid].queued = false;
            lock_and_send(head.tuid);
        }
    }

    // ---- periodic control -------------------------------------------------

    // Largest first-hop confirmation delay over the pair's live paths.
    double pair_delta(const PairState& p) const {
        double delta = 0;
        for (const auto& ps : p.paths)
            if (ps.active) delta = std::max(delta, chans_[ps.path.hops.front().channel].delta);
        return delta > 0 ? delta : cfg_.routing.initial_delta;
    }

    // Controller rates scaled down to what outstanding demand can use.
    std::vector<double> sending_rates(const PairState& p) const {
        std::vector<double> r;
        for (const auto& ps : p.paths) r.push_back(ps.active ? ps.rate : 0.0);
        cap_to_demand(r, p.outstanding, pair_delta(p));
        return r;
    }

    void on_probe() {
        if (share()) {
            for (std::size_t pi = 0; pi < pairs_.size(); ++pi) {
                auto& p = pairs_[pi];
                double total = 0;
                for (const auto& ps : p.paths)
                    if (ps.active) total += ps.rate;
                for (auto& ps : p.paths) {
                    if (!ps.active) continue;
                    const auto price = prices_.probe(g_, ps.path);
                    if (!price) {
                        p.reselect = true;
                        continue;
                    }
                    ps.price = *price;
                    ps.rate = update_rate(ps.rate, cfg_.routing.alpha, total, ps.price, cfg_.routing.utility_floor);
                }
                const auto eff = sending_rates(p);
                for (std::size_t j = 0; j < p.paths.size(); ++j) {
                    const auto& ps = p.paths[j];
                    if (ps.active) out_.path_trace.push_back({now_, p.s, p.e, j, eff[j], ps.window, ps.price, ps.outstanding});
                }
                try_release(pi);
            }
        }
        if (ticking()) q_.push(now_ + cfg_.routing.tau, rank(Ev::Probe), {Ev::Probe, 0, 0});
    }

    void on_price_tick() {
        const double tau = cfg_.routing.tau;
        std::vector<double> rate(2 * g_.channel_count(), 0.0);
        if (share())
            for (const auto& p : pairs_) {
                const auto eff = sending_rates(p);
                for (std::size_t j = 0; j < p.paths.size(); ++j)
                    for (const auto& h : p.paths[j].path.hops) rate[2 * h.channel + h.dir] += eff[j];
            }
        for (ChannelIdx c = 0; c < g_.channel_count(); ++c) {
            auto& cs = chans_[c];
            FlowStats f;
            for (int d = 0; d < 2; ++d) {
                f.n[d] = cs.arrived[d] / tau * cs.delta;
                f.m[d] = cs.arrived[d];
            }
            if (share()) {
                prices_.update_capacity(c, f, g_.channel(c).capacity);
                prices_.update_imbalance(c, f);
            }
            const auto& pr = prices_.at(c);
            const auto& ch = g_.channel(c);
            ChannelSample s;
            s.time = now_;
            s.channel = c;
            s.lambda = pr.lambda;
            s.mu_ab = pr.mu[0];
            s.mu_ba = pr.mu[1];
            s.xi_ab = prices_.channel_price({c, 0});
            s.xi_ba = prices_.channel_price({c, 1});
            s.rate_ab = rate[2 * c];
            s.rate_ba = rate[2 * c + 1];
            s.arrival_ab = cs.arrived[0] / tau;
            s.arrival_ba = cs.arrived[1] / tau;
            s.delta = cs.delta;
            s.capacity = ch.capacity;
            s.queue_ab = cs.queue[0].amount();
            s.queue_ba = cs.queue[1].amount();
            s.balance_ab = ch.balance[0];
            s.balance_ba = ch.balance[1];
            out_.channel_trace.push_back(s);
            cs.arrived[0] = cs.arrived[1] = 0;
        }
        if (ticking()) q_.push(now_ + tau, rank(Ev::PriceTick), {Ev::PriceTick, 0, 0});
    }

    void on_epoch() {
        ensure(g_.all_conserved(), "conservation violated at epoch boundary");
        snapshot_ = EpochSnapshot(epoch_, g_);
        ++epoch_;
        ++out_.epochs;
        for (std::size_t pi = 0; pi < pairs_.size(); ++pi)
            if (share() && pairs_[pi].reselect) select_paths(pi);
        if (ticking()) q_.push(now_ + cfg_.epoch, rank(Ev::Epoch), {Ev::Epoch, 0, 0});
    }

    // Hub forwarding work for hub-to-hub hops, processed once per batch window.
    void on_batch() {
        const auto& pc = cfg_.processing;
        const double n = cfg_.graph.n_cc;
        const double stall = pc.coherence * n;
        const double cost = pc.service_time * (1 + pc.contention * (n - 1)) / n;
        const double capacity = std::max(0.0, pc.batch_window - stall) / cost;
        for (std::size_t h = 0; h < batch_.size(); ++h) {
            auto& q = batch_[h];
            if (q.empty()) continue;
            // Fractional capacity carries over while the hub stays busy.
            credit_[h] += capacity;
            while (!q.empty() && credit_[h] >= 1 - 1e-9) {
                credit_[h] -= 1;
                const auto uid = q.pop().tuid;
                units_[uid].in_batch = false;
                admit(uid);
            }
            if (q.empty()) credit_[h] = 0;
        }
        if (ticking()) q_.push(now_ + pc.batch_window, rank(Ev::Batch), {Ev::Batch, 0, 0});
    }

    void finish() {
        ensure(g_.all_conserved(), "conservation violated at end of run");
        ensure(live_txs_ == 0, "transactions left unresolved at end of run");
        out_.tsr = compute_tsr(out_.completed, out_.generated);
        out_.ntp = compute_ntp(out_.completed_value, out_.generated_value);
        out_.latency = summarize_latency(latencies_);
        const double tail = std::min(10.0, cfg_.duration / 5);
        std::size_t late = 0, late_done = 0;
        for (auto& t : txs_) {
            if (t.rec.demand.arrival >= cfg_.duration - tail) {
                ++late;
                late_done += t.rec.status == TxStatus::Completed;
            }
            out_.transactions.push_back(std::move(t.rec));
        }
        out_.deadlock = late > 0 && late_done == 0;
        for (const auto& c : g_.channels()) {
            out_.final_balances.push_back(c.balance[0]);
            out_.final_balances.push_back(c.balance[1]);
        }
    }

    SimConfig cfg_;
    Network net_;
    PcnGraph g_;
    PriceState prices_;
    EventQueue<Event> q_;
    double now_ = 0;
    bool ran_ = false;
    std::uint64_t epoch_ = 1;
    EpochSnapshot snapshot_;
    std::vector<ChanState> chans_;
    std::vector<PairState> pairs_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_index_;
    std::vector<TxState> txs_;
    std::vector<Unit> units_;
    std::vector<ChannelQueue> batch_;  // per hub, units waiting for processing
    std::vector<double> credit_;
    std::vector<double> latencies_;
    std::size_t live_txs_ = 0;
    SimOutcome out_;
};

inline SimOutcome run(const SimConfig& cfg) { return Simulator(cfg).run(); }

}  // namespace pcn
