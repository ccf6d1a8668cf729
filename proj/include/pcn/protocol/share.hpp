#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcn/core/event_queue.hpp"
#include "pcn/core/format.hpp"
#include "pcn/core/random.hpp"
#include "pcn/protocol/counter.hpp"
#include "pcn/protocol/crypto.hpp"
#include "pcn/protocol/kmg.hpp"
#include "pcn/protocol/ledger.hpp"
#include "pcn/protocol/tee.hpp"
#include "pcn/routing/demand.hpp"
#include "pcn/topology/paths.hpp"

namespace pcn::proto {

enum class MsgType {
    Init,          // client -> sender hub
    InitReply,     // sender hub -> client
    KeyReq,        // hub -> KMG member
    KeyReply,      // KMG member -> hub
    PayT,          // client -> sender hub
    PayTu,         // sender hub -> recipient hub, one per unit
    AckTu,         // recipient hub -> sender hub
    Receipt,       // sender hub -> recipient hub
    ReceiptClient, // recipient hub -> recipient client
    AckClient,     // recipient client -> recipient hub
    AckTid,        // recipient hub -> sender hub
    Final,         // sender hub -> client: (sigma, ACK)
};

inline constexpr std::array kMsgTypes{MsgType::Init,     MsgType::InitReply, MsgType::KeyReq,        MsgType::KeyReply,
                                      MsgType::PayT,     MsgType::PayTu,     MsgType::AckTu,         MsgType::Receipt,
                                      MsgType::ReceiptClient, MsgType::AckClient, MsgType::AckTid,   MsgType::Final};

inline std::string_view to_string(MsgType t) {
    switch (t) {
        case MsgType::Init: return "init";
        case MsgType::InitReply: return "init_reply";
        case MsgType::KeyReq: return "getkey";
        case MsgType::KeyReply: return "key";
        case MsgType::PayT: return "pay_t";
        case MsgType::PayTu: return "pay_tu";
        case MsgType::AckTu: return "ack_tu";
        case MsgType::Receipt: return "receipt";
        case MsgType::ReceiptClient: return "receipt_client";
        case MsgType::AckClient: return "ack_client";
        case MsgType::AckTid: return "ack_tid";
        case MsgType::Final: return "final";
    }
    return "?";
}

enum class AdversaryKind { Drop, Delay, Replay };

// Targets the nth message (0-based) of one type, counted in send order.
struct AdversaryAction {
    AdversaryKind kind = AdversaryKind::Drop;
    MsgType type = MsgType::PayTu;
    std::size_t nth = 0;
    double dt = 0;  // extra delay for Delay, gap before the copy for Replay
};

struct PaymentSpec {
    std::size_t source = 0;  // client index
    std::size_t dest = 0;
    Tokens amount = 0;
    double time = 0;
};

struct ProtocolConfig {
    std::size_t hubs = 2;
    std::size_t clients_per_hub = 1;
    Tokens client_balance = 20;  // each side of a client-hub channel
    Tokens hub_balance = 50;     // each side of a hub-hub channel
    std::size_t kmg_size = 1;
    std::size_t k_paths = 2;
    Tokens min_tu = 1;
    Tokens max_tu = 4;
    double latency = 0.05;  // per message hop
    double timeout = 3.0;   // sender hub abandons an undecided payment after this
    double batch_window = kDefaultBatchWindow;
    std::vector<PaymentSpec> payments;
    std::vector<AdversaryAction> adversary;
    std::uint64_t seed = 1;

    void validate() const {
        require(hubs >= 2, "protocol run needs at least two hubs");
        require(clients_per_hub >= 1, "each hub needs a client");
        require(client_balance >= 0 && hub_balance >= 0, "negative balance");
        require(kmg_size >= 1 && kmg_size <= hubs, "kmg_size must be in [1, hubs]");
        require(k_paths >= 1, "k_paths must be >= 1");
        require(min_tu > 0 && max_tu >= min_tu, "need 0 < min_tu <= max_tu");
        require(latency > 0 && timeout > 0 && batch_window > 0, "latency, timeout and batch window must be positive");
        const auto clients = hubs * clients_per_hub;
        for (const auto& p : payments) {
            require(p.source < clients && p.dest < clients, "payment endpoint out of range");
            require(p.source % hubs != p.dest % hubs, "payment endpoints must sit at different hubs");
            require(p.amount > 0 && is_quantized(p.amount), "payment amount must be positive and quantized");
            require(p.time >= 0, "payment time must be non-negative");
        }
        for (const auto& a : adversary) require(a.dt >= 0, "adversary delay must be non-negative");
    }
};

enum class PaymentStatus { Completed, Aborted };

struct PaymentResult {
    Digest tid{};
    NodeId source{};
    NodeId dest{};
    NodeId sender_hub{};
    Tokens amount = 0;
    PaymentStatus status = PaymentStatus::Aborted;
    bool acked = false;  // sender client got (sigma, ACK)
    std::optional<Attestation> attestation;
    std::optional<IasProof> proof;
    double decided_at = 0;
};

// What a per-channel observer sees of one unit on a hub-hub channel.
struct TuObservation {
    Digest tuid{};
    std::size_t ciphertext_len = 0;
    Bytes ciphertext;
    Tokens amount = 0;
};

struct ProtocolOutcome {
    std::vector<PaymentResult> payments;
    std::vector<std::string> trace;
    std::vector<std::string> violations;
    std::vector<TuObservation> observations;
    std::vector<Tokens> initial_wealth;
    std::vector<Tokens> final_wealth;
    std::map<NodeId, PublicKey> hub_mpk;
    std::size_t sent = 0, dropped = 0, delayed = 0, replayed = 0, rejected = 0;
    std::size_t batches = 0, batched_updates = 0;
    std::size_t expelled_hubs = 0;
    double end_time = 0;
};

namespace detail {

struct Lock {
    Hop hop;
    Tokens amount;
};

struct UnitLock {
    Digest tid{};
    Hop hop;  // last hop, into the recipient hub
    Tokens amount = 0;
    std::size_t hops = 0;
};

inline Bytes encode_request(NodeId s, NodeId r, Tokens val, std::uint64_t nonce) {
    return Encoder().put(static_cast<std::uint64_t>(index(s))).put(static_cast<std::uint64_t>(index(r)))
        .put(static_cast<std::uint64_t>(std::llround(val / kTokenQuantum))).put(nonce).bytes();
}

struct Request {
    NodeId source{}, dest{};
    Tokens val = 0;
};

inline Request decode_request(const Bytes& b) {
    Decoder d(b);
    Request r;
    r.source = node(d.u64());
    r.dest = node(d.u64());
    r.val = static_cast<double>(d.u64()) * kTokenQuantum;
    d.u64();
    ensure(d.done(), "trailing bytes in payment request");
    return r;
}

inline Bytes encode_state(const Digest& tid, bool theta) {
    return Encoder().put(tid).put(std::uint64_t{theta}).bytes();
}

}  // namespace detail

// Enclave program run at the sender hub when a payment's units are all
// acknowledged: outputs ("pay_t", state_tid) and counts invocations.
inline Program pay_t_program() {
    return Program{"share.pay_t", [](const Bytes& inp, const Bytes& mem) {
                       std::uint64_t n = 0;
                       if (!mem.empty()) n = Decoder(mem).u64();
                       return std::pair{Encoder().put("pay_t").put(inp).bytes(), Encoder().put(n + 1).bytes()};
                   }};
}

// Event-driven mock of the three-phase payment protocol over a multi-hub
// network: hubs 0..H-1 in a full mesh, client c attached to hub c % H.
class ShareNetwork {
public:
    explicit ShareNetwork(ProtocolConfig cfg) : cfg_(std::move(cfg)), ledger_(decide_once), rng_(mix_seed(cfg_.seed, 7)) {
        cfg_.validate();
        build();
    }

    const PcnGraph& graph() const { return g_; }
    NodeId hub(std::size_t i) const { return node(i); }
    NodeId client(std::size_t c) const { return node(cfg_.hubs + c); }
    NodeId hub_of(NodeId client) const { return node((index(client) - cfg_.hubs) % cfg_.hubs); }
    const Ledger& ledger() const { return ledger_; }
    Kmg& kmg() { return *kmg_; }
    AttestedExecution& tee(NodeId hub) { return hubs_.at(index(hub)).tee; }
    const MockIas& ias() const { return ias_; }

    ProtocolOutcome run() {
        ensure(!ran_, "a ShareNetwork runs once");
        ran_ = true;
        out_.initial_wealth = wealth();
        capacity_ = g_.total_capacity();
        for (std::size_t i = 0; i < cfg_.payments.size(); ++i) schedule(cfg_.payments[i].time, 0, Ev{EvKind::Start, i, {}, 0});
        for (std::size_t h = 0; h < cfg_.hubs; ++h) q_.push(cfg_.batch_window, 1, Ev{EvKind::Batch, h, {}, 0});
        while (!q_.empty()) {
            auto e = q_.pop();
            now_ = e.time;
            if (e.payload.kind != EvKind::Batch) --live_;
            dispatch(e.payload);
            check_invariants();
        }
        finish();
        return std::move(out_);
    }

private:
    enum class EvKind { Start, Deliver, HubTimeout, ClientTimeout, Batch };
    struct Message {
        std::uint64_t id = 0;
        MsgType type{};
        NodeId from{}, to{};
        Digest tid{};   // plaintext only on client<->hub and key-management hops
        Digest tuid{};
        MockCiphertext ct;
        std::uint64_t count = 0;
        std::optional<PublicKey> pk;
        std::optional<MockKeypair> keys;  // KMG -> hub, enclave-to-enclave
        std::optional<Attestation> att;
        bool replay = false;
    };
    struct Ev {
        EvKind kind;
        std::size_t index;
        Message msg;
        std::uint64_t aux;
    };

    struct Unit {
        Digest tuid{};
        Tokens amount = 0;
        Path path;
        std::optional<MockKeypair> keys;
        bool sent = false;
        bool theta = false;
    };
    enum class Phase { Initialized, Splitting, Sending, AwaitReceipt, Done };
    struct HubTx {
        Digest tid{};
        MockKeypair keys;
        NodeId client{};
        detail::Request req;
        NodeId dest_hub{};
        Phase phase = Phase::Initialized;
        std::vector<Unit> units;
        std::size_t keys_pending = 0;
        bool theta = false;
        std::optional<Attestation> sigma;
    };
    struct Hub {
        AttestedExecution tee;
        EnclaveId eid{};
        BatchCommitter batches;
        std::map<Digest, HubTx> sending;  // as sender hub, by tid
        std::set<Digest> received_tu;     // as recipient hub
        std::set<Digest> receipts;        // tids for which a receipt was processed
        std::map<std::uint64_t, std::pair<Digest, std::size_t>> key_waits;  // request id -> (tid, unit or npos)
        bool expelled = false;
    };
    struct ClientTx {
        std::size_t payment = 0;
        Bytes pay_req;
        Digest tid{};
        bool have_tid = false;
        PublicKey pk_tid;
        PublicKey mpk;
        bool paid = false;
    };

    static constexpr std::size_t kTidKey = static_cast<std::size_t>(-1);

    void build() {
        const auto clients = cfg_.hubs * cfg_.clients_per_hub;
        g_ = PcnGraph(cfg_.hubs + clients);
        for (std::size_t h = 0; h < cfg_.hubs; ++h) g_.set_role(hub(h), NodeRole::ActiveHub);
        for (std::size_t a = 0; a < cfg_.hubs; ++a)
            for (std::size_t b = a + 1; b < cfg_.hubs; ++b) g_.add_channel(hub(a), hub(b), cfg_.hub_balance, cfg_.hub_balance);
        for (std::size_t c = 0; c < clients; ++c)
            g_.add_channel(client(c), hub(c % cfg_.hubs), cfg_.client_balance, cfg_.client_balance);

        std::set<NodeId> hub_set;
        std::vector<NodeId> members;
        for (std::size_t h = 0; h < cfg_.hubs; ++h) {
            hub_set.insert(hub(h));
            if (h < cfg_.kmg_size) members.push_back(hub(h));
        }
        kmg_.emplace(members, hub_set, mix_seed(cfg_.seed, 3));
        for (std::size_t h = 0; h < cfg_.hubs; ++h) {
            const std::uint64_t sid = h + 1;
            Hub hb{AttestedExecution(sid, mix_seed(cfg_.seed, 100 + h)), {}, BatchCommitter(hub(h), cfg_.batch_window), {}, {}, {}, {}, false};
            hb.tee.register_party(hub(h));
            hb.eid = hb.tee.install(hub(h), sid, pay_t_program());
            out_.hub_mpk[hub(h)] = hb.tee.getpk();
            hubs_.push_back(std::move(hb));
        }
    }

    void schedule(double t, int rank, Ev e) {
        ++live_;
        q_.push(t, rank, std::move(e));
    }

    // --- transport -------------------------------------------------------

    void send(Message m, double delay) {
        m.id = out_.sent++;
        const auto nth = type_count_[m.type]++;
        bool drop = false;
        double extra = 0;
        std::optional<double> replay_gap;
        for (const auto& a : cfg_.adversary) {
            if (a.type != m.type || a.nth != nth) continue;
            switch (a.kind) {
                case AdversaryKind::Drop: drop = true; break;
                case AdversaryKind::Delay: extra += a.dt; break;
                case AdversaryKind::Replay: replay_gap = a.dt; break;
            }
        }
        const std::string what = std::string(to_string(m.type)) + " " + name(m.from) + "->" + name(m.to);
        if (drop) {
            ++out_.dropped;
            log(name(m.from), what, "dropped");
            return;
        }
        if (extra > 0) ++out_.delayed;
        schedule(now_ + delay + extra, 2, Ev{EvKind::Deliver, 0, m, 0});
        if (replay_gap) {
            ++out_.replayed;
            Message copy = m;
            copy.replay = true;
            schedule(now_ + delay + extra + *replay_gap, 2, Ev{EvKind::Deliver, 0, copy, 0});
        }
    }

    double hop_delay(std::size_t hops) const { return cfg_.latency * static_cast<double>(std::max<std::size_t>(hops, 1)); }

    std::string name(NodeId n) const {
        return index(n) < cfg_.hubs ? "S" + std::to_string(index(n)) : "P" + std::to_string(index(n) - cfg_.hubs);
    }
    static std::string short_id(const Digest& d) { return hex(d, 4); }

    void log(const std::string& actor, const std::string& what, const std::string& outcome) {
        out_.trace.push_back(format_time(now_) + " " + actor + " " + what + " " + outcome);
    }
    static std::string format_time(double t) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", t);
        return buf;
    }

    // --- locks and settlement ---------------------------------------------

    bool decided(const Digest& tid) const { return ledger_.read(tid).has_value(); }

    bool lock(const Digest& tid, Hop h, Tokens amount) {
        if (!g_.can_lock(h, amount)) return false;
        g_.lock(h, amount);
        locks_[tid].push_back({h, amount});
        return true;
    }

    bool lock_path(const Digest& tid, const Digest& tuid, const Path& p, Tokens amount) {
        for (const auto& h : p.hops)
            if (!g_.can_lock(h, amount)) return false;
        for (const auto& h : p.hops) lock(tid, h, amount);
        tu_locks_[tuid] = {tid, p.hops.back(), amount, p.hops.size()};
        return true;
    }

    // Funds still locked toward `at` for a unit, or 0.
    Tokens receive_tu(const Digest& tuid, NodeId at) const {
        const auto it = tu_locks_.find(tuid);
        if (it == tu_locks_.end() || g_.hop_to(it->second.hop) != at || decided(it->second.tid)) return 0;
        return it->second.amount;
    }

    Tokens receive_client(const Digest& tid, NodeId from_hub, NodeId at) const {
        const auto it = locks_.find(tid);
        if (it == locks_.end()) return 0;
        Tokens sum = 0;
        for (const auto& l : it->second)
            if (g_.hop_from(l.hop) == from_hub && g_.hop_to(l.hop) == at) sum += l.amount;
        return sum;
    }

    // Apply the ledger decision to every lock the payment holds.
    void resolve(const Digest& tid, bool commit) {
        auto it = locks_.find(tid);
        if (it == locks_.end()) return;
        for (const auto& l : it->second) commit ? g_.settle(l.hop, l.amount) : g_.release(l.hop, l.amount);
        locks_.erase(it);
    }

    bool decide(const Digest& tid, bool commit, NodeId party) {
        if (ledger_.append(tid, commit ? kCommit() : kAbort(), party) == AppendResult::Failure) return false;
        resolve(tid, commit);
        decided_at_[tid] = now_;
        log(name(party), std::string(commit ? "commit" : "abort") + " tid=" + short_id(tid), "ledger");
        return true;
    }

    // --- events ------------------------------------------------------------

    void dispatch(const Ev& e) {
        switch (e.kind) {
            case EvKind::Start: start_payment(e.index); break;
            case EvKind::Deliver: deliver(e.msg); break;
            case EvKind::HubTimeout: hub_timeout(e.index, e.msg.tid); break;
            case EvKind::ClientTimeout: client_timeout(e.index); break;
            case EvKind::Batch: batch_tick(e.index); break;
        }
    }

    void start_payment(std::size_t i) {
        const auto& p = cfg_.payments[i];
        ClientTx c;
        c.payment = i;
        c.pay_req = detail::encode_request(client(p.source), client(p.dest), p.amount, rng_.next_u64());
        clients_[i] = c;
        Message m;
        m.type = MsgType::Init;
        m.from = client(p.source);
        m.to = hub_of(m.from);
        m.ct.payload = c.pay_req;
        m.count = i;
        log(name(m.from), "init", "sent");
        send(m, hop_delay(1));
        // Fallback for a payment whose hub never saw pay_t.
        schedule(now_ + 2 * cfg_.timeout + 4 * cfg_.latency, 3, Ev{EvKind::ClientTimeout, i, {}, 0});
    }

    void deliver(const Message& m) {
        switch (m.type) {
            case MsgType::Init: on_init(m); break;
            case MsgType::InitReply: on_init_reply(m); break;
            case MsgType::KeyReq: on_key_req(m); break;
            case MsgType::KeyReply: on_key_reply(m); break;
            case MsgType::PayT: on_pay_t(m); break;
            case MsgType::PayTu: on_pay_tu(m); break;
            case MsgType::AckTu: on_ack_tu(m); break;
            case MsgType::Receipt: on_receipt(m); break;
            case MsgType::ReceiptClient: on_receipt_client(m); break;
            case MsgType::AckClient: on_ack_client(m); break;
            case MsgType::AckTid: on_ack_tid(m); break;
            case MsgType::Final: on_final(m); break;
        }
    }

    void reject(const Message& m, const std::string& why) {
        ++out_.rejected;
        log(name(m.to), std::string(to_string(m.type)), "rejected " + why);
    }

    // Part 1 ------------------------------------------------------------------

    void on_init(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        const Digest tid = sha256(m.ct.payload);
        if (hb.sending.contains(tid) || decided(tid)) return reject(m, "duplicate tid=" + short_id(tid));
        HubTx tx;
        tx.tid = tid;
        tx.client = m.from;
        tx.req = detail::decode_request(m.ct.payload);
        tx.dest_hub = hub_of(tx.req.dest);
        hb.sending.emplace(tid, tx);
        log(name(m.to), "init tid=" + short_id(tid), "ok");
        request_key(m.to, tid, kTidKey, tid, KeyScope::Transaction, m.count);
    }

    void request_key(NodeId h, const Digest& tid, std::size_t unit, const Digest& id, KeyScope scope, std::uint64_t aux) {
        if (kmg_->is_member(h)) {
            key_ready(h, tid, unit, kmg_->keygen(h, id, scope).keys, aux);
            return;
        }
        auto& hb = hubs_[index(h)];
        const auto rid = next_request_++;
        hb.key_waits[rid] = {tid, unit};
        Message m;
        m.type = MsgType::KeyReq;
        m.from = h;
        m.to = kmg_->serving_member(id);
        m.tid = id;
        m.count = rid;
        m.ct.payload = Encoder().put(static_cast<std::uint64_t>(scope)).put(aux).bytes();
        send(m, hop_delay(1));
    }

    void on_key_req(const Message& m) {
        Decoder d(m.ct.payload);
        const auto scope = static_cast<KeyScope>(d.u64());
        const auto aux = d.u64();
        Message r;
        r.type = MsgType::KeyReply;
        r.from = m.to;
        r.to = m.from;
        r.count = m.count;
        r.keys = kmg_->keygen(m.from, m.tid, scope).keys;
        r.ct.payload = Encoder().put(aux).bytes();
        log(name(m.to), "getkey id=" + short_id(m.tid), "granted");
        send(r, hop_delay(1));
    }

    void on_key_reply(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        const auto it = hb.key_waits.find(m.count);
        if (it == hb.key_waits.end()) return reject(m, "unexpected key");
        const auto [tid, unit] = it->second;
        hb.key_waits.erase(it);
        key_ready(m.to, tid, unit, *m.keys, Decoder(m.ct.payload).u64());
    }

    void key_ready(NodeId h, const Digest& tid, std::size_t unit, const MockKeypair& keys, std::uint64_t aux) {
        auto& hb = hubs_[index(h)];
        const auto it = hb.sending.find(tid);
        if (it == hb.sending.end() || decided(tid)) return;
        auto& tx = it->second;
        if (unit == kTidKey) {
            tx.keys = keys;
            Message r;
            r.type = MsgType::InitReply;
            r.from = h;
            r.to = tx.client;
            r.tid = tid;
            r.pk = keys.pk;
            r.count = aux;
            r.att.emplace();
            r.att->outp = detail::encode_state(tid, false);
            send(r, hop_delay(1));
            return;
        }
        tx.units.at(unit).keys = keys;
        if (--tx.keys_pending == 0) send_units(h, tx);
    }

    void on_init_reply(const Message& m) {
        auto it = clients_.find(m.count);
        if (it == clients_.end() || it->second.have_tid) return reject(m, "unexpected init reply");
        auto& c = it->second;
        if (sha256(c.pay_req) != m.tid) return reject(m, "tid mismatch");
        if (decided(m.tid)) return reject(m, "late init reply tid=" + short_id(m.tid));
        c.have_tid = true;
        c.tid = m.tid;
        c.pk_tid = *m.pk;
        c.mpk = hubs_[index(m.from)].tee.getpk();
        // Part 2 on the client side: encrypt, fund, request processing.
        const auto& p = cfg_.payments[c.payment];
        const NodeId me = m.to;
        const auto ch = g_.channels_between(me, m.from).front();
        const Hop h{ch, g_.channel(ch).dir_from(me)};
        if (!lock(c.tid, h, p.amount)) {
            log(name(me), "pay_t tid=" + short_id(c.tid), "insufficient funds");
            decide(c.tid, false, me);
            return;
        }
        c.paid = true;
        Message pt;
        pt.type = MsgType::PayT;
        pt.from = me;
        pt.to = m.from;
        pt.tid = c.tid;
        pt.ct = mock_encrypt(c.pk_tid, c.pay_req);
        log(name(me), "pay_t tid=" + short_id(c.tid), "sent");
        send(pt, hop_delay(1));
    }

    // Part 2 ------------------------------------------------------------------

    void on_pay_t(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        const auto it = hb.sending.find(m.tid);
        if (it == hb.sending.end()) return reject(m, "unknown tid");
        auto& tx = it->second;
        if (tx.phase != Phase::Initialized) return reject(m, "replayed pay_t tid=" + short_id(m.tid));
        if (decided(m.tid)) return reject(m, "late pay_t tid=" + short_id(m.tid));
        const auto plain = mock_decrypt(tx.keys.sk, m.ct);
        if (!plain) return reject(m, "undecryptable pay_t");
        const auto req = detail::decode_request(*plain);
        if (receive_client(m.tid, m.from, m.to) != req.val) return reject(m, "funds missing for tid=" + short_id(m.tid));
        tx.phase = Phase::Splitting;
        Message timer;
        timer.tid = m.tid;
        schedule(now_ + cfg_.timeout, 3, Ev{EvKind::HubTimeout, index(m.to), timer, 0});

        const auto paths = yen_k_shortest(g_, m.to, tx.dest_hub, cfg_.k_paths);
        ensure(!paths.empty(), "hub mesh is disconnected");
        Demand d;
        d.source = m.to;
        d.dest = tx.dest_hub;
        d.amount = req.val;
        const std::vector<double> rates(paths.size(), 1.0);
        const auto tus = split_demand(d, cfg_.min_tu, cfg_.max_tu, rates);
        for (std::size_t i = 0; i < tus.size(); ++i) {
            Unit u;
            u.tuid = sha256(Encoder().put(*plain).put(static_cast<std::uint64_t>(i + 1)).bytes());
            u.amount = tus[i].amount;
            u.path = paths[tus[i].path];
            tx.units.push_back(u);
        }
        log(name(m.to), "pay_t tid=" + short_id(m.tid), "split " + std::to_string(tx.units.size()));
        tx.keys_pending = tx.units.size();
        for (std::size_t i = 0; i < tx.units.size(); ++i)
            request_key(m.to, m.tid, i, tx.units[i].tuid, KeyScope::TransactionUnit, 0);
    }

    void send_units(NodeId h, HubTx& tx) {
        tx.phase = Phase::Sending;
        for (auto& u : tx.units) {
            if (!lock_path(tx.tid, u.tuid, u.path, u.amount)) {
                log(name(h), "pay_tu tuid=" + short_id(u.tuid), "insufficient funds");
                abort_sender(h, tx);
                return;
            }
            u.sent = true;
            hubs_[index(h)].batches.add({"tu/" + hex(u.tuid), "sent"});
            Message m;
            m.type = MsgType::PayTu;
            m.from = h;
            m.to = tx.dest_hub;
            m.tuid = u.tuid;
            m.ct = mock_encrypt(u.keys->pk, detail::encode_request(tx.req.source, tx.req.dest, u.amount, 0));
            out_.observations.push_back({u.tuid, m.ct.leak_len(), m.ct.payload, u.amount});
            send(m, hop_delay(u.path.length()));
        }
    }

    void on_pay_tu(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        if (hb.received_tu.contains(m.tuid)) return reject(m, "replayed tuid=" + short_id(m.tuid));
        // Enclaves obtain unit keys through the KMG; the cached pair is returned.
        const auto keys = kmg_->keygen(m.to, m.tuid, KeyScope::TransactionUnit).keys;
        const auto plain = mock_decrypt(keys.sk, m.ct);
        if (!plain) return reject(m, "undecryptable pay_tu");
        const auto d = detail::decode_request(*plain);
        if (receive_tu(m.tuid, m.to) != d.val) return reject(m, "funds missing for tuid=" + short_id(m.tuid));
        hb.received_tu.insert(m.tuid);
        hb.batches.add({"rx/" + hex(m.tuid), "received"});
        log(name(m.to), "pay_tu tuid=" + short_id(m.tuid), "ack");
        Message a;
        a.type = MsgType::AckTu;
        a.from = m.to;
        a.to = m.from;
        a.tuid = m.tuid;
        send(a, hop_delay(tu_locks_.at(m.tuid).hops));
    }

    void on_ack_tu(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        for (auto& [tid, tx] : hb.sending) {
            for (auto& u : tx.units) {
                if (u.tuid != m.tuid) continue;
                if (u.theta) return reject(m, "duplicate ack tuid=" + short_id(m.tuid));
                if (decided(tid) || tx.phase != Phase::Sending) return reject(m, "late ack tuid=" + short_id(m.tuid));
                u.theta = true;
                hb.batches.add({"tu/" + hex(u.tuid), "acked"});
                tx.theta = std::all_of(tx.units.begin(), tx.units.end(), [](const Unit& x) { return x.theta; });
                if (tx.theta) units_done(m.to, tx);
                return;
            }
        }
        reject(m, "unknown tuid=" + short_id(m.tuid));
    }

    void units_done(NodeId h, HubTx& tx) {
        auto& hb = hubs_[index(h)];
        tx.phase = Phase::AwaitReceipt;
        tx.sigma = hb.tee.resume(h, hb.eid, detail::encode_state(tx.tid, true)).second;
        hb.batches.add({"tid/" + hex(tx.tid), "theta"});
        log(name(h), "pay_t tid=" + short_id(tx.tid), "all units acked");
        Message r;
        r.type = MsgType::Receipt;
        r.from = h;
        r.to = tx.dest_hub;
        r.tid = tx.tid;
        r.count = tx.units.size();
        // D_tid travels encrypted hub to hub; the recipient hub can derive the unit ids from it.
        r.ct = mock_encrypt(tx.keys.pk, clients_payload(tx));
        send(r, hop_delay(1));
    }

    Bytes clients_payload(const HubTx& tx) const {
        for (const auto& [i, c] : clients_)
            if (c.have_tid && c.tid == tx.tid) return c.pay_req;
        ensure(false, "sender hub lost the payment request");
        return {};
    }

    void abort_sender(NodeId h, HubTx& tx) {
        if (decide(tx.tid, false, h)) rollback_state(tx);
        tx.phase = Phase::Done;
    }

    // Rolled-back payment: every unit state and theta return to false.
    static void rollback_state(HubTx& tx) {
        for (auto& u : tx.units) u.theta = false;
        tx.theta = false;
    }

    void hub_timeout(std::size_t h, const Digest& tid) {
        auto& hb = hubs_[h];
        const auto it = hb.sending.find(tid);
        if (it == hb.sending.end() || it->second.phase == Phase::Done) return;
        if (decided(tid)) return;
        log(name(hub(h)), "timeout tid=" + short_id(tid), "rollback");
        abort_sender(hub(h), it->second);
    }

    void client_timeout(std::size_t i) {
        const auto& c = clients_.at(i);
        const Digest tid = sha256(c.pay_req);
        if (!decided(tid)) {
            log(name(client(cfg_.payments[i].source)), "timeout tid=" + short_id(tid), "rollback");
            decide(tid, false, client(cfg_.payments[i].source));
        }
        for (auto& hb : hubs_) {
            const auto it = hb.sending.find(tid);
            if (it != hb.sending.end() && ledger_.read(tid)->inp == kAbort()) {
                rollback_state(it->second);
                it->second.phase = Phase::Done;
            }
        }
    }

    // Part 3 ------------------------------------------------------------------

    void on_receipt(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        if (hb.receipts.contains(m.tid)) return reject(m, "replayed receipt tid=" + short_id(m.tid));
        if (decided(m.tid)) return reject(m, "late receipt tid=" + short_id(m.tid));
        const auto keys = kmg_->keygen(m.to, m.tid, KeyScope::Transaction).keys;
        const auto plain = mock_decrypt(keys.sk, m.ct);
        if (!plain) return reject(m, "undecryptable receipt");
        const auto d = detail::decode_request(*plain);
        Tokens got = 0;
        for (std::uint64_t i = 1; i <= m.count; ++i) {
            const auto tuid = sha256(Encoder().put(*plain).put(i).bytes());
            if (hb.received_tu.contains(tuid)) got += receive_tu(tuid, m.to);
        }
        if (got != d.val) return reject(m, "unit funds incomplete tid=" + short_id(m.tid));
        hb.receipts.insert(m.tid);
        const auto ch = g_.channels_between(m.to, d.dest).front();
        if (!lock(m.tid, Hop{ch, g_.channel(ch).dir_from(m.to)}, d.val)) {
            log(name(m.to), "receipt tid=" + short_id(m.tid), "insufficient funds");
            return;
        }
        log(name(m.to), "receipt tid=" + short_id(m.tid), "consolidated");
        Message r;
        r.type = MsgType::ReceiptClient;
        r.from = m.to;
        r.to = d.dest;
        r.tid = m.tid;
        r.ct.payload = *plain;
        r.count = index(m.from);
        send(r, hop_delay(1));
    }

    void on_receipt_client(const Message& m) {
        if (!acked_by_recipient_.insert(m.tid).second) return reject(m, "replayed receipt tid=" + short_id(m.tid));
        const auto d = detail::decode_request(m.ct.payload);
        if (d.dest != m.to || receive_client(m.tid, m.from, m.to) != d.val)
            return reject(m, "receipt does not match funds tid=" + short_id(m.tid));
        Message a;
        a.type = MsgType::AckClient;
        a.from = m.to;
        a.to = m.from;
        a.tid = m.tid;
        a.count = m.count;
        send(a, hop_delay(1));
    }

    void on_ack_client(const Message& m) {
        if (decided(m.tid)) return reject(m, "ack after decision tid=" + short_id(m.tid));
        decide(m.tid, true, m.to);
        hubs_[index(m.to)].batches.add({"tid/" + hex(m.tid), "paid"});
        Message a;
        a.type = MsgType::AckTid;
        a.from = m.to;
        a.to = hub(m.count);
        a.tid = m.tid;
        send(a, hop_delay(1));
    }

    void on_ack_tid(const Message& m) {
        auto& hb = hubs_[index(m.to)];
        const auto it = hb.sending.find(m.tid);
        if (it == hb.sending.end() || it->second.phase != Phase::AwaitReceipt)
            return reject(m, "unexpected ack tid=" + short_id(m.tid));
        const auto entry = ledger_.read(m.tid);
        if (!entry || entry->inp != kCommit()) return reject(m, "ack without commit tid=" + short_id(m.tid));
        auto& tx = it->second;
        tx.phase = Phase::Done;
        Message f;
        f.type = MsgType::Final;
        f.from = m.to;
        f.to = tx.client;
        f.tid = m.tid;
        f.att = tx.sigma;
        send(f, hop_delay(1));
    }

    void on_final(const Message& m) {
        for (auto& [i, c] : clients_) {
            if (!c.have_tid || c.tid != m.tid) continue;
            if (finals_.contains(i)) return reject(m, "replayed final tid=" + short_id(m.tid));
            finals_[i] = *m.att;
            log(name(m.to), "final tid=" + short_id(m.tid), "acked");
            return;
        }
        reject(m, "unknown final");
    }

    void batch_tick(std::size_t h) {
        auto& hb = hubs_[h];
        if (auto b = hb.batches.seal(now_)) {
            if (verifier_.apply(*b)) {
                ++out_.batches;
                out_.batched_updates += b->updates.size();
            }
        }
        if (live_ > 0 || hb.batches.pending() > 0) q_.push(now_ + cfg_.batch_window, 1, Ev{EvKind::Batch, h, {}, 0});
    }

    // --- checks ---------------------------------------------------------------

    std::vector<Tokens> wealth() const {
        std::vector<Tokens> w(g_.node_count(), 0);
        for (const auto& c : g_.channels()) {
            w[index(c.a)] += c.balance[0] + c.locked[0];
            w[index(c.b)] += c.balance[1] + c.locked[1];
        }
        return w;
    }

    void violation(const std::string& what) {
        out_.violations.push_back(format_time(now_) + " " + what);
    }

    void check_invariants() {
        if (!g_.all_conserved()) violation("channel conservation broken");
        if (g_.total_capacity() != capacity_) violation("total capacity changed");
        Tokens total = 0;
        for (auto w : wealth()) total += w;
        if (total != capacity_) violation("node wealth does not sum to capacity");
        for (const auto& hb : hubs_)
            for (const auto& [tid, tx] : hb.sending) {
                if (tx.units.empty() || tx.keys_pending > 0) continue;
                const bool all = std::all_of(tx.units.begin(), tx.units.end(), [](const Unit& u) { return u.theta; });
                if (tx.theta != all) violation("theta inconsistent for tid=" + short_id(tid));
            }
    }

    void finish() {
        out_.end_time = now_;
        if (!locks_.empty()) violation("locks left unresolved");
        for (const auto& c : g_.channels())
            if (c.locked[0] != 0 || c.locked[1] != 0 || c.htlcs[0] != 0 || c.htlcs[1] != 0) violation("funds still locked");
        for (std::size_t i = 0; i < cfg_.payments.size(); ++i) {
            const auto& p = cfg_.payments[i];
            const auto& c = clients_.at(i);
            PaymentResult r;
            r.tid = sha256(c.pay_req);
            r.source = client(p.source);
            r.dest = client(p.dest);
            r.sender_hub = hub_of(r.source);
            r.amount = p.amount;
            const auto entry = ledger_.read(r.tid);
            if (!entry) violation("payment " + std::to_string(i) + " never decided");
            r.status = entry && entry->inp == kCommit() ? PaymentStatus::Completed : PaymentStatus::Aborted;
            r.decided_at = decided_at_.contains(r.tid) ? decided_at_.at(r.tid) : now_;
            if (const auto f = finals_.find(i); f != finals_.end()) {
                r.acked = true;
                r.attestation = f->second;
                r.proof = ias_.verify(c.mpk, f->second);
                if (!r.proof->valid) {
                    auto& hb = hubs_[index(hub_of(r.source))];
                    if (!hb.expelled) ++out_.expelled_hubs;
                    hb.expelled = true;
                }
            }
            if (r.acked && r.status != PaymentStatus::Completed) violation("ack for an aborted payment");
            out_.payments.push_back(r);
        }
        out_.final_wealth = wealth();
    }

    ProtocolConfig cfg_;
    PcnGraph g_;
    Ledger ledger_;
    std::optional<Kmg> kmg_;
    MockIas ias_;
    BatchVerifier verifier_;
    std::vector<Hub> hubs_;
    std::map<std::size_t, ClientTx> clients_;
    std::map<std::size_t, Attestation> finals_;
    std::set<Digest> acked_by_recipient_;
    std::map<Digest, std::vector<detail::Lock>> locks_;
    std::map<Digest, detail::UnitLock> tu_locks_;
    std::size_t live_ = 0;  // queued events other than batch ticks
    std::map<Digest, double> decided_at_;
    std::map<MsgType, std::size_t> type_count_;
    EventQueue<Ev> q_;
    Rng rng_;
    ProtocolOutcome out_;
    Tokens capacity_ = 0;
    double now_ = 0;
    std::uint64_t next_request_ = 0;
    bool ran_ = false;
};

inline ProtocolOutcome run_protocol(const ProtocolConfig& cfg) { return ShareNetwork(cfg).run(); }

}  // namespace pcn::proto
