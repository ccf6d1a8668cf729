#pragma once

#include <functional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "pcn/allocation/instance.hpp"
#include "pcn/io/files.hpp"
#include "pcn/protocol/scenarios.hpp"
#include "pcn/simulator/config.hpp"
#include "pcn/simulator/scenarios.hpp"
#include "pcn/simulator/studies.hpp"
#include "pcn/topology/generators.hpp"

// JSON run configs. Every section is strict: unknown keys and wrong types are
// ConfigErrors, so a typo never silently falls back to a default.

namespace pcn::io {

using Json = nlohmann::json;

class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    // Key handled elsewhere; accepted here without reading it.
    void skip(const std::string& key) { seen_.insert(key); }

    template <typename T>
    Section& get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return *this;
        const auto& v = j_.at(key);
        // nlohmann converts -1 and 2.5 to integers silently
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (!v.is_number_unsigned()) throw ConfigError(where(key) + " must be non-negative");
        }
        try {
            out = v.get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
        return *this;
    }

    // Field parsed from a string by `parse`.
    template <typename T, typename Parse>
    Section& get_enum(const std::string& key, T& out, Parse parse) {
        std::string s;
        get(key, s);
        if (j_.contains(key)) out = parse(s);
        return *this;
    }

    void section(const std::string& key, const std::function<void(Section&)>& fill) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        Section s(j_.at(key), where(key));
        fill(s);
        s.finish();
    }

    // Array of objects, each read by fill.
    void each(const std::string& key, const std::function<void(Section&)>& fill) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const auto& arr = j_.at(key);
        if (!arr.is_array()) throw ConfigError(where(key) + " must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            Section s(arr[i], where(key) + "[" + std::to_string(i) + "]");
            fill(s);
            s.finish();
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.contains(k)) throw ConfigError("unknown key " + where(k));
    }

private:
    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline Json read_json_file(const std::filesystem::path& path) { return parse_json(read_file(path), path.string()); }

// Validation failures inside a config surface as ConfigError as well.
template <typename F>
void validated(F&& check) {
    try {
        check();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

// --- simulator --------------------------------------------------------------

inline void read_amount(Section& s, AmountSpec& a) {
    s.get("median", a.median).get("mean", a.mean).get("min", a.min);
    s.get("whale_fraction", a.whale_fraction).get("whale_factor", a.whale_factor);
}

inline SimConfig base_scenario(const std::string& name, std::uint64_t seed) {
    if (name == "small_world") return small_world_scenario(seed);
    if (name == "deadlock") return deadlock_scenario(ControlMode::Share);
    if (name == "convergence") return convergence_scenario();
    if (name == "ccbt") return ccbt_scenario(seed);
    if (name == "choice") return choice_scenario(seed);
    throw ConfigError("unknown scenario '" + name + "'");
}

inline SimConfig sim_config_from_json(const Json& j) {
    Section root(j, "");
    std::string scenario;
    std::uint64_t seed = 1;
    root.get("scenario", scenario).get("seed", seed);
    SimConfig c = scenario.empty() ? SimConfig{} : base_scenario(scenario, seed);
    c.seed = seed;
    root.get_enum("control", c.control, parse_control);
    root.get("epoch", c.epoch).get("duration", c.duration).get("warmup", c.warmup).get("log_events", c.log_events);

    root.section("graph", [&](Section& s) {
        auto& g = c.graph;
        s.get_enum("kind", g.kind, parse_graph_kind);
        s.get("nodes", g.nodes).get("ring_degree", g.ring_degree).get("rewire_p", g.rewire_p);
        s.get("min_capacity", g.min_capacity).get("mean_capacity", g.mean_capacity);
        s.get("median_capacity", g.median_capacity);
        std::vector<std::string> roles;
        s.get("roles", roles);
        if (s.has("roles")) {
            g.roles.clear();
            for (const auto& r : roles) g.roles.push_back(parse_role(r));
        }
        if (s.has("channels")) g.channels.clear();
        s.each("channels", [&](Section& ch) {
            ChannelSpec spec;
            ch.get("a", spec.a).get("b", spec.b).get("balance_ab", spec.balance_ab).get("balance_ba", spec.balance_ba);
            g.channels.push_back(spec);
        });
        s.get("clients", g.clients).get("candidates", g.candidates).get("omega", g.omega).get("approx", g.approx);
        s.get("spoke_balance", g.spoke_balance).get("hub_balance", g.hub_balance);
        s.get("n_cc", g.n_cc).get("max_htlc", g.max_htlc);
    });

    root.section("routing", [&](Section& s) {
        auto& r = c.routing;
        s.get("kappa", r.prices.kappa).get("eta", r.prices.eta).get("t_fee", r.prices.t_fee);
        s.get("alpha", r.alpha).get("initial_rate", r.initial_rate).get("utility_floor", r.utility_floor);
        s.get("tau", r.tau).get("min_tu", r.min_tu).get("max_tu", r.max_tu).get("k", r.k);
        s.get_enum("path_kind", r.path_kind, parse_path_kind);
        s.get_enum("policy", r.policy, parse_queue_policy);
        s.get("delay_threshold", r.congestion.delay_threshold).get("beta", r.congestion.beta);
        s.get("gamma", r.congestion.gamma).get("queue_cap", r.congestion.queue_cap);
        s.get("initial_window", r.congestion.initial_window).get("process_rate", r.congestion.process_rate);
        s.get("hop_latency", r.hop_latency).get("initial_delta", r.initial_delta).get("pin_delta", r.pin_delta);
        s.get("delta_smoothing", r.delta_smoothing);
    });

    root.section("workload", [&](Section& s) {
        auto& w = c.workload;
        if (s.has("streams")) w.streams.clear();
        s.each("streams", [&](Section& st) {
            StreamSpec spec;
            st.get("source", spec.source).get("dest", spec.dest).get("rate", spec.rate);
            st.get("periodic", spec.periodic).get("phase", spec.phase);
            st.section("amount", [&](Section& a) { read_amount(a, spec.amount); });
            w.streams.push_back(spec);
        });
        s.get("random_pairs", w.random_pairs).get("pair_rate", w.pair_rate).get("circulation", w.circulation);
        s.get("deadline", w.deadline);
        s.section("amount", [&](Section& a) { read_amount(a, w.amount); });
    });

    root.section("processing", [&](Section& s) {
        auto& p = c.processing;
        s.get("enabled", p.enabled).get("batch_window", p.batch_window).get("service_time", p.service_time);
        s.get("contention", p.contention).get("coherence", p.coherence);
    });

    // Study settings are read by the CLI; accept them here so one file can
    // describe the run and the sweep around it.
    root.skip("study");
    root.finish();
    validated([&] { c.validate(); });
    return c;
}

struct StudySpec {
    int n_lo = 1;
    int n_hi = 10;
    std::vector<std::string> path_kinds{"EDW", "KSP"};
    std::vector<std::size_t> path_counts{5, 1};
    std::vector<std::string> policies{"LIFO", "FIFO"};
    bool cross = false;
    std::size_t threads = 0;
};

inline StudySpec study_from_json(const Json& j) {
    StudySpec s;
    if (!j.is_object() || !j.contains("study")) return s;
    Section sec(j.at("study"), "study");
    sec.get("n_lo", s.n_lo).get("n_hi", s.n_hi).get("path_kinds", s.path_kinds).get("path_counts", s.path_counts);
    sec.get("policies", s.policies).get("cross", s.cross).get("threads", s.threads);
    sec.finish();
    if (s.n_lo < 1 || s.n_hi < s.n_lo) throw ConfigError("study needs 1 <= n_lo <= n_hi");
    return s;
}

inline ChoiceGrid choice_grid(const StudySpec& s) {
    ChoiceGrid g;
    g.kinds.clear();
    g.policies.clear();
    for (const auto& k : s.path_kinds) g.kinds.push_back(parse_path_kind(k));
    g.counts = s.path_counts;
    for (const auto& p : s.policies) g.policies.push_back(parse_queue_policy(p));
    g.cross = s.cross;
    return g;
}

// --- allocation -------------------------------------------------------------

struct AllocationSpec {
    AllocationInstance instance;
    std::vector<double> omegas;  // sweep values; empty means a single solve
};

inline std::vector<double> flatten(const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols,
                                   const std::string& what) {
    if (m.size() != rows) throw ConfigError(what + " needs " + std::to_string(rows) + " rows");
    std::vector<double> out;
    for (const auto& r : m) {
        if (r.size() != cols) throw ConfigError(what + " needs " + std::to_string(cols) + " columns");
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

// Either explicit cost matrices (zeta, delta, eps) or a generated small-world
// universe whose costs follow hop distance.
inline AllocationSpec allocation_from_json(const Json& j) {
    Section root(j, "");
    AllocationSpec spec;
    root.get("omegas", spec.omegas);
    double omega = 1.0;
    bool unordered = false;
    root.get("omega", omega).get("unordered_pairs", unordered);
    if (root.has("zeta")) {
        std::vector<std::vector<double>> zeta, delta, eps;
        root.get("zeta", zeta).get("delta", delta).get("eps", eps);
        const std::size_t m = zeta.size();
        const std::size_t n = m > 0 ? zeta.front().size() : delta.size();
        auto& inst = spec.instance;
        for (std::size_t i = 0; i < m; ++i) inst.clients.push_back(node(i));
        for (std::size_t i = 0; i < n; ++i) inst.candidates.push_back(node(m + i));
        inst.zeta = flatten(zeta, m, n, "zeta");
        inst.delta = flatten(delta, n, n, "delta");
        inst.eps = flatten(eps, n, n, "eps");
    } else {
        std::size_t clients = 20, candidates = 8, ring_degree = 4;
        double rewire_p = 0.2;
        std::uint64_t seed = 1;
        HopCostRule rule;
        root.get("clients", clients).get("candidates", candidates).get("ring_degree", ring_degree);
        root.get("rewire_p", rewire_p).get("seed", seed);
        root.section("hop_costs", [&](Section& s) {
            s.get("zeta_per_hop", rule.zeta_per_hop).get("delta_per_hop", rule.delta_per_hop);
            s.get("eps_per_hop", rule.eps_per_hop);
        });
        validated([&] {
            require(clients >= 1 && candidates >= 1, "need at least one client and one candidate");
            const auto g = generate_small_world(clients + candidates, ring_degree, rewire_p, seed);
            std::vector<NodeId> cl, ca;
            for (std::size_t i = 0; i < clients + candidates; ++i) (i < candidates ? ca : cl).push_back(node(i));
            spec.instance = build_hop_instance(g, cl, ca, omega, rule);
        });
    }
    spec.instance.omega = omega;
    spec.instance.unordered_pairs = unordered;
    root.finish();
    validated([&] { spec.instance.validate(); });
    return spec;
}

// --- protocol ---------------------------------------------------------------

inline proto::MsgType parse_msg_type(const std::string& s) {
    for (auto t : proto::kMsgTypes)
        if (proto::to_string(t) == s) return t;
    throw ConfigError("unknown message type '" + s + "'");
}

inline proto::AdversaryKind parse_adversary_kind(const std::string& s) {
    if (s == "drop") return proto::AdversaryKind::Drop;
    if (s == "delay") return proto::AdversaryKind::Delay;
    if (s == "replay") return proto::AdversaryKind::Replay;
    throw ConfigError("unknown adversary action '" + s + "' (expected drop, delay or replay)");
}

struct ProtocolSpec {
    proto::ProtocolConfig config;
    std::size_t random_runs = 0;  // > 0: run this many random configs instead
    bool adversarial = true;
};

inline ProtocolSpec protocol_from_json(const Json& j) {
    Section root(j, "");
    ProtocolSpec spec;
    auto& c = spec.config;
    std::string scenario;
    root.get("scenario", scenario);
    if (scenario == "two_hub") c = proto::two_hub_scenario();
    else if (!scenario.empty()) throw ConfigError("unknown protocol scenario '" + scenario + "'");
    root.get("hubs", c.hubs).get("clients_per_hub", c.clients_per_hub).get("client_balance", c.client_balance);
    root.get("hub_balance", c.hub_balance).get("kmg_size", c.kmg_size).get("k_paths", c.k_paths);
    root.get("min_tu", c.min_tu).get("max_tu", c.max_tu).get("latency", c.latency).get("timeout", c.timeout);
    root.get("batch_window", c.batch_window).get("seed", c.seed);
    root.get("random_runs", spec.random_runs).get("adversarial", spec.adversarial);
    if (root.has("payments")) c.payments.clear();
    root.each("payments", [&](Section& s) {
        proto::PaymentSpec p;
        s.get("source", p.source).get("dest", p.dest).get("amount", p.amount).get("time", p.time);
        c.payments.push_back(p);
    });
    root.each("adversary", [&](Section& s) {
        proto::AdversaryAction a;
        s.get_enum("kind", a.kind, parse_adversary_kind);
        s.get_enum("type", a.type, parse_msg_type);
        s.get("nth", a.nth).get("dt", a.dt);
        c.adversary.push_back(a);
    });
    root.finish();
    validated([&] { c.validate(); });
    return spec;
}

}  // namespace pcn::io
