// pcnctl: command-line front end for the toolkit.
//
// Exit codes: 0 ok, 2 config error, 3 infeasible, 4 invariant violation.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcn/allocation/solver.hpp"
#include "pcn/io/config.hpp"
#include "pcn/io/files.hpp"
#include "pcn/protocol/scenarios.hpp"
#include "pcn/simulator/engine.hpp"
#include "pcn/simulator/export.hpp"
#include "pcn/simulator/scenarios.hpp"
#include "pcn/simulator/studies.hpp"

namespace fs = std::filesystem;
using namespace pcn;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kInfeasible = 3, kInvariant = 4 };

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> control;
    bool approx = false;
    bool dry_run = false;
    bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_control = true) {
    cmd->add_option("--config", c.config, "JSON run config");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "override the config seed");
    if (with_control) cmd->add_option("--control", c.control, "price control: off or share")->check(CLI::IsMember({"off", "share"}));
    cmd->add_flag("--dry-run", c.dry_run, "validate the config and stop");
    cmd->add_flag("-v,--verbose", c.verbose, "print more detail");
}

io::Json load_or(const Common& c, io::Json fallback) {
    return c.config.empty() ? std::move(fallback) : io::read_json_file(c.config);
}

// Seed and control flags override the file.
SimConfig sim_config(const Common& c, io::Json fallback) {
    auto j = load_or(c, std::move(fallback));
    if (c.seed) j["seed"] = *c.seed;
    if (c.control) j["control"] = *c.control;
    return io::sim_config_from_json(j);
}

void write(const fs::path& dir, const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    std::cout << "wrote " << (dir / name).string() << '\n';
}

std::string metrics_line(const SimOutcome& o) {
    std::ostringstream s;
    s << "generated=" << o.generated << " completed=" << o.completed << " tsr=" << format_double(o.tsr)
      << " ntp=" << format_double(o.ntp) << " latency_mean=" << format_double(o.latency.mean)
      << " deadlock=" << (o.deadlock ? "yes" : "no");
    return s.str();
}

// ---- allocate -----------------------------------------------------------------

int cmd_allocate(const Common& c) {
    auto j = load_or(c, io::Json::object());
    if (c.seed) j["seed"] = *c.seed;
    const auto spec = io::allocation_from_json(j);
    if (c.dry_run) {
        std::cout << "config ok: " << spec.instance.M() << " clients, " << spec.instance.N() << " candidates\n";
        return kOk;
    }
    const auto choice = c.approx ? SolverChoice::Approx : SolverChoice::Exact;
    const std::uint64_t seed = c.seed.value_or(1);
    ExactOptions opt;
    if (spec.instance.N() > opt.max_candidates && !c.approx)
        throw Infeasible(std::to_string(spec.instance.N()) + " candidates exceed the exact solver limit of " +
                         std::to_string(opt.max_candidates) + "; rerun with --approx for double greedy");
    const fs::path out(c.out);
    if (!spec.omegas.empty()) {
        const auto rows = omega_sweep(spec.instance, spec.omegas, choice, seed, opt);
        std::ostringstream csv;
        write_sweep_csv(csv, rows);
        write(out, "omega_sweep.csv", csv.str());
        std::string dat = "# omega hub_count C_M C_S\n";
        for (const auto& r : rows)
            dat += format_double(r.omega) + ' ' + std::to_string(r.hub_count) + ' ' + format_double(r.management) + ' ' +
                   format_double(r.sync) + '\n';
        write(out, "omega_costs.dat", dat);
        for (const auto& r : rows)
            std::cout << "omega=" << format_double(r.omega) << " hubs=" << r.hub_count << " C_B=" << format_double(r.cost)
                      << '\n';
        return kOk;
    }
    const auto r = solve(spec.instance, choice, seed, opt);
    std::string hubs;
    for (auto n : r.x.members()) hubs += (hubs.empty() ? "" : " ") + std::to_string(index(spec.instance.candidates[n]));
    std::cout << "hubs: {" << hubs << "}\nC_M=" << format_double(r.management) << " C_S=" << format_double(r.sync)
              << " C_B=" << format_double(r.cost) << " solver=" << r.solver << '\n';
    std::string csv = "client,hub\n";
    for (std::size_t m = 0; m < r.y.clients(); ++m)
        csv += std::to_string(index(spec.instance.clients[m])) + ',' +
               std::to_string(index(spec.instance.candidates[static_cast<std::size_t>(r.y.hub_of[m])])) + '\n';
    csv += "# C_M=" + format_double(r.management) + " C_S=" + format_double(r.sync) + " C_B=" + format_double(r.cost) +
           " solver=" + r.solver + '\n';
    write(out, "allocation.csv", csv);
    return kOk;
}

// ---- route-sim ----------------------------------------------------------------

int cmd_route_sim(const Common& c) {
    io::Json fallback = {{"scenario", "small_world"}};
    auto cfg = sim_config(c, fallback);
    if (c.dry_run) {
        std::cout << "config ok\n";
        return kOk;
    }
    const auto o = run(cfg);
    std::cout << metrics_line(o) << '\n';
    export_outcome(c.out, o);
    std::vector<std::pair<double, double>> tsr_points;
    std::size_t gen = 0, done = 0;
    for (const auto& t : o.transactions) {
        ++gen;
        if (t.status == TxStatus::Completed) ++done;
        tsr_points.emplace_back(t.demand.arrival, static_cast<double>(done) / static_cast<double>(gen));
    }
    write(c.out, "tsr_over_time.dat", plot_data("time", "cumulative_tsr", tsr_points));
    return kOk;
}

// ---- deadlock-demo ----------------------------------------------------------------

int cmd_deadlock(const Common& c) {
    std::vector<ControlMode> modes = {ControlMode::Off, ControlMode::Share};
    if (c.control) modes = {parse_control(*c.control)};
    if (c.dry_run) {
        for (auto m : modes) deadlock_scenario(m).validate();
        std::cout << "config ok\n";
        return kOk;
    }
    const fs::path out(c.out);
    for (auto m : modes) {
        auto cfg = deadlock_scenario(m);
        if (c.seed) cfg.seed = *c.seed;
        const auto o = run(cfg);
        const auto name = std::string(to_string(m));
        std::vector<std::pair<double, double>> ab = throughput_series(o, kDeadlockA, kDeadlockB, cfg.duration, 2);
        const auto ba = throughput_series(o, kDeadlockB, kDeadlockA, cfg.duration, 2);
        std::string dat = "# time rate_ab rate_ba\n";
        for (std::size_t i = 0; i < ab.size(); ++i)
            dat += format_double(ab[i].first) + ' ' + format_double(ab[i].second) + ' ' + format_double(ba[i].second) + '\n';
        write(out, "deadlock_" + name + ".dat", dat);
        write(out / name, "outcome.csv", outcome_csv(o));
        std::cout << name << ": " << metrics_line(o) << " r_ab=" << format_double(o.delivered_rate(kDeadlockA, kDeadlockB, 30, cfg.duration))
                  << " r_ba=" << format_double(o.delivered_rate(kDeadlockB, kDeadlockA, 30, cfg.duration)) << '\n';
    }
    return kOk;
}

// ---- ccbt -------------------------------------------------------------------------

int cmd_ccbt(const Common& c) {
    auto j = load_or(c, io::Json{{"scenario", "ccbt"}});
    const auto study = io::study_from_json(j);
    if (c.seed) j["seed"] = *c.seed;
    if (c.control) j["control"] = *c.control;
    const auto cfg = io::sim_config_from_json(j);
    if (c.dry_run) {
        std::cout << "config ok\n";
        return kOk;
    }
    const auto rows = concurrent_channel_sweep(cfg, study.n_lo, study.n_hi);
    std::ostringstream csv;
    write_concurrency_csv(csv, rows);
    write(c.out, "concurrency.csv", csv.str());
    std::vector<std::pair<double, double>> pts;
    std::vector<double> ys;
    for (const auto& r : rows) {
        pts.emplace_back(r.n_cc, r.ntp);
        ys.push_back(r.ntp);
    }
    write(c.out, "ntp_vs_ncc.dat", plot_data("n_cc", "ntp", pts));
    std::cout << "unimodal=" << (is_unimodal(ys) ? "yes" : "no") << '\n';
    if (rows.size() >= 3) {
        const auto fit = fit_sweep(rows);
        const auto& p = fit.params;
        std::string f = "epsilon,sigma,varpi,rms,max_residual,argmax\n";
        f += format_double(p.epsilon) + ',' + format_double(p.sigma) + ',' + format_double(p.varpi) + ',' +
             format_double(fit.rms) + ',' + format_double(fit.max_residual) + ',' + std::to_string(ccbt_argmax(p)) + '\n';
        write(c.out, "ccbt_fit.csv", f);
        std::vector<std::pair<double, double>> model;
        for (int n = study.n_lo; n <= study.n_hi; ++n) model.emplace_back(n, ccbt_throughput(n, p));
        write(c.out, "ntp_fit.dat", plot_data("n_cc", "fitted_ntp", model));
        std::cout << "fit epsilon=" << format_double(p.epsilon) << " sigma=" << format_double(p.sigma)
                  << " varpi=" << format_double(p.varpi) << " rms=" << format_double(fit.rms) << '\n';
    }
    return kOk;
}

// ---- choice-study -----------------------------------------------------------------

int cmd_choice(const Common& c) {
    auto j = load_or(c, io::Json{{"scenario", "choice"}});
    const auto study = io::study_from_json(j);
    if (c.seed) j["seed"] = *c.seed;
    if (c.control) j["control"] = *c.control;
    const auto cfg = io::sim_config_from_json(j);
    const auto grid = io::choice_grid(study);
    if (c.dry_run) {
        std::cout << "config ok\n";
        return kOk;
    }
    const auto rows = routing_choice_study(cfg, grid);
    std::ostringstream csv, table;
    write_choice_csv(csv, rows);
    write_choice_table(table, rows, grid);
    write(c.out, "choice.csv", csv.str());
    write(c.out, "choice_table.csv", table.str());
    std::cout << table.str();
    return kOk;
}

// ---- sweep --------------------------------------------------------------------------

// Runs one simulator config per value of a dotted key, e.g.
//   sweep --param routing.eta --values 1,2,3
int cmd_sweep(const Common& c, const std::string& param, const std::vector<std::string>& values) {
    if (param.empty() || values.empty()) throw ConfigError("sweep needs --param and --values");
    auto base = load_or(c, io::Json{{"scenario", "small_world"}});
    if (c.seed) base["seed"] = *c.seed;
    if (c.control) base["control"] = *c.control;
    std::string pointer = "/" + param;
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    std::vector<SimConfig> cfgs;
    for (const auto& v : values) {
        auto j = base;
        j[io::Json::json_pointer(pointer)] = io::parse_json(v, "--values");
        cfgs.push_back(io::sim_config_from_json(j));
    }
    if (c.dry_run) {
        std::cout << "config ok: " << cfgs.size() << " runs\n";
        return kOk;
    }
    const auto outs = run_parallel(cfgs);
    std::string csv = "value,tsr,ntp,latency_mean,deadlock\n";
    std::vector<std::pair<double, double>> pts;
    bool numeric = true;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        csv += values[i] + ',' + format_double(outs[i].tsr) + ',' + format_double(outs[i].ntp) + ',' +
               format_double(outs[i].latency.mean) + ',' + (outs[i].deadlock ? "1" : "0") + '\n';
        try {
            pts.emplace_back(parse_double(values[i]), outs[i].tsr);
        } catch (const ConfigError&) {
            numeric = false;
        }
        std::cout << param << '=' << values[i] << ' ' << metrics_line(outs[i]) << '\n';
    }
    write(c.out, "sweep.csv", csv);
    if (numeric) write(c.out, "tsr_vs_param.dat", plot_data(param, "tsr", pts));
    return kOk;
}

// ---- protocol-sim -------------------------------------------------------------------

int cmd_protocol(const Common& c) {
    auto j = load_or(c, io::Json{{"scenario", "two_hub"}});
    if (c.seed) j["seed"] = *c.seed;
    const auto spec = io::protocol_from_json(j);
    if (c.dry_run) {
        std::cout << "config ok\n";
        return kOk;
    }
    if (spec.random_runs > 0) {
        std::string csv = "seed,payments,completed,attested,conservation_violations,wealth_mismatches,other\n";
        std::size_t bad = 0;
        for (std::uint64_t s = 0; s < spec.random_runs; ++s) {
            const auto seed = spec.config.seed + s;
            const auto o = proto::run_protocol(proto::random_protocol_config(seed, spec.adversarial));
            const auto a = proto::audit(o);
            bad += a.conservation_violations + a.wealth_mismatches + a.other_violations;
            csv += std::to_string(seed) + ',' + std::to_string(o.payments.size()) + ',' + std::to_string(a.completed) +
                   ',' + std::to_string(a.attestations_valid) + ',' + std::to_string(a.conservation_violations) + ',' +
                   std::to_string(a.wealth_mismatches) + ',' + std::to_string(a.other_violations) + '\n';
        }
        write(c.out, "protocol_runs.csv", csv);
        std::cout << spec.random_runs << " runs, " << bad << " violations\n";
        if (bad > 0) throw InvariantViolation("protocol runs reported violations");
        return kOk;
    }
    const auto o = proto::run_protocol(spec.config);
    write(c.out, "events.log", proto::protocol_trace(o));
    write(c.out, "outcome.csv", proto::protocol_csv(o));
    const auto a = proto::audit(o);
    std::cout << "payments=" << o.payments.size() << " completed=" << a.completed << " attested=" << a.attestations_valid
              << " dropped=" << o.dropped << " replayed=" << o.replayed << " rejected=" << o.rejected << '\n';
    if (c.verbose) std::cout << proto::protocol_trace(o);
    if (!o.violations.empty() || a.wealth_mismatches > 0) {
        for (const auto& v : o.violations) std::cerr << "violation: " << v << '\n';
        throw InvariantViolation("protocol run broke an invariant");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"payment channel network toolkit"};
    app.require_subcommand(1);
    Common common;
    std::string param;
    std::vector<std::string> values;

    auto* allocate = app.add_subcommand("allocate", "solve hub allocation (exact, or --approx for double greedy)");
    add_common(allocate, common, false);
    allocate->add_flag("--approx", common.approx, "use double greedy instead of branch and bound");
    auto* route = app.add_subcommand("route-sim", "run the routing simulator");
    add_common(route, common);
    auto* protocol = app.add_subcommand("protocol-sim", "run the mock payment protocol");
    add_common(protocol, common, false);
    auto* deadlock = app.add_subcommand("deadlock-demo", "three-node deadlock with price control off and on");
    add_common(deadlock, common);
    auto* ccbt = app.add_subcommand("ccbt", "concurrent channel sweep and throughput fit");
    add_common(ccbt, common);
    auto* choice = app.add_subcommand("choice-study", "compare path kinds, path counts and queue policies");
    add_common(choice, common);
    auto* sweep = app.add_subcommand("sweep", "run a simulator config over values of one parameter");
    add_common(sweep, common);
    sweep->add_option("--param", param, "dotted config key, e.g. routing.eta");
    sweep->add_option("--values", values, "comma-separated JSON values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*allocate) return cmd_allocate(common);
        if (*route) return cmd_route_sim(common);
        if (*protocol) return cmd_protocol(common);
        if (*deadlock) return cmd_deadlock(common);
        if (*ccbt) return cmd_ccbt(common);
        if (*choice) return cmd_choice(common);
        if (*sweep) return cmd_sweep(common, param, values);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kConfig;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kInvariant;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        // I/O and other runtime failures
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
