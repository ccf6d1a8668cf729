#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "pcn/core/format.hpp"
#include "pcn/io/files.hpp"
#include "pcn/simulator/metrics.hpp"

namespace pcn {

inline std::string outcome_csv(const SimOutcome& o) {
    std::ostringstream s;
    s << "generated,completed,aborted,generated_value,completed_value,tsr,ntp,latency_mean,latency_p50,latency_p95,"
         "deadlock,fees,events,epochs\n";
    s << o.generated << ',' << o.completed << ',' << o.aborted << ',' << format_double(o.generated_value) << ','
      << format_double(o.completed_value) << ',' << format_double(o.tsr) << ',' << format_double(o.ntp) << ','
      << format_double(o.latency.mean) << ',' << format_double(o.latency.p50) << ',' << format_double(o.latency.p95)
      << ',' << (o.deadlock ? 1 : 0) << ',' << format_double(o.fees) << ',' << o.events << ',' << o.epochs << '\n';
    return s.str();
}

inline std::string trace_csv(const SimOutcome& o) {
    std::ostringstream s;
    s << "time,channel,lambda,mu_ab,mu_ba,xi_ab,xi_ba,rate_ab,rate_ba,arrival_ab,arrival_ba,delta,capacity,queue_ab,"
         "queue_ba,balance_ab,balance_ba\n";
    for (const auto& c : o.channel_trace) {
        s << format_double(c.time) << ',' << c.channel;
        for (double v : {c.lambda, c.mu_ab, c.mu_ba, c.xi_ab, c.xi_ba, c.rate_ab, c.rate_ba, c.arrival_ab,
                         c.arrival_ba, c.delta, c.capacity, c.queue_ab, c.queue_ba, c.balance_ab, c.balance_ba})
            s << ',' << format_double(v);
        s << '\n';
    }
    return s.str();
}

inline std::string path_trace_csv(const SimOutcome& o) {
    std::ostringstream s;
    s << "time,source,dest,path,rate,window,price,outstanding\n";
    for (const auto& p : o.path_trace)
        s << format_double(p.time) << ',' << index(p.source) << ',' << index(p.dest) << ',' << p.path << ','
          << format_double(p.rate) << ',' << format_double(p.window) << ',' << format_double(p.price) << ','
          << format_double(p.outstanding) << '\n';
    return s.str();
}

inline std::string transactions_csv(const SimOutcome& o) {
    std::ostringstream s;
    s << "tid,source,dest,amount,arrival,deadline,status,units,commit_time,ack_time,reason\n";
    for (const auto& t : o.transactions) {
        const auto& d = t.demand;
        s << d.tid << ',' << index(d.source) << ',' << index(d.dest) << ',' << format_double(d.amount) << ','
          << format_double(d.arrival) << ',' << format_double(d.deadline) << ',' << to_string(t.status) << ','
          << t.units << ',' << format_double(t.commit_time) << ',' << format_double(t.ack_time) << ',' << t.reason
          << '\n';
    }
    return s.str();
}

inline std::string events_log(const SimOutcome& o) {
    std::string s;
    for (const auto& line : o.event_log) {
        s += line;
        s += '\n';
    }
    return s;
}

// Two-column plot data with a one-line comment header naming the axes.
inline std::string plot_data(const std::string& x_label, const std::string& y_label,
                             const std::vector<std::pair<double, double>>& points) {
    std::string s = "# " + x_label + ' ' + y_label + '\n';
    for (const auto& [x, y] : points) s += format_double(x) + ' ' + format_double(y) + '\n';
    return s;
}

// Throughput of one payer/payee pair in consecutive windows of `width` seconds.
inline std::vector<std::pair<double, double>> throughput_series(const SimOutcome& o, NodeId s, NodeId e,
                                                                double horizon, double width = 1) {
    std::vector<std::pair<double, double>> pts;
    for (double t = 0; t + width <= horizon + 1e-9; t += width) pts.emplace_back(t + width, o.delivered_rate(s, e, t, t + width));
    return pts;
}

inline void export_outcome(const std::filesystem::path& dir, const SimOutcome& o) {
    write_file_atomic(dir / "outcome.csv", outcome_csv(o));
    write_file_atomic(dir / "trace.csv", trace_csv(o));
    write_file_atomic(dir / "paths.csv", path_trace_csv(o));
    write_file_atomic(dir / "transactions.csv", transactions_csv(o));
    write_file_atomic(dir / "events.log", events_log(o));
}

}  // namespace pcn
