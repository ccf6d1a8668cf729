#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pcn/core/format.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn {

// Line-oriented graph format:
//   node <id> <client|candidate|hub>
//   chan <a> <b> <balance_ab> <balance_ba>
// '#' starts a comment. Node ids must be dense, 0..n-1, in any order.
inline void write_graph(std::ostream& os, const PcnGraph& g) {
    for (std::size_t i = 0; i < g.node_count(); ++i)
        os << "node " << i << ' ' << to_string(g.role(node(i))) << '\n';
    for (const auto& c : g.channels())
        os << "chan " << index(c.a) << ' ' << index(c.b) << ' ' << format_double(c.balance[0]) << ' '
           << format_double(c.balance[1]) << '\n';
}

inline PcnGraph read_graph(std::istream& is) {
    struct ChanLine {
        std::size_t a, b;
        double ab, ba;
    };
    std::vector<std::pair<std::size_t, NodeRole>> nodes;
    std::vector<ChanLine> chans;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        std::vector<std::string> f;
        for (std::string tok; ls >> tok;) f.push_back(tok);
        const auto where = " at line " + std::to_string(lineno);
        if (kind == "node") {
            if (f.size() != 2) throw ConfigError("node needs <id> <role>" + where);
            nodes.emplace_back(parse_int<std::size_t>(f[0]), parse_role(f[1]));
        } else if (kind == "chan") {
            if (f.size() != 4) throw ConfigError("chan needs <a> <b> <balance_ab> <balance_ba>" + where);
            chans.push_back({parse_int<std::size_t>(f[0]), parse_int<std::size_t>(f[1]), parse_double(f[2]),
                             parse_double(f[3])});
        } else {
            throw ConfigError("unknown record '" + kind + "'" + where);
        }
    }
    std::vector<int> seen(nodes.size(), 0);
    PcnGraph g(nodes.size());
    for (auto [id, role] : nodes) {
        if (id >= nodes.size() || seen[id]++) throw ConfigError("node ids must be dense and unique");
        g.set_role(node(id), role);
    }
    int parallel = 1;
    for (const auto& c : chans) {
        if (c.a >= nodes.size() || c.b >= nodes.size()) throw ConfigError("chan references unknown node");
        parallel = std::max<int>(parallel, static_cast<int>(g.channels_between(node(c.a), node(c.b)).size()) + 1);
        g.set_max_parallel(parallel);
        try {
            g.add_channel(node(c.a), node(c.b), c.ab, c.ba);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    return g;
}

}  // namespace pcn
