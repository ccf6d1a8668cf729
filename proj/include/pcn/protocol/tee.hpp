#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "pcn/protocol/crypto.hpp"
#include "pcn/topology/graph.hpp"

namespace pcn::proto {

// Enclave program: (inp, mem) -> (outp, mem').
struct Program {
    std::string name;
    std::function<std::pair<Bytes, Bytes>(const Bytes& inp, const Bytes& mem)> step;

    Digest hash() const { return sha256(to_bytes(name)); }
};

using EnclaveId = Digest;

struct Attestation {
    std::uint64_t idx = 0;
    EnclaveId eid{};
    Digest prog_hash{};
    Bytes outp;
    Signature sigma{};

    Bytes signed_payload() const { return Encoder().put(idx).put(eid).put(prog_hash).put(outp).bytes(); }
};

// One secure processor. Holds (mpk, msk); msk never leaves this object.
class AttestedExecution {
public:
    AttestedExecution(std::uint64_t sid, std::uint64_t key_nonce)
        : sid_(sid), keys_(mock_keygen(key_nonce, KeyScope::Processor)) {}

    void register_party(NodeId p, bool honest = true) { reg_[p] = honest; }
    bool registered(NodeId p) const { return reg_.contains(p); }

    PublicKey getpk() const { return keys_.pk; }

    EnclaveId install(NodeId party, std::uint64_t idx, Program prog) {
        const auto it = reg_.find(party);
        require(it != reg_.end(), "install from unregistered party");
        if (it->second) require(idx == sid_, "honest party installed with idx != sid");
        const EnclaveId eid = sha256(Encoder().put(keys_.pk.id).put(next_nonce_++).bytes());
        table_[{eid, party}] = Entry{idx, std::move(prog), {}};
        return eid;
    }

    std::pair<Bytes, Attestation> resume(NodeId party, const EnclaveId& eid, const Bytes& inp) {
        require(reg_.contains(party), "resume from unregistered party");
        const auto it = table_.find({eid, party});
        require(it != table_.end(), "resume on unknown enclave");
        auto& e = it->second;
        auto [outp, mem] = e.prog.step(inp, e.mem);
        e.mem = std::move(mem);
        Attestation a;
        a.idx = e.idx;
        a.eid = eid;
        a.prog_hash = e.prog.hash();
        a.outp = outp;
        a.sigma = mock_sign(keys_.sk, a.signed_payload());
        return {std::move(outp), std::move(a)};
    }

    std::uint64_t sid() const { return sid_; }

private:
    struct Entry {
        std::uint64_t idx;
        Program prog;
        Bytes mem;
    };
    std::uint64_t sid_;
    MockKeypair keys_;
    std::map<NodeId, bool> reg_;
    std::map<std::pair<EnclaveId, NodeId>, Entry> table_;
    std::uint64_t next_nonce_ = 0;
};

inline bool verify_attestation(const PublicKey& mpk, const Attestation& a) {
    return mock_verify(mpk, a.sigma, a.signed_payload());
}

// Verification proof pi = (b, sigma, sigma_ias).
struct IasProof {
    bool valid = false;
    Signature sigma{};
    Signature sigma_ias{};

    Bytes signed_payload() const { return Encoder().put(std::uint64_t{valid}).put(sigma).bytes(); }
};

// Always-available mock attestation service: checks sigma under mpk and
// co-signs the verdict.
class MockIas {
public:
    explicit MockIas(std::uint64_t key_nonce = 0x1a5) : keys_(mock_keygen(key_nonce, KeyScope::Processor)) {}

    PublicKey pk() const { return keys_.pk; }

    IasProof verify(const PublicKey& mpk, const Attestation& a) const {
        IasProof p;
        p.valid = verify_attestation(mpk, a);
        p.sigma = a.sigma;
        p.sigma_ias = mock_sign(keys_.sk, p.signed_payload());
        return p;
    }

    bool check(const IasProof& p) const { return mock_verify(keys_.pk, p.sigma_ias, p.signed_payload()); }

private:
    MockKeypair keys_;
};

}  // namespace pcn::proto
