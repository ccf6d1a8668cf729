#pragma once

#include <cstddef>
#include <vector>

namespace pcn {

// x: which candidates (by position in the instance's candidate list) run as hubs.
struct DeploymentPlan {
    std::vector<bool> deployed;

    static DeploymentPlan none(std::size_t candidates) { return {std::vector<bool>(candidates, false)}; }
    static DeploymentPlan all(std::size_t candidates) { return {std::vector<bool>(candidates, true)}; }

    std::size_t size() const { return deployed.size(); }
    bool operator[](std::size_t n) const { return deployed[n]; }
    std::size_t count() const {
        std::size_t k = 0;
        for (bool b : deployed) k += b;
        return k;
    }
    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < deployed.size(); ++i)
            if (deployed[i]) out.push_back(i);
        return out;
    }
    friend bool operator==(const DeploymentPlan&, const DeploymentPlan&) = default;
};

// y: client position -> candidate position. Encoding it as an index makes
// "exactly one hub per client" hold by construction; kUnassigned marks a hole.
struct AssignmentPlan {
    static constexpr int kUnassigned = -1;
    std::vector<int> hub_of;

    bool y(std::size_t m, std::size_t n) const { return hub_of[m] == static_cast<int>(n); }
    std::size_t clients() const { return hub_of.size(); }
    friend bool operator==(const AssignmentPlan&, const AssignmentPlan&) = default;
};

}  // namespace pcn
