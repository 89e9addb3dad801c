#pragma once

#include "sheafver/category.hpp"
#include "sheafver/system.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sheafver {

struct SiteError : Error {
    std::string condition;  // "(i)", "(ii)", "(iii)", "order"
    SiteError(std::string cond, const std::string& msg)
        : Error("site condition " + cond + " violated: " + msg), condition(std::move(cond)) {}
};

struct Open {
    uint32_t mask = 0;
    std::vector<int> members;  // ascending member indices
};

struct Cover {
    int open = -1;
    std::vector<int> parts;  // ascending open indices, nonempty opens
    bool canonical_basis = false;
};

class Site {
public:
    std::vector<SystemPtr> members;
    SystemPtr ambient;
    Semantics semantics = Semantics::Disj;

    std::vector<std::vector<bool>> leq;              // leq[i][j]: member i included in member j
    std::vector<InclusionWitness> ambient_witness;   // per member, vs the ambient system
    std::vector<Open> opens;                         // all down-closed subsets
    std::vector<int> basis_open;                     // per member: index of its principal down-set
    int empty_open = -1;
    int full_open = -1;

    int member_index(const std::string& name) const;
    int open_index(uint32_t mask) const;
    bool is_down_closed(uint32_t mask) const;
    std::string open_name(int open_idx) const;
    int open_intersection(int a, int b) const;
    int open_union(int a, int b) const;
    bool open_subset(int a, int b) const;  // opens[a] subset of opens[b]

    // Connected-component ids (per position in opens[u].members) under the
    // comparability relation restricted to the open.
    std::vector<int> components(int open_idx) const;
};

// Verifies conditions (i)-(iii) and builds the Alexandroff topology. With
// enforce=false the structure is built without rejecting violations (test
// scaffolding for counterexample spaces).
Site build_site(std::vector<SystemPtr> members, SystemPtr ambient, Semantics semantics,
                uint64_t budget = 50'000'000, bool enforce = true);

// All covers of the open by nonempty opens (sites with more than member_cap
// members fall back to just the canonical basis cover).
std::vector<Cover> all_covers(const Site& site, int open_idx, size_t member_cap = 8);

Cover canonical_basis_cover(const Site& site, int open_idx);

// The principal down-set of a member: its least open neighborhood.
int min_neighborhood(const Site& site, int member);

}  // namespace sheafver
