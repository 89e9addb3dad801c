#pragma once

#include "sheafver/site.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sheafver {

// A section of a component-wise functor over an open: one local element index
// per member of the open, in ascending member order.
using SectionTuple = std::vector<uint32_t>;

// Component-wise presheaf: per-member local element sets plus restriction
// maps along every inclusion. Section sets over opens are derived, counted
// exactly, and only materialized on demand.
class TupleTable {
public:
    const Site* site = nullptr;
    std::string functor_name;
    std::vector<uint64_t> local_count;                            // per member
    std::map<std::pair<int, int>, std::vector<uint32_t>> rmap;    // (sub,sup) -> local map
    std::function<std::string(int member, uint32_t idx)> show;

    uint32_t restrict_local(int sub, int sup, uint32_t idx) const;

    // All inclusion pairs (sub,sup), sub != sup, inside the open.
    std::vector<std::pair<int, int>> pairs_in(int open_idx) const;

    uint64_t count_compatible(const std::vector<int>& mem,
                              const std::vector<std::pair<int, int>>& pairs) const;
    bool for_each_compatible(const std::vector<int>& mem,
                             const std::vector<std::pair<int, int>>& pairs,
                             const std::function<bool(const SectionTuple&)>& fn,
                             uint64_t budget) const;

    uint64_t sections_count(int open_idx) const;
    bool for_each_section(int open_idx, const std::function<bool(const SectionTuple&)>& fn,
                          uint64_t budget) const;
    std::vector<SectionTuple> materialize(int open_idx, uint64_t budget) const;
    SectionTuple restrict_section(int open_sup, const SectionTuple& s, int open_sub) const;
    bool is_section(int open_idx, const SectionTuple& s) const;
    std::string section_label(int open_idx, const SectionTuple& s) const;

    // Restriction maps compose and preserve identities.
    struct FunctorialityReport {
        bool ok = true;
        std::string detail;
    };
    FunctorialityReport check_functorial() const;
};

// Arbitrary finite presheaf given extensionally (general machinery; also the
// target of TupleTable::to_explicit).
struct ExplicitTable {
    const Site* site = nullptr;
    std::string functor_name;
    std::vector<std::vector<std::string>> labels;                // per open
    std::map<std::pair<int, int>, std::vector<uint32_t>> rho;    // (sub_open, sup_open)

    size_t count(int open_idx) const { return labels[open_idx].size(); }
    uint32_t restrict_sec(int sub_open, int sup_open, uint32_t s) const;
    bool check_functorial(std::string* detail = nullptr) const;
};

ExplicitTable to_explicit(const TupleTable& t, uint64_t budget);

struct GluingFinding {
    int open = -1;
    std::vector<int> cover_parts;
    bool existence_failed = false;
    bool uniqueness_failed = false;
    uint64_t families = 0;
    uint64_t sections = 0;
    std::string witness;
};

struct GluingReport {
    std::vector<GluingFinding> failures;
    uint64_t covers_checked = 0;
    std::string note;
    bool ok() const { return failures.empty(); }
};

GluingReport check_sheaf(const TupleTable& t, uint64_t budget = 50'000'000);
GluingReport check_sheaf(const ExplicitTable& t, uint64_t budget = 1'000'000);

struct StalkReport {
    int member = -1;
    uint64_t stalk_size = 0;
    uint64_t local_size = 0;
    bool bijective = false;
    uint64_t elements_verified = 0;
    std::string witness;
};

// The stalk at a member is the section set of its minimal open neighborhood;
// verified element-wise against the member's local set.
StalkReport stalk_check(const TupleTable& t, int member, uint64_t budget = 50'000'000);

// ---- concrete functor tables ----

struct StTable {
    TupleTable table;
    std::vector<std::shared_ptr<StateSpace>> spaces;  // per member
};

struct PaTable {
    TupleTable table;
    std::vector<std::vector<ParallelAction>> pas;  // per member, lexicographic
    std::vector<std::map<ParallelAction, uint32_t>> index;
};

struct TrTriple {
    uint32_t f = 0, s = 0, t = 0;
    auto operator<=>(const TrTriple&) const = default;
};

struct TrTable {
    TupleTable table;
    StTable st;
    PaTable pa;
    std::vector<std::vector<TrTriple>> triples;  // per member
    std::vector<std::map<TrTriple, uint32_t>> index;
};

// One behavior step per time point: (state rank, parallel action rank).
using BehaviorSeq = std::vector<std::pair<uint32_t, uint32_t>>;

struct BTable {
    TupleTable table;
    int horizon = 0;
    StTable st;
    PaTable pa;
    std::vector<std::vector<BehaviorSeq>> behaviors;  // per member
    std::vector<std::map<BehaviorSeq, uint32_t>> index;
};

struct NnoTable {
    TupleTable table;
    int horizon = 0;
};

StTable materialize_St(const Site& site, uint64_t budget = 8'000'000);
PaTable materialize_Pa(const Site& site);
TrTable materialize_Tr(const Site& site, uint64_t budget = 8'000'000);
BTable materialize_B(const Site& site, int horizon, uint64_t budget = 8'000'000);
// Extra constraint generators per member (unbound expressions).
StTable materialize_constraint_subsheaf(const Site& site,
                                        const std::vector<std::vector<ExprPtr>>& extras,
                                        const std::string& name, uint64_t budget = 8'000'000);
NnoTable materialize_nno(const Site& site, int horizon);

// Exact |B_H(sys)| by dynamic programming over the state space.
uint64_t count_behaviors(const System& sys, const StateSpace& space,
                         const std::vector<ParallelAction>& pas, int horizon);

// Natural-number object arrows: the zero section and the (truncation-partial)
// successor on sections over an open.
SectionTuple nno_zero(const NnoTable& t, int open_idx);
std::optional<SectionTuple> nno_succ(const NnoTable& t, int open_idx, const SectionTuple& s);

// a_U(h, (n_i)) = per-member (state, action) of the member behavior at the
// member clock. Returns (state tuple, action tuple) over the open.
std::pair<SectionTuple, SectionTuple> eval_appl(const BTable& b, int open_idx,
                                                const SectionTuple& h,
                                                const SectionTuple& clocks);

struct NaturalityReport {
    bool ok = true;
    uint64_t squares_checked = 0;
    std::string detail;
};

NaturalityReport check_appl_naturality(const BTable& b, const NnoTable& n, uint64_t budget = 200'000);

struct GlobalReport {
    uint64_t sections = 0;
    uint64_t target_count = 0;
    bool counts_equal = false;
    bool bijective = false;         // element-wise verification outcome
    uint64_t elements_verified = 0;
    bool element_checked = false;   // full element sweep completed
    std::string witness;            // a glued element missing on one side, if any
};

// Glue sections of the full open into elements of the target system and
// verify the bijection of the corresponding theorem. The target is normally
// the family colimit; passing a different system (the anomaly check) makes
// the verification report the failure witness instead.
GlobalReport st_global_check(const StTable& t, const System& target, uint64_t budget = 50'000'000);
GlobalReport pa_global_check(const PaTable& t, const System& target);
GlobalReport tr_global_check(const TrTable& t, const System& target, uint64_t budget = 50'000'000);
GlobalReport b_global_check(const BTable& t, const System& target, uint64_t budget = 50'000'000);
GlobalReport safestate_global_check(const StTable& t, const System& target,
                                    const std::vector<ExprPtr>& target_extras,
                                    uint64_t budget = 50'000'000);
GlobalReport nno_global_check(const NnoTable& t);

// Builds the section tuple of the full open that restricts a full assignment
// of the target system, when every component is a member state.
std::optional<SectionTuple> st_section_of_assignment(const StTable& t, const System& target,
                                                     const State& s);

}  // namespace sheafver
