#pragma once

#include "sheafver/expr.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sheafver {

struct BudgetExceeded : Error {
    uint64_t required;
    explicit BudgetExceeded(const std::string& what, uint64_t req)
        : Error(what + " (required ~" + std::to_string(req) + " items)"), required(req) {}
};

enum class Semantics { Disj, Indep };

struct VarDecl {
    std::string name;
    std::string sort;
    bool operator==(const VarDecl&) const = default;
};

struct TransitionUpdate {
    enum class Kind { Set, Interval, Any };
    Kind kind = Kind::Set;
    ExprPtr e1;  // Set: value; Interval: lower bound
    ExprPtr e2;  // Interval: upper bound
};

class System;
using SystemPtr = std::shared_ptr<const System>;

// Local relation over the action's dependency variables. Pre/post states are
// value vectors in the canonical depends order (ascending system var index).
struct TransitionSpec {
    enum class Form { GuardUpdate, Table, Intersection };
    Form form = Form::GuardUpdate;

    // GuardUpdate
    ExprPtr guard;  // over unprimed depends; null = true
    std::vector<std::pair<std::string, TransitionUpdate>> updates;
    std::vector<int> update_slots;  // resolved local slots, finalize() fills
    ExprPtr post;  // over unprimed + primed depends; null = true

    // Table: explicit relation rows
    std::vector<std::pair<std::vector<Value>, std::vector<Value>>> rows;

    // Intersection: pairs whose restriction to every source lies in the
    // source action's relation (the colimit construction).
    struct Source {
        SystemPtr system;
        std::string action;
    };
    std::vector<Source> sources;
};

struct ActionDef {
    std::string name;
    std::vector<std::string> depends;
    TransitionSpec spec;
};

// Boolean equation lhs = rhs over the free boolean algebra on action names.
struct BoolEq {
    ExprPtr lhs;
    ExprPtr rhs;
};

using State = std::vector<Value>;
using ParallelAction = std::vector<uint8_t>;

class System {
public:
    std::string name;
    Vocabulary vocab;
    std::vector<VarDecl> vars;
    std::vector<ExprPtr> constraints;
    std::vector<ActionDef> actions;
    std::vector<BoolEq> action_constraints;
    Semantics semantics = Semantics::Disj;

    // Validates, canonicalizes depends order, binds expressions. Must be
    // called once after construction; accessors below assume it ran.
    void finalize();

    int var_index(const std::string& n) const;
    int action_index(const std::string& n) const;
    const Sort& var_sort(int v) const { return *var_sorts_.at(v); }
    const std::vector<int>& action_deps(int a) const { return action_dep_idx_.at(a); }
    bool finalized() const { return finalized_; }

    // Bound expression trees (slots resolved), index-aligned with the
    // declaration vectors above.
    const std::vector<ExprPtr>& bound_constraints() const { return bound_constraints_; }
    const std::vector<BoolEq>& bound_action_constraints() const { return bound_action_constraints_; }

    bool constraint_holds(int c, const State& s) const;
    bool all_constraints_hold(const State& s) const;
    int max_constrained_var() const { return max_constrained_var_; }
    const std::vector<std::vector<int>>& constraints_by_max_var() const { return constraints_by_max_var_; }

    // Local relation interface (over depends in canonical order).
    std::vector<std::vector<Value>> local_succ(int action, const std::vector<Value>& pre) const;
    bool local_rel_contains(int action, const std::vector<Value>& pre,
                            const std::vector<Value>& post) const;
    void for_each_local(int action, const std::function<void(const std::vector<Value>&)>& fn) const;
    uint64_t local_domain_size(int action) const;

    // Evaluates a bound expression against pre (and optionally post) value
    // arrays; boolean expressions yield 0/1.
    long long eval_bound(const Expr& e, const Value* pre, const Value* post) const;

private:
    struct OpEvalEntry {
        int arity = 0;
        Value base = 0;
        Value cval = 0;
        std::vector<Value> dense;  // unary ops
        const std::map<std::vector<Value>, Value>* table = nullptr;
    };

    bool finalized_ = false;
    std::vector<const Sort*> var_sorts_;
    std::vector<std::vector<int>> action_dep_idx_;
    std::vector<ExprPtr> bound_constraints_;
    std::vector<BoolEq> bound_action_constraints_;
    std::vector<TransitionSpec> bound_specs_;  // action-aligned, exprs bound to local slots
    std::vector<std::vector<std::vector<int>>> intersection_maps_;  // action -> source -> positions
    std::vector<OpEvalEntry> op_eval_;
    int max_constrained_var_ = -1;
    std::vector<std::vector<int>> constraints_by_max_var_;

    friend struct SystemFinalizer;
};

// Clones e and binds its unprimed variables to sys's variable slots; for use
// with count_states extras and constraint-subsheaf predicates.
ExprPtr bind_state_expr(const System& sys, const ExprPtr& e);
bool eval_bool_on_state(const System& sys, const ExprPtr& bound, const State& s);

SystemPtr finalize_system(System sys);

struct ValueVecHash {
    size_t operator()(const std::vector<Value>& v) const {
        size_t h = 1469598103934665603ull;
        for (Value x : v) {
            h ^= static_cast<size_t>(static_cast<uint32_t>(x));
            h *= 1099511628211ull;
        }
        return h;
    }
};

// Deterministic (lexicographic over var order, then carrier order) state set.
struct StateSpace {
    std::vector<State> states;
    std::unordered_map<State, uint32_t, ValueVecHash> index;

    uint32_t rank(const State& s) const;
    std::optional<uint32_t> try_rank(const State& s) const;
    size_t size() const { return states.size(); }
};

StateSpace enumerate_states(const System& sys, uint64_t budget = 8'000'000);

// Exact |St(S)| via constraint-pruned DFS; unconstrained suffix variables are
// multiplied out rather than visited.
uint64_t count_states(const System& sys, const std::vector<ExprPtr>& extra_bound = {});

// Visits states in lexicographic order until fn returns false or the visit
// budget is hit; returns false when aborted early.
bool for_each_state(const System& sys, const std::function<bool(const State&)>& fn,
                    uint64_t max_visits = UINT64_MAX);

// Does some state extend the given partial assignment (var index -> value)?
bool extension_exists(const System& sys, const std::vector<std::pair<int, Value>>& fixed);

std::vector<ParallelAction> enumerate_admissible(const System& sys);
bool is_admissible(const System& sys, const ParallelAction& f);
int eval_action_expr(const ExprPtr& e, const ParallelAction& f);

// Tr_S(a): global successor states under one action (frame outside depends).
std::vector<State> action_successors(const System& sys, const State& s, int action);
bool tr_contains(const System& sys, int action, const State& s, const State& t);

// Memo for local successor sets; purely a cache over System::local_succ.
class TransitionMemo {
public:
    explicit TransitionMemo(const System& sys)
        : sys_(&sys), memo_(sys.actions.size()) {}
    const std::vector<std::vector<Value>>& local_succ(int action, const std::vector<Value>& pre);

private:
    const System* sys_;
    std::vector<std::map<std::vector<Value>, std::vector<std::vector<Value>>>> memo_;
};

// (Disj) semantics.
std::vector<State> transition_disj(const System& sys, const ParallelAction& f, const State& s,
                                   TransitionMemo* memo = nullptr);
bool disj_applicable(const System& sys, const ParallelAction& f, const State& s);

// (Indep) semantics. Violations of order-independence are findings.
struct IndepOrderViolation {
    std::vector<int> order_a, order_b;  // action indices (representatives)
    State start;
    std::string detail;
};

struct IndepResult {
    std::vector<State> successors;
    std::optional<IndepOrderViolation> violation;
};

IndepResult transition_indep(const System& sys, const ParallelAction& f, const State& s);

// Dispatch on the system's semantics flag.
std::vector<State> transition(const System& sys, const ParallelAction& f, const State& s,
                              TransitionMemo* memo = nullptr);

struct IndepReport {
    struct SubsetViolation {
        ParallelAction f;
        ParallelAction subset;
    };
    std::vector<SubsetViolation> subset_violations;   // (Indep)(i)
    std::vector<IndepOrderViolation> order_violations;  // (Indep)(ii)
    uint64_t states_checked = 0;
    bool complete = true;
    bool ok() const { return subset_violations.empty() && order_violations.empty(); }
};

IndepReport check_indep(const System& sys, uint64_t state_budget = 200'000);

// Representatives of f^-1(1) after collapsing actions equated in C
// (lexicographically least name represents each class).
std::vector<int> indep_representatives(const System& sys, const ParallelAction& f);

std::string state_to_string(const System& sys, const State& s);
std::string pa_to_string(const System& sys, const ParallelAction& f);

}  // namespace sheafver
