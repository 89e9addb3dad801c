#pragma once

#include "sheafver/presheaf.hpp"
#include "sheafver/site.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sheafver {

// Sorted first-order language over st / pa / b / t with the application,
// projection and transition symbols.
enum class LSort { St, Pa, B, T, StPa };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

enum class TermKind { Var, Appl, P1, P2, Zero, Const };

struct Term {
    TermKind kind;
    LSort sort;
    std::string name;  // Var / Const
    std::vector<TermPtr> args;
};

TermPtr tvar(const std::string& n, LSort s);
TermPtr tappl(TermPtr h, TermPtr t);
TermPtr tp1(TermPtr sp);
TermPtr tp2(TermPtr sp);
TermPtr ts(TermPtr h, TermPtr t);  // p1(appl(h,t))
TermPtr tzero();
TermPtr tconst(const std::string& n);  // st constant (s0, sf, ...)

enum class FKind { True, Eq, TimeLe, Tr, Pred, And, Or, Not, Implies, Exists, Forall };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FKind kind;
    TermPtr a, b, c;           // Eq/TimeLe: a,b; Tr: a=pa, b=st, c=st
    std::string pred;          // Pred
    std::vector<TermPtr> args;
    FormulaPtr l, r;           // And/Or/Implies; Not/quantifiers use l
    std::string var;           // quantifiers
    LSort vsort = LSort::T;
};

FormulaPtr ftrue();
FormulaPtr feq(TermPtr a, TermPtr b);
FormulaPtr ftimele(TermPtr a, TermPtr b);
FormulaPtr ftr(TermPtr f, TermPtr s1, TermPtr s2);
FormulaPtr fpred(const std::string& p, std::vector<TermPtr> args);
FormulaPtr fand(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr fnot(FormulaPtr a);
FormulaPtr fimplies(FormulaPtr a, FormulaPtr b);
FormulaPtr fexists(const std::string& v, LSort s, FormulaPtr body);
FormulaPtr fforall(const std::string& v, LSort s, FormulaPtr body);

std::string formula_to_string(const FormulaPtr& f);

// An axiom: universally quantified implication between geometric bodies.
struct Axiom {
    std::string name;
    std::vector<std::pair<std::string, LSort>> prefix;
    FormulaPtr lhs;  // antecedent (True when absent)
    FormulaPtr rhs;
};

std::string axiom_to_string(const Axiom& ax);

// Predicate and constant definitions. State predicates are constraint sets
// per system; `minimal_of` builds the derived (b,t) predicate holding at the
// first moment its base predicate holds along the behavior.
struct PredEnv {
    struct StatePred {
        std::map<std::string, std::vector<ExprPtr>> per_system;  // keyed by system name
        // Fallback for systems without an entry: the union of all entries.
        std::vector<ExprPtr> for_system(const System& sys) const;
    };
    std::map<std::string, StatePred> state_preds;
    std::map<std::string, std::string> minimal_of;  // pred name -> base state pred
    std::map<std::string, StatePred> constants;     // st constants: unique-state sets
};

// Set interpretation of the language over one system at a bounded horizon.
struct Interp {
    const System* sys = nullptr;
    int horizon = 0;
    std::shared_ptr<StateSpace> states;
    std::vector<ParallelAction> pas;
    std::vector<BehaviorSeq> behaviors;  // materialized on demand
    bool behaviors_ready = false;
    uint64_t behavior_count = 0;
    std::map<std::string, std::vector<char>> pred_bitmap;  // per state rank
    std::map<std::string, uint32_t> const_rank;

    std::string behavior_to_string(uint32_t idx) const;
};

Interp make_interp(const System& sys, int horizon, const PredEnv& env,
                   uint64_t state_budget = 8'000'000, uint64_t behavior_budget = 4'000'000);

struct Classification {
    enum class Verdict { Geometric, Cartesian, Neither };
    Verdict verdict = Verdict::Neither;
    bool shape_geometric = false;    // connective shape only
    bool shape_cartesian = false;    // no disjunction
    bool uniqueness_certified = false;
    std::string detail;              // which existential failed, or budget note
};

// Shape check plus semantic uniqueness certification of every existential
// over the supplied interpretations.
Classification classify(const Axiom& ax, const std::vector<const Interp*>& interps,
                        const PredEnv& env);

struct EvalResult {
    bool holds = false;
    bool infeasible = false;  // domain too large for the sweep
    std::string counterexample;
    std::string note;  // e.g. which evaluation strategy ran
};

EvalResult eval_axiom(const Axiom& ax, const Interp& interp, const PredEnv& env);

struct Verdict {
    Classification cls;
    struct Component {
        std::string system;
        EvalResult result;
    };
    std::vector<Component> components;
    bool all_components_pass = false;
    bool inferred_global = false;
    EvalResult oracle;
    bool soundness_alarm = false;   // must never fire
    bool reflection_recorded = false;
};

// The modular driver: classify, evaluate per component, infer globally for
// cartesian axioms, and always cross-check against the colimit oracle.
Verdict modular_verify(const Site& site, const System& colim, const Axiom& ax, int horizon,
                       const PredEnv& env, uint64_t state_budget = 8'000'000,
                       uint64_t behavior_budget = 4'000'000);

// ---- builtin schemas (safety / liveness / precedence shapes) ----

Axiom schema_safety(const std::string& p, const std::string& q);
Axiom schema_partial_correctness(const std::string& p, const std::string& fin,
                                 const std::string& q);
Axiom schema_global_invariance(const std::string& p, const std::string& q);
Axiom schema_total_correctness(const std::string& p, const std::string& fin,
                               const std::string& q);
Axiom schema_accessibility(const std::string& s0, const std::string& sf);
Axiom schema_precedence(const std::string& p, const std::string& a, const std::string& q);

// The three bounded-liveness axioms over a CanMove-style base predicate.
std::vector<Axiom> liveness_axioms(const std::string& safe_update_pred,
                                   const std::string& can_move_pred,
                                   const std::string& minimal_pred);

}  // namespace sheafver
