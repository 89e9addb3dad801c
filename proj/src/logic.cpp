#include "sheafver/logic.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace sheafver {

namespace {

TermPtr mkterm(TermKind k, LSort s) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->sort = s;
    return t;
}

FormulaPtr mkf(FKind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

}  // namespace

TermPtr tvar(const std::string& n, LSort s) {
    auto t = mkterm(TermKind::Var, s);
    const_cast<Term*>(t.get())->name = n;
    return t;
}

TermPtr tappl(TermPtr h, TermPtr t) {
    auto x = mkterm(TermKind::Appl, LSort::StPa);
    const_cast<Term*>(x.get())->args = {std::move(h), std::move(t)};
    return x;
}

TermPtr tp1(TermPtr sp) {
    auto x = mkterm(TermKind::P1, LSort::St);
    const_cast<Term*>(x.get())->args = {std::move(sp)};
    return x;
}

TermPtr tp2(TermPtr sp) {
    auto x = mkterm(TermKind::P2, LSort::Pa);
    const_cast<Term*>(x.get())->args = {std::move(sp)};
    return x;
}

TermPtr ts(TermPtr h, TermPtr t) { return tp1(tappl(std::move(h), std::move(t))); }

TermPtr tzero() { return mkterm(TermKind::Zero, LSort::T); }

TermPtr tconst(const std::string& n) {
    auto t = mkterm(TermKind::Const, LSort::St);
    const_cast<Term*>(t.get())->name = n;
    return t;
}

FormulaPtr ftrue() { return mkf(FKind::True); }

FormulaPtr feq(TermPtr a, TermPtr b) {
    auto f = mkf(FKind::Eq);
    auto* m = const_cast<Formula*>(f.get());
    m->a = std::move(a);
    m->b = std::move(b);
    return f;
}

FormulaPtr ftimele(TermPtr a, TermPtr b) {
    auto f = mkf(FKind::TimeLe);
    auto* m = const_cast<Formula*>(f.get());
    m->a = std::move(a);
    m->b = std::move(b);
    return f;
}

FormulaPtr ftr(TermPtr fa, TermPtr s1, TermPtr s2) {
    auto f = mkf(FKind::Tr);
    auto* m = const_cast<Formula*>(f.get());
    m->a = std::move(fa);
    m->b = std::move(s1);
    m->c = std::move(s2);
    return f;
}

FormulaPtr fpred(const std::string& p, std::vector<TermPtr> args) {
    auto f = mkf(FKind::Pred);
    auto* m = const_cast<Formula*>(f.get());
    m->pred = p;
    m->args = std::move(args);
    return f;
}

FormulaPtr fand(FormulaPtr a, FormulaPtr b) {
    auto f = mkf(FKind::And);
    auto* m = const_cast<Formula*>(f.get());
    m->l = std::move(a);
    m->r = std::move(b);
    return f;
}

FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    auto f = mkf(FKind::Or);
    auto* m = const_cast<Formula*>(f.get());
    m->l = std::move(a);
    m->r = std::move(b);
    return f;
}

FormulaPtr fnot(FormulaPtr a) {
    auto f = mkf(FKind::Not);
    const_cast<Formula*>(f.get())->l = std::move(a);
    return f;
}

FormulaPtr fimplies(FormulaPtr a, FormulaPtr b) {
    auto f = mkf(FKind::Implies);
    auto* m = const_cast<Formula*>(f.get());
    m->l = std::move(a);
    m->r = std::move(b);
    return f;
}

FormulaPtr fexists(const std::string& v, LSort s, FormulaPtr body) {
    auto f = mkf(FKind::Exists);
    auto* m = const_cast<Formula*>(f.get());
    m->var = v;
    m->vsort = s;
    m->l = std::move(body);
    return f;
}

FormulaPtr fforall(const std::string& v, LSort s, FormulaPtr body) {
    auto f = mkf(FKind::Forall);
    auto* m = const_cast<Formula*>(f.get());
    m->var = v;
    m->vsort = s;
    m->l = std::move(body);
    return f;
}

namespace {

const char* sort_name(LSort s) {
    switch (s) {
        case LSort::St: return "st";
        case LSort::Pa: return "pa";
        case LSort::B: return "b";
        case LSort::T: return "t";
        case LSort::StPa: return "st*pa";
    }
    return "?";
}

std::string term_to_string(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Var: return t->name;
        case TermKind::Const: return t->name;
        case TermKind::Zero: return "0";
        case TermKind::Appl:
            return "appl(" + term_to_string(t->args[0]) + "," + term_to_string(t->args[1]) + ")";
        case TermKind::P1: {
            // Render s(h,t) compactly.
            const Term& in = *t->args[0];
            if (in.kind == TermKind::Appl)
                return "s(" + term_to_string(in.args[0]) + "," + term_to_string(in.args[1]) + ")";
            return "p1(" + term_to_string(t->args[0]) + ")";
        }
        case TermKind::P2: return "p2(" + term_to_string(t->args[0]) + ")";
    }
    return "?";
}

}  // namespace

std::string formula_to_string(const FormulaPtr& f) {
    switch (f->kind) {
        case FKind::True: return "true";
        case FKind::Eq: return term_to_string(f->a) + " = " + term_to_string(f->b);
        case FKind::TimeLe: return term_to_string(f->a) + " <= " + term_to_string(f->b);
        case FKind::Tr:
            return "tr(" + term_to_string(f->a) + "," + term_to_string(f->b) + "," +
                   term_to_string(f->c) + ")";
        case FKind::Pred: {
            std::string s = f->pred + "(";
            for (size_t i = 0; i < f->args.size(); ++i) {
                if (i) s += ",";
                s += term_to_string(f->args[i]);
            }
            return s + ")";
        }
        case FKind::And: return "(" + formula_to_string(f->l) + " & " + formula_to_string(f->r) + ")";
        case FKind::Or: return "(" + formula_to_string(f->l) + " | " + formula_to_string(f->r) + ")";
        case FKind::Not: return "!" + formula_to_string(f->l);
        case FKind::Implies:
            return "(" + formula_to_string(f->l) + " => " + formula_to_string(f->r) + ")";
        case FKind::Exists:
            return "exists " + f->var + ":" + sort_name(f->vsort) + " " + formula_to_string(f->l);
        case FKind::Forall:
            return "forall " + f->var + ":" + sort_name(f->vsort) + " " + formula_to_string(f->l);
    }
    return "?";
}

std::string axiom_to_string(const Axiom& ax) {
    std::ostringstream os;
    for (const auto& [v, s] : ax.prefix) os << "forall " << v << ":" << sort_name(s) << " ";
    os << "(" << formula_to_string(ax.lhs) << " => " << formula_to_string(ax.rhs) << ")";
    return os.str();
}

std::vector<ExprPtr> PredEnv::StatePred::for_system(const System& sys) const {
    auto it = per_system.find(sys.name);
    if (it != per_system.end()) return it->second;
    // Union of all member generator sets.
    std::vector<ExprPtr> out;
    std::set<std::string> seen;
    for (const auto& [name, gens] : per_system)
        for (const auto& g : gens) {
            // Keep only generators whose variables the system knows.
            std::set<std::string> u, p;
            collect_vars(g, u, p);
            bool known = true;
            for (const auto& v : u)
                if (sys.var_index(v) < 0) known = false;
            if (known && seen.insert(expr_to_string(g)).second) out.push_back(g);
        }
    return out;
}

std::string Interp::behavior_to_string(uint32_t idx) const {
    std::ostringstream os;
    os << "[";
    const BehaviorSeq& b = behaviors[idx];
    for (size_t k = 0; k < b.size(); ++k) {
        if (k) os << " ";
        os << state_to_string(*sys, states->states[b[k].first])
           << pa_to_string(*sys, pas[b[k].second]);
    }
    os << "]";
    return os.str();
}

Interp make_interp(const System& sys, int horizon, const PredEnv& env, uint64_t state_budget,
                   uint64_t behavior_budget) {
    Interp in;
    in.sys = &sys;
    in.horizon = horizon;
    in.states = std::make_shared<StateSpace>(enumerate_states(sys, state_budget));
    in.pas = enumerate_admissible(sys);
    // Every state stutters under the all-zero action, so |B_H| >= |St|*|Pa|;
    // skip the exact count when even that lower bound blows the budget.
    uint64_t floor = in.states->size() * std::max<uint64_t>(in.pas.size(), 1);
    in.behavior_count = floor > behavior_budget
                            ? floor
                            : count_behaviors(sys, *in.states, in.pas, horizon);
    if (in.behavior_count <= behavior_budget) {
        TransitionMemo memo(sys);
        BehaviorSeq cur;
        std::function<void(uint32_t, int)> rec = [&](uint32_t s, int step) {
            if (step == horizon) {
                for (uint32_t f = 0; f < in.pas.size(); ++f) {
                    cur.emplace_back(s, f);
                    in.behaviors.push_back(cur);
                    cur.pop_back();
                }
                return;
            }
            for (uint32_t f = 0; f < in.pas.size(); ++f)
                for (const auto& nxt : transition(sys, in.pas[f], in.states->states[s], &memo)) {
                    cur.emplace_back(s, f);
                    rec(in.states->rank(nxt), step + 1);
                    cur.pop_back();
                }
        };
        for (uint32_t s = 0; s < in.states->size(); ++s) rec(s, 0);
        in.behaviors_ready = true;
    }
    for (const auto& [name, pred] : env.state_preds) {
        std::vector<ExprPtr> bound;
        for (const auto& g : pred.for_system(sys)) bound.push_back(bind_state_expr(sys, g));
        std::vector<char> bits(in.states->size(), 1);
        for (uint32_t s = 0; s < in.states->size(); ++s)
            for (const auto& b : bound)
                if (!eval_bool_on_state(sys, b, in.states->states[s])) {
                    bits[s] = 0;
                    break;
                }
        in.pred_bitmap[name] = std::move(bits);
    }
    for (const auto& [name, cns] : env.constants) {
        std::vector<ExprPtr> bound;
        for (const auto& g : cns.for_system(sys)) bound.push_back(bind_state_expr(sys, g));
        std::optional<uint32_t> found;
        for (uint32_t s = 0; s < in.states->size(); ++s) {
            bool ok = true;
            for (const auto& b : bound)
                if (!eval_bool_on_state(sys, b, in.states->states[s])) {
                    ok = false;
                    break;
                }
            if (ok) {
                if (found) throw ValidationError("constant " + name + " is not unique in " + sys.name);
                found = s;
            }
        }
        if (!found) throw ValidationError("constant " + name + " has no value in " + sys.name);
        in.const_rank[name] = *found;
    }
    // minimal_of predicates are derived at evaluation time from their base.
    for (const auto& [name, base] : env.minimal_of)
        if (!env.state_preds.count(base))
            throw ValidationError("minimal_of predicate " + name + " has unknown base " + base);
    return in;
}

// ---- evaluation ----

namespace {

struct SweepTooLarge {};

using Env = std::map<std::string, long long>;

long long pack(uint32_t s, uint32_t f) {
    return (static_cast<long long>(s) << 32) | static_cast<long long>(f);
}

struct Evaluator {
    const Interp& in;
    const PredEnv& env;

    long long eval_term(const TermPtr& t, const Env& e) const {
        switch (t->kind) {
            case TermKind::Var: {
                auto it = e.find(t->name);
                if (it == e.end()) throw Error("unbound variable " + t->name);
                return it->second;
            }
            case TermKind::Zero: return 0;
            case TermKind::Const: {
                auto it = in.const_rank.find(t->name);
                if (it == in.const_rank.end()) throw Error("unknown constant " + t->name);
                return it->second;
            }
            case TermKind::Appl: {
                long long h = eval_term(t->args[0], e);
                long long n = eval_term(t->args[1], e);
                if (n < 0 || n > in.horizon) throw Error("time value outside the horizon");
                const auto& step = in.behaviors[static_cast<size_t>(h)][static_cast<size_t>(n)];
                return pack(step.first, step.second);
            }
            case TermKind::P1: return eval_term(t->args[0], e) >> 32;
            case TermKind::P2: return eval_term(t->args[0], e) & 0xffffffffLL;
        }
        return 0;
    }

    bool eval_minimal(const std::string& base, long long h, long long i) const {
        const auto& bits = in.pred_bitmap.at(base);
        const BehaviorSeq& beh = in.behaviors[static_cast<size_t>(h)];
        if (!bits[beh[static_cast<size_t>(i)].first]) return false;
        for (long long k = 0; k < i; ++k)
            if (bits[beh[static_cast<size_t>(k)].first]) return false;
        return true;
    }

    bool eval(const FormulaPtr& f, Env& e) const {
        switch (f->kind) {
            case FKind::True: return true;
            case FKind::Eq: return eval_term(f->a, e) == eval_term(f->b, e);
            case FKind::TimeLe: return eval_term(f->a, e) <= eval_term(f->b, e);
            case FKind::Tr: {
                long long fv = eval_term(f->a, e);
                long long s1 = eval_term(f->b, e);
                long long s2 = eval_term(f->c, e);
                auto succ = transition(*in.sys, in.pas[static_cast<size_t>(fv)],
                                       in.states->states[static_cast<size_t>(s1)]);
                return std::binary_search(succ.begin(), succ.end(),
                                          in.states->states[static_cast<size_t>(s2)]);
            }
            case FKind::Pred: {
                auto mit = env.minimal_of.find(f->pred);
                if (mit != env.minimal_of.end()) {
                    long long h = eval_term(f->args[0], e);
                    long long i = eval_term(f->args[1], e);
                    return eval_minimal(mit->second, h, i);
                }
                auto bit = in.pred_bitmap.find(f->pred);
                if (bit == in.pred_bitmap.end()) throw Error("unknown predicate " + f->pred);
                long long s = eval_term(f->args[0], e);
                return bit->second[static_cast<size_t>(s)] != 0;
            }
            case FKind::And: return eval(f->l, e) && eval(f->r, e);
            case FKind::Or: return eval(f->l, e) || eval(f->r, e);
            case FKind::Not: return !eval(f->l, e);
            case FKind::Implies: return !eval(f->l, e) || eval(f->r, e);
            case FKind::Exists:
            case FKind::Forall: {
                bool is_exists = (f->kind == FKind::Exists);
                uint64_t domain = domain_size(f->vsort);
                for (uint64_t x = 0; x < domain; ++x) {
                    e[f->var] = static_cast<long long>(x);
                    bool v = eval(f->l, e);
                    if (is_exists && v) {
                        e.erase(f->var);
                        return true;
                    }
                    if (!is_exists && !v) {
                        e.erase(f->var);
                        return false;
                    }
                }
                e.erase(f->var);
                return !is_exists;
            }
        }
        return false;
    }

    uint64_t domain_size(LSort s) const {
        switch (s) {
            case LSort::St: return in.states->size();
            case LSort::Pa: return in.pas.size();
            case LSort::T: return static_cast<uint64_t>(in.horizon) + 1;
            case LSort::B:
                if (!in.behaviors_ready) throw SweepTooLarge{};
                return in.behaviors.size();
            case LSort::StPa: throw Error("cannot quantify over st*pa");
        }
        return 0;
    }

    std::string env_to_string(const std::vector<std::pair<std::string, LSort>>& prefix,
                              const Env& e) const {
        std::ostringstream os;
        for (const auto& [v, s] : prefix) {
            auto it = e.find(v);
            if (it == e.end()) continue;
            os << v << "=";
            switch (s) {
                case LSort::St:
                    os << state_to_string(*in.sys, in.states->states[static_cast<size_t>(it->second)]);
                    break;
                case LSort::Pa:
                    os << pa_to_string(*in.sys, in.pas[static_cast<size_t>(it->second)]);
                    break;
                case LSort::B: os << in.behavior_to_string(static_cast<uint32_t>(it->second)); break;
                default: os << it->second;
            }
            os << " ";
        }
        return os.str();
    }
};

// ---- safety-shape fast path ----
//
// forall h:b forall j:t (A => C) where both sides combine atoms evaluated at
// time 0 or at time j only; evaluated by layered reachability over complete
// behaviors instead of behavior enumeration.

struct SafetyAtom {
    bool at_zero = false;       // else at j
    std::string pred;           // state predicate, or
    std::string constant;       // equality with a state constant
};

struct SafetyShape {
    std::vector<SafetyAtom> atoms;
    // Matrix over atom truth values.
    std::function<bool(const std::vector<char>&)> matrix;
    FormulaPtr lhs, rhs;
};

bool collect_safety_atoms(const FormulaPtr& f, const std::string& h, const std::string& j,
                          const PredEnv& env, std::vector<SafetyAtom>& atoms,
                          std::vector<int>& layout) {
    switch (f->kind) {
        case FKind::True:
            layout.push_back(-1);
            return true;
        case FKind::And:
        case FKind::Or: {
            layout.push_back(f->kind == FKind::And ? -2 : -3);
            return collect_safety_atoms(f->l, h, j, env, atoms, layout) &&
                   collect_safety_atoms(f->r, h, j, env, atoms, layout);
        }
        case FKind::Pred: {
            if (env.minimal_of.count(f->pred)) return false;
            if (f->args.size() != 1) return false;
            const Term& t = *f->args[0];
            if (t.kind != TermKind::P1 || t.args[0]->kind != TermKind::Appl) return false;
            const Term& ap = *t.args[0];
            if (ap.args[0]->kind != TermKind::Var || ap.args[0]->name != h) return false;
            SafetyAtom atom;
            atom.pred = f->pred;
            if (ap.args[1]->kind == TermKind::Zero) atom.at_zero = true;
            else if (ap.args[1]->kind == TermKind::Var && ap.args[1]->name == j) atom.at_zero = false;
            else return false;
            atoms.push_back(atom);
            layout.push_back(static_cast<int>(atoms.size()) - 1);
            return true;
        }
        case FKind::Eq: {
            // s(h, 0|j) = const
            const TermPtr *st = nullptr, *cn = nullptr;
            if (f->a->kind == TermKind::P1 && f->b->kind == TermKind::Const) {
                st = &f->a;
                cn = &f->b;
            } else if (f->b->kind == TermKind::P1 && f->a->kind == TermKind::Const) {
                st = &f->b;
                cn = &f->a;
            } else {
                return false;
            }
            const Term& t = **st;
            if (t.args[0]->kind != TermKind::Appl) return false;
            const Term& ap = *t.args[0];
            if (ap.args[0]->kind != TermKind::Var || ap.args[0]->name != h) return false;
            SafetyAtom atom;
            atom.constant = (*cn)->name;
            if (ap.args[1]->kind == TermKind::Zero) atom.at_zero = true;
            else if (ap.args[1]->kind == TermKind::Var && ap.args[1]->name == j) atom.at_zero = false;
            else return false;
            atoms.push_back(atom);
            layout.push_back(static_cast<int>(atoms.size()) - 1);
            return true;
        }
        default:
            return false;
    }
}

// Rebuild a boolean evaluator from the prefix layout produced above.
bool eval_layout(const std::vector<int>& layout, size_t& pos, const std::vector<char>& vals) {
    int code = layout[pos++];
    if (code == -1) return true;
    if (code == -2) {
        bool l = eval_layout(layout, pos, vals);
        bool r = eval_layout(layout, pos, vals);
        return l && r;
    }
    if (code == -3) {
        bool l = eval_layout(layout, pos, vals);
        bool r = eval_layout(layout, pos, vals);
        return l || r;
    }
    return vals[static_cast<size_t>(code)] != 0;
}

std::optional<EvalResult> try_safety_fast_path(const Axiom& ax, const Interp& in,
                                               const PredEnv& env) {
    if (ax.prefix.size() != 2) return std::nullopt;
    if (ax.prefix[0].second != LSort::B || ax.prefix[1].second != LSort::T) return std::nullopt;
    const std::string& h = ax.prefix[0].first;
    const std::string& j = ax.prefix[1].first;

    std::vector<SafetyAtom> atoms;
    std::vector<int> lhs_layout, rhs_layout;
    if (!collect_safety_atoms(ax.lhs, h, j, env, atoms, lhs_layout)) return std::nullopt;
    size_t lhs_atoms = atoms.size();
    if (!collect_safety_atoms(ax.rhs, h, j, env, atoms, rhs_layout)) return std::nullopt;
    (void)lhs_atoms;

    const System& sys = *in.sys;
    const StateSpace& space = *in.states;
    size_t n = space.size();
    int H = in.horizon;

    // Atom truth per state.
    std::vector<std::vector<char>> atom_bits(atoms.size(), std::vector<char>(n, 0));
    for (size_t a = 0; a < atoms.size(); ++a) {
        if (!atoms[a].pred.empty()) {
            atom_bits[a] = in.pred_bitmap.at(atoms[a].pred);
        } else {
            uint32_t rank = in.const_rank.at(atoms[a].constant);
            atom_bits[a][rank] = 1;
        }
    }

    // Complete-path survivability.
    std::vector<std::vector<char>> alive(static_cast<size_t>(H) + 1, std::vector<char>(n, 0));
    alive[0].assign(n, 1);
    std::vector<std::vector<uint32_t>> succs(n);
    TransitionMemo memo(sys);
    for (uint32_t s = 0; s < n; ++s) {
        std::set<uint32_t> ss;
        for (const auto& f : in.pas)
            for (const auto& t : transition(sys, f, space.states[s], &memo)) ss.insert(space.rank(t));
        succs[s].assign(ss.begin(), ss.end());
    }
    for (int r = 1; r <= H; ++r)
        for (uint32_t s = 0; s < n; ++s)
            for (uint32_t t : succs[s])
                if (alive[static_cast<size_t>(r) - 1][t]) {
                    alive[static_cast<size_t>(r)][s] = 1;
                    break;
                }

    // Group start states by their zero-atom profile.
    std::vector<int> zero_atoms, j_atoms;
    for (size_t a = 0; a < atoms.size(); ++a)
        (atoms[a].at_zero ? zero_atoms : j_atoms).push_back(static_cast<int>(a));
    std::map<uint64_t, std::vector<uint32_t>> groups;
    for (uint32_t s = 0; s < n; ++s) {
        if (!alive[static_cast<size_t>(H)][s]) continue;
        uint64_t profile = 0;
        for (size_t z = 0; z < zero_atoms.size(); ++z)
            if (atom_bits[static_cast<size_t>(zero_atoms[z])][s]) profile |= (1ull << z);
        groups[profile].push_back(s);
    }

    EvalResult res;
    res.holds = true;
    res.note = "layered-reachability evaluation";

    std::vector<char> vals(atoms.size(), 0);
    for (const auto& [profile, starts] : groups) {
        for (size_t z = 0; z < zero_atoms.size(); ++z)
            vals[static_cast<size_t>(zero_atoms[z])] = (profile >> z) & 1 ? 1 : 0;
        // Skip start groups that cannot violate the matrix at any j-profile.
        bool violable = false;
        for (uint64_t jp = 0; jp < (1ull << j_atoms.size()) && !violable; ++jp) {
            for (size_t a = 0; a < j_atoms.size(); ++a)
                vals[static_cast<size_t>(j_atoms[a])] = (jp >> a) & 1 ? 1 : 0;
            size_t p1 = 0, p2 = 0;
            if (eval_layout(lhs_layout, p1, vals) && !eval_layout(rhs_layout, p2, vals))
                violable = true;
        }
        if (!violable) continue;
        // Forward layers restricted to complete behaviors.
        std::vector<std::vector<char>> reached(static_cast<size_t>(H) + 1,
                                               std::vector<char>(n, 0));
        for (uint32_t s : starts) reached[0][s] = 1;
        for (int t = 1; t <= H; ++t)
            for (uint32_t s = 0; s < n; ++s)
                if (reached[static_cast<size_t>(t) - 1][s])
                    for (uint32_t nx : succs[s])
                        if (alive[static_cast<size_t>(H - t)][nx])
                            reached[static_cast<size_t>(t)][nx] = 1;
        for (int t = 0; t <= H && res.holds; ++t)
            for (uint32_t s = 0; s < n && res.holds; ++s) {
                if (!reached[static_cast<size_t>(t)][s]) continue;
                for (int a : j_atoms) vals[static_cast<size_t>(a)] = atom_bits[a][s];
                size_t p1 = 0, p2 = 0;
                bool lhsv = eval_layout(lhs_layout, p1, vals);
                bool rhsv = eval_layout(rhs_layout, p2, vals);
                if (lhsv && !rhsv) {
                    res.holds = false;
                    // Reconstruct a violating path backwards.
                    std::vector<uint32_t> path = {s};
                    uint32_t curst = s;
                    for (int bt = t; bt > 0; --bt) {
                        for (uint32_t prev = 0; prev < n; ++prev) {
                            if (!reached[static_cast<size_t>(bt) - 1][prev]) continue;
                            if (std::binary_search(succs[prev].begin(), succs[prev].end(), curst)) {
                                path.push_back(prev);
                                curst = prev;
                                break;
                            }
                        }
                    }
                    std::reverse(path.begin(), path.end());
                    std::ostringstream os;
                    os << "j=" << t << " path=";
                    for (uint32_t st : path) os << state_to_string(sys, space.states[st]);
                    res.counterexample = os.str();
                }
            }
        if (!res.holds) break;
    }
    return res;
}

}  // namespace

EvalResult eval_axiom(const Axiom& ax, const Interp& in, const PredEnv& env) {
    if (auto fast = try_safety_fast_path(ax, in, env)) return *fast;

    Evaluator ev{in, env};
    EvalResult res;
    res.holds = true;
    res.note = "exhaustive quantifier sweep";
    Env e;
    std::function<void(size_t)> sweep = [&](size_t d) {
        if (!res.holds) return;
        if (d == ax.prefix.size()) {
            bool lhs = ev.eval(ax.lhs, e);
            if (lhs && !ev.eval(ax.rhs, e)) {
                res.holds = false;
                res.counterexample = ev.env_to_string(ax.prefix, e);
            }
            return;
        }
        uint64_t domain = ev.domain_size(ax.prefix[d].second);
        for (uint64_t x = 0; x < domain && res.holds; ++x) {
            e[ax.prefix[d].first] = static_cast<long long>(x);
            sweep(d + 1);
        }
        e.erase(ax.prefix[d].first);
    };
    try {
        sweep(0);
    } catch (const SweepTooLarge&) {
        res.holds = false;
        res.infeasible = true;
        res.note = "behavior domain too large to materialize (count " +
                   std::to_string(in.behavior_count) + ")";
    }
    return res;
}

namespace {

// Shape classification helpers.
bool body_geometric(const FormulaPtr& f, bool* cartesian_shape) {
    switch (f->kind) {
        case FKind::True:
        case FKind::Eq:
        case FKind::TimeLe:
        case FKind::Tr:
        case FKind::Pred:
            return true;
        case FKind::And:
            return body_geometric(f->l, cartesian_shape) && body_geometric(f->r, cartesian_shape);
        case FKind::Or:
            if (cartesian_shape) *cartesian_shape = false;
            return body_geometric(f->l, nullptr) && body_geometric(f->r, nullptr);
        case FKind::Exists:
            return body_geometric(f->l, cartesian_shape);
        default:
            return false;
    }
}

void collect_exists(const FormulaPtr& f, std::vector<std::pair<const Formula*, std::vector<std::string>>>& out,
                    std::vector<std::string> scope) {
    switch (f->kind) {
        case FKind::Exists:
            out.emplace_back(f.get(), scope);
            scope.push_back(f->var);
            collect_exists(f->l, out, scope);
            break;
        case FKind::And:
        case FKind::Or:
        case FKind::Implies:
            collect_exists(f->l, out, scope);
            collect_exists(f->r, out, scope);
            break;
        case FKind::Not:
        case FKind::Forall:
            if (f->l) {
                if (f->kind == FKind::Forall) scope.push_back(f->var);
                collect_exists(f->l, out, scope);
            }
            break;
        default:
            break;
    }
}

}  // namespace

Classification classify(const Axiom& ax, const std::vector<const Interp*>& interps,
                        const PredEnv& env) {
    Classification cls;
    bool cart_l = true, cart_r = true;
    cls.shape_geometric = body_geometric(ax.lhs, &cart_l) && body_geometric(ax.rhs, &cart_r);
    cls.shape_cartesian = cls.shape_geometric && cart_l && cart_r;
    if (!cls.shape_geometric) {
        cls.verdict = Classification::Verdict::Neither;
        cls.detail = "connectives outside the geometric fragment";
        return cls;
    }
    cls.verdict = Classification::Verdict::Geometric;
    if (!cls.shape_cartesian) {
        cls.detail = "disjunction present";
        return cls;
    }

    std::vector<std::pair<const Formula*, std::vector<std::string>>> exists;
    std::vector<std::string> scope;
    for (const auto& [v, s] : ax.prefix) scope.push_back(v);
    collect_exists(ax.lhs, exists, scope);
    collect_exists(ax.rhs, exists, scope);
    if (exists.empty()) {
        cls.verdict = Classification::Verdict::Cartesian;
        cls.uniqueness_certified = true;
        cls.detail = "no existentials";
        return cls;
    }

    // Sorts of all scoped variables.
    std::map<std::string, LSort> sorts;
    for (const auto& [v, s] : ax.prefix) sorts[v] = s;
    std::function<void(const FormulaPtr&)> record = [&](const FormulaPtr& f) {
        if (!f) return;
        if (f->kind == FKind::Exists || f->kind == FKind::Forall) sorts[f->var] = f->vsort;
        if (f->l) record(f->l);
        if (f->r) record(f->r);
    };
    record(ax.lhs);
    record(ax.rhs);

    // Semantic uniqueness of every existential over every interpretation:
    // for each valuation of the variables in scope, at most one witness.
    cls.uniqueness_certified = true;
    try {
        for (const auto* inp : interps) {
            Evaluator ev{*inp, env};
            for (const auto& [node, free] : exists) {
                Env e;
                bool unique = true;
                std::function<void(size_t)> envs = [&](size_t d) {
                    if (!unique) return;
                    if (d == free.size()) {
                        uint64_t domain = ev.domain_size(sorts.at(node->var));
                        int hits = 0;
                        for (uint64_t x = 0; x < domain; ++x) {
                            e[node->var] = static_cast<long long>(x);
                            if (ev.eval(node->l, e) && ++hits > 1) break;
                        }
                        e.erase(node->var);
                        if (hits > 1) unique = false;
                        return;
                    }
                    uint64_t domain = ev.domain_size(sorts.at(free[d]));
                    for (uint64_t x = 0; x < domain && unique; ++x) {
                        e[free[d]] = static_cast<long long>(x);
                        envs(d + 1);
                    }
                    e.erase(free[d]);
                };
                envs(0);
                if (!unique) {
                    cls.uniqueness_certified = false;
                    cls.detail = "existential " + node->var + " admits two witnesses in " +
                                 inp->sys->name;
                    return cls;
                }
            }
        }
    } catch (const SweepTooLarge&) {
        cls.uniqueness_certified = false;
        cls.detail = "uniqueness certification infeasible (behavior domain too large)";
        return cls;
    }
    cls.verdict = Classification::Verdict::Cartesian;
    cls.detail = "all existentials certified unique by enumeration";
    return cls;
}

Verdict modular_verify(const Site& site, const System& colim, const Axiom& ax, int horizon,
                       const PredEnv& env, uint64_t state_budget, uint64_t behavior_budget) {
    Verdict v;
    std::vector<Interp> interps;
    for (const auto& m : site.members)
        interps.push_back(make_interp(*m, horizon, env, state_budget, behavior_budget));
    Interp global = make_interp(colim, horizon, env, state_budget, behavior_budget);

    std::vector<const Interp*> all;
    for (const auto& i : interps) all.push_back(&i);
    all.push_back(&global);
    v.cls = classify(ax, all, env);

    v.all_components_pass = true;
    for (size_t m = 0; m < interps.size(); ++m) {
        EvalResult r = eval_axiom(ax, interps[m], env);
        v.all_components_pass &= r.holds;
        v.components.push_back({site.members[m]->name, std::move(r)});
    }
    v.inferred_global = v.all_components_pass &&
                        v.cls.verdict == Classification::Verdict::Cartesian;
    v.reflection_recorded = v.all_components_pass &&
                            (v.cls.verdict == Classification::Verdict::Geometric ||
                             v.cls.verdict == Classification::Verdict::Cartesian);
    v.oracle = eval_axiom(ax, global, env);
    v.soundness_alarm = v.inferred_global && !v.oracle.infeasible && !v.oracle.holds;
    return v;
}

// ---- schemas ----

namespace {

TermPtr s_at(const std::string& h, TermPtr t) { return ts(tvar(h, LSort::B), std::move(t)); }

}  // namespace

Axiom schema_safety(const std::string& p, const std::string& q) {
    Axiom ax;
    ax.name = "safety";
    ax.prefix = {{"h", LSort::B}, {"j", LSort::T}};
    ax.lhs = fpred(p, {s_at("h", tzero())});
    ax.rhs = fpred(q, {s_at("h", tvar("j", LSort::T))});
    return ax;
}

Axiom schema_partial_correctness(const std::string& p, const std::string& fin,
                                 const std::string& q) {
    Axiom ax;
    ax.name = "partial-correctness";
    ax.prefix = {{"h", LSort::B}, {"j", LSort::T}};
    ax.lhs = fand(fpred(p, {s_at("h", tzero())}), fpred(fin, {s_at("h", tvar("j", LSort::T))}));
    ax.rhs = fpred(q, {s_at("h", tvar("j", LSort::T))});
    return ax;
}

Axiom schema_global_invariance(const std::string& p, const std::string& q) {
    Axiom ax = schema_safety(p, q);
    ax.name = "global-invariance";
    return ax;
}

Axiom schema_total_correctness(const std::string& p, const std::string& fin,
                               const std::string& q) {
    Axiom ax;
    ax.name = "total-correctness";
    ax.prefix = {{"h", LSort::B}};
    ax.lhs = fpred(p, {s_at("h", tzero())});
    ax.rhs = fexists("j", LSort::T,
                     fand(fpred(fin, {s_at("h", tvar("j", LSort::T))}),
                          fpred(q, {s_at("h", tvar("j", LSort::T))})));
    return ax;
}

Axiom schema_accessibility(const std::string& s0, const std::string& sf) {
    Axiom ax;
    ax.name = "accessibility";
    ax.prefix = {{"h", LSort::B}};
    ax.lhs = feq(s_at("h", tzero()), tconst(s0));
    ax.rhs = fexists("j", LSort::T, feq(s_at("h", tvar("j", LSort::T)), tconst(sf)));
    return ax;
}

Axiom schema_precedence(const std::string& p, const std::string& a, const std::string& q) {
    Axiom ax;
    ax.name = "precedence";
    ax.prefix = {{"h", LSort::B}, {"j", LSort::T}};
    ax.lhs = fand(fpred(p, {s_at("h", tzero())}), fpred(a, {s_at("h", tvar("j", LSort::T))}));
    ax.rhs = fpred(q, {s_at("h", tvar("j", LSort::T))});
    return ax;
}

std::vector<Axiom> liveness_axioms(const std::string& safe_update_pred,
                                   const std::string& can_move_pred,
                                   const std::string& minimal_pred) {
    std::vector<Axiom> out;
    {
        Axiom ax;
        ax.name = "liveness-1";
        ax.prefix = {{"h", LSort::B}};
        ax.lhs = fpred(safe_update_pred, {s_at("h", tzero())});
        ax.rhs = fexists("j", LSort::T,
                         fpred(minimal_pred, {tvar("h", LSort::B), tvar("j", LSort::T)}));
        out.push_back(ax);
    }
    {
        Axiom ax;
        ax.name = "liveness-2";
        ax.prefix = {{"h", LSort::B}, {"i", LSort::T}};
        ax.lhs = fpred(minimal_pred, {tvar("h", LSort::B), tvar("i", LSort::T)});
        ax.rhs = fpred(can_move_pred, {s_at("h", tvar("i", LSort::T))});
        out.push_back(ax);
    }
    {
        Axiom ax;
        ax.name = "liveness-3";
        ax.prefix = {{"h", LSort::B}, {"i", LSort::T}, {"k", LSort::T}};
        ax.lhs = fand(fpred(minimal_pred, {tvar("h", LSort::B), tvar("i", LSort::T)}),
                      fpred(can_move_pred, {s_at("h", tvar("k", LSort::T))}));
        ax.rhs = ftimele(tvar("i", LSort::T), tvar("k", LSort::T));
        out.push_back(ax);
    }
    return out;
}

}  // namespace sheafver
