#include "sheafver/system.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace sheafver {

namespace {

struct BindCtx {
    const std::map<std::string, int>* unprimed = nullptr;
    const std::map<std::string, int>* primed = nullptr;
    const Signature* sig = nullptr;
    std::map<std::string, int>* op_index = nullptr;
    std::map<std::string, int>* pred_index = nullptr;
};

void bind_mut(Expr* e, const BindCtx& ctx, const std::string& where) {
    switch (e->kind) {
        case ExprKind::Var: {
            auto it = ctx.unprimed->find(e->name);
            if (it == ctx.unprimed->end())
                throw ValidationError(where + ": unknown variable " + e->name);
            e->slot = it->second;
            break;
        }
        case ExprKind::PrimedVar: {
            if (!ctx.primed)
                throw ValidationError(where + ": primed variable " + e->name + " not allowed here");
            auto it = ctx.primed->find(e->name);
            if (it == ctx.primed->end())
                throw ValidationError(where + ": unknown primed variable " + e->name);
            e->slot = it->second;
            break;
        }
        case ExprKind::OpApp: {
            const OpSig* op = ctx.sig->find_op(e->name);
            if (!op) throw ValidationError(where + ": unknown operation " + e->name);
            if (op->arg_sorts.size() != e->args.size())
                throw ValidationError(where + ": arity mismatch for " + e->name);
            e->slot = ctx.op_index->at(e->name);
            for (auto& a : e->args) bind_mut(const_cast<Expr*>(a.get()), ctx, where);
            break;
        }
        case ExprKind::PredApp: {
            const PredSig* pr = ctx.sig->find_pred(e->name);
            if (!pr) throw ValidationError(where + ": unknown predicate " + e->name);
            if (pr->arg_sorts.size() != e->args.size())
                throw ValidationError(where + ": arity mismatch for " + e->name);
            e->slot = ctx.pred_index->at(e->name);
            for (auto& a : e->args) bind_mut(const_cast<Expr*>(a.get()), ctx, where);
            break;
        }
        default:
            for (auto& a : e->args) bind_mut(const_cast<Expr*>(a.get()), ctx, where);
    }
}

bool expr_is_bool(const Expr& e) {
    switch (e.kind) {
        case ExprKind::BoolConst:
        case ExprKind::Cmp:
        case ExprKind::And:
        case ExprKind::Or:
        case ExprKind::Not:
        case ExprKind::PredApp:
            return true;
        default:
            return false;
    }
}

void check_kind(const ExprPtr& e, bool expect_bool, const std::string& where) {
    bool b = expr_is_bool(*e);
    if (b != expect_bool)
        throw ValidationError(where + ": " + (expect_bool ? "boolean" : "integer") +
                              " expression expected at " + expr_to_string(e));
    switch (e->kind) {
        case ExprKind::And:
        case ExprKind::Or:
        case ExprKind::Not:
            for (const auto& a : e->args) check_kind(a, true, where);
            break;
        case ExprKind::Cmp:
        case ExprKind::Add:
        case ExprKind::Sub:
        case ExprKind::Mul:
        case ExprKind::OpApp:
        case ExprKind::PredApp:
            for (const auto& a : e->args) check_kind(a, false, where);
            break;
        default:
            break;
    }
}

int max_slot(const Expr& e) {
    int m = (e.kind == ExprKind::Var || e.kind == ExprKind::PrimedVar) ? e.slot : -1;
    for (const auto& a : e.args) m = std::max(m, max_slot(*a));
    return m;
}

}  // namespace

struct SystemFinalizer {
    static void run(System& sys);
};

void SystemFinalizer::run(System& sys) {
    sys.vocab.validate();

    std::map<std::string, int> var_idx;
    for (size_t i = 0; i < sys.vars.size(); ++i) {
        const auto& v = sys.vars[i];
        if (!sys.vocab.find_sort(v.sort))
            throw ValidationError("variable " + v.name + " has unknown sort " + v.sort);
        if (!var_idx.emplace(v.name, static_cast<int>(i)).second)
            throw ValidationError("duplicate variable " + v.name);
    }
    sys.var_sorts_.clear();
    for (const auto& v : sys.vars) sys.var_sorts_.push_back(sys.vocab.find_sort(v.sort));

    std::map<std::string, int> op_index, pred_index;
    for (size_t i = 0; i < sys.vocab.sig.ops.size(); ++i)
        op_index[sys.vocab.sig.ops[i].name] = static_cast<int>(i);
    for (size_t i = 0; i < sys.vocab.sig.preds.size(); ++i)
        pred_index[sys.vocab.sig.preds[i].name] = static_cast<int>(i);

    sys.op_eval_.clear();
    for (const auto& op : sys.vocab.sig.ops) {
        System::OpEvalEntry ent;
        ent.arity = static_cast<int>(op.arg_sorts.size());
        const auto& table = sys.vocab.model.op_tables.at(op.name);
        ent.table = &table;
        if (ent.arity == 0) {
            ent.cval = table.at({});
        } else if (ent.arity == 1) {
            const Sort* dom = sys.vocab.find_sort(op.arg_sorts[0]);
            ent.base = dom->lo;
            ent.dense.resize(static_cast<size_t>(dom->size()));
            for (Value v = dom->lo; v <= dom->hi; ++v) ent.dense[v - dom->lo] = table.at({v});
        }
        sys.op_eval_.push_back(std::move(ent));
    }

    // Constraints: unprimed, boolean, bound to var slots.
    BindCtx cctx{&var_idx, nullptr, &sys.vocab.sig, &op_index, &pred_index};
    sys.bound_constraints_.clear();
    for (const auto& c : sys.constraints) {
        check_kind(c, true, "constraint");
        auto b = clone_expr(c);
        bind_mut(const_cast<Expr*>(b.get()), cctx, "constraint " + expr_to_string(c));
        sys.bound_constraints_.push_back(b);
    }
    sys.max_constrained_var_ = -1;
    sys.constraints_by_max_var_.assign(sys.vars.size() + 1, {});
    for (size_t i = 0; i < sys.bound_constraints_.size(); ++i) {
        int m = max_slot(*sys.bound_constraints_[i]);
        sys.max_constrained_var_ = std::max(sys.max_constrained_var_, m);
        // Constant constraints hang off slot 0 (checked before any assignment
        // would matter; vacuous systems with zero vars handled separately).
        sys.constraints_by_max_var_[std::max(m, 0)].push_back(static_cast<int>(i));
    }

    // Actions.
    std::map<std::string, int> act_idx;
    for (size_t i = 0; i < sys.actions.size(); ++i)
        if (!act_idx.emplace(sys.actions[i].name, static_cast<int>(i)).second)
            throw ValidationError("duplicate action " + sys.actions[i].name);

    sys.action_dep_idx_.clear();
    sys.bound_specs_.clear();
    sys.intersection_maps_.clear();
    for (auto& a : sys.actions) {
        std::vector<int> deps;
        for (const auto& d : a.depends) {
            auto it = var_idx.find(d);
            if (it == var_idx.end())
                throw ValidationError("action " + a.name + ": depends on unknown variable " + d);
            deps.push_back(it->second);
        }
        std::sort(deps.begin(), deps.end());
        if (std::adjacent_find(deps.begin(), deps.end()) != deps.end())
            throw ValidationError("action " + a.name + ": duplicate dependency");

        // Canonical depends order: ascending system var index.
        std::vector<std::string> dep_names;
        std::map<std::string, int> local_idx;
        for (size_t i = 0; i < deps.size(); ++i) {
            dep_names.push_back(sys.vars[deps[i]].name);
            local_idx[dep_names.back()] = static_cast<int>(i);
        }
        // Permutation from the declared order to the canonical order.
        std::vector<int> perm(a.depends.size());
        for (size_t i = 0; i < a.depends.size(); ++i) perm[i] = local_idx.at(a.depends[i]);
        a.depends = dep_names;
        sys.action_dep_idx_.push_back(deps);

        TransitionSpec bound = a.spec;
        if (bound.form == TransitionSpec::Form::Table) {
            for (auto& row : bound.rows) {
                if (row.first.size() != deps.size() || row.second.size() != deps.size())
                    throw ValidationError("action " + a.name + ": table row arity mismatch");
                std::vector<Value> pre(deps.size()), post(deps.size());
                for (size_t i = 0; i < deps.size(); ++i) {
                    pre[perm[i]] = row.first[i];
                    post[perm[i]] = row.second[i];
                }
                row = {pre, post};
            }
            std::sort(bound.rows.begin(), bound.rows.end());
            bound.rows.erase(std::unique(bound.rows.begin(), bound.rows.end()), bound.rows.end());
            a.spec.rows = bound.rows;
            sys.intersection_maps_.emplace_back();
        } else if (bound.form == TransitionSpec::Form::GuardUpdate) {
            BindCtx lctx{&local_idx, nullptr, &sys.vocab.sig, &op_index, &pred_index};
            BindCtx lctx2{&local_idx, &local_idx, &sys.vocab.sig, &op_index, &pred_index};
            if (bound.guard) {
                check_kind(bound.guard, true, "action " + a.name + " guard");
                bound.guard = clone_expr(bound.guard);
                bind_mut(const_cast<Expr*>(bound.guard.get()), lctx, "action " + a.name + " guard");
            }
            std::set<std::string> seen;
            bound.update_slots.clear();
            for (auto& [vn, up] : bound.updates) {
                if (!local_idx.count(vn))
                    throw ValidationError("action " + a.name + ": update target " + vn +
                                          " not in depends");
                if (!seen.insert(vn).second)
                    throw ValidationError("action " + a.name + ": duplicate update for " + vn);
                bound.update_slots.push_back(local_idx.at(vn));
                if (up.e1) {
                    check_kind(up.e1, false, "action " + a.name + " update");
                    up.e1 = clone_expr(up.e1);
                    bind_mut(const_cast<Expr*>(up.e1.get()), lctx, "action " + a.name + " update");
                }
                if (up.e2) {
                    check_kind(up.e2, false, "action " + a.name + " update");
                    up.e2 = clone_expr(up.e2);
                    bind_mut(const_cast<Expr*>(up.e2.get()), lctx, "action " + a.name + " update");
                }
            }
            if (bound.post) {
                check_kind(bound.post, true, "action " + a.name + " post");
                bound.post = clone_expr(bound.post);
                bind_mut(const_cast<Expr*>(bound.post.get()), lctx2, "action " + a.name + " post");
            }
            sys.intersection_maps_.emplace_back();
        } else {
            // Intersection: map each source action's depends into our local slots.
            std::vector<std::vector<int>> maps;
            for (const auto& src : bound.sources) {
                if (!src.system || !src.system->finalized())
                    throw ValidationError("action " + a.name + ": unfinalized intersection source");
                int sa = src.system->action_index(src.action);
                if (sa < 0)
                    throw ValidationError("action " + a.name + ": source lacks action " + src.action);
                std::vector<int> positions;
                for (int dv : src.system->action_deps(sa)) {
                    const std::string& dn = src.system->vars[dv].name;
                    auto it = local_idx.find(dn);
                    if (it == local_idx.end())
                        throw ValidationError("action " + a.name + ": source variable " + dn +
                                              " missing from depends");
                    positions.push_back(it->second);
                }
                maps.push_back(std::move(positions));
            }
            sys.intersection_maps_.push_back(std::move(maps));
        }
        sys.bound_specs_.push_back(std::move(bound));
    }

    // Boolean action constraints.
    std::map<std::string, int> act_slots = act_idx;
    BindCtx actx{&act_slots, nullptr, &sys.vocab.sig, &op_index, &pred_index};
    sys.bound_action_constraints_.clear();
    for (const auto& eq : sys.action_constraints) {
        auto check_act = [&](const ExprPtr& e, auto&& self) -> void {
            switch (e->kind) {
                case ExprKind::Var:
                    if (!act_idx.count(e->name))
                        throw ValidationError("action constraint mentions unknown action " + e->name);
                    break;
                case ExprKind::IntConst:
                case ExprKind::BoolConst:
                    if (e->ival != 0 && e->ival != 1)
                        throw ValidationError("action constraint constants must be 0 or 1");
                    break;
                case ExprKind::And:
                case ExprKind::Or:
                case ExprKind::Not:
                    for (const auto& a2 : e->args) self(a2, self);
                    break;
                default:
                    throw ValidationError("action constraints are boolean terms over actions");
            }
        };
        check_act(eq.lhs, check_act);
        check_act(eq.rhs, check_act);
        BoolEq b{clone_expr(eq.lhs), clone_expr(eq.rhs)};
        bind_mut(const_cast<Expr*>(b.lhs.get()), actx, "action constraint");
        bind_mut(const_cast<Expr*>(b.rhs.get()), actx, "action constraint");
        sys.bound_action_constraints_.push_back(std::move(b));
    }

    sys.finalized_ = true;
}

void System::finalize() { SystemFinalizer::run(*this); }

SystemPtr finalize_system(System sys) {
    sys.finalize();
    return std::make_shared<const System>(std::move(sys));
}

int System::var_index(const std::string& n) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == n) return static_cast<int>(i);
    return -1;
}

int System::action_index(const std::string& n) const {
    for (size_t i = 0; i < actions.size(); ++i)
        if (actions[i].name == n) return static_cast<int>(i);
    return -1;
}

long long System::eval_bound(const Expr& e, const Value* pre, const Value* post) const {
    switch (e.kind) {
        case ExprKind::IntConst:
        case ExprKind::BoolConst:
            return e.ival;
        case ExprKind::Var:
            return pre[e.slot];
        case ExprKind::PrimedVar:
            return post[e.slot];
        case ExprKind::Add:
            return eval_bound(*e.args[0], pre, post) + eval_bound(*e.args[1], pre, post);
        case ExprKind::Sub:
            return eval_bound(*e.args[0], pre, post) - eval_bound(*e.args[1], pre, post);
        case ExprKind::Mul:
            return eval_bound(*e.args[0], pre, post) * eval_bound(*e.args[1], pre, post);
        case ExprKind::Cmp: {
            long long a = eval_bound(*e.args[0], pre, post);
            long long b = eval_bound(*e.args[1], pre, post);
            switch (e.cmp) {
                case CmpOp::Eq: return a == b;
                case CmpOp::Ne: return a != b;
                case CmpOp::Lt: return a < b;
                case CmpOp::Le: return a <= b;
                case CmpOp::Gt: return a > b;
                case CmpOp::Ge: return a >= b;
            }
            return 0;
        }
        case ExprKind::And:
            return eval_bound(*e.args[0], pre, post) && eval_bound(*e.args[1], pre, post);
        case ExprKind::Or:
            return eval_bound(*e.args[0], pre, post) || eval_bound(*e.args[1], pre, post);
        case ExprKind::Not:
            return !eval_bound(*e.args[0], pre, post);
        case ExprKind::OpApp: {
            const OpEvalEntry& ent = op_eval_[e.slot];
            if (ent.arity == 0) return ent.cval;
            if (ent.arity == 1) {
                long long a = eval_bound(*e.args[0], pre, post);
                long long idx = a - ent.base;
                if (idx < 0 || idx >= static_cast<long long>(ent.dense.size()))
                    throw Error("operation " + e.name + " applied outside its domain (" +
                                std::to_string(a) + ")");
                return ent.dense[static_cast<size_t>(idx)];
            }
            std::vector<Value> key;
            key.reserve(e.args.size());
            for (const auto& a : e.args)
                key.push_back(static_cast<Value>(eval_bound(*a, pre, post)));
            auto it = ent.table->find(key);
            if (it == ent.table->end())
                throw Error("operation " + e.name + " applied outside its domain");
            return it->second;
        }
        case ExprKind::PredApp: {
            std::vector<Value> key;
            key.reserve(e.args.size());
            for (const auto& a : e.args)
                key.push_back(static_cast<Value>(eval_bound(*a, pre, post)));
            return vocab.model.pred_tables.at(e.name).count(key) ? 1 : 0;
        }
    }
    return 0;
}

bool System::constraint_holds(int c, const State& s) const {
    return eval_bound(*bound_constraints_[c], s.data(), nullptr) != 0;
}

bool System::all_constraints_hold(const State& s) const {
    for (const auto& c : bound_constraints_)
        if (!eval_bound(*c, s.data(), nullptr)) return false;
    return true;
}

uint64_t System::local_domain_size(int action) const {
    uint64_t n = 1;
    for (int v : action_dep_idx_[action]) {
        n *= static_cast<uint64_t>(var_sorts_[v]->size());
        if (n > (1ull << 62)) return UINT64_MAX;
    }
    return n;
}

void System::for_each_local(int action,
                            const std::function<void(const std::vector<Value>&)>& fn) const {
    const auto& deps = action_dep_idx_[action];
    std::vector<Value> cur(deps.size());
    std::function<void(size_t)> rec = [&](size_t d) {
        if (d == deps.size()) {
            fn(cur);
            return;
        }
        const Sort* s = var_sorts_[deps[d]];
        for (Value v = s->lo; v <= s->hi; ++v) {
            cur[d] = v;
            rec(d + 1);
        }
    };
    rec(0);
}

std::vector<std::vector<Value>> System::local_succ(int action, const std::vector<Value>& pre) const {
    const TransitionSpec& spec = bound_specs_[action];
    const auto& deps = action_dep_idx_[action];
    std::vector<std::vector<Value>> out;

    switch (spec.form) {
        case TransitionSpec::Form::Table: {
            for (const auto& row : spec.rows)
                if (row.first == pre) out.push_back(row.second);
            break;
        }
        case TransitionSpec::Form::GuardUpdate: {
            if (spec.guard && !eval_bound(*spec.guard, pre.data(), nullptr)) break;
            // Per-slot candidate sets; unmentioned depends stay unchanged.
            std::vector<std::vector<Value>> cand(deps.size());
            for (size_t i = 0; i < deps.size(); ++i) cand[i] = {pre[i]};
            bool possible = true;
            for (size_t ui = 0; ui < spec.updates.size(); ++ui) {
                const auto& up = spec.updates[ui].second;
                size_t slot = static_cast<size_t>(spec.update_slots[ui]);
                const Sort* so = var_sorts_[deps[slot]];
                std::vector<Value> vals;
                switch (up.kind) {
                    case TransitionUpdate::Kind::Set: {
                        long long v = eval_bound(*up.e1, pre.data(), nullptr);
                        if (so->contains(static_cast<Value>(v)))
                            vals.push_back(static_cast<Value>(v));
                        break;
                    }
                    case TransitionUpdate::Kind::Interval: {
                        long long lo = eval_bound(*up.e1, pre.data(), nullptr);
                        long long hi = eval_bound(*up.e2, pre.data(), nullptr);
                        lo = std::max<long long>(lo, so->lo);
                        hi = std::min<long long>(hi, so->hi);
                        for (long long v = lo; v <= hi; ++v) vals.push_back(static_cast<Value>(v));
                        break;
                    }
                    case TransitionUpdate::Kind::Any: {
                        for (Value v = so->lo; v <= so->hi; ++v) vals.push_back(v);
                        break;
                    }
                }
                if (vals.empty()) {
                    possible = false;
                    break;
                }
                cand[slot] = std::move(vals);
            }
            if (!possible) break;
            std::vector<Value> post(deps.size());
            std::function<void(size_t)> rec = [&](size_t d) {
                if (d == deps.size()) {
                    if (!spec.post || eval_bound(*spec.post, pre.data(), post.data()))
                        out.push_back(post);
                    return;
                }
                for (Value v : cand[d]) {
                    post[d] = v;
                    rec(d + 1);
                }
            };
            rec(0);
            break;
        }
        case TransitionSpec::Form::Intersection: {
            // DFS over sources, each constraining its slice of the post state.
            const auto& maps = intersection_maps_[action];
            std::vector<Value> post(deps.size());
            std::vector<bool> assigned(deps.size(), false);
            std::function<void(size_t)> rec = [&](size_t si) {
                if (si == spec.sources.size()) {
                    for (size_t i = 0; i < deps.size(); ++i)
                        if (!assigned[i]) return;  // every slot covered by some source
                    out.push_back(post);
                    return;
                }
                const auto& src = spec.sources[si];
                const auto& pos = maps[si];
                int sa = src.system->action_index(src.action);
                std::vector<Value> lpre(pos.size());
                for (size_t i = 0; i < pos.size(); ++i) lpre[i] = pre[pos[i]];
                for (const auto& lpost : src.system->local_succ(sa, lpre)) {
                    bool ok = true;
                    std::vector<size_t> newly;
                    for (size_t i = 0; i < pos.size(); ++i) {
                        if (assigned[pos[i]]) {
                            if (post[pos[i]] != lpost[i]) {
                                ok = false;
                                break;
                            }
                        } else {
                            newly.push_back(pos[i]);
                            post[pos[i]] = lpost[i];
                            assigned[pos[i]] = true;
                        }
                    }
                    if (ok) rec(si + 1);
                    for (size_t i : newly) assigned[i] = false;
                }
            };
            rec(0);
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            break;
        }
    }
    return out;
}

bool System::local_rel_contains(int action, const std::vector<Value>& pre,
                                const std::vector<Value>& post) const {
    const TransitionSpec& spec = bound_specs_[action];
    const auto& deps = action_dep_idx_[action];
    switch (spec.form) {
        case TransitionSpec::Form::Table:
            return std::binary_search(spec.rows.begin(), spec.rows.end(),
                                      std::make_pair(pre, post));
        case TransitionSpec::Form::GuardUpdate: {
            if (spec.guard && !eval_bound(*spec.guard, pre.data(), nullptr)) return false;
            std::vector<bool> updated(deps.size(), false);
            for (size_t ui = 0; ui < spec.updates.size(); ++ui) {
                const auto& up = spec.updates[ui].second;
                size_t slot = static_cast<size_t>(spec.update_slots[ui]);
                updated[slot] = true;
                const Sort* so = var_sorts_[deps[slot]];
                if (!so->contains(post[slot])) return false;
                switch (up.kind) {
                    case TransitionUpdate::Kind::Set:
                        if (eval_bound(*up.e1, pre.data(), nullptr) != post[slot]) return false;
                        break;
                    case TransitionUpdate::Kind::Interval: {
                        long long lo = eval_bound(*up.e1, pre.data(), nullptr);
                        long long hi = eval_bound(*up.e2, pre.data(), nullptr);
                        if (post[slot] < lo || post[slot] > hi) return false;
                        break;
                    }
                    case TransitionUpdate::Kind::Any:
                        break;
                }
            }
            for (size_t i = 0; i < deps.size(); ++i)
                if (!updated[i] && post[i] != pre[i]) return false;
            if (spec.post && !eval_bound(*spec.post, pre.data(), post.data())) return false;
            return true;
        }
        case TransitionSpec::Form::Intersection: {
            const auto& maps = intersection_maps_[action];
            std::vector<bool> covered(deps.size(), false);
            for (size_t si = 0; si < spec.sources.size(); ++si) {
                const auto& src = spec.sources[si];
                const auto& pos = maps[si];
                int sa = src.system->action_index(src.action);
                std::vector<Value> lpre(pos.size()), lpost(pos.size());
                for (size_t i = 0; i < pos.size(); ++i) {
                    lpre[i] = pre[pos[i]];
                    lpost[i] = post[pos[i]];
                    covered[pos[i]] = true;
                }
                if (!src.system->local_rel_contains(sa, lpre, lpost)) return false;
            }
            for (size_t i = 0; i < deps.size(); ++i)
                if (!covered[i]) return false;
            return true;
        }
    }
    return false;
}

ExprPtr bind_state_expr(const System& sys, const ExprPtr& e) {
    if (!sys.finalized()) throw Error("bind_state_expr on unfinalized system");
    std::map<std::string, int> var_idx, op_index, pred_index;
    for (size_t i = 0; i < sys.vars.size(); ++i) var_idx[sys.vars[i].name] = static_cast<int>(i);
    for (size_t i = 0; i < sys.vocab.sig.ops.size(); ++i)
        op_index[sys.vocab.sig.ops[i].name] = static_cast<int>(i);
    for (size_t i = 0; i < sys.vocab.sig.preds.size(); ++i)
        pred_index[sys.vocab.sig.preds[i].name] = static_cast<int>(i);
    check_kind(e, true, "predicate");
    auto b = clone_expr(e);
    BindCtx ctx{&var_idx, nullptr, &sys.vocab.sig, &op_index, &pred_index};
    bind_mut(const_cast<Expr*>(b.get()), ctx, "predicate " + expr_to_string(e));
    return b;
}

bool eval_bool_on_state(const System& sys, const ExprPtr& bound, const State& s) {
    return sys.eval_bound(*bound, s.data(), nullptr) != 0;
}

uint64_t count_states(const System& sys, const std::vector<ExprPtr>& extra_bound) {
    size_t n = sys.vars.size();
    std::vector<std::vector<const Expr*>> checks(n + 1);
    std::vector<const Expr*> constant_checks;
    int max_check = -1;
    auto add = [&](const ExprPtr& c) {
        int m = max_slot(*c);
        if (m < 0)
            constant_checks.push_back(c.get());
        else
            checks[m].push_back(c.get());
        max_check = std::max(max_check, m);
    };
    for (const auto& c : sys.bound_constraints()) add(c);
    for (const auto& c : extra_bound) add(c);

    State cur(n, 0);
    for (const Expr* c : constant_checks)
        if (!sys.eval_bound(*c, cur.data(), nullptr)) return 0;

    std::function<uint64_t(size_t)> rec = [&](size_t d) -> uint64_t {
        if (static_cast<int>(d) > max_check) {
            uint64_t free = 1;
            for (size_t i = d; i < n; ++i)
                free *= static_cast<uint64_t>(sys.var_sort(static_cast<int>(i)).size());
            return free;
        }
        const Sort& so = sys.var_sort(static_cast<int>(d));
        uint64_t total = 0;
        for (Value v = so.lo; v <= so.hi; ++v) {
            cur[d] = v;
            bool ok = true;
            for (const Expr* c : checks[d])
                if (!sys.eval_bound(*c, cur.data(), nullptr)) {
                    ok = false;
                    break;
                }
            if (ok) total += rec(d + 1);
        }
        return total;
    };
    if (n == 0) return 1;
    return rec(0);
}

bool for_each_state(const System& sys, const std::function<bool(const State&)>& fn,
                    uint64_t max_visits) {
    size_t n = sys.vars.size();
    std::vector<std::vector<const Expr*>> checks(n + 1);
    std::vector<const Expr*> constant_checks;
    for (const auto& c : sys.bound_constraints()) {
        int m = max_slot(*c);
        if (m < 0)
            constant_checks.push_back(c.get());
        else
            checks[m].push_back(c.get());
    }
    State cur(n, 0);
    for (const Expr* c : constant_checks)
        if (!sys.eval_bound(*c, cur.data(), nullptr)) return true;

    if (n == 0) {
        if (max_visits == 0) return false;
        fn(cur);
        return true;
    }

    uint64_t visited = 0;
    bool stopped = false, aborted = false;
    std::function<void(size_t)> rec = [&](size_t d) {
        if (stopped || aborted) return;
        if (d == n) {
            if (visited >= max_visits) {
                aborted = true;
                return;
            }
            ++visited;
            if (!fn(cur)) stopped = true;
            return;
        }
        const Sort& so = sys.var_sort(static_cast<int>(d));
        for (Value v = so.lo; v <= so.hi && !stopped && !aborted; ++v) {
            cur[d] = v;
            bool ok = true;
            for (const Expr* c : checks[d])
                if (!sys.eval_bound(*c, cur.data(), nullptr)) {
                    ok = false;
                    break;
                }
            if (ok) rec(d + 1);
        }
    };
    rec(0);
    return !aborted;
}

StateSpace enumerate_states(const System& sys, uint64_t budget) {
    StateSpace sp;
    bool done = for_each_state(
        sys,
        [&](const State& s) {
            sp.states.push_back(s);
            return true;
        },
        budget);
    if (!done) throw BudgetExceeded("state space too large to materialize", count_states(sys));
    for (uint32_t i = 0; i < sp.states.size(); ++i) sp.index.emplace(sp.states[i], i);
    return sp;
}

uint32_t StateSpace::rank(const State& s) const {
    auto it = index.find(s);
    if (it == index.end()) throw Error("state not in state space");
    return it->second;
}

std::optional<uint32_t> StateSpace::try_rank(const State& s) const {
    auto it = index.find(s);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

bool extension_exists(const System& sys, const std::vector<std::pair<int, Value>>& fixed) {
    size_t n = sys.vars.size();
    std::vector<std::optional<Value>> pin(n);
    for (const auto& [v, val] : fixed) pin[v] = val;

    std::vector<std::vector<const Expr*>> checks(n + 1);
    std::vector<const Expr*> constant_checks;
    for (const auto& c : sys.bound_constraints()) {
        int m = max_slot(*c);
        if (m < 0)
            constant_checks.push_back(c.get());
        else
            checks[m].push_back(c.get());
    }
    State cur(n, 0);
    for (const Expr* c : constant_checks)
        if (!sys.eval_bound(*c, cur.data(), nullptr)) return false;
    if (n == 0) return true;

    std::function<bool(size_t)> rec = [&](size_t d) -> bool {
        if (d == n) return true;
        const Sort& so = sys.var_sort(static_cast<int>(d));
        Value lo = pin[d] ? *pin[d] : so.lo;
        Value hi = pin[d] ? *pin[d] : so.hi;
        if (!so.contains(lo)) return false;
        for (Value v = lo; v <= hi; ++v) {
            cur[d] = v;
            bool ok = true;
            for (const Expr* c : checks[d])
                if (!sys.eval_bound(*c, cur.data(), nullptr)) {
                    ok = false;
                    break;
                }
            if (ok && rec(d + 1)) return true;
        }
        return false;
    };
    return rec(0);
}

int eval_action_expr(const ExprPtr& e, const ParallelAction& f) {
    switch (e->kind) {
        case ExprKind::IntConst:
        case ExprKind::BoolConst:
            return static_cast<int>(e->ival);
        case ExprKind::Var:
            return f[e->slot];
        case ExprKind::And:
            return eval_action_expr(e->args[0], f) && eval_action_expr(e->args[1], f);
        case ExprKind::Or:
            return eval_action_expr(e->args[0], f) || eval_action_expr(e->args[1], f);
        case ExprKind::Not:
            return !eval_action_expr(e->args[0], f);
        default:
            throw Error("invalid action expression");
    }
}

bool is_admissible(const System& sys, const ParallelAction& f) {
    for (const auto& eq : sys.bound_action_constraints())
        if (eval_action_expr(eq.lhs, f) != eval_action_expr(eq.rhs, f)) return false;
    return true;
}

std::vector<ParallelAction> enumerate_admissible(const System& sys) {
    size_t k = sys.actions.size();
    if (k > 24) throw BudgetExceeded("too many actions to enumerate parallel actions", 1ull << k);
    std::vector<ParallelAction> out;
    ParallelAction f(k, 0);
    std::function<void(size_t)> rec = [&](size_t d) {
        if (d == k) {
            if (is_admissible(sys, f)) out.push_back(f);
            return;
        }
        for (uint8_t b = 0; b <= 1; ++b) {
            f[d] = b;
            rec(d + 1);
        }
    };
    rec(0);
    return out;
}

std::vector<State> action_successors(const System& sys, const State& s, int action) {
    const auto& deps = sys.action_deps(action);
    std::vector<Value> pre(deps.size());
    for (size_t i = 0; i < deps.size(); ++i) pre[i] = s[deps[i]];
    std::vector<State> out;
    for (const auto& post : sys.local_succ(action, pre)) {
        State t = s;
        for (size_t i = 0; i < deps.size(); ++i) t[deps[i]] = post[i];
        if (sys.all_constraints_hold(t)) out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool tr_contains(const System& sys, int action, const State& s, const State& t) {
    const auto& deps = sys.action_deps(action);
    size_t di = 0;
    for (size_t v = 0; v < sys.vars.size(); ++v) {
        if (di < deps.size() && static_cast<int>(v) == deps[di]) {
            ++di;
            continue;
        }
        if (s[v] != t[v]) return false;
    }
    std::vector<Value> pre(deps.size()), post(deps.size());
    for (size_t i = 0; i < deps.size(); ++i) {
        pre[i] = s[deps[i]];
        post[i] = t[deps[i]];
    }
    return sys.local_rel_contains(action, pre, post) && sys.all_constraints_hold(t);
}

const std::vector<std::vector<Value>>& TransitionMemo::local_succ(int action,
                                                                  const std::vector<Value>& pre) {
    auto [it, fresh] = memo_[static_cast<size_t>(action)].try_emplace(pre);
    if (fresh) it->second = sys_->local_succ(action, pre);
    return it->second;
}

std::vector<State> transition_disj(const System& sys, const ParallelAction& f, const State& s,
                                   TransitionMemo* memo) {
    if (!is_admissible(sys, f)) throw Error("transition_disj: parallel action not admissible");
    std::vector<int> sel;
    for (size_t a = 0; a < f.size(); ++a)
        if (f[a]) sel.push_back(static_cast<int>(a));
    if (sel.empty()) return {s};

    std::vector<bool> assigned(sys.vars.size(), false);
    State t = s;
    std::vector<State> results;
    // Per-action local successor sets, computed once.
    std::vector<std::vector<std::vector<Value>>> posts_own(memo ? 0 : sel.size());
    std::vector<const std::vector<std::vector<Value>>*> posts(sel.size());
    for (size_t ai = 0; ai < sel.size(); ++ai) {
        const auto& deps = sys.action_deps(sel[ai]);
        std::vector<Value> pre(deps.size());
        for (size_t i = 0; i < deps.size(); ++i) pre[i] = s[deps[i]];
        if (memo) {
            posts[ai] = &memo->local_succ(sel[ai], pre);
        } else {
            posts_own[ai] = sys.local_succ(sel[ai], pre);
            posts[ai] = &posts_own[ai];
        }
        if (posts[ai]->empty()) return {};
    }
    std::function<void(size_t)> rec = [&](size_t ai) {
        if (ai == sel.size()) {
            if (sys.all_constraints_hold(t)) results.push_back(t);
            return;
        }
        int a = sel[ai];
        const auto& deps = sys.action_deps(a);
        for (const auto& post : *posts[ai]) {
            bool ok = true;
            std::vector<int> newly;
            for (size_t i = 0; i < deps.size(); ++i) {
                int v = deps[i];
                if (assigned[v]) {
                    if (t[v] != post[i]) {
                        ok = false;
                        break;
                    }
                } else {
                    newly.push_back(v);
                    t[v] = post[i];
                    assigned[v] = true;
                }
            }
            if (ok) rec(ai + 1);
            for (int v : newly) {
                t[v] = s[v];
                assigned[v] = false;
            }
        }
    };
    rec(0);
    std::sort(results.begin(), results.end());
    results.erase(std::unique(results.begin(), results.end()), results.end());
    return results;
}

bool disj_applicable(const System& sys, const ParallelAction& f, const State& s) {
    std::vector<int> sel;
    for (size_t a = 0; a < f.size(); ++a)
        if (f[a]) sel.push_back(static_cast<int>(a));

    // Extendable local posts per selected action.
    std::vector<std::vector<std::vector<Value>>> posts(sel.size());
    for (size_t k = 0; k < sel.size(); ++k) {
        int a = sel[k];
        const auto& deps = sys.action_deps(a);
        std::vector<Value> pre(deps.size());
        for (size_t i = 0; i < deps.size(); ++i) pre[i] = s[deps[i]];
        for (const auto& post : sys.local_succ(a, pre)) {
            std::vector<std::pair<int, Value>> fixed;
            for (size_t i = 0; i < deps.size(); ++i) fixed.emplace_back(deps[i], post[i]);
            if (extension_exists(sys, fixed)) posts[k].push_back(post);
        }
        if (posts[k].empty()) return false;  // hypothesis: successors exist for every action
    }
    // All choices must agree on shared variables.
    for (size_t k1 = 0; k1 < sel.size(); ++k1) {
        for (size_t k2 = k1; k2 < sel.size(); ++k2) {
            const auto& d1 = sys.action_deps(sel[k1]);
            const auto& d2 = sys.action_deps(sel[k2]);
            for (size_t i = 0; i < d1.size(); ++i) {
                auto it = std::find(d2.begin(), d2.end(), d1[i]);
                if (it == d2.end()) continue;
                size_t j = static_cast<size_t>(it - d2.begin());
                std::set<Value> v1, v2;
                for (const auto& p : posts[k1]) v1.insert(p[i]);
                for (const auto& p : posts[k2]) v2.insert(p[j]);
                if (v1.size() != 1 || v2.size() != 1 || *v1.begin() != *v2.begin()) return false;
            }
        }
    }
    return true;
}

namespace {

// Actions a, b are identified for (Indep) sequentialization only when the
// equation a = b is a C generator and they are the same action in substance:
// equal dependency sets and equal local relations.
bool same_action_substance(const System& sys, int a, int b) {
    if (sys.action_deps(a) != sys.action_deps(b)) return false;
    uint64_t dom = sys.local_domain_size(a);
    if (dom > 100'000) return false;  // conservatively keep them distinct
    bool eq = true;
    sys.for_each_local(a, [&](const std::vector<Value>& pre) {
        if (!eq) return;
        auto sa = sys.local_succ(a, pre);
        auto sb = sys.local_succ(b, pre);
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) eq = false;
    });
    return eq;
}

}  // namespace

std::vector<int> indep_representatives(const System& sys, const ParallelAction& f) {
    size_t k = sys.actions.size();
    std::vector<int> parent(k);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& eq : sys.bound_action_constraints()) {
        if (eq.lhs->kind == ExprKind::Var && eq.rhs->kind == ExprKind::Var) {
            int a = find(eq.lhs->slot), b = find(eq.rhs->slot);
            if (a != b && same_action_substance(sys, eq.lhs->slot, eq.rhs->slot))
                parent[std::max(a, b)] = std::min(a, b);
        }
    }
    // Lexicographically least name per class.
    std::map<int, int> rep;
    for (size_t a = 0; a < k; ++a) {
        int r = find(static_cast<int>(a));
        auto it = rep.find(r);
        if (it == rep.end() || sys.actions[a].name < sys.actions[it->second].name)
            rep[r] = static_cast<int>(a);
    }
    std::set<int> selected;
    for (size_t a = 0; a < k; ++a)
        if (f[a]) selected.insert(rep.at(find(static_cast<int>(a))));
    return {selected.begin(), selected.end()};
}

namespace {

std::set<State> run_order(const System& sys, const std::vector<int>& order, const State& s) {
    std::set<State> cur = {s};
    for (int a : order) {
        std::set<State> next;
        for (const auto& st : cur)
            for (auto& t : action_successors(sys, st, a)) next.insert(std::move(t));
        cur = std::move(next);
        if (cur.empty()) break;
    }
    return cur;
}

}  // namespace

IndepResult transition_indep(const System& sys, const ParallelAction& f, const State& s) {
    if (!is_admissible(sys, f)) throw Error("transition_indep: parallel action not admissible");
    IndepResult res;
    std::vector<int> reps = indep_representatives(sys, f);
    if (reps.empty()) {
        res.successors = {s};
        return res;
    }
    if (reps.size() > 7)
        throw BudgetExceeded("too many distinct actions for permutation sweep", 1ull << 20);

    std::vector<int> order = reps;
    std::sort(order.begin(), order.end());
    std::set<State> first = run_order(sys, order, s);
    std::vector<int> first_order = order;
    std::set<State> all = first;
    while (std::next_permutation(order.begin(), order.end())) {
        std::set<State> got = run_order(sys, order, s);
        all.insert(got.begin(), got.end());
        if (got != first && !res.violation) {
            IndepOrderViolation v;
            v.order_a = first_order;
            v.order_b = order;
            v.start = s;
            std::ostringstream os;
            os << "order-dependent result from state " << state_to_string(sys, s) << ": [";
            for (size_t i = 0; i < first_order.size(); ++i)
                os << (i ? " " : "") << sys.actions[first_order[i]].name;
            os << "] vs [";
            for (size_t i = 0; i < order.size(); ++i)
                os << (i ? " " : "") << sys.actions[order[i]].name;
            os << "]";
            std::vector<State> diff;
            std::set_symmetric_difference(first.begin(), first.end(), got.begin(), got.end(),
                                          std::back_inserter(diff));
            if (!diff.empty()) os << "; witness final state " << state_to_string(sys, diff.front());
            v.detail = os.str();
            res.violation = std::move(v);
        }
    }
    res.successors.assign(all.begin(), all.end());
    return res;
}

std::vector<State> transition(const System& sys, const ParallelAction& f, const State& s,
                              TransitionMemo* memo) {
    if (sys.semantics == Semantics::Disj) return transition_disj(sys, f, s, memo);
    return transition_indep(sys, f, s).successors;
}

IndepReport check_indep(const System& sys, uint64_t state_budget) {
    IndepReport rep;
    auto pas = enumerate_admissible(sys);

    // (i) sub-selections of identified actions are admissible.
    for (const auto& f : pas) {
        std::vector<int> reps = indep_representatives(sys, f);
        if (reps.size() > 12) continue;
        // Class members per representative.
        std::vector<std::vector<int>> classes;
        for (int r : reps) {
            ParallelAction probe(sys.actions.size(), 0);
            probe[r] = 1;
            std::vector<int> cls;
            for (size_t a = 0; a < sys.actions.size(); ++a) {
                ParallelAction pa(sys.actions.size(), 0);
                pa[a] = 1;
                if (indep_representatives(sys, pa) == indep_representatives(sys, probe))
                    cls.push_back(static_cast<int>(a));
            }
            classes.push_back(cls);
        }
        for (uint64_t mask = 0; mask < (1ull << reps.size()); ++mask) {
            ParallelAction g(sys.actions.size(), 0);
            for (size_t i = 0; i < reps.size(); ++i)
                if (mask & (1ull << i))
                    for (int a : classes[i]) g[a] = 1;
            if (!is_admissible(sys, g)) {
                rep.subset_violations.push_back({f, g});
            }
        }
    }

    // (ii) permuted executions agree, checked per state.
    rep.complete = for_each_state(
        sys,
        [&](const State& s) {
            ++rep.states_checked;
            for (const auto& f : pas) {
                IndepResult r = transition_indep(sys, f, s);
                if (r.violation) rep.order_violations.push_back(*r.violation);
            }
            return true;
        },
        state_budget);
    return rep;
}

std::string state_to_string(const System& sys, const State& s) {
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < sys.vars.size(); ++i) {
        if (i) os << ",";
        os << sys.vars[i].name << "=" << s[i];
    }
    os << "}";
    return os.str();
}

std::string pa_to_string(const System& sys, const ParallelAction& f) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (size_t a = 0; a < f.size(); ++a) {
        if (!f[a]) continue;
        if (!first) os << ",";
        first = false;
        os << sys.actions[a].name;
    }
    os << "}";
    return os.str();
}

}  // namespace sheafver
