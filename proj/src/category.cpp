#include "sheafver/category.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace sheafver {

namespace {

std::string eq_canonical(const BoolEq& eq) {
    std::string a = expr_to_string(eq.lhs), b = expr_to_string(eq.rhs);
    if (b < a) std::swap(a, b);
    return a + " = " + b;
}

std::set<std::string> constraint_strings(const System& s) {
    std::set<std::string> out;
    for (const auto& c : s.constraints) out.insert(expr_to_string(c));
    return out;
}

std::set<std::string> action_constraint_strings(const System& s) {
    std::set<std::string> out;
    for (const auto& eq : s.action_constraints) out.insert(eq_canonical(eq));
    return out;
}

// Positions of S's action dependencies inside T's (by variable name).
std::vector<int> dep_positions(const System& S, int sa, const System& T, int ta) {
    const auto& sd = S.action_deps(sa);
    const auto& td = T.action_deps(ta);
    std::vector<int> pos;
    for (int v : sd) {
        const std::string& n = S.vars[v].name;
        int found = -1;
        for (size_t i = 0; i < td.size(); ++i)
            if (T.vars[td[i]].name == n) found = static_cast<int>(i);
        if (found < 0) return {};
        pos.push_back(found);
    }
    return pos;
}

bool local_extendable(const System& sys, int action, const std::vector<Value>& local) {
    const auto& deps = sys.action_deps(action);
    std::vector<std::pair<int, Value>> fixed;
    for (size_t i = 0; i < deps.size(); ++i) fixed.emplace_back(deps[i], local[i]);
    return extension_exists(sys, fixed);
}

}  // namespace

SubsystemCheck is_subsystem(const System& S, const System& T, uint64_t budget) {
    SubsystemCheck res;
    for (const auto& sn : S.vocab.sig.sorts)
        if (!T.vocab.sig.has_sort(sn)) return {false, "signature: sort " + sn + " missing in super"};
    for (const auto& op : S.vocab.sig.ops) {
        const OpSig* t = T.vocab.sig.find_op(op.name);
        if (!t || !(*t == op)) return {false, "signature: operation " + op.name};
    }
    for (const auto& pr : S.vocab.sig.preds) {
        const PredSig* t = T.vocab.sig.find_pred(pr.name);
        if (!t || !(*t == pr)) return {false, "signature: predicate " + pr.name};
    }
    // Reduct equality on shared symbols.
    for (const auto& sn : S.vocab.sig.sorts) {
        if (!(*S.vocab.find_sort(sn) == *T.vocab.find_sort(sn)))
            return {false, "reduct: carrier of sort " + sn + " differs"};
    }
    for (const auto& op : S.vocab.sig.ops)
        if (S.vocab.model.op_tables.at(op.name) != T.vocab.model.op_tables.at(op.name))
            return {false, "reduct: table of operation " + op.name + " differs"};
    for (const auto& pr : S.vocab.sig.preds)
        if (S.vocab.model.pred_tables.at(pr.name) != T.vocab.model.pred_tables.at(pr.name))
            return {false, "reduct: table of predicate " + pr.name + " differs"};

    for (const auto& v : S.vars) {
        int tv = T.var_index(v.name);
        if (tv < 0 || T.vars[tv].sort != v.sort)
            return {false, "variables: " + v.name + " missing or differently sorted in super"};
    }
    for (const auto& a : S.actions)
        if (T.action_index(a.name) < 0)
            return {false, "actions: " + a.name + " missing in super"};

    // Gamma_S generators are semantic consequences of Gamma_T over M_T.
    for (const auto& g : S.constraints) {
        ExprPtr neg = enot(g);
        ExprPtr bound = bind_state_expr(T, neg);
        uint64_t bad = count_states(T, {bound});
        (void)budget;
        if (bad > 0)
            return {false, "gamma: generator " + expr_to_string(g) +
                               " not a consequence of the super constraints"};
    }
    // C_S consequences of C_T.
    for (const auto& eq : S.action_constraints) {
        // Bind to T's action slots.
        System probe;  // only used to produce bound copies via T
        BoolEq b;
        {
            // Rebuild with T's action indices by name.
            std::function<ExprPtr(const ExprPtr&)> rebind = [&](const ExprPtr& e) -> ExprPtr {
                auto c = clone_expr(e);
                std::function<void(Expr*)> walk = [&](Expr* x) {
                    if (x->kind == ExprKind::Var) {
                        int idx = T.action_index(x->name);
                        if (idx < 0) throw Error("action constraint mentions unknown action " + x->name);
                        x->slot = idx;
                    }
                    for (auto& a : x->args) walk(const_cast<Expr*>(a.get()));
                };
                walk(const_cast<Expr*>(c.get()));
                return c;
            };
            b.lhs = rebind(eq.lhs);
            b.rhs = rebind(eq.rhs);
        }
        (void)probe;
        for (const auto& f : enumerate_admissible(T)) {
            if (eval_action_expr(b.lhs, f) != eval_action_expr(b.rhs, f))
                return {false, "c: equation " + eq_canonical(eq) +
                                   " not a consequence of the super action constraints"};
        }
    }
    res.ok = true;
    return res;
}

InclusionWitness is_transition_connected(const System& S, const System& T, uint64_t budget) {
    InclusionWitness w;
    SubsystemCheck sub = is_subsystem(S, T, budget);
    // Re-derive the individual flags for the witness record.
    w.sig_ok = w.vars_ok = w.actions_ok = w.gamma_ok = w.c_ok = w.reduct_ok = true;
    if (!sub.ok) {
        const std::string& f = sub.failed_clause;
        if (f.rfind("signature", 0) == 0) w.sig_ok = false;
        else if (f.rfind("variables", 0) == 0) w.vars_ok = false;
        else if (f.rfind("actions", 0) == 0) w.actions_ok = false;
        else if (f.rfind("gamma", 0) == 0) w.gamma_ok = false;
        else if (f.rfind("c:", 0) == 0) w.c_ok = false;
        else if (f.rfind("reduct", 0) == 0) w.reduct_ok = false;
        w.detail = f;
        return w;
    }

    // (T1): super actions touching X_S are in A_S with intersected depends.
    w.t1_ok = true;
    std::set<std::string> svars;
    for (const auto& v : S.vars) svars.insert(v.name);
    for (size_t ta = 0; ta < T.actions.size(); ++ta) {
        std::vector<std::string> inter;
        for (int v : T.action_deps(static_cast<int>(ta)))
            if (svars.count(T.vars[v].name)) inter.push_back(T.vars[v].name);
        if (inter.empty()) continue;
        int sa = S.action_index(T.actions[ta].name);
        if (sa < 0) {
            w.t1_ok = false;
            w.detail = "(T1): action " + T.actions[ta].name + " touches shared variables but is absent";
            return w;
        }
        std::vector<std::string> sdeps;
        for (int v : S.action_deps(sa)) sdeps.push_back(S.vars[v].name);
        if (sdeps != inter) {
            w.t1_ok = false;
            w.detail = "(T1): action " + T.actions[ta].name + " has X_S^a != X_T^a of " +
                       std::to_string(inter.size()) + " shared variables";
            return w;
        }
    }

    // (T2): super transition pairs restrict into the sub relation.
    w.t2_ok = true;
    for (size_t sa = 0; sa < S.actions.size(); ++sa) {
        int ta = T.action_index(S.actions[sa].name);
        if (ta < 0) continue;

        // Structural shortcut: an intersection relation with S as one of its
        // sources restricts into S's relation by construction.
        const TransitionSpec& tspec = T.actions[ta].spec;
        if (tspec.form == TransitionSpec::Form::Intersection) {
            bool has_source = false;
            for (const auto& src : tspec.sources)
                if (src.system && system_equal(*src.system, S, budget) &&
                    src.action == S.actions[sa].name)
                    has_source = true;
            if (has_source) {
                w.t2_structural = true;
                continue;
            }
        }

        uint64_t dom = T.local_domain_size(ta);
        if (dom > budget)
            throw BudgetExceeded("(T2) check for action " + S.actions[sa].name, dom);
        std::vector<int> pos = dep_positions(S, static_cast<int>(sa), T, ta);
        bool failed = false;
        std::string fail_detail;
        T.for_each_local(ta, [&](const std::vector<Value>& pre) {
            if (failed) return;
            if (!local_extendable(T, ta, pre)) return;
            for (const auto& post : T.local_succ(ta, pre)) {
                if (!local_extendable(T, ta, post)) continue;
                std::vector<Value> spre(pos.size()), spost(pos.size());
                for (size_t i = 0; i < pos.size(); ++i) {
                    spre[i] = pre[pos[i]];
                    spost[i] = post[pos[i]];
                }
                if (!S.local_rel_contains(static_cast<int>(sa), spre, spost)) {
                    failed = true;
                    std::ostringstream os;
                    os << "(T2): action " << S.actions[sa].name << " pair (";
                    for (size_t i = 0; i < pre.size(); ++i) os << (i ? "," : "") << pre[i];
                    os << ") -> (";
                    for (size_t i = 0; i < post.size(); ++i) os << (i ? "," : "") << post[i];
                    os << ") does not restrict into the subsystem relation";
                    fail_detail = os.str();
                    return;
                }
            }
        });
        if (failed) {
            w.t2_ok = false;
            w.detail = fail_detail;
            return w;
        }
    }
    return w;
}

System empty_system(const System& T, const std::string& name) {
    System e;
    e.name = name;
    e.vocab = T.vocab;
    e.semantics = T.semantics;
    e.finalize();
    return e;
}

namespace {

// Restriction-image rows of a source action onto a position subset.
std::vector<std::pair<std::vector<Value>, std::vector<Value>>> image_rows(
    const System& src, int action, const std::vector<int>& pos, uint64_t budget) {
    uint64_t dom = src.local_domain_size(action);
    if (dom > budget)
        throw BudgetExceeded("relation image for action " + src.actions[action].name, dom);
    std::set<std::pair<std::vector<Value>, std::vector<Value>>> rows;
    src.for_each_local(action, [&](const std::vector<Value>& pre) {
        if (!local_extendable(src, action, pre)) return;
        for (const auto& post : src.local_succ(action, pre)) {
            if (!local_extendable(src, action, post)) continue;
            std::vector<Value> rpre(pos.size()), rpost(pos.size());
            for (size_t i = 0; i < pos.size(); ++i) {
                rpre[i] = pre[pos[i]];
                rpost[i] = post[pos[i]];
            }
            rows.emplace(std::move(rpre), std::move(rpost));
        }
    });
    return {rows.begin(), rows.end()};
}

Vocabulary vocab_intersection(const Vocabulary& a, const Vocabulary& b) {
    Vocabulary v;
    for (const auto& sn : a.sig.sorts)
        if (b.sig.has_sort(sn)) {
            v.sig.sorts.push_back(sn);
            v.model.carriers.push_back(*a.model.find_carrier(sn));
        }
    for (const auto& op : a.sig.ops)
        if (b.sig.find_op(op.name)) {
            v.sig.ops.push_back(op);
            v.model.op_tables[op.name] = a.model.op_tables.at(op.name);
        }
    for (const auto& pr : a.sig.preds)
        if (b.sig.find_pred(pr.name)) {
            v.sig.preds.push_back(pr);
            v.model.pred_tables[pr.name] = a.model.pred_tables.at(pr.name);
        }
    return v;
}

}  // namespace

System pullback(const System& S1, const System& S2, const System& S, uint64_t budget) {
    InclusionWitness w1 = is_transition_connected(S1, S, budget);
    InclusionWitness w2 = is_transition_connected(S2, S, budget);
    if (!w1.valid() || !w2.valid())
        throw Error("pullback precondition: arguments are not t.c. subsystems of the ambient (" +
                    (w1.valid() ? w2.detail : w1.detail) + ")");

    System P;
    P.name = S1.name + "&" + S2.name;
    P.semantics = S.semantics;
    P.vocab = vocab_intersection(S1.vocab, S2.vocab);

    std::set<std::string> x2;
    for (const auto& v : S2.vars) x2.insert(v.name);
    for (const auto& v : S1.vars)
        if (x2.count(v.name)) P.vars.push_back(v);

    std::set<std::string> g2 = constraint_strings(S2);
    for (const auto& c : S1.constraints)
        if (g2.count(expr_to_string(c))) P.constraints.push_back(clone_expr(c));

    std::set<std::string> pvars;
    for (const auto& v : P.vars) pvars.insert(v.name);

    for (const auto& a1 : S1.actions) {
        int a2 = S2.action_index(a1.name);
        if (a2 < 0) continue;
        int ia1 = S1.action_index(a1.name);
        // X_12^a = X_S^a ∩ X_1 ∩ X_2 (equals X_1^a ∩ X_2 = X_2^a ∩ X_1).
        std::vector<std::string> deps;
        for (int v : S1.action_deps(ia1))
            if (pvars.count(S1.vars[v].name)) deps.push_back(S1.vars[v].name);
        // An action whose variables all lie outside the shared window is not
        // seen by the pullback; intrinsically variable-free actions
        // (synchronization letters) stay.
        if (deps.empty() &&
            !(S1.action_deps(ia1).empty() && S2.action_deps(a2).empty()))
            continue;

        ActionDef ad;
        ad.name = a1.name;
        ad.depends = deps;
        ad.spec.form = TransitionSpec::Form::Table;

        std::vector<int> pos1, pos2;
        {
            const auto& d1 = S1.action_deps(ia1);
            for (const auto& dn : deps)
                for (size_t i = 0; i < d1.size(); ++i)
                    if (S1.vars[d1[i]].name == dn) pos1.push_back(static_cast<int>(i));
            const auto& d2 = S2.action_deps(a2);
            for (const auto& dn : deps)
                for (size_t i = 0; i < d2.size(); ++i)
                    if (S2.vars[d2[i]].name == dn) pos2.push_back(static_cast<int>(i));
        }
        auto rows = image_rows(S1, ia1, pos1, budget);
        auto rows2 = image_rows(S2, a2, pos2, budget);
        std::set<std::pair<std::vector<Value>, std::vector<Value>>> all(rows.begin(), rows.end());
        all.insert(rows2.begin(), rows2.end());
        ad.spec.rows.assign(all.begin(), all.end());
        P.actions.push_back(std::move(ad));
    }

    std::set<std::string> pacts;
    for (const auto& a : P.actions) pacts.insert(a.name);
    std::set<std::string> c2 = action_constraint_strings(S2);
    for (const auto& eq : S1.action_constraints) {
        if (!c2.count(eq_canonical(eq))) continue;
        std::set<std::string> u, pr;
        collect_vars(eq.lhs, u, pr);
        collect_vars(eq.rhs, u, pr);
        bool inside = true;
        for (const auto& n : u)
            if (!pacts.count(n)) inside = false;
        if (inside) P.action_constraints.push_back({clone_expr(eq.lhs), clone_expr(eq.rhs)});
    }

    P.finalize();

    InclusionWitness wp1 = is_transition_connected(P, S1, budget);
    InclusionWitness wp2 = is_transition_connected(P, S2, budget);
    if (!wp1.valid() || !wp2.valid())
        throw Error("pullback postcondition violated: " +
                    (wp1.valid() ? wp2.detail : wp1.detail));
    return P;
}

SystemPtr colimit(const std::vector<SystemPtr>& family, uint64_t budget) {
    if (family.empty()) throw Error("colimit of an empty family");
    System C;
    C.name = "colim";
    C.semantics = family.front()->semantics;
    for (const auto& m : family)
        if (m->semantics != C.semantics) throw Error("colimit: mixed transition semantics");

    // Union of vocabularies; incompatibilities on shared symbols are errors.
    for (const auto& m : family) {
        for (const auto& sn : m->vocab.sig.sorts) {
            const Sort* mine = C.vocab.find_sort(sn);
            const Sort* theirs = m->vocab.find_sort(sn);
            if (!mine) {
                C.vocab.sig.sorts.push_back(sn);
                C.vocab.model.carriers.push_back(*theirs);
            } else if (!(*mine == *theirs)) {
                throw Error("colimit: incompatible carriers for sort " + sn);
            }
        }
        for (const auto& op : m->vocab.sig.ops) {
            const OpSig* mine = C.vocab.sig.find_op(op.name);
            if (!mine) {
                C.vocab.sig.ops.push_back(op);
                C.vocab.model.op_tables[op.name] = m->vocab.model.op_tables.at(op.name);
            } else if (!(*mine == op) ||
                       C.vocab.model.op_tables.at(op.name) != m->vocab.model.op_tables.at(op.name)) {
                throw Error("colimit: incompatible models for operation " + op.name);
            }
        }
        for (const auto& pr : m->vocab.sig.preds) {
            const PredSig* mine = C.vocab.sig.find_pred(pr.name);
            if (!mine) {
                C.vocab.sig.preds.push_back(pr);
                C.vocab.model.pred_tables[pr.name] = m->vocab.model.pred_tables.at(pr.name);
            } else if (!(*mine == pr) || C.vocab.model.pred_tables.at(pr.name) !=
                                             m->vocab.model.pred_tables.at(pr.name)) {
                throw Error("colimit: incompatible models for predicate " + pr.name);
            }
        }
    }

    for (const auto& m : family)
        for (const auto& v : m->vars) {
            int idx = C.var_index(v.name);
            if (idx < 0) C.vars.push_back(v);
            else if (C.vars[idx].sort != v.sort)
                throw Error("colimit: variable " + v.name + " has conflicting sorts");
        }

    std::set<std::string> gseen;
    for (const auto& m : family)
        for (const auto& c : m->constraints)
            if (gseen.insert(expr_to_string(c)).second) C.constraints.push_back(clone_expr(c));

    // Actions: union of dependency sets, intersection of restricted relations.
    std::vector<std::string> action_names;
    for (const auto& m : family)
        for (const auto& a : m->actions)
            if (std::find(action_names.begin(), action_names.end(), a.name) == action_names.end())
                action_names.push_back(a.name);
    for (const auto& an : action_names) {
        std::vector<std::pair<SystemPtr, int>> owners;
        for (const auto& m : family) {
            int ai = m->action_index(an);
            if (ai >= 0) owners.emplace_back(m, ai);
        }
        std::set<std::string> dep_names;
        for (const auto& [m, ai] : owners)
            for (int v : m->action_deps(ai)) dep_names.insert(m->vars[v].name);

        ActionDef ad;
        ad.name = an;
        ad.depends.assign(dep_names.begin(), dep_names.end());
        if (owners.size() == 1) {
            ad.spec = owners.front().first->actions[owners.front().second].spec;
            // Deep-copy expressions so finalize() can rebind them safely.
            if (ad.spec.guard) ad.spec.guard = clone_expr(ad.spec.guard);
            for (auto& [vn, up] : ad.spec.updates) {
                if (up.e1) up.e1 = clone_expr(up.e1);
                if (up.e2) up.e2 = clone_expr(up.e2);
            }
            if (ad.spec.post) ad.spec.post = clone_expr(ad.spec.post);
            ad.depends = owners.front().first->actions[owners.front().second].depends;
        } else {
            ad.spec.form = TransitionSpec::Form::Intersection;
            for (const auto& [m, ai] : owners)
                ad.spec.sources.push_back({m, an});
            (void)budget;
        }
        C.actions.push_back(std::move(ad));
    }

    std::set<std::string> cseen;
    for (const auto& m : family)
        for (const auto& eq : m->action_constraints)
            if (cseen.insert(eq_canonical(eq)).second)
                C.action_constraints.push_back({clone_expr(eq.lhs), clone_expr(eq.rhs)});

    C.finalize();
    return std::make_shared<const System>(std::move(C));
}

bool system_equal(const System& A, const System& B, uint64_t budget) {
    if (!(A.vocab == B.vocab)) return false;
    auto vs = [](const System& s) {
        std::set<std::pair<std::string, std::string>> out;
        for (const auto& v : s.vars) out.emplace(v.name, v.sort);
        return out;
    };
    if (vs(A) != vs(B)) return false;
    if (constraint_strings(A) != constraint_strings(B)) return false;
    if (action_constraint_strings(A) != action_constraint_strings(B)) return false;
    if (A.semantics != B.semantics) return false;
    if (A.actions.size() != B.actions.size()) return false;
    for (const auto& a : A.actions) {
        int bi = B.action_index(a.name);
        if (bi < 0) return false;
        int ai = A.action_index(a.name);
        std::set<std::string> da, db;
        for (int v : A.action_deps(ai)) da.insert(A.vars[v].name);
        for (int v : B.action_deps(bi)) db.insert(B.vars[v].name);
        if (da != db) return false;
        uint64_t dom = A.local_domain_size(ai);
        if (dom > budget)
            throw BudgetExceeded("relation comparison for action " + a.name, dom);
        // Semantic relation equality; the canonical local orders of the two
        // systems may disagree, so align columns by variable name.
        const auto& adeps = A.action_deps(ai);
        const auto& bdeps = B.action_deps(bi);
        std::vector<int> a_to_b(adeps.size());
        for (size_t x = 0; x < adeps.size(); ++x) {
            const std::string& n = A.vars[adeps[x]].name;
            for (size_t y = 0; y < bdeps.size(); ++y)
                if (B.vars[bdeps[y]].name == n) a_to_b[x] = static_cast<int>(y);
        }
        auto to_b = [&](const std::vector<Value>& va) {
            std::vector<Value> vb(va.size());
            for (size_t x = 0; x < va.size(); ++x) vb[a_to_b[x]] = va[x];
            return vb;
        };
        bool equal = true;
        A.for_each_local(ai, [&](const std::vector<Value>& pre) {
            if (!equal) return;
            auto sa = A.local_succ(ai, pre);
            for (auto& v : sa) v = to_b(v);
            auto sb = B.local_succ(bi, to_b(pre));
            std::sort(sa.begin(), sa.end());
            std::sort(sb.begin(), sb.end());
            if (sa != sb) equal = false;
        });
        if (!equal) return false;
    }
    return true;
}

System restrict_system(const System& T, const std::vector<std::string>& keep_vars,
                       const std::string& name, uint64_t budget) {
    std::set<std::string> keep(keep_vars.begin(), keep_vars.end());
    System R;
    R.name = name;
    R.vocab = T.vocab;
    R.semantics = T.semantics;
    for (const auto& v : T.vars)
        if (keep.count(v.name)) R.vars.push_back(v);

    for (const auto& c : T.constraints) {
        std::set<std::string> u, p;
        collect_vars(c, u, p);
        bool inside = true;
        for (const auto& n : u)
            if (!keep.count(n)) inside = false;
        if (inside) R.constraints.push_back(clone_expr(c));
    }

    std::set<std::string> kept_actions;
    for (size_t ta = 0; ta < T.actions.size(); ++ta) {
        std::vector<std::string> deps;
        std::vector<int> pos;
        const auto& td = T.action_deps(static_cast<int>(ta));
        for (size_t i = 0; i < td.size(); ++i)
            if (keep.count(T.vars[td[i]].name)) {
                deps.push_back(T.vars[td[i]].name);
                pos.push_back(static_cast<int>(i));
            }
        if (deps.empty()) continue;
        kept_actions.insert(T.actions[ta].name);
        ActionDef ad;
        ad.name = T.actions[ta].name;
        ad.depends = deps;
        ad.spec.form = TransitionSpec::Form::Table;
        ad.spec.rows = image_rows(T, static_cast<int>(ta), pos, budget);
        R.actions.push_back(std::move(ad));
    }

    for (const auto& eq : T.action_constraints) {
        std::set<std::string> u, p;
        collect_vars(eq.lhs, u, p);
        collect_vars(eq.rhs, u, p);
        bool inside = true;
        for (const auto& n : u)
            if (!kept_actions.count(n)) inside = false;
        if (inside) R.action_constraints.push_back({clone_expr(eq.lhs), clone_expr(eq.rhs)});
    }
    R.finalize();
    return R;
}

}  // namespace sheafver
