#include "sheafver/fixtures.hpp"

#include "sheafver/category.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace sheafver {

namespace {

std::string tv(const char* base, int i) {
    std::ostringstream os;
    os << base << "_" << i;
    return os.str();
}

Vocabulary train_vocab(const TrainParams& p) {
    Vocabulary v;
    v.sig.sorts = {"pos", "mode", "idx"};
    v.model.carriers = {
        {"pos", 0, p.pos_max},
        {"mode", 0, static_cast<Value>(p.max_mode)},
        {"idx", 1, static_cast<Value>(p.n + 1)},
    };
    v.sig.ops.push_back({"succ", {"idx"}, "idx"});
    auto& succ = v.model.op_tables["succ"];
    for (Value i = 1; i <= p.n + 1; ++i) succ[{i}] = std::min<Value>(i + 1, p.n + 1);
    v.sig.ops.push_back({"maxSpeed", {"mode"}, "pos"});
    auto& ms = v.model.op_tables["maxSpeed"];
    ms[{0}] = 0;
    for (int j = 1; j <= p.max_mode; ++j) ms[{static_cast<Value>(j)}] =
        static_cast<Value>(p.max_speeds.at(static_cast<size_t>(j - 1)));
    v.sig.ops.push_back({"minSpeed", {}, "pos"});
    v.model.op_tables["minSpeed"][{}] = static_cast<Value>(p.min_speed);
    return v;
}

bool is_fast(const TrainParams& p, int train) {
    return std::find(p.fast_trains.begin(), p.fast_trains.end(), train) != p.fast_trains.end();
}

// Mode assignment cases for follower i: gap = RepPos_{i+1} - RepPos_i over
// the pre-state, thresholds l_0 < ... < l_{m-1}.
ExprPtr mode_rule(const TrainParams& p, int i) {
    ExprPtr gap = esub(evar(tv("RepPos", i + 1)), evar(tv("RepPos", i)));
    ExprPtr mp = eprimed(tv("Mode", i));
    int m = p.max_mode;
    ExprPtr cases =
        eand(ecmp(CmpOp::Le, gap, eint(p.thresholds[0])), ecmp(CmpOp::Eq, mp, eint(0)));
    for (int j = 1; j < m; ++j) {
        ExprPtr c = eand(eand(ecmp(CmpOp::Gt, gap, eint(p.thresholds[j - 1])),
                              ecmp(CmpOp::Le, gap, eint(p.thresholds[j]))),
                         ecmp(CmpOp::Eq, mp, eint(j)));
        cases = eor(cases, c);
    }
    cases = eor(cases, eand(ecmp(CmpOp::Gt, gap, eint(p.thresholds[m - 1])),
                            ecmp(CmpOp::Eq, mp, eint(m))));
    return cases;
}

}  // namespace

System make_train_window(const TrainParams& p, int a, int b) {
    System s;
    s.vocab = train_vocab(p);
    s.semantics = p.semantics;
    {
        std::ostringstream os;
        if (a == 1 && b == p.n) os << "S";
        else if (a > b) os << "Bot";
        else os << "S_" << a << "_" << b;
        s.name = os.str();
    }
    if (a > b) {
        s.finalize();
        return s;
    }

    for (int i = a; i <= b; ++i) s.vars.push_back({tv("TrainIndex", i), "idx"});
    for (int i = a; i <= b; ++i) {
        s.vars.push_back({tv("ActualPos", i), "pos"});
        s.vars.push_back({tv("RepPos", i), "pos"});
        s.vars.push_back({tv("Mode", i), "mode"});
    }

    for (int i = a; i < b; ++i)
        s.constraints.push_back(ecmp(CmpOp::Eq, eop("succ", {evar(tv("TrainIndex", i))}),
                                     evar(tv("TrainIndex", i + 1))));
    if (p.all_or_none_modes && a <= b) {
        ExprPtr all0 = ecmp(CmpOp::Eq, evar(tv("Mode", a)), eint(0));
        ExprPtr allpos = ecmp(CmpOp::Gt, evar(tv("Mode", a)), eint(0));
        for (int i = a + 1; i <= b; ++i) {
            all0 = eand(all0, ecmp(CmpOp::Eq, evar(tv("Mode", i)), eint(0)));
            allpos = eand(allpos, ecmp(CmpOp::Gt, evar(tv("Mode", i)), eint(0)));
        }
        s.constraints.push_back(eor(all0, allpos));
    }

    for (int i = a; i <= b; ++i) {
        ActionDef rep;
        rep.name = tv("report", i);
        rep.depends = {tv("ActualPos", i), tv("RepPos", i), tv("Mode", i)};
        rep.spec.guard = ecmp(CmpOp::Eq, evar(tv("Mode", i)), eint(0));
        rep.spec.updates.push_back(
            {tv("RepPos", i), {TransitionUpdate::Kind::Set, evar(tv("ActualPos", i)), nullptr}});
        s.actions.push_back(std::move(rep));
    }

    {
        ActionDef upd;
        upd.name = "update";
        ExprPtr guard;
        ExprPtr post;
        for (int i = a; i <= b; ++i) {
            upd.depends.push_back(tv("ActualPos", i));
            upd.depends.push_back(tv("RepPos", i));
            upd.depends.push_back(tv("Mode", i));
            ExprPtr g = ecmp(CmpOp::Eq, evar(tv("Mode", i)), eint(0));
            guard = guard ? eand(guard, g) : g;
            upd.spec.updates.push_back(
                {tv("RepPos", i), {TransitionUpdate::Kind::Set, evar(tv("ActualPos", i)), nullptr}});
            if (i < b) {
                upd.spec.updates.push_back(
                    {tv("Mode", i), {TransitionUpdate::Kind::Any, nullptr, nullptr}});
                ExprPtr r = mode_rule(p, i);
                post = post ? eand(post, r) : r;
            } else if (b == p.n) {
                // True leader: any positive mode.
                upd.spec.updates.push_back({tv("Mode", i),
                                            {TransitionUpdate::Kind::Interval, eint(1),
                                             eint(p.max_mode)}});
            } else {
                // Window boundary: its leader is outside, any mode is allowed.
                upd.spec.updates.push_back(
                    {tv("Mode", i), {TransitionUpdate::Kind::Any, nullptr, nullptr}});
            }
        }
        upd.spec.guard = guard;
        upd.spec.post = post;
        s.actions.push_back(std::move(upd));
    }

    for (int i = a; i <= b; ++i) {
        ActionDef mv;
        mv.name = tv("move", i);
        mv.depends = {tv("ActualPos", i), tv("Mode", i)};
        mv.spec.guard = ecmp(CmpOp::Gt, evar(tv("Mode", i)), eint(0));
        ExprPtr lo = eadd(evar(tv("ActualPos", i)), emul(eint(p.dt), eop("minSpeed", {})));
        ExprPtr hi =
            is_fast(p, i)
                ? eadd(evar(tv("ActualPos", i)), eint(p.dt * p.fast_speed))
                : eadd(evar(tv("ActualPos", i)),
                       emul(eint(p.dt), eop("maxSpeed", {evar(tv("Mode", i))})));
        mv.spec.updates.push_back({tv("ActualPos", i), {TransitionUpdate::Kind::Interval, lo, hi}});
        mv.spec.updates.push_back({tv("Mode", i), {TransitionUpdate::Kind::Set, eint(0), nullptr}});
        s.actions.push_back(std::move(mv));
    }

    for (int i = a; i <= b; ++i)
        s.action_constraints.push_back({evar(tv("report", i)), evar("update")});
    for (int i = a; i <= b; ++i)
        s.action_constraints.push_back(
            {eand(evar(tv("report", i)), evar(tv("move", i))), eint(0)});
    for (int i = a; i < b; ++i)
        s.action_constraints.push_back({evar(tv("move", i)), evar(tv("move", i + 1))});
    if (p.force_activity)
        s.action_constraints.push_back({eor(evar("update"), evar(tv("move", a))), eint(1)});

    s.finalize();
    return s;
}

std::vector<ExprPtr> train_safe_constraints(const TrainParams& p, int a, int b) {
    std::vector<ExprPtr> out;
    for (int i = a; i <= b; ++i)
        for (int j = a; j <= b; ++j) {
            if (i == j) continue;
            ExprPtr cond =
                ecmp(CmpOp::Eq, eop("succ", {evar(tv("TrainIndex", i))}), evar(tv("TrainIndex", j)));
            ExprPtr safe = ecmp(CmpOp::Lt, evar(tv("ActualPos", i)),
                                esub(evar(tv("ActualPos", j)), eint(p.safety_gap)));
            out.push_back(eor(enot(cond), safe));
        }
    return out;
}

std::vector<ExprPtr> train_mode_constraints(const TrainParams& p, int a, int b, CmpOp op) {
    (void)p;
    std::vector<ExprPtr> out;
    for (int i = a; i <= b; ++i) out.push_back(ecmp(op, evar(tv("Mode", i)), eint(0)));
    return out;
}

NamedFamily trains_family(const TrainParams& p) {
    NamedFamily fam;
    fam.ambient = std::make_shared<const System>(make_train_system(p));
    System s1 = make_train_window(p, p.k, p.n);
    s1.name = "S1";
    System s2 = make_train_window(p, 1, p.l);
    s2.name = "S2";
    System s12 = make_train_window(p, p.k, p.l);
    s12.name = "S12";
    fam.members.push_back(std::make_shared<const System>(std::move(s1)));
    fam.members.push_back(std::make_shared<const System>(std::move(s2)));
    fam.members.push_back(std::make_shared<const System>(std::move(s12)));
    return fam;
}

NamedFamily train_pair_cover_family(const TrainParams& p) {
    NamedFamily fam;
    fam.ambient = std::make_shared<const System>(make_train_system(p));
    for (int i = 1; i < p.n; ++i) {
        System w = make_train_window(p, i, i + 1);
        fam.members.push_back(std::make_shared<const System>(std::move(w)));
    }
    for (int i = 2; i < p.n; ++i) {
        System w = make_train_window(p, i, i);
        fam.members.push_back(std::make_shared<const System>(std::move(w)));
    }
    if (p.n > 3) {
        System bot = empty_system(*fam.ambient, "Bot");
        fam.members.push_back(std::make_shared<const System>(std::move(bot)));
    }
    return fam;
}

namespace {

System letter_system(const Vocabulary& v, const std::string& name,
                     const std::vector<std::string>& actions,
                     const std::vector<std::pair<std::string, std::string>>& exclusions,
                     Semantics sem) {
    System s;
    s.name = name;
    s.vocab = v;
    s.semantics = sem;
    for (const auto& a : actions) {
        ActionDef ad;
        ad.name = a;
        s.actions.push_back(std::move(ad));
    }
    for (const auto& [x, y] : exclusions)
        s.action_constraints.push_back({eand(evar(x), evar(y)), eint(0)});
    s.finalize();
    return s;
}

}  // namespace

NamedFamily trio_family() {
    Vocabulary v;  // no variables anywhere, so an empty vocabulary suffices
    auto S1 = letter_system(v, "S1", {"a", "b", "d"}, {{"a", "b"}}, Semantics::Disj);
    auto S2 = letter_system(v, "S2", {"b", "c", "e"}, {{"b", "c"}}, Semantics::Disj);
    auto S3 = letter_system(v, "S3", {"a", "c", "f"}, {{"a", "c"}}, Semantics::Disj);
    auto S12 = letter_system(v, "S12", {"b"}, {}, Semantics::Disj);
    auto S23 = letter_system(v, "S23", {"c"}, {}, Semantics::Disj);
    auto S13 = letter_system(v, "S13", {"a"}, {}, Semantics::Disj);
    auto Bot = letter_system(v, "Bot", {}, {}, Semantics::Disj);
    NamedFamily fam;
    for (auto* s : {&S1, &S2, &S3, &S12, &S23, &S13, &Bot})
        fam.members.push_back(std::make_shared<const System>(std::move(*s)));
    fam.ambient = colimit(fam.members);
    return fam;
}

NamedFamily two_train_trace_family() {
    Vocabulary v;
    auto S1 = letter_system(v, "S1", {"update_1", "move_1"}, {{"update_1", "move_1"}},
                            Semantics::Disj);
    auto S2 = letter_system(v, "S2", {"update_2", "move_2"}, {{"update_2", "move_2"}},
                            Semantics::Disj);
    auto Bot = letter_system(v, "Bot", {}, {}, Semantics::Disj);
    NamedFamily fam;
    for (auto* s : {&S1, &S2, &Bot})
        fam.members.push_back(std::make_shared<const System>(std::move(*s)));
    fam.ambient = colimit(fam.members);
    return fam;
}

NamedFamily example8_family() {
    Vocabulary v;
    auto S1 = letter_system(v, "S1", {"report_1", "move_1"}, {{"report_1", "move_1"}},
                            Semantics::Disj);
    auto S2 = letter_system(v, "S2", {"report_2", "move_2"}, {{"report_2", "move_2"}},
                            Semantics::Disj);
    auto Bot = letter_system(v, "Bot", {}, {}, Semantics::Disj);
    NamedFamily fam;
    for (auto* s : {&S1, &S2, &Bot})
        fam.members.push_back(std::make_shared<const System>(std::move(*s)));
    fam.ambient = colimit(fam.members);
    return fam;
}

NamedFamily mod2_clock_family() {
    Vocabulary v;
    v.sig.sorts = {"bit"};
    v.model.carriers = {{"bit", 0, 1}};

    auto make = [&](const std::string& name, const std::string& var, const std::string& act) {
        System s;
        s.name = name;
        s.vocab = v;
        s.vars.push_back({var, "bit"});
        ActionDef tick;
        tick.name = act;
        tick.depends = {var};
        tick.spec.updates.push_back(
            {var, {TransitionUpdate::Kind::Set, esub(eint(1), evar(var)), nullptr}});
        s.actions.push_back(std::move(tick));
        s.action_constraints.push_back({evar(act), eint(1)});  // the clock always ticks
        s.finalize();
        return s;
    };
    auto A = make("A", "c_A", "tick_A");
    auto B = make("B", "c_B", "tick_B");
    System bot;
    bot.name = "Bot";
    bot.vocab = v;
    bot.finalize();

    NamedFamily fam;
    for (auto* s : {&A, &B, &bot}) fam.members.push_back(std::make_shared<const System>(std::move(*s)));
    fam.ambient = colimit(fam.members);
    return fam;
}

System indep_violator_system() {
    System s;
    s.name = "noncommuting";
    s.vocab.sig.sorts = {"d"};
    s.vocab.model.carriers = {{"d", 0, 3}};
    s.vars.push_back({"x", "d"});
    {
        ActionDef a;
        a.name = "incr";
        a.depends = {"x"};
        a.spec.updates.push_back(
            {"x", {TransitionUpdate::Kind::Set, eadd(evar("x"), eint(1)), nullptr}});
        s.actions.push_back(std::move(a));
    }
    {
        ActionDef b;
        b.name = "dbl";
        b.depends = {"x"};
        b.spec.updates.push_back(
            {"x", {TransitionUpdate::Kind::Set, emul(eint(2), evar("x")), nullptr}});
        s.actions.push_back(std::move(b));
    }
    s.semantics = Semantics::Indep;
    s.finalize();
    return s;
}

System example4_system(const TrainParams& p) {
    System s = make_train_window(p, 1, p.n);
    s.name = "S_nocontroller";
    s.semantics = Semantics::Indep;
    // Drop the controller: no update action, reports fire all together.
    std::vector<ActionDef> acts;
    for (auto& a : s.actions)
        if (a.name != "update") acts.push_back(a);
    s.actions = std::move(acts);
    std::vector<BoolEq> cons;
    for (int i = 1; i < p.n; ++i)
        cons.push_back({evar(tv("report", i)), evar(tv("report", i + 1))});
    for (int i = 1; i <= p.n; ++i)
        cons.push_back({eand(evar(tv("report", i)), evar(tv("move", i))), eint(0)});
    for (int i = 1; i < p.n; ++i)
        cons.push_back({evar(tv("move", i)), evar(tv("move", i + 1))});
    s.action_constraints = std::move(cons);
    s.finalize();
    return s;
}

}  // namespace sheafver
