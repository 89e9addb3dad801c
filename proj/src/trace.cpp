#include "sheafver/trace.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace sheafver {

namespace {

std::vector<ParallelAction> nonzero_admissible(const System& sys) {
    std::vector<ParallelAction> out;
    for (auto& f : enumerate_admissible(sys)) {
        bool zero = true;
        for (uint8_t b : f) zero &= (b == 0);
        if (!zero) out.push_back(std::move(f));
    }
    return out;
}

// Restriction of a parallel action to the sub system's action set; empty
// selections are the identity letter (epsilon).
int project_letter(const std::vector<ParallelAction>& sub_letters,
                   const std::map<ParallelAction, int>& sub_index, const System& sub,
                   const System& sup, const ParallelAction& f) {
    ParallelAction restricted(sub.actions.size(), 0);
    bool zero = true;
    for (size_t a = 0; a < sub.actions.size(); ++a) {
        int idx = sup.action_index(sub.actions[a].name);
        restricted[a] = f[idx];
        zero &= (restricted[a] == 0);
    }
    if (zero) return -1;
    auto it = sub_index.find(restricted);
    if (it == sub_index.end()) throw Error("projected letter is not admissible in " + sub.name);
    (void)sub_letters;
    return it->second;
}

}  // namespace

std::string PaWordCtx::letter_name(int member, int letter) const {
    const System& sys = member < 0 ? *colim : *site->members[member];
    const ParallelAction& f = member < 0 ? colim_letters[letter] : letters[member][letter];
    return pa_to_string(sys, f);
}

PaWordCtx make_pa_word_ctx(const Site& site, SystemPtr colim) {
    PaWordCtx ctx;
    ctx.site = &site;
    ctx.colim = std::move(colim);
    std::vector<std::map<ParallelAction, int>> index;
    for (const auto& m : site.members) {
        ctx.letters.push_back(nonzero_admissible(*m));
        std::map<ParallelAction, int> idx;
        for (size_t i = 0; i < ctx.letters.back().size(); ++i)
            idx.emplace(ctx.letters.back()[i], static_cast<int>(i));
        index.push_back(std::move(idx));
    }
    ctx.colim_letters = nonzero_admissible(*ctx.colim);
    for (size_t m = 0; m < site.members.size(); ++m) {
        std::vector<int> proj;
        for (const auto& f : ctx.colim_letters)
            proj.push_back(project_letter(ctx.letters[m], index[m], *site.members[m], *ctx.colim, f));
        ctx.colim_proj.push_back(std::move(proj));
    }
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j) {
            if (i == j || !site.leq[i][j]) continue;
            std::vector<int> proj;
            for (const auto& f : ctx.letters[j])
                proj.push_back(
                    project_letter(ctx.letters[i], index[i], *site.members[i], *site.members[j], f));
            ctx.member_proj[{static_cast<int>(i), static_cast<int>(j)}] = std::move(proj);
        }
    return ctx;
}

Word project_colim_word(const PaWordCtx& ctx, const Word& w, int member) {
    Word out;
    for (int l : w) {
        int p = ctx.colim_proj[member][l];
        if (p >= 0) out.push_back(p);
    }
    return out;
}

Word project_member_word(const PaWordCtx& ctx, int sub, int sup, const Word& w) {
    if (sub == sup) return w;
    const auto& proj = ctx.member_proj.at({sub, sup});
    Word out;
    for (int l : w) {
        int p = proj[l];
        if (p >= 0) out.push_back(p);
    }
    return out;
}

std::string word_to_string(const PaWordCtx& ctx, int member, const Word& w) {
    if (w.empty()) return "eps";
    std::ostringstream os;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) os << ".";
        os << ctx.letter_name(member, w[i]);
    }
    return os.str();
}

namespace {

std::vector<Word> words_up_to(size_t alphabet, int length_bound) {
    std::vector<Word> out = {{}};
    size_t begin = 0;
    for (int len = 1; len <= length_bound; ++len) {
        size_t end = out.size();
        for (size_t i = begin; i < end; ++i)
            for (size_t l = 0; l < alphabet; ++l) {
                Word w = out[i];
                w.push_back(static_cast<int>(l));
                out.push_back(std::move(w));
            }
        begin = end;
    }
    return out;
}

}  // namespace

WordTable make_word_table(const PaWordCtx& ctx, int length_bound) {
    WordTable t;
    t.length_bound = length_bound;
    t.table.site = ctx.site;
    t.table.functor_name = "M" + std::to_string(length_bound);
    for (size_t m = 0; m < ctx.site->members.size(); ++m) {
        t.words.push_back(words_up_to(ctx.letters[m].size(), length_bound));
        std::map<Word, uint32_t> idx;
        for (uint32_t i = 0; i < t.words.back().size(); ++i) idx.emplace(t.words.back()[i], i);
        t.index.push_back(std::move(idx));
        t.table.local_count.push_back(t.words.back().size());
    }
    for (size_t i = 0; i < ctx.site->members.size(); ++i)
        for (size_t j = 0; j < ctx.site->members.size(); ++j) {
            if (i == j || !ctx.site->leq[i][j]) continue;
            std::vector<uint32_t> map(t.words[j].size());
            for (uint32_t w = 0; w < t.words[j].size(); ++w)
                map[w] = t.index[i].at(
                    project_member_word(ctx, static_cast<int>(i), static_cast<int>(j), t.words[j][w]));
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    const PaWordCtx* pctx = &ctx;
    auto words = t.words;
    t.table.show = [pctx, words](int m, uint32_t idx) {
        return word_to_string(*pctx, m, words[m][idx]);
    };
    return t;
}

std::optional<Word> word_preimage(const PaWordCtx& ctx, const WordTable& wt,
                                  const SectionTuple& family) {
    size_t n = ctx.site->members.size();
    std::vector<Word> targets(n);
    size_t total = 0;
    for (size_t m = 0; m < n; ++m) {
        targets[m] = wt.words[m][family[m]];
        total += targets[m].size();
    }
    std::vector<size_t> consumed(n, 0);
    Word cur;
    std::function<bool()> rec = [&]() -> bool {
        bool done = true;
        for (size_t m = 0; m < n; ++m) done &= (consumed[m] == targets[m].size());
        if (done) return true;
        if (cur.size() >= total) return false;
        for (size_t l = 0; l < ctx.colim_letters.size(); ++l) {
            bool ok = true;
            std::vector<size_t> advanced;
            for (size_t m = 0; m < n && ok; ++m) {
                int p = ctx.colim_proj[m][l];
                if (p < 0) continue;
                if (consumed[m] >= targets[m].size() ||
                    targets[m][consumed[m]] != p) {
                    ok = false;
                    break;
                }
                advanced.push_back(m);
            }
            if (!ok) continue;
            for (size_t m : advanced) ++consumed[m];
            cur.push_back(static_cast<int>(l));
            if (rec()) return true;
            cur.pop_back();
            for (size_t m : advanced) --consumed[m];
        }
        return false;
    };
    if (rec()) return cur;
    return std::nullopt;
}

PMapReport p_map_analyze(const PaWordCtx& ctx, const WordTable& wt, int length_bound,
                         size_t max_witnesses) {
    PMapReport rep;
    size_t n = ctx.site->members.size();
    std::map<SectionTuple, Word> seen;
    for (const auto& w : words_up_to(ctx.colim_letters.size(), length_bound)) {
        ++rep.words_checked;
        SectionTuple image(n);
        for (size_t m = 0; m < n; ++m)
            image[m] = wt.index[m].at(project_colim_word(ctx, w, static_cast<int>(m)));
        auto [it, fresh] = seen.emplace(image, w);
        if (!fresh && it->second != w && rep.collisions.size() < max_witnesses)
            rep.collisions.push_back({it->second, w, image});
    }
    wt.table.for_each_section(
        ctx.site->full_open,
        [&](const SectionTuple& family) {
            ++rep.families_checked;
            if (!word_preimage(ctx, wt, family) && rep.no_preimage.size() < max_witnesses)
                rep.no_preimage.push_back(family);
            return true;
        },
        10'000'000);
    return rep;
}

// ---- partially commutative monoids ----

int DependenceGraph::vertex(const std::string& name) const {
    for (size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == name) return static_cast<int>(i);
    return -1;
}

DependenceGraph dependence_graph(const System& sys) {
    DependenceGraph g;
    for (const auto& a : sys.actions) g.vertices.push_back(a.name);
    size_t n = g.vertices.size();
    g.adj.assign(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i) g.adj[i][i] = true;
    for (const auto& eq : sys.action_constraints) {
        // Required shape: a & b = 0.
        const Expr& l = *eq.lhs;
        const Expr& r = *eq.rhs;
        bool rhs_zero = (r.kind == ExprKind::IntConst || r.kind == ExprKind::BoolConst) && r.ival == 0;
        bool lhs_and = l.kind == ExprKind::And && l.args[0]->kind == ExprKind::Var &&
                       l.args[1]->kind == ExprKind::Var;
        if (!rhs_zero || !lhs_and)
            throw ValidationError("dependence graph requires action constraints of the form "
                                  "a && b = 0; offending generator: " +
                                  expr_to_string(eq.lhs) + " = " + expr_to_string(eq.rhs));
        int a = g.vertex(l.args[0]->name);
        int b = g.vertex(l.args[1]->name);
        g.adj[a][b] = g.adj[b][a] = true;
    }
    return g;
}

Word Trace::flat() const {
    Word out;
    for (const auto& step : steps) out.insert(out.end(), step.begin(), step.end());
    return out;
}

Trace foata_normal_form(const DependenceGraph& g, const Word& w) {
    // Level of each occurrence: one above the highest level among earlier
    // occurrences of dependent letters.
    std::vector<int> top(g.vertices.size(), 0);
    std::vector<std::vector<int>> steps;
    for (int a : w) {
        int lev = 0;
        for (size_t b = 0; b < g.vertices.size(); ++b)
            if (g.adj[static_cast<size_t>(a)][b]) lev = std::max(lev, top[b]);
        ++lev;
        top[static_cast<size_t>(a)] = lev;
        if (static_cast<size_t>(lev) > steps.size()) steps.emplace_back();
        steps[static_cast<size_t>(lev - 1)].push_back(a);
    }
    for (auto& step : steps)
        std::sort(step.begin(), step.end(),
                  [&](int x, int y) { return g.vertices[x] < g.vertices[y]; });
    Trace t;
    t.steps = std::move(steps);
    return t;
}

bool trace_equal(const DependenceGraph& g, const Word& u, const Word& v) {
    return foata_normal_form(g, u) == foata_normal_form(g, v);
}

std::string trace_to_string(const DependenceGraph& g, const Trace& t) {
    if (t.steps.empty()) return "eps";
    std::ostringstream os;
    for (size_t i = 0; i < t.steps.size(); ++i) {
        if (i) os << ".";
        if (t.steps[i].size() > 1) os << "(";
        for (size_t k = 0; k < t.steps[i].size(); ++k) {
            if (k) os << " ";
            os << g.vertices[t.steps[i][k]];
        }
        if (t.steps[i].size() > 1) os << ")";
    }
    return os.str();
}

std::vector<Trace> enumerate_traces(const DependenceGraph& g, int length_bound) {
    std::set<Trace> out;
    for (const auto& w : words_up_to(g.vertices.size(), length_bound))
        out.insert(foata_normal_form(g, w));
    return {out.begin(), out.end()};
}

Trace TraceCtx::project(const Trace& t, int member) const {
    Word w;
    for (int a : t.flat()) {
        int v = member_graphs[member].vertex(colim_graph.vertices[a]);
        if (v >= 0) w.push_back(v);
    }
    return foata_normal_form(member_graphs[member], w);
}

Trace TraceCtx::project_member(int sub, int sup, const Trace& t) const {
    if (sub == sup) return t;
    Word w;
    for (int a : t.flat()) {
        int v = member_graphs[sub].vertex(member_graphs[sup].vertices[a]);
        if (v >= 0) w.push_back(v);
    }
    return foata_normal_form(member_graphs[sub], w);
}

TraceCtx make_trace_ctx(const Site& site, SystemPtr colim) {
    TraceCtx ctx;
    ctx.site = &site;
    ctx.colim = std::move(colim);
    ctx.colim_graph = dependence_graph(*ctx.colim);
    for (const auto& m : site.members) ctx.member_graphs.push_back(dependence_graph(*m));
    return ctx;
}

STopologyReport s_topology_check(const TraceCtx& ctx, int length_bound) {
    STopologyReport rep;
    auto traces = enumerate_traces(ctx.colim_graph, length_bound);
    size_t n = ctx.site->members.size();
    // Projections of every trace to every member, precomputed.
    std::vector<std::vector<Trace>> proj(traces.size(), std::vector<Trace>(n));
    for (size_t t = 0; t < traces.size(); ++t)
        for (size_t m = 0; m < n; ++m) proj[t][m] = ctx.project(traces[t], static_cast<int>(m));

    for (size_t t1 = 0; t1 < traces.size(); ++t1)
        for (size_t t2 = t1 + 1; t2 < traces.size(); ++t2) {
            for (size_t i = 0; i < n; ++i) {
                if (proj[t1][i] != proj[t2][i]) continue;
                ++rep.pairs_checked;
                // The principal down-set must witness local stability.
                for (size_t j = 0; j < n; ++j) {
                    if (!ctx.site->leq[j][i]) continue;
                    if (proj[t1][j] != proj[t2][j]) {
                        rep.violations.push_back(
                            {traces[t1], traces[t2], static_cast<int>(i),
                             "projections agree at " + ctx.site->members[i]->name +
                                 " but differ at " + ctx.site->members[j]->name +
                                 " in its minimal neighborhood"});
                        break;
                    }
                }
            }
        }
    return rep;
}

TraceTable make_trace_table(const TraceCtx& ctx, int length_bound) {
    TraceTable t;
    t.length_bound = length_bound;
    t.table.site = ctx.site;
    t.table.functor_name = "Tm" + std::to_string(length_bound);
    size_t n = ctx.site->members.size();
    for (size_t m = 0; m < n; ++m) {
        t.traces.push_back(enumerate_traces(ctx.member_graphs[m], length_bound));
        std::map<Trace, uint32_t> idx;
        for (uint32_t i = 0; i < t.traces.back().size(); ++i) idx.emplace(t.traces.back()[i], i);
        t.index.push_back(std::move(idx));
        t.table.local_count.push_back(t.traces.back().size());
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j || !ctx.site->leq[i][j]) continue;
            std::vector<uint32_t> map(t.traces[j].size());
            for (uint32_t x = 0; x < t.traces[j].size(); ++x)
                map[x] = t.index[i].at(
                    ctx.project_member(static_cast<int>(i), static_cast<int>(j), t.traces[j][x]));
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    const TraceCtx* pctx = &ctx;
    auto traces = t.traces;
    t.table.show = [pctx, traces](int m, uint32_t idx) {
        return trace_to_string(pctx->member_graphs[m], traces[m][idx]);
    };
    return t;
}

std::vector<SectionTuple> trace_global_sections(const TraceTable& tt, uint64_t budget) {
    return tt.table.materialize(tt.table.site->full_open, budget);
}

bool choice_continuous(const TraceCtx& ctx, const TraceTable& tt, const SectionTuple& choice) {
    // Continuity against the subbasis [m](U): every preimage is open. Trace
    // pairs up to the table bound suffice: a violation at S_j -> S_i is
    // exposed by a word over A_i embedding the chosen trace at S_i.
    size_t n = ctx.site->members.size();
    auto colim_traces = enumerate_traces(ctx.colim_graph, tt.length_bound);
    for (const auto& m : colim_traces) {
        std::vector<bool> matches(n, false);
        for (size_t i = 0; i < n; ++i)
            matches[i] = (ctx.project(m, static_cast<int>(i)) == tt.traces[i][choice[i]]);
        for (const auto& u : ctx.site->opens) {
            uint32_t pre = 0;
            for (int i : u.members)
                if (matches[static_cast<size_t>(i)]) pre |= (1u << i);
            if (!ctx.site->is_down_closed(pre)) return false;
        }
    }
    return true;
}

ContinuityAgreement continuity_agreement_check(const TraceCtx& ctx, const TraceTable& tt,
                                               uint64_t budget) {
    ContinuityAgreement rep;
    size_t n = ctx.site->members.size();
    uint64_t total = 1;
    for (size_t m = 0; m < n; ++m) {
        total *= tt.table.local_count[m];
        if (total > budget) {
            rep.complete = false;
            return rep;
        }
    }
    SectionTuple choice(n, 0);
    std::function<void(size_t)> rec = [&](size_t d) {
        if (d == n) {
            ++rep.tuples_checked;
            bool commutes = tt.table.is_section(ctx.site->full_open, choice);
            bool continuous = choice_continuous(ctx, tt, choice);
            if (commutes != continuous) ++rep.disagreements;
            if (continuous) ++rep.continuous_count;
            return;
        }
        for (uint64_t x = 0; x < tt.table.local_count[d]; ++x) {
            choice[d] = static_cast<uint32_t>(x);
            rec(d + 1);
        }
    };
    rec(0);
    return rep;
}

namespace {

// Simple chordless cycles of length >= 3, loops ignored. Canonical form:
// smallest vertex first, and the second vertex smaller than the last
// (reflection dedup). A growing chordless path may touch only its
// predecessor; adjacency to the start closes the cycle and forbids
// further growth.
std::vector<std::vector<int>> chordless_cycles(const DependenceGraph& g) {
    size_t n = g.vertices.size();
    std::vector<std::vector<int>> cycles;
    std::vector<int> path;
    std::vector<bool> in_path(n, false);

    std::function<void()> extend = [&]() {
        int start = path[0];
        int last = path.back();
        for (size_t v = 0; v < n; ++v) {
            int next = static_cast<int>(v);
            if (next == last || next <= start || in_path[v]) continue;
            if (!g.adj[last][v]) continue;
            bool chord = false;
            for (size_t a = 1; a + 1 < path.size() && !chord; ++a)
                if (g.adj[path[a]][v]) chord = true;
            if (chord) continue;
            if (path.size() >= 2 && g.adj[path[0]][v]) {
                if (path[1] < next) {
                    path.push_back(next);
                    cycles.push_back(path);
                    path.pop_back();
                }
                continue;  // extending past a start-adjacent vertex makes a chord
            }
            path.push_back(next);
            in_path[v] = true;
            extend();
            in_path[v] = false;
            path.pop_back();
        }
    };

    for (size_t start = 0; start < n; ++start) {
        path = {static_cast<int>(start)};
        in_path.assign(n, false);
        in_path[start] = true;
        extend();
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

}  // namespace

AlphaIsoReport alpha_iso_check(const TraceCtx& ctx) {
    AlphaIsoReport rep;
    const DependenceGraph& g = ctx.colim_graph;
    size_t n = g.vertices.size();

    // Union of member graphs must equal the colimit graph.
    std::vector<std::vector<bool>> un(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i) un[i][i] = true;
    std::set<std::string> member_vertices;
    for (const auto& mg : ctx.member_graphs) {
        for (const auto& v : mg.vertices) member_vertices.insert(v);
        for (size_t a = 0; a < mg.vertices.size(); ++a)
            for (size_t b = 0; b < mg.vertices.size(); ++b)
                if (mg.adj[a][b]) {
                    int ga = g.vertex(mg.vertices[a]);
                    int gb = g.vertex(mg.vertices[b]);
                    un[ga][gb] = true;
                }
    }
    rep.union_covers = member_vertices.size() == n;
    for (size_t a = 0; a < n && rep.union_covers; ++a)
        for (size_t b = 0; b < n && rep.union_covers; ++b)
            if (g.adj[a][b] != un[a][b]) rep.union_covers = false;
    rep.embedding_injective = rep.union_covers;
    if (!rep.union_covers) {
        rep.detail = "member dependence graphs do not exhaust the colimit graph";
        return rep;
    }

    rep.chordless_cycles = chordless_cycles(g);
    rep.isomorphism = true;
    for (const auto& cyc : rep.chordless_cycles) {
        bool covered = false;
        for (const auto& mg : ctx.member_graphs) {
            bool inside = true;
            for (size_t k = 0; k < cyc.size() && inside; ++k) {
                int va = mg.vertex(g.vertices[cyc[k]]);
                int vb = mg.vertex(g.vertices[cyc[(k + 1) % cyc.size()]]);
                if (va < 0 || vb < 0 || !mg.adj[va][vb]) inside = false;
            }
            if (inside) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            rep.isomorphism = false;
            if (!rep.uncovered_cycle) rep.uncovered_cycle = cyc;
        }
    }
    if (rep.uncovered_cycle) {
        std::ostringstream os;
        os << "chordless cycle (";
        for (size_t k = 0; k < rep.uncovered_cycle->size(); ++k) {
            if (k) os << ",";
            os << g.vertices[(*rep.uncovered_cycle)[k]];
        }
        os << ") lies in no member graph";
        rep.detail = os.str();
    }
    return rep;
}

CoarsestTopologyReport coarsest_s_topology_check(const TraceCtx& ctx, int length_bound) {
    CoarsestTopologyReport rep;
    size_t n = ctx.site->members.size();
    auto traces = enumerate_traces(ctx.colim_graph, length_bound);
    std::vector<std::vector<Trace>> proj(traces.size(), std::vector<Trace>(n));
    for (size_t t = 0; t < traces.size(); ++t)
        for (size_t m = 0; m < n; ++m) proj[t][m] = ctx.project(traces[t], static_cast<int>(m));

    std::set<uint32_t> sets;
    sets.insert((n == 0) ? 0 : ((1u << n) - 1));  // empty intersection
    for (size_t t1 = 0; t1 < traces.size(); ++t1)
        for (size_t t2 = t1 + 1; t2 < traces.size(); ++t2) {
            uint32_t eq = 0;
            for (size_t m = 0; m < n; ++m)
                if (proj[t1][m] == proj[t2][m]) eq |= (1u << m);
            sets.insert(eq);
        }
    // Close under finite intersections, then all unions.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<uint32_t> cur(sets.begin(), sets.end());
        for (size_t a = 0; a < cur.size(); ++a)
            for (size_t b = a + 1; b < cur.size(); ++b)
                if (sets.insert(cur[a] & cur[b]).second) changed = true;
    }
    changed = true;
    while (changed) {
        changed = false;
        std::vector<uint32_t> cur(sets.begin(), sets.end());
        for (size_t a = 0; a < cur.size(); ++a)
            for (size_t b = a + 1; b < cur.size(); ++b)
                if (sets.insert(cur[a] | cur[b]).second) changed = true;
    }
    sets.insert(0);
    rep.generated_opens = sets.size();
    rep.site_refines = true;
    for (uint32_t s : sets)
        if (ctx.site->open_index(s) < 0) {
            rep.site_refines = false;
            rep.detail = "generated set not open in the site topology";
            return rep;
        }
    return rep;
}

}  // namespace sheafver
