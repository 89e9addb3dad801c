#include "sheafver/presheaf.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <numeric>
#include <sstream>

namespace sheafver {

uint32_t TupleTable::restrict_local(int sub, int sup, uint32_t idx) const {
    if (sub == sup) return idx;
    return rmap.at({sub, sup})[idx];
}

std::vector<std::pair<int, int>> TupleTable::pairs_in(int open_idx) const {
    const Open& u = site->opens[open_idx];
    std::vector<std::pair<int, int>> pairs;
    for (int i : u.members)
        for (int j : u.members)
            if (i != j && site->leq[i][j]) pairs.emplace_back(i, j);
    return pairs;
}

namespace {

// Recursion plan shared by counting and iteration: members appearing as the
// sub side of a constraint are enumerated jointly (sup-first, forcing where
// an assigned sup determines them); the remaining members contribute via
// per-key buckets of locals grouped by their restrictions.
struct CompatPlan {
    std::vector<int> mem;
    std::vector<int> pos_of_member;  // member id -> position in mem, -1 when absent

    std::vector<int> subs;                          // enumeration order (sups first)
    std::vector<std::vector<int>> sub_forcers;      // per subs index: sups inside subs
    std::vector<int> tops;                          // everything else
    std::vector<std::vector<int>> top_subs;         // per top: constraining subs (sorted)

    CompatPlan(const TupleTable& t, const std::vector<int>& mem_,
               const std::vector<std::pair<int, int>>& pairs) {
        mem = mem_;
        int maxm = 0;
        for (int m : mem) maxm = std::max(maxm, m + 1);
        pos_of_member.assign(maxm, -1);
        for (size_t i = 0; i < mem.size(); ++i) pos_of_member[mem[i]] = static_cast<int>(i);

        std::set<int> sub_set;
        for (const auto& [a, b] : pairs) sub_set.insert(a);
        subs.assign(sub_set.begin(), sub_set.end());
        // Sups first: larger principal down-sets come first.
        auto downsize = [&](int m) {
            size_t c = 0;
            for (size_t x = 0; x < t.site->members.size(); ++x)
                if (t.site->leq[x][m]) ++c;
            return c;
        };
        std::sort(subs.begin(), subs.end(), [&](int a, int b) {
            size_t da = downsize(a), db = downsize(b);
            return da != db ? da > db : a < b;
        });
        sub_forcers.resize(subs.size());
        for (size_t i = 0; i < subs.size(); ++i)
            for (const auto& [a, b] : pairs)
                if (a == subs[i] && sub_set.count(b)) sub_forcers[i].push_back(b);

        for (int m : mem)
            if (!sub_set.count(m)) tops.push_back(m);
        top_subs.resize(tops.size());
        for (size_t ti = 0; ti < tops.size(); ++ti) {
            std::set<int> cs;
            for (const auto& [a, b] : pairs)
                if (b == tops[ti]) cs.insert(a);
            top_subs[ti].assign(cs.begin(), cs.end());
        }
    }
};

using BucketKey = std::vector<uint32_t>;

}  // namespace

uint64_t TupleTable::count_compatible(const std::vector<int>& mem,
                                      const std::vector<std::pair<int, int>>& pairs) const {
    if (mem.empty()) return 1;
    CompatPlan plan(*this, mem, pairs);

    // Bucket counts per top.
    std::vector<std::map<BucketKey, uint64_t>> buckets(plan.tops.size());
    for (size_t ti = 0; ti < plan.tops.size(); ++ti) {
        int top = plan.tops[ti];
        if (plan.top_subs[ti].empty()) continue;
        for (uint64_t x = 0; x < local_count[top]; ++x) {
            BucketKey key;
            for (int s : plan.top_subs[ti])
                key.push_back(restrict_local(s, top, static_cast<uint32_t>(x)));
            ++buckets[ti][key];
        }
    }

    std::vector<uint32_t> sub_val(plan.subs.size());
    std::map<int, size_t> sub_pos;
    for (size_t i = 0; i < plan.subs.size(); ++i) sub_pos[plan.subs[i]] = i;

    uint64_t total = 0;
    std::function<void(size_t)> rec = [&](size_t d) {
        if (d == plan.subs.size()) {
            uint64_t prod = 1;
            for (size_t ti = 0; ti < plan.tops.size() && prod; ++ti) {
                if (plan.top_subs[ti].empty()) {
                    prod *= local_count[plan.tops[ti]];
                    continue;
                }
                BucketKey key;
                for (int s : plan.top_subs[ti]) key.push_back(sub_val[sub_pos.at(s)]);
                auto it = buckets[ti].find(key);
                prod = (it == buckets[ti].end()) ? 0 : prod * it->second;
            }
            total += prod;
            return;
        }
        int m = plan.subs[d];
        if (!plan.sub_forcers[d].empty()) {
            uint32_t forced = restrict_local(m, plan.sub_forcers[d][0],
                                             sub_val[sub_pos.at(plan.sub_forcers[d][0])]);
            for (size_t k = 1; k < plan.sub_forcers[d].size(); ++k)
                if (restrict_local(m, plan.sub_forcers[d][k],
                                   sub_val[sub_pos.at(plan.sub_forcers[d][k])]) != forced)
                    return;
            sub_val[d] = forced;
            rec(d + 1);
            return;
        }
        for (uint64_t x = 0; x < local_count[m]; ++x) {
            sub_val[d] = static_cast<uint32_t>(x);
            rec(d + 1);
        }
    };
    rec(0);
    return total;
}

bool TupleTable::for_each_compatible(const std::vector<int>& mem,
                                     const std::vector<std::pair<int, int>>& pairs,
                                     const std::function<bool(const SectionTuple&)>& fn,
                                     uint64_t budget) const {
    if (mem.empty()) {
        if (budget == 0) return false;
        fn({});
        return true;
    }
    CompatPlan plan(*this, mem, pairs);

    std::vector<std::map<BucketKey, std::vector<uint32_t>>> buckets(plan.tops.size());
    for (size_t ti = 0; ti < plan.tops.size(); ++ti) {
        int top = plan.tops[ti];
        if (plan.top_subs[ti].empty()) continue;
        for (uint64_t x = 0; x < local_count[top]; ++x) {
            BucketKey key;
            for (int s : plan.top_subs[ti])
                key.push_back(restrict_local(s, top, static_cast<uint32_t>(x)));
            buckets[ti][key].push_back(static_cast<uint32_t>(x));
        }
    }

    std::vector<uint32_t> sub_val(plan.subs.size());
    std::map<int, size_t> sub_pos;
    for (size_t i = 0; i < plan.subs.size(); ++i) sub_pos[plan.subs[i]] = i;

    SectionTuple tuple(plan.mem.size());
    uint64_t yielded = 0;
    bool stopped = false, aborted = false;

    std::function<void(size_t)> emit_tops = [&](size_t ti) {
        if (stopped || aborted) return;
        if (ti == plan.tops.size()) {
            if (yielded >= budget) {
                aborted = true;
                return;
            }
            ++yielded;
            if (!fn(tuple)) stopped = true;
            return;
        }
        int top = plan.tops[ti];
        int p = plan.pos_of_member[top];
        if (plan.top_subs[ti].empty()) {
            for (uint64_t x = 0; x < local_count[top] && !stopped && !aborted; ++x) {
                tuple[p] = static_cast<uint32_t>(x);
                emit_tops(ti + 1);
            }
            return;
        }
        BucketKey key;
        for (int s : plan.top_subs[ti]) key.push_back(sub_val[sub_pos.at(s)]);
        auto it = buckets[ti].find(key);
        if (it == buckets[ti].end()) return;
        for (uint32_t x : it->second) {
            if (stopped || aborted) return;
            tuple[p] = x;
            emit_tops(ti + 1);
        }
    };

    std::function<void(size_t)> rec = [&](size_t d) {
        if (stopped || aborted) return;
        if (d == plan.subs.size()) {
            emit_tops(0);
            return;
        }
        int m = plan.subs[d];
        int p = plan.pos_of_member[m];
        if (!plan.sub_forcers[d].empty()) {
            uint32_t forced = restrict_local(m, plan.sub_forcers[d][0],
                                             sub_val[sub_pos.at(plan.sub_forcers[d][0])]);
            for (size_t k = 1; k < plan.sub_forcers[d].size(); ++k)
                if (restrict_local(m, plan.sub_forcers[d][k],
                                   sub_val[sub_pos.at(plan.sub_forcers[d][k])]) != forced)
                    return;
            sub_val[d] = forced;
            tuple[p] = forced;
            rec(d + 1);
            return;
        }
        for (uint64_t x = 0; x < local_count[m] && !stopped && !aborted; ++x) {
            sub_val[d] = static_cast<uint32_t>(x);
            tuple[p] = static_cast<uint32_t>(x);
            rec(d + 1);
        }
    };
    rec(0);
    return !aborted;
}

uint64_t TupleTable::sections_count(int open_idx) const {
    return count_compatible(site->opens[open_idx].members, pairs_in(open_idx));
}

bool TupleTable::for_each_section(int open_idx, const std::function<bool(const SectionTuple&)>& fn,
                                  uint64_t budget) const {
    return for_each_compatible(site->opens[open_idx].members, pairs_in(open_idx), fn, budget);
}

std::vector<SectionTuple> TupleTable::materialize(int open_idx, uint64_t budget) const {
    std::vector<SectionTuple> out;
    bool complete = for_each_section(
        open_idx,
        [&](const SectionTuple& s) {
            out.push_back(s);
            return true;
        },
        budget);
    if (!complete)
        throw BudgetExceeded("section set of " + site->open_name(open_idx), sections_count(open_idx));
    std::sort(out.begin(), out.end());
    return out;
}

SectionTuple TupleTable::restrict_section(int open_sup, const SectionTuple& s, int open_sub) const {
    const Open& u = site->opens[open_sup];
    const Open& v = site->opens[open_sub];
    SectionTuple out;
    out.reserve(v.members.size());
    for (int m : v.members) {
        auto it = std::find(u.members.begin(), u.members.end(), m);
        if (it == u.members.end()) throw Error("restrict_section: target not a subset");
        out.push_back(s[static_cast<size_t>(it - u.members.begin())]);
    }
    return out;
}

bool TupleTable::is_section(int open_idx, const SectionTuple& s) const {
    const Open& u = site->opens[open_idx];
    for (size_t a = 0; a < u.members.size(); ++a)
        for (size_t b = 0; b < u.members.size(); ++b) {
            if (a == b) continue;
            int i = u.members[a], j = u.members[b];
            if (site->leq[i][j] && restrict_local(i, j, s[b]) != s[a]) return false;
        }
    return true;
}

std::string TupleTable::section_label(int open_idx, const SectionTuple& s) const {
    const Open& u = site->opens[open_idx];
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < u.members.size(); ++i) {
        if (i) os << "; ";
        os << site->members[u.members[i]]->name << ":";
        os << (show ? show(u.members[i], s[i]) : std::to_string(s[i]));
    }
    os << ")";
    return os.str();
}

TupleTable::FunctorialityReport TupleTable::check_functorial() const {
    FunctorialityReport rep;
    size_t n = site->members.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j || !site->leq[i][j]) continue;
            auto it = rmap.find({static_cast<int>(i), static_cast<int>(j)});
            if (it == rmap.end() || it->second.size() != local_count[j]) {
                rep.ok = false;
                rep.detail = "missing or ill-sized restriction " + site->members[j]->name + " -> " +
                             site->members[i]->name;
                return rep;
            }
        }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            for (size_t k = 0; k < n; ++k) {
                if (i == j || j == k || i == k) continue;
                if (!(site->leq[i][j] && site->leq[j][k])) continue;
                for (uint64_t x = 0; x < local_count[k]; ++x) {
                    uint32_t direct = restrict_local(static_cast<int>(i), static_cast<int>(k),
                                                     static_cast<uint32_t>(x));
                    uint32_t via = restrict_local(
                        static_cast<int>(i), static_cast<int>(j),
                        restrict_local(static_cast<int>(j), static_cast<int>(k),
                                       static_cast<uint32_t>(x)));
                    if (direct != via) {
                        rep.ok = false;
                        std::ostringstream os;
                        os << "restrictions do not compose at " << site->members[k]->name
                           << " element " << x << " via " << site->members[j]->name;
                        rep.detail = os.str();
                        return rep;
                    }
                }
            }
    return rep;
}

uint32_t ExplicitTable::restrict_sec(int sub_open, int sup_open, uint32_t s) const {
    if (sub_open == sup_open) return s;
    return rho.at({sub_open, sup_open})[s];
}

bool ExplicitTable::check_functorial(std::string* detail) const {
    size_t n = site->opens.size();
    for (size_t u = 0; u < n; ++u)
        for (size_t v = 0; v < n; ++v) {
            if (u == v || !site->open_subset(static_cast<int>(u), static_cast<int>(v))) continue;
            auto it = rho.find({static_cast<int>(u), static_cast<int>(v)});
            if (it == rho.end() || it->second.size() != labels[v].size()) {
                if (detail) *detail = "missing restriction " + site->open_name(static_cast<int>(v)) +
                                      " -> " + site->open_name(static_cast<int>(u));
                return false;
            }
        }
    for (size_t u = 0; u < n; ++u)
        for (size_t v = 0; v < n; ++v)
            for (size_t w = 0; w < n; ++w) {
                if (u == v || v == w || u == w) continue;
                if (!site->open_subset(static_cast<int>(u), static_cast<int>(v)) ||
                    !site->open_subset(static_cast<int>(v), static_cast<int>(w)))
                    continue;
                for (uint32_t s = 0; s < labels[w].size(); ++s)
                    if (restrict_sec(static_cast<int>(u), static_cast<int>(w), s) !=
                        restrict_sec(static_cast<int>(u), static_cast<int>(v),
                                     restrict_sec(static_cast<int>(v), static_cast<int>(w), s))) {
                        if (detail)
                            *detail = "restrictions do not compose through " +
                                      site->open_name(static_cast<int>(v));
                        return false;
                    }
            }
    return true;
}

ExplicitTable to_explicit(const TupleTable& t, uint64_t budget) {
    ExplicitTable e;
    e.site = t.site;
    e.functor_name = t.functor_name;
    size_t n = t.site->opens.size();
    std::vector<std::vector<SectionTuple>> secs(n);
    std::vector<std::map<SectionTuple, uint32_t>> index(n);
    e.labels.resize(n);
    for (size_t u = 0; u < n; ++u) {
        secs[u] = t.materialize(static_cast<int>(u), budget);
        for (uint32_t i = 0; i < secs[u].size(); ++i) {
            index[u].emplace(secs[u][i], i);
            e.labels[u].push_back(t.section_label(static_cast<int>(u), secs[u][i]));
        }
    }
    for (size_t u = 0; u < n; ++u)
        for (size_t v = 0; v < n; ++v) {
            if (u == v || !t.site->open_subset(static_cast<int>(u), static_cast<int>(v))) continue;
            std::vector<uint32_t> map(secs[v].size());
            for (uint32_t s = 0; s < secs[v].size(); ++s)
                map[s] = index[u].at(
                    t.restrict_section(static_cast<int>(v), secs[v][s], static_cast<int>(u)));
            e.rho[{static_cast<int>(u), static_cast<int>(v)}] = std::move(map);
        }
    return e;
}

GluingReport check_sheaf(const TupleTable& t, uint64_t budget) {
    GluingReport rep;
    rep.note = "uniqueness is structural for component-wise tables (covers exhaust the open); "
               "existence verified by exact matching-family counts";
    std::map<std::vector<std::pair<int, int>>, uint64_t> cache;
    for (size_t u = 0; u < t.site->opens.size(); ++u) {
        auto count_for = [&](const std::vector<std::pair<int, int>>& pairs) {
            auto it = cache.find(pairs);
            if (it != cache.end()) return it->second;
            uint64_t c = t.count_compatible(t.site->opens[u].members, pairs);
            cache.emplace(pairs, c);
            return c;
        };
        std::vector<std::pair<int, int>> full_pairs = t.pairs_in(static_cast<int>(u));
        std::sort(full_pairs.begin(), full_pairs.end());
        uint64_t sections = count_for(full_pairs);
        for (const auto& cover : all_covers(*t.site, static_cast<int>(u))) {
            std::set<std::pair<int, int>> pset;
            for (int part : cover.parts) {
                auto pp = t.pairs_in(part);
                pset.insert(pp.begin(), pp.end());
            }
            std::vector<std::pair<int, int>> pairs(pset.begin(), pset.end());
            uint64_t families = count_for(pairs);
            ++rep.covers_checked;
            if (families != sections) {
                GluingFinding f;
                f.open = static_cast<int>(u);
                f.cover_parts = cover.parts;
                f.existence_failed = families > sections;
                f.uniqueness_failed = families < sections;
                f.families = families;
                f.sections = sections;
                // A matching family that does not glue, when existence fails.
                t.for_each_compatible(
                    t.site->opens[u].members, pairs,
                    [&](const SectionTuple& s) {
                        if (!t.is_section(static_cast<int>(u), s)) {
                            f.witness = t.section_label(static_cast<int>(u), s);
                            return false;
                        }
                        return true;
                    },
                    budget);
                rep.failures.push_back(std::move(f));
            }
        }
    }
    return rep;
}

GluingReport check_sheaf(const ExplicitTable& t, uint64_t budget) {
    GluingReport rep;
    for (size_t u = 0; u < t.site->opens.size(); ++u) {
        for (const auto& cover : all_covers(*t.site, static_cast<int>(u))) {
            ++rep.covers_checked;
            size_t k = cover.parts.size();
            std::vector<uint32_t> pick(k, 0);
            uint64_t familes_seen = 0;
            bool aborted = false;
            std::function<void(size_t)> rec = [&](size_t d) {
                if (aborted) return;
                if (d == k) {
                    if (++familes_seen > budget) {
                        aborted = true;
                        return;
                    }
                    // Glue candidates in F(u).
                    uint32_t found = 0;
                    uint32_t witness_sec = 0;
                    for (uint32_t s = 0; s < t.labels[u].size(); ++s) {
                        bool match = true;
                        for (size_t p = 0; p < k && match; ++p)
                            if (t.restrict_sec(cover.parts[p], static_cast<int>(u), s) != pick[p])
                                match = false;
                        if (match) {
                            ++found;
                            witness_sec = s;
                        }
                    }
                    if (found != 1) {
                        GluingFinding f;
                        f.open = static_cast<int>(u);
                        f.cover_parts = cover.parts;
                        f.existence_failed = (found == 0);
                        f.uniqueness_failed = (found > 1);
                        f.families = 1;
                        f.sections = found;
                        std::ostringstream os;
                        os << "family(";
                        for (size_t p = 0; p < k; ++p) {
                            if (p) os << "; ";
                            os << t.site->open_name(cover.parts[p]) << ":"
                               << t.labels[cover.parts[p]][pick[p]];
                        }
                        os << ")";
                        if (found > 1) os << " glues to " << found << " sections e.g. "
                                          << t.labels[u][witness_sec];
                        f.witness = os.str();
                        rep.failures.push_back(std::move(f));
                    }
                    return;
                }
                for (uint32_t s = 0; s < t.labels[cover.parts[d]].size(); ++s) {
                    // Pairwise compatibility with already chosen parts.
                    bool ok = true;
                    for (size_t p = 0; p < d && ok; ++p) {
                        int inter = t.site->open_intersection(cover.parts[p], cover.parts[d]);
                        if (t.restrict_sec(inter, cover.parts[d], s) !=
                            t.restrict_sec(inter, cover.parts[p], pick[p]))
                            ok = false;
                    }
                    if (!ok) continue;
                    pick[d] = s;
                    rec(d + 1);
                    if (aborted) return;
                }
            };
            rec(0);
            if (aborted) {
                rep.note = "family enumeration truncated by budget";
            }
        }
    }
    return rep;
}

StalkReport stalk_check(const TupleTable& t, int member, uint64_t budget) {
    StalkReport rep;
    rep.member = member;
    int u = t.site->basis_open[member];
    rep.stalk_size = t.sections_count(u);
    rep.local_size = t.local_count[member];
    rep.bijective = (rep.stalk_size == rep.local_size);
    const Open& open = t.site->opens[u];
    // Element-wise: every local element extends (uniquely, by restriction
    // determinacy) to a section of the minimal neighborhood.
    uint64_t limit = std::min<uint64_t>(rep.local_size, budget);
    for (uint64_t x = 0; x < limit; ++x) {
        SectionTuple s(open.members.size());
        for (size_t p = 0; p < open.members.size(); ++p)
            s[p] = t.restrict_local(open.members[p], member, static_cast<uint32_t>(x));
        if (!t.is_section(u, s)) {
            rep.bijective = false;
            rep.witness = t.section_label(u, s);
            break;
        }
        ++rep.elements_verified;
    }
    if (rep.local_size > budget) rep.bijective = false;
    return rep;
}

// ---- functor materializers ----

namespace {

std::vector<int> var_positions(const System& sub, const System& sup) {
    std::vector<int> pos;
    pos.reserve(sub.vars.size());
    for (const auto& v : sub.vars) {
        int i = sup.var_index(v.name);
        if (i < 0) throw Error("variable " + v.name + " missing in " + sup.name);
        pos.push_back(i);
    }
    return pos;
}

std::vector<int> action_positions(const System& sub, const System& sup) {
    std::vector<int> pos;
    pos.reserve(sub.actions.size());
    for (const auto& a : sub.actions) {
        int i = sup.action_index(a.name);
        if (i < 0) throw Error("action " + a.name + " missing in " + sup.name);
        pos.push_back(i);
    }
    return pos;
}

}  // namespace

StTable materialize_St(const Site& site, uint64_t budget) {
    StTable t;
    t.table.site = &site;
    t.table.functor_name = "St";
    for (const auto& m : site.members)
        t.spaces.push_back(std::make_shared<StateSpace>(enumerate_states(*m, budget)));
    for (size_t i = 0; i < site.members.size(); ++i)
        t.table.local_count.push_back(t.spaces[i]->size());
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j) {
            if (i == j || !site.leq[i][j]) continue;
            auto pos = var_positions(*site.members[i], *site.members[j]);
            std::vector<uint32_t> map(t.spaces[j]->size());
            for (uint32_t s = 0; s < t.spaces[j]->size(); ++s) {
                State restricted(pos.size());
                for (size_t k = 0; k < pos.size(); ++k)
                    restricted[k] = t.spaces[j]->states[s][pos[k]];
                auto r = t.spaces[i]->try_rank(restricted);
                if (!r)
                    throw Error("restriction of a state of " + site.members[j]->name +
                                " is not a state of " + site.members[i]->name);
                map[s] = *r;
            }
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    auto spaces = t.spaces;
    auto members = site.members;
    t.table.show = [spaces, members](int m, uint32_t idx) {
        return state_to_string(*members[m], spaces[m]->states[idx]);
    };
    return t;
}

PaTable materialize_Pa(const Site& site) {
    PaTable t;
    t.table.site = &site;
    t.table.functor_name = "Pa";
    for (const auto& m : site.members) {
        t.pas.push_back(enumerate_admissible(*m));
        std::map<ParallelAction, uint32_t> idx;
        for (uint32_t i = 0; i < t.pas.back().size(); ++i) idx.emplace(t.pas.back()[i], i);
        t.index.push_back(std::move(idx));
        t.table.local_count.push_back(t.pas.back().size());
    }
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j) {
            if (i == j || !site.leq[i][j]) continue;
            auto pos = action_positions(*site.members[i], *site.members[j]);
            std::vector<uint32_t> map(t.pas[j].size());
            for (uint32_t f = 0; f < t.pas[j].size(); ++f) {
                ParallelAction restricted(pos.size());
                for (size_t k = 0; k < pos.size(); ++k) restricted[k] = t.pas[j][f][pos[k]];
                auto it = t.index[i].find(restricted);
                if (it == t.index[i].end())
                    throw Error("restriction of an admissible action map of " +
                                site.members[j]->name + " is not admissible in " +
                                site.members[i]->name);
                map[f] = it->second;
            }
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    auto pas = t.pas;
    auto members = site.members;
    t.table.show = [pas, members](int m, uint32_t idx) {
        return pa_to_string(*members[m], pas[m][idx]);
    };
    return t;
}

TrTable materialize_Tr(const Site& site, uint64_t budget) {
    TrTable t;
    t.st = materialize_St(site, budget);
    t.pa = materialize_Pa(site);
    t.table.site = &site;
    t.table.functor_name = "Tr";
    for (size_t m = 0; m < site.members.size(); ++m) {
        const System& sys = *site.members[m];
        TransitionMemo memo(sys);
        std::vector<TrTriple> triples;
        for (uint32_t s = 0; s < t.st.spaces[m]->size(); ++s) {
            for (uint32_t f = 0; f < t.pa.pas[m].size(); ++f) {
                for (const auto& succ : transition(sys, t.pa.pas[m][f], t.st.spaces[m]->states[s], &memo)) {
                    triples.push_back({f, s, t.st.spaces[m]->rank(succ)});
                    if (triples.size() > budget)
                        throw BudgetExceeded("transition table of " + sys.name, triples.size());
                }
            }
        }
        std::sort(triples.begin(), triples.end());
        std::map<TrTriple, uint32_t> idx;
        for (uint32_t i = 0; i < triples.size(); ++i) idx.emplace(triples[i], i);
        t.table.local_count.push_back(triples.size());
        t.triples.push_back(std::move(triples));
        t.index.push_back(std::move(idx));
    }
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j) {
            if (i == j || !site.leq[i][j]) continue;
            const auto& fst = t.st.table.rmap.at({static_cast<int>(i), static_cast<int>(j)});
            const auto& fpa = t.pa.table.rmap.at({static_cast<int>(i), static_cast<int>(j)});
            std::vector<uint32_t> map(t.triples[j].size());
            for (uint32_t x = 0; x < t.triples[j].size(); ++x) {
                const TrTriple& tr = t.triples[j][x];
                TrTriple restricted{fpa[tr.f], fst[tr.s], fst[tr.t]};
                auto it = t.index[i].find(restricted);
                if (it == t.index[i].end())
                    throw Error("restriction of a transition of " + site.members[j]->name +
                                " is not a transition of " + site.members[i]->name);
                map[x] = it->second;
            }
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    auto st = t.st;
    auto pa = t.pa;
    auto triples = t.triples;
    auto members = site.members;
    t.table.show = [st, pa, triples, members](int m, uint32_t idx) {
        const TrTriple& tr = triples[m][idx];
        return "(" + pa_to_string(*members[m], pa.pas[m][tr.f]) + "," +
               state_to_string(*members[m], st.spaces[m]->states[tr.s]) + "," +
               state_to_string(*members[m], st.spaces[m]->states[tr.t]) + ")";
    };
    return t;
}

uint64_t count_behaviors(const System& sys, const StateSpace& space,
                         const std::vector<ParallelAction>& pas, int horizon) {
    size_t n = space.size();
    TransitionMemo memo(sys);
    std::vector<uint64_t> next(n, pas.size()), cur(n, 0);
    for (int t = horizon - 1; t >= 0; --t) {
        for (size_t s = 0; s < n; ++s) {
            uint64_t total = 0;
            for (const auto& f : pas)
                for (const auto& succ : transition(sys, f, space.states[s], &memo))
                    total += next[space.rank(succ)];
            cur[s] = total;
        }
        std::swap(cur, next);
    }
    uint64_t total = 0;
    for (size_t s = 0; s < n; ++s) total += next[s];
    return total;
}

BTable materialize_B(const Site& site, int horizon, uint64_t budget) {
    BTable t;
    t.horizon = horizon;
    t.st = materialize_St(site, budget);
    t.pa = materialize_Pa(site);
    t.table.site = &site;
    t.table.functor_name = "B" + std::to_string(horizon);
    for (size_t m = 0; m < site.members.size(); ++m) {
        const System& sys = *site.members[m];
        TransitionMemo memo(sys);
        uint64_t count = count_behaviors(sys, *t.st.spaces[m], t.pa.pas[m], horizon);
        if (count > budget)
            throw BudgetExceeded("behavior table of " + sys.name + " at horizon " +
                                     std::to_string(horizon),
                                 count);
        std::vector<BehaviorSeq> behaviors;
        BehaviorSeq cur;
        std::function<void(uint32_t, int)> rec = [&](uint32_t s, int step) {
            if (step == horizon) {
                for (uint32_t f = 0; f < t.pa.pas[m].size(); ++f) {
                    cur.emplace_back(s, f);
                    behaviors.push_back(cur);
                    cur.pop_back();
                }
                return;
            }
            for (uint32_t f = 0; f < t.pa.pas[m].size(); ++f) {
                auto succ = transition(sys, t.pa.pas[m][f], t.st.spaces[m]->states[s], &memo);
                for (const auto& nxt : succ) {
                    cur.emplace_back(s, f);
                    rec(t.st.spaces[m]->rank(nxt), step + 1);
                    cur.pop_back();
                }
            }
        };
        for (uint32_t s = 0; s < t.st.spaces[m]->size(); ++s) rec(s, 0);
        std::map<BehaviorSeq, uint32_t> idx;
        for (uint32_t i = 0; i < behaviors.size(); ++i) idx.emplace(behaviors[i], i);
        t.table.local_count.push_back(behaviors.size());
        t.behaviors.push_back(std::move(behaviors));
        t.index.push_back(std::move(idx));
    }
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j) {
            if (i == j || !site.leq[i][j]) continue;
            const auto& fst = t.st.table.rmap.at({static_cast<int>(i), static_cast<int>(j)});
            const auto& fpa = t.pa.table.rmap.at({static_cast<int>(i), static_cast<int>(j)});
            std::vector<uint32_t> map(t.behaviors[j].size());
            for (uint32_t x = 0; x < t.behaviors[j].size(); ++x) {
                BehaviorSeq restricted;
                restricted.reserve(t.behaviors[j][x].size());
                for (const auto& [s, f] : t.behaviors[j][x])
                    restricted.emplace_back(fst[s], fpa[f]);
                auto it = t.index[i].find(restricted);
                if (it == t.index[i].end())
                    throw Error("restriction of a behavior of " + site.members[j]->name +
                                " violates K in " + site.members[i]->name);
                map[x] = it->second;
            }
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    auto st = t.st;
    auto pa = t.pa;
    auto behaviors = t.behaviors;
    auto members = site.members;
    t.table.show = [st, pa, behaviors, members](int m, uint32_t idx) {
        std::ostringstream os;
        os << "[";
        for (size_t k = 0; k < behaviors[m][idx].size(); ++k) {
            if (k) os << " ";
            os << state_to_string(*members[m], st.spaces[m]->states[behaviors[m][idx][k].first])
               << pa_to_string(*members[m], pa.pas[m][behaviors[m][idx][k].second]);
        }
        os << "]";
        return os.str();
    };
    return t;
}

StTable materialize_constraint_subsheaf(const Site& site,
                                        const std::vector<std::vector<ExprPtr>>& extras,
                                        const std::string& name, uint64_t budget) {
    if (extras.size() != site.members.size())
        throw Error("constraint subsheaf: one extra set per member required");
    StTable t;
    t.table.site = &site;
    t.table.functor_name = name;
    for (size_t m = 0; m < site.members.size(); ++m) {
        const System& sys = *site.members[m];
        std::vector<ExprPtr> bound;
        for (const auto& e : extras[m]) bound.push_back(bind_state_expr(sys, e));
        auto space = std::make_shared<StateSpace>();
        bool complete = for_each_state(
            sys,
            [&](const State& s) {
                for (const auto& b : bound)
                    if (!eval_bool_on_state(sys, b, s)) return true;
                space->states.push_back(s);
                return true;
            },
            budget);
        if (!complete)
            throw BudgetExceeded("constraint subsheaf states of " + sys.name, count_states(sys));
        for (uint32_t i = 0; i < space->states.size(); ++i) space->index.emplace(space->states[i], i);
        t.spaces.push_back(space);
        t.table.local_count.push_back(space->size());
    }
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j) {
            if (i == j || !site.leq[i][j]) continue;
            auto pos = var_positions(*site.members[i], *site.members[j]);
            std::vector<uint32_t> map(t.spaces[j]->size());
            for (uint32_t s = 0; s < t.spaces[j]->size(); ++s) {
                State restricted(pos.size());
                for (size_t k = 0; k < pos.size(); ++k)
                    restricted[k] = t.spaces[j]->states[s][pos[k]];
                auto r = t.spaces[i]->try_rank(restricted);
                if (!r)
                    throw ValidationError(
                        "incoherent extra constraints: a " + name + " state of " +
                        site.members[j]->name + " restricts outside " + name + " of " +
                        site.members[i]->name + " (" +
                        state_to_string(*site.members[j], t.spaces[j]->states[s]) + ")");
                map[s] = *r;
            }
            t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = std::move(map);
        }
    auto spaces = t.spaces;
    auto members = site.members;
    t.table.show = [spaces, members](int m, uint32_t idx) {
        return state_to_string(*members[m], spaces[m]->states[idx]);
    };
    return t;
}

NnoTable materialize_nno(const Site& site, int horizon) {
    NnoTable t;
    t.horizon = horizon;
    t.table.site = &site;
    t.table.functor_name = "N";
    for (size_t m = 0; m < site.members.size(); ++m)
        t.table.local_count.push_back(static_cast<uint64_t>(horizon) + 1);
    std::vector<uint32_t> ident(static_cast<size_t>(horizon) + 1);
    std::iota(ident.begin(), ident.end(), 0);
    for (size_t i = 0; i < site.members.size(); ++i)
        for (size_t j = 0; j < site.members.size(); ++j)
            if (i != j && site.leq[i][j])
                t.table.rmap[{static_cast<int>(i), static_cast<int>(j)}] = ident;
    t.table.show = [](int, uint32_t idx) { return std::to_string(idx); };
    return t;
}

SectionTuple nno_zero(const NnoTable& t, int open_idx) {
    return SectionTuple(t.table.site->opens[open_idx].members.size(), 0);
}

std::optional<SectionTuple> nno_succ(const NnoTable& t, int open_idx, const SectionTuple& s) {
    (void)open_idx;
    SectionTuple out = s;
    for (auto& v : out) {
        if (v + 1 > static_cast<uint32_t>(t.horizon)) return std::nullopt;
        v += 1;
    }
    return out;
}

std::pair<SectionTuple, SectionTuple> eval_appl(const BTable& b, int open_idx,
                                                const SectionTuple& h, const SectionTuple& clocks) {
    const Open& u = b.table.site->opens[open_idx];
    SectionTuple states(u.members.size()), actions(u.members.size());
    for (size_t p = 0; p < u.members.size(); ++p) {
        if (clocks[p] > static_cast<uint32_t>(b.horizon))
            throw Error("clock value exceeds the horizon");
        const BehaviorSeq& beh = b.behaviors[u.members[p]][h[p]];
        states[p] = beh[clocks[p]].first;
        actions[p] = beh[clocks[p]].second;
    }
    return {states, actions};
}

NaturalityReport check_appl_naturality(const BTable& b, const NnoTable& n, uint64_t budget) {
    NaturalityReport rep;
    const Site& site = *b.table.site;
    for (size_t u = 0; u < site.opens.size(); ++u) {
        for (size_t v = 0; v < site.opens.size(); ++v) {
            if (u == v || !site.open_subset(static_cast<int>(v), static_cast<int>(u))) continue;
            std::vector<SectionTuple> clock_secs = n.table.materialize(static_cast<int>(u), 100000);
            bool done = b.table.for_each_section(
                static_cast<int>(u),
                [&](const SectionTuple& h) {
                    for (const auto& clk : clock_secs) {
                        auto [s_u, f_u] = eval_appl(b, static_cast<int>(u), h, clk);
                        SectionTuple h_v =
                            b.table.restrict_section(static_cast<int>(u), h, static_cast<int>(v));
                        SectionTuple clk_v = n.table.restrict_section(static_cast<int>(u), clk,
                                                                      static_cast<int>(v));
                        auto [s_v, f_v] = eval_appl(b, static_cast<int>(v), h_v, clk_v);
                        SectionTuple s_uv =
                            b.st.table.restrict_section(static_cast<int>(u), s_u, static_cast<int>(v));
                        SectionTuple f_uv =
                            b.pa.table.restrict_section(static_cast<int>(u), f_u, static_cast<int>(v));
                        ++rep.squares_checked;
                        if (s_uv != s_v || f_uv != f_v) {
                            rep.ok = false;
                            rep.detail = "naturality square fails from " +
                                         site.open_name(static_cast<int>(u)) + " to " +
                                         site.open_name(static_cast<int>(v));
                            return false;
                        }
                    }
                    return true;
                },
                budget);
            (void)done;
            if (!rep.ok) return rep;
        }
    }
    return rep;
}

// ---- global section checks ----

namespace {

struct GlueMap {
    std::vector<std::vector<int>> var_pos;  // per member: member var -> target var
    bool covers_all = true;
};

GlueMap glue_vars(const Site& site, const System& target) {
    GlueMap g;
    std::vector<bool> covered(target.vars.size(), false);
    for (const auto& m : site.members) {
        std::vector<int> pos;
        for (const auto& v : m->vars) {
            int i = target.var_index(v.name);
            if (i < 0) throw Error("member variable " + v.name + " missing in target");
            covered[static_cast<size_t>(i)] = true;
            pos.push_back(i);
        }
        g.var_pos.push_back(std::move(pos));
    }
    for (bool c : covered) g.covers_all &= c;
    return g;
}

}  // namespace

std::optional<SectionTuple> st_section_of_assignment(const StTable& t, const System& target,
                                                     const State& s) {
    const Site& site = *t.table.site;
    SectionTuple tuple(site.members.size());
    for (size_t m = 0; m < site.members.size(); ++m) {
        State restricted;
        restricted.reserve(site.members[m]->vars.size());
        for (const auto& v : site.members[m]->vars) {
            int i = target.var_index(v.name);
            if (i < 0) return std::nullopt;
            restricted.push_back(s[static_cast<size_t>(i)]);
        }
        auto r = t.spaces[m]->try_rank(restricted);
        if (!r) return std::nullopt;
        tuple[m] = *r;
    }
    if (!t.table.is_section(site.full_open, tuple)) return std::nullopt;
    return tuple;
}

namespace {

// Shared driver: count sections, count target elements, verify the glue map
// element-wise under a budget.
GlobalReport glued_check(const TupleTable& table, uint64_t target_count,
                         const std::function<bool(const SectionTuple&, std::string*)>& glue_valid,
                         uint64_t budget) {
    GlobalReport rep;
    int full = table.site->full_open;
    rep.sections = table.sections_count(full);
    rep.target_count = target_count;
    rep.counts_equal = (rep.sections == rep.target_count);
    rep.bijective = rep.counts_equal;
    std::string witness;
    bool all_valid = true;
    rep.element_checked = table.for_each_section(
        full,
        [&](const SectionTuple& s) {
            ++rep.elements_verified;
            std::string w;
            if (!glue_valid(s, &w)) {
                all_valid = false;
                witness = w;
                return false;
            }
            return true;
        },
        budget);
    if (!all_valid) {
        rep.bijective = false;
        rep.witness = witness;
    }
    return rep;
}

}  // namespace

GlobalReport st_global_check(const StTable& t, const System& target, uint64_t budget) {
    const Site& site = *t.table.site;
    GlueMap g = glue_vars(site, target);
    uint64_t target_count = count_states(target);
    auto valid = [&](const SectionTuple& s, std::string* w) {
        State glued(target.vars.size(), 0);
        std::vector<bool> set(target.vars.size(), false);
        for (size_t m = 0; m < site.members.size(); ++m) {
            const State& ms = t.spaces[m]->states[s[m]];
            for (size_t k = 0; k < g.var_pos[m].size(); ++k) {
                glued[g.var_pos[m][k]] = ms[k];
                set[g.var_pos[m][k]] = true;
            }
        }
        for (bool b : set)
            if (!b) {
                *w = "target variable not covered by any member";
                return false;
            }
        if (!target.all_constraints_hold(glued)) {
            *w = "glued assignment " + state_to_string(target, glued) + " is not a state of " +
                 target.name;
            return false;
        }
        return true;
    };
    GlobalReport rep = glued_check(t.table, target_count, valid, budget);
    if (rep.sections < rep.target_count && rep.witness.empty()) {
        // A target state that is not glueable from the members.
        for_each_state(
            target,
            [&](const State& s) {
                if (!st_section_of_assignment(t, target, s)) {
                    rep.witness = "state " + state_to_string(target, s) +
                                  " of the target restricts to no compatible family";
                    return false;
                }
                return true;
            },
            budget);
    }
    return rep;
}

GlobalReport pa_global_check(const PaTable& t, const System& target) {
    const Site& site = *t.table.site;
    std::vector<std::vector<int>> act_pos;
    std::vector<bool> covered(target.actions.size(), false);
    for (const auto& m : site.members) {
        std::vector<int> pos;
        for (const auto& a : m->actions) {
            int i = target.action_index(a.name);
            if (i < 0) throw Error("member action " + a.name + " missing in target");
            covered[static_cast<size_t>(i)] = true;
            pos.push_back(i);
        }
        act_pos.push_back(std::move(pos));
    }
    uint64_t target_count = enumerate_admissible(target).size();
    auto valid = [&](const SectionTuple& s, std::string* w) {
        ParallelAction glued(target.actions.size(), 0);
        std::vector<bool> set(target.actions.size(), false);
        for (size_t m = 0; m < site.members.size(); ++m) {
            const ParallelAction& mf = t.pas[m][s[m]];
            for (size_t k = 0; k < act_pos[m].size(); ++k) {
                glued[act_pos[m][k]] = mf[k];
                set[act_pos[m][k]] = true;
            }
        }
        for (bool b : set)
            if (!b) {
                *w = "target action not covered";
                return false;
            }
        if (!is_admissible(target, glued)) {
            *w = "glued action map " + pa_to_string(target, glued) + " is not admissible in " +
                 target.name;
            return false;
        }
        return true;
    };
    return glued_check(t.table, target_count, valid, 1u << 22);
}

namespace {

bool glued_state(const Site& site, const StTable& st, const System& target,
                 const std::vector<std::vector<int>>& var_pos, const SectionTuple& s, State* out) {
    out->assign(target.vars.size(), 0);
    for (size_t m = 0; m < site.members.size(); ++m) {
        const State& ms = st.spaces[m]->states[s[m]];
        for (size_t k = 0; k < var_pos[m].size(); ++k) (*out)[var_pos[m][k]] = ms[k];
    }
    return target.all_constraints_hold(*out);
}

bool glued_pa(const Site& site, const PaTable& pa, const System& target,
              const std::vector<std::vector<int>>& act_pos, const SectionTuple& s,
              ParallelAction* out) {
    out->assign(target.actions.size(), 0);
    for (size_t m = 0; m < site.members.size(); ++m) {
        const ParallelAction& mf = pa.pas[m][s[m]];
        for (size_t k = 0; k < act_pos[m].size(); ++k) (*out)[act_pos[m][k]] = mf[k];
    }
    return is_admissible(target, *out);
}

std::vector<std::vector<int>> act_positions_for(const Site& site, const System& target) {
    std::vector<std::vector<int>> act_pos;
    for (const auto& m : site.members) {
        std::vector<int> pos;
        for (const auto& a : m->actions) {
            int i = target.action_index(a.name);
            if (i < 0) throw Error("member action " + a.name + " missing in target");
            pos.push_back(i);
        }
        act_pos.push_back(std::move(pos));
    }
    return act_pos;
}

}  // namespace

GlobalReport tr_global_check(const TrTable& t, const System& target, uint64_t budget) {
    const Site& site = *t.table.site;
    GlueMap g = glue_vars(site, target);
    auto act_pos = act_positions_for(site, target);

    StateSpace target_space = enumerate_states(target, budget);
    auto target_pas = enumerate_admissible(target);
    uint64_t target_count = 0;
    for (const auto& s : target_space.states)
        for (const auto& f : target_pas) target_count += transition(target, f, s).size();

    auto valid = [&](const SectionTuple& sec, std::string* w) {
        SectionTuple fs(site.members.size()), ss(site.members.size()), ts(site.members.size());
        for (size_t m = 0; m < site.members.size(); ++m) {
            const TrTriple& tr = t.triples[m][sec[m]];
            fs[m] = tr.f;
            ss[m] = tr.s;
            ts[m] = tr.t;
        }
        State s, s2;
        ParallelAction f;
        if (!glued_state(site, t.st, target, g.var_pos, ss, &s) ||
            !glued_state(site, t.st, target, g.var_pos, ts, &s2) ||
            !glued_pa(site, t.pa, target, act_pos, fs, &f)) {
            *w = "glued transition components invalid in " + target.name;
            return false;
        }
        auto succ = transition(target, f, s);
        if (!std::binary_search(succ.begin(), succ.end(), s2)) {
            *w = "glued triple (" + pa_to_string(target, f) + "," + state_to_string(target, s) +
                 "," + state_to_string(target, s2) + ") is not a transition of " + target.name;
            return false;
        }
        return true;
    };
    return glued_check(t.table, target_count, valid, budget);
}

GlobalReport b_global_check(const BTable& t, const System& target, uint64_t budget) {
    const Site& site = *t.table.site;
    GlueMap g = glue_vars(site, target);
    auto act_pos = act_positions_for(site, target);

    StateSpace target_space = enumerate_states(target, budget);
    auto target_pas = enumerate_admissible(target);
    uint64_t target_count = count_behaviors(target, target_space, target_pas, t.horizon);

    auto valid = [&](const SectionTuple& sec, std::string* w) {
        // Glue step-wise and check K over the target.
        std::vector<std::pair<State, ParallelAction>> glued;
        for (int step = 0; step <= t.horizon; ++step) {
            SectionTuple ss(site.members.size()), fs(site.members.size());
            for (size_t m = 0; m < site.members.size(); ++m) {
                const BehaviorSeq& beh = t.behaviors[m][sec[m]];
                ss[m] = beh[static_cast<size_t>(step)].first;
                fs[m] = beh[static_cast<size_t>(step)].second;
            }
            State s;
            ParallelAction f;
            if (!glued_state(site, t.st, target, g.var_pos, ss, &s) ||
                !glued_pa(site, t.pa, target, act_pos, fs, &f)) {
                *w = "glued behavior step invalid in " + target.name;
                return false;
            }
            glued.emplace_back(std::move(s), std::move(f));
        }
        for (int step = 0; step < t.horizon; ++step) {
            auto succ = transition(target, glued[step].second, glued[step].first);
            if (!std::binary_search(succ.begin(), succ.end(), glued[step + 1].first)) {
                *w = "glued behavior violates K at step " + std::to_string(step);
                return false;
            }
        }
        return true;
    };
    return glued_check(t.table, target_count, valid, budget);
}

GlobalReport safestate_global_check(const StTable& t, const System& target,
                                    const std::vector<ExprPtr>& target_extras, uint64_t budget) {
    const Site& site = *t.table.site;
    GlueMap g = glue_vars(site, target);
    std::vector<ExprPtr> bound;
    for (const auto& e : target_extras) bound.push_back(bind_state_expr(target, e));
    uint64_t target_count = count_states(target, bound);
    auto valid = [&](const SectionTuple& s, std::string* w) {
        State glued(target.vars.size(), 0);
        for (size_t m = 0; m < site.members.size(); ++m) {
            const State& ms = t.spaces[m]->states[s[m]];
            for (size_t k = 0; k < g.var_pos[m].size(); ++k) glued[g.var_pos[m][k]] = ms[k];
        }
        if (!target.all_constraints_hold(glued)) {
            *w = "glued assignment violates the target constraints";
            return false;
        }
        for (const auto& b : bound)
            if (!eval_bool_on_state(target, b, glued)) {
                *w = "glued assignment " + state_to_string(target, glued) +
                     " violates the target extra constraints";
                return false;
            }
        return true;
    };
    return glued_check(t.table, target_count, valid, budget);
}

GlobalReport nno_global_check(const NnoTable& t) {
    GlobalReport rep;
    const Site& site = *t.table.site;
    rep.sections = t.table.sections_count(site.full_open);
    auto comp = site.components(site.full_open);
    std::set<int> distinct(comp.begin(), comp.end());
    uint64_t expect = 1;
    for (size_t i = 0; i < distinct.size(); ++i) expect *= static_cast<uint64_t>(t.horizon) + 1;
    rep.target_count = expect;
    rep.counts_equal = rep.bijective = (rep.sections == expect);
    rep.element_checked = true;
    return rep;
}

}  // namespace sheafver
