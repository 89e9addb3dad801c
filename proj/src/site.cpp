#include "sheafver/site.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace sheafver {

int Site::member_index(const std::string& name) const {
    for (size_t i = 0; i < members.size(); ++i)
        if (members[i]->name == name) return static_cast<int>(i);
    return -1;
}

int Site::open_index(uint32_t mask) const {
    for (size_t i = 0; i < opens.size(); ++i)
        if (opens[i].mask == mask) return static_cast<int>(i);
    return -1;
}

bool Site::is_down_closed(uint32_t mask) const {
    size_t n = members.size();
    for (size_t j = 0; j < n; ++j) {
        if (!(mask & (1u << j))) continue;
        for (size_t i = 0; i < n; ++i)
            if (i != j && leq[i][j] && !(mask & (1u << i))) return false;
    }
    return true;
}

std::string Site::open_name(int open_idx) const {
    const Open& u = opens[open_idx];
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < u.members.size(); ++i) {
        if (i) os << ",";
        os << members[u.members[i]]->name;
    }
    os << "}";
    return os.str();
}

int Site::open_intersection(int a, int b) const { return open_index(opens[a].mask & opens[b].mask); }
int Site::open_union(int a, int b) const { return open_index(opens[a].mask | opens[b].mask); }
bool Site::open_subset(int a, int b) const { return (opens[a].mask & ~opens[b].mask) == 0; }

std::vector<int> Site::components(int open_idx) const {
    const Open& u = opens[open_idx];
    size_t n = u.members.size();
    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
    };
    for (size_t a = 0; a < n; ++a)
        for (size_t b = a + 1; b < n; ++b)
            if (leq[u.members[a]][u.members[b]] || leq[u.members[b]][u.members[a]]) {
                int ra = find(static_cast<int>(a)), rb = find(static_cast<int>(b));
                if (ra != rb) comp[std::max(ra, rb)] = std::min(ra, rb);
            }
    for (size_t a = 0; a < n; ++a) comp[a] = find(static_cast<int>(a));
    return comp;
}

Site build_site(std::vector<SystemPtr> members, SystemPtr ambient, Semantics semantics,
                uint64_t budget, bool enforce) {
    Site site;
    site.members = std::move(members);
    site.ambient = std::move(ambient);
    site.semantics = semantics;
    size_t n = site.members.size();
    if (n > 20) throw SiteError("(i)", "more than 20 members");

    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (site.members[i]->name == site.members[j]->name)
                throw SiteError("order", "duplicate member name " + site.members[i]->name);

    for (const auto& m : site.members)
        if (m->semantics != semantics)
            throw SiteError("(i)", "member " + m->name + " has a different semantics flag");

    // Order and ambient witnesses.
    site.leq.assign(n, std::vector<bool>(n, false));
    for (size_t i = 0; i < n; ++i) {
        site.leq[i][i] = true;
        site.ambient_witness.push_back(
            is_transition_connected(*site.members[i], *site.ambient, budget));
        if (enforce && !site.ambient_witness.back().valid())
            throw SiteError("(i)", "member " + site.members[i]->name +
                                       " is not a t.c. subsystem of the ambient: " +
                                       site.ambient_witness.back().detail);
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            site.leq[i][j] = is_transition_connected(*site.members[i], *site.members[j], budget).valid();
        }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (site.leq[i][j] && site.leq[j][i])
                throw SiteError("order", "members " + site.members[i]->name + " and " +
                                             site.members[j]->name +
                                             " are mutually included (duplicate system)");

    if (enforce) {
        // (ii) closure under pairwise pullbacks, (iii) meets exist.
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) {
                System pb = pullback(*site.members[i], *site.members[j], *site.ambient, budget);
                int found = -1;
                for (size_t m = 0; m < n; ++m)
                    if (system_equal(*site.members[m], pb, budget)) found = static_cast<int>(m);
                if (found < 0)
                    throw SiteError("(ii)", "pullback of " + site.members[i]->name + " and " +
                                                site.members[j]->name + " is not a member");
                // The meet must be the greatest common lower bound.
                for (size_t x = 0; x < n; ++x)
                    if (site.leq[x][i] && site.leq[x][j] && !site.leq[x][found])
                        throw SiteError("(iii)",
                                        "member " + site.members[x]->name + " lies below " +
                                            site.members[i]->name + " and " +
                                            site.members[j]->name + " but not below their meet " +
                                            site.members[found]->name);
            }
    }

    // Alexandroff topology: all down-closed subsets.
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (!site.is_down_closed(mask)) continue;
        Open o;
        o.mask = mask;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) o.members.push_back(static_cast<int>(i));
        site.opens.push_back(std::move(o));
    }
    std::sort(site.opens.begin(), site.opens.end(), [](const Open& a, const Open& b) {
        size_t pa = std::popcount(a.mask), pb = std::popcount(b.mask);
        return pa != pb ? pa < pb : a.mask < b.mask;
    });
    site.empty_open = site.open_index(0);
    site.full_open = site.open_index(n == 0 ? 0 : ((1u << n) - 1));

    site.basis_open.resize(n);
    for (size_t i = 0; i < n; ++i) {
        uint32_t mask = 0;
        for (size_t j = 0; j < n; ++j)
            if (site.leq[j][i]) mask |= (1u << j);
        int idx = site.open_index(mask);
        if (idx < 0) throw SiteError("order", "principal down-set is not down-closed (order bug)");
        site.basis_open[i] = idx;
    }
    return site;
}

Cover canonical_basis_cover(const Site& site, int open_idx) {
    Cover c;
    c.open = open_idx;
    c.canonical_basis = true;
    std::set<int> parts;
    for (int m : site.opens[open_idx].members) parts.insert(site.basis_open[m]);
    c.parts.assign(parts.begin(), parts.end());
    return c;
}

std::vector<Cover> all_covers(const Site& site, int open_idx, size_t member_cap) {
    std::vector<Cover> covers;
    const Open& target = site.opens[open_idx];
    if (target.members.empty()) {
        covers.push_back({open_idx, {}, false});
        return covers;
    }
    if (site.members.size() > member_cap) {
        covers.push_back(canonical_basis_cover(site, open_idx));
        return covers;
    }
    // Nonempty opens contained in the target.
    std::vector<int> inside;
    for (size_t i = 0; i < site.opens.size(); ++i)
        if (site.opens[i].mask != 0 && (site.opens[i].mask & ~target.mask) == 0)
            inside.push_back(static_cast<int>(i));
    Cover basis = canonical_basis_cover(site, open_idx);
    size_t m = inside.size();
    if (m > 24) {
        covers.push_back(basis);
        return covers;
    }
    for (uint64_t sel = 1; sel < (1ull << m); ++sel) {
        uint32_t un = 0;
        for (size_t i = 0; i < m; ++i)
            if (sel & (1ull << i)) un |= site.opens[inside[i]].mask;
        if (un != target.mask) continue;
        Cover c;
        c.open = open_idx;
        for (size_t i = 0; i < m; ++i)
            if (sel & (1ull << i)) c.parts.push_back(inside[i]);
        c.canonical_basis = (c.parts == basis.parts);
        covers.push_back(std::move(c));
    }
    return covers;
}

int min_neighborhood(const Site& site, int member) { return site.basis_open[member]; }

}  // namespace sheafver
