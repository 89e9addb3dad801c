#pragma once

#include "sheafver/presheaf.hpp"
#include "sheafver/site.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sheafver {

// ---- words over parallel-action letters (the limit monoid M(InSys)) ----

// Letters are the nonzero admissible parallel actions; the zero map is
// identified with the empty word under projection.
struct PaWordCtx {
    const Site* site = nullptr;
    SystemPtr colim;
    std::vector<std::vector<ParallelAction>> letters;  // per member
    std::vector<ParallelAction> colim_letters;
    std::vector<std::vector<int>> colim_proj;  // per member: colim letter -> member letter or -1
    std::map<std::pair<int, int>, std::vector<int>> member_proj;  // (sub,sup)

    std::string letter_name(int member, int letter) const;  // member -1 = colimit
};

PaWordCtx make_pa_word_ctx(const Site& site, SystemPtr colim);

using Word = std::vector<int>;  // letter ids

Word project_colim_word(const PaWordCtx& ctx, const Word& w, int member);
Word project_member_word(const PaWordCtx& ctx, int sub, int sup, const Word& w);
std::string word_to_string(const PaWordCtx& ctx, int member, const Word& w);

// Words of length <= L per member as a component-wise presheaf; sections are
// exactly the compatible word families of the limit monoid, lengthwise
// truncated.
struct WordTable {
    TupleTable table;
    int length_bound = 0;
    std::vector<std::vector<Word>> words;  // per member, deterministic order
    std::vector<std::map<Word, uint32_t>> index;
};

WordTable make_word_table(const PaWordCtx& ctx, int length_bound);

struct PMapReport {
    struct Collision {
        Word w1, w2;          // distinct colimit words
        SectionTuple image;   // shared projection family
    };
    std::vector<Collision> collisions;
    std::vector<SectionTuple> no_preimage;  // families outside the image of p
    uint64_t words_checked = 0;
    uint64_t families_checked = 0;
    bool injective() const { return collisions.empty(); }
    bool surjective() const { return no_preimage.empty(); }
};

PMapReport p_map_analyze(const PaWordCtx& ctx, const WordTable& wt, int length_bound,
                         size_t max_witnesses = 16);

// Does the compatible family glue to some colimit word (of any length)?
std::optional<Word> word_preimage(const PaWordCtx& ctx, const WordTable& wt,
                                  const SectionTuple& family);

// ---- partially commutative monoids over action alphabets ----

struct DependenceGraph {
    std::vector<std::string> vertices;  // action names
    std::vector<std::vector<bool>> adj;  // symmetric, loops included

    int vertex(const std::string& name) const;
    bool edge(int a, int b) const { return adj[a][b]; }
};

// (a1,a2) in D iff a1 = a2 or the generator a1 & a2 = 0 is in C. Rejects
// systems whose action constraints are not all exclusions.
DependenceGraph dependence_graph(const System& sys);

// The Foata normal form: maximal steps of pairwise-independent letters,
// each step sorted by vertex name.
struct Trace {
    std::vector<std::vector<int>> steps;
    Word flat() const;
    auto operator<=>(const Trace&) const = default;
};

Trace foata_normal_form(const DependenceGraph& g, const Word& w);
bool trace_equal(const DependenceGraph& g, const Word& u, const Word& v);
std::string trace_to_string(const DependenceGraph& g, const Trace& t);

// Canonical representatives of all traces of length <= L, sorted.
std::vector<Trace> enumerate_traces(const DependenceGraph& g, int length_bound);

struct TraceCtx {
    const Site* site = nullptr;
    SystemPtr colim;
    DependenceGraph colim_graph;
    std::vector<DependenceGraph> member_graphs;

    // Projection of a colimit trace to a member (drop foreign letters, renormalize).
    Trace project(const Trace& t, int member) const;
    Trace project_member(int sub, int sup, const Trace& t) const;
};

TraceCtx make_trace_ctx(const Site& site, SystemPtr colim);

struct STopologyReport {
    uint64_t pairs_checked = 0;
    struct Violation {
        Trace m1, m2;
        int member;
        std::string detail;
    };
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// For all colimit trace pairs up to the bound: equal projections at a member
// extend to equal projections on an open neighborhood (the principal
// down-set suffices).
STopologyReport s_topology_check(const TraceCtx& ctx, int length_bound);

// Traces of length <= L per member as a component-wise presheaf (the sheaf
// of partially commutative monoids, truncated).
struct TraceTable {
    TupleTable table;
    int length_bound = 0;
    std::vector<std::vector<Trace>> traces;  // per member
    std::vector<std::map<Trace, uint32_t>> index;
};

TraceTable make_trace_table(const TraceCtx& ctx, int length_bound);

// Compatible trace tuples over the whole site (Gamma(InSys, F)).
std::vector<SectionTuple> trace_global_sections(const TraceTable& tt, uint64_t budget = 4'000'000);

// Continuity of a member-indexed choice, decided from the subbasis
// [m](U) = { p_i(m) : S_i in U }: every preimage must be open. Independent
// of the projection-commutation route.
bool choice_continuous(const TraceCtx& ctx, const TraceTable& tt, const SectionTuple& choice);

struct ContinuityAgreement {
    uint64_t tuples_checked = 0;
    uint64_t disagreements = 0;
    uint64_t continuous_count = 0;
    bool complete = true;
};

// Sweeps all member-indexed choices (budgeted) and compares the two
// characterizations of global sections.
ContinuityAgreement continuity_agreement_check(const TraceCtx& ctx, const TraceTable& tt,
                                               uint64_t budget = 20'000'000);

struct AlphaIsoReport {
    bool union_covers = false;       // member graphs exhaust the colimit graph
    bool embedding_injective = false;  // Theorem GET: iff union covers
    bool isomorphism = false;
    std::vector<std::vector<int>> chordless_cycles;  // colimit vertex ids
    std::optional<std::vector<int>> uncovered_cycle;
    std::string detail;
};

AlphaIsoReport alpha_iso_check(const TraceCtx& ctx);

// The coarsest S-topology (generated by the equalizer sets of trace pairs up
// to the bound); the site topology must refine it.
struct CoarsestTopologyReport {
    size_t generated_opens = 0;
    bool site_refines = false;
    std::string detail;
};

CoarsestTopologyReport coarsest_s_topology_check(const TraceCtx& ctx, int length_bound);

}  // namespace sheafver
