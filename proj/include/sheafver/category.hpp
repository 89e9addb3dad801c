#pragma once

#include "sheafver/system.hpp"

#include <string>

namespace sheafver {

struct SubsystemCheck {
    bool ok = false;
    std::string failed_clause;  // empty when ok
};

// S is a subsystem of T: component containment, Gamma/C consequence
// (checked by finite enumeration over T's model), reduct equality.
SubsystemCheck is_subsystem(const System& S, const System& T, uint64_t budget = 50'000'000);

struct InclusionWitness {
    bool sig_ok = false;
    bool vars_ok = false;
    bool actions_ok = false;
    bool gamma_ok = false;
    bool c_ok = false;
    bool reduct_ok = false;
    bool t1_ok = false;
    bool t2_ok = false;
    bool t2_structural = false;  // held by construction (intersection source)
    std::string detail;

    bool valid() const {
        return sig_ok && vars_ok && actions_ok && gamma_ok && c_ok && reduct_ok && t1_ok && t2_ok;
    }
};

InclusionWitness is_transition_connected(const System& S, const System& T,
                                         uint64_t budget = 50'000'000);

System pullback(const System& S1, const System& S2, const System& S, uint64_t budget = 2'000'000);

SystemPtr colimit(const std::vector<SystemPtr>& family, uint64_t budget = 2'000'000);

// Structural equality after canonical ordering; action relations compared
// semantically over their local domains.
bool system_equal(const System& A, const System& B, uint64_t budget = 2'000'000);

// The transition-connected restriction of T to a variable subset: actions
// touching the subset are kept with intersected dependency sets and
// restriction-image relations (explicit tables).
System restrict_system(const System& T, const std::vector<std::string>& keep_vars,
                       const std::string& name, uint64_t budget = 2'000'000);

// The system with no control variables and no actions over T's vocabulary.
System empty_system(const System& T, const std::string& name);

}  // namespace sheafver
