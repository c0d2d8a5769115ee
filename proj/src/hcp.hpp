// Hypersequent classical processes: linear types, pi-calculus-style
// processes with forwarding and double binders, hyper-environment typing,
// structural congruence, a labelled transition system with distinguished
// internal actions (alpha for link renaming, beta for communication),
// saturated transitions, and strong/weak bisimilarity on finite state
// spaces.
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "terms.hpp"  // Name, NameSet, fresh_name

namespace hgv {

// ---------------------------------------------------------------------
// Linear types.
// ---------------------------------------------------------------------

enum class LinTag { One, Bot, Zero, Top, Tensor, Parr, Plus, With };

struct Lin;
using LinPtr = std::shared_ptr<const Lin>;

struct Lin {
    LinTag tag;
    LinPtr a, b;
};

LinPtr lt_one();
LinPtr lt_bot();
LinPtr lt_zero();
LinPtr lt_top();
LinPtr lt_tensor(LinPtr a, LinPtr b);
LinPtr lt_parr(LinPtr a, LinPtr b);
LinPtr lt_plus(LinPtr a, LinPtr b);
LinPtr lt_with(LinPtr a, LinPtr b);

LinPtr lt_dual(const LinPtr& a);  // involutive
bool lin_eq(const LinPtr& a, const LinPtr& b);
std::string show_lin(const LinPtr& a);

using LinEnv = std::vector<std::pair<Name, LinPtr>>;
using LinHyperEnv = std::vector<LinEnv>;
std::string show_lin_hyperenv(const LinHyperEnv& g);

// ---------------------------------------------------------------------
// Processes.
// ---------------------------------------------------------------------

enum class ProcTag {
    Link,      // x<->y : A        (A types x; y has the dual)
    Res,       // new (x y). P
    Par,       // P || Q
    Halt,      // 0
    Send,      // x[y]. P          (bound output)
    Recv,      // x(y). P
    Close,     // x[]. P
    Wait,      // x(). P
    Inl,       // x[inl]. P        (annotated with the other branch type)
    Inr,       // x[inr]. P
    Offer,     // x.case(P, Q)
    AbsurdOn,  // x.case(){weakened bindings}
};

struct Proc;
using ProcPtr = std::shared_ptr<const Proc>;

struct Proc {
    ProcTag tag;
    Name x, y;    // Link/Res names; Send/Recv subject x, bound name y
    LinPtr ann;   // Link type of x; Inl/Inr other-branch type
    ProcPtr p, q;  // bodies; Offer branches
    LinEnv weaken;  // AbsurdOn: the arbitrary weakened context
};

ProcPtr h_link(Name x, Name y, LinPtr a);
ProcPtr h_res(Name x, Name y, ProcPtr p);
ProcPtr h_par(ProcPtr p, ProcPtr q);
ProcPtr h_halt();
ProcPtr h_send(Name x, Name y, ProcPtr p);
ProcPtr h_recv(Name x, Name y, ProcPtr p);
ProcPtr h_close(Name x, ProcPtr p);
ProcPtr h_wait(Name x, ProcPtr p);
ProcPtr h_inl(Name x, LinPtr other, ProcPtr p);
ProcPtr h_inr(Name x, LinPtr other, ProcPtr p);
ProcPtr h_offer(Name x, ProcPtr p, ProcPtr q);
ProcPtr h_absurd_on(Name x, LinEnv weaken);

// Unbound send x[y].P is sugar for a bound send forwarding to y.
ProcPtr h_usend(Name x, Name y, ProcPtr p, const LinPtr& y_type);
// ping x.P: send a unit token; pong x.P: receive and consume one.
ProcPtr h_ping(Name x, ProcPtr p);
ProcPtr h_pong(Name x, ProcPtr p);

NameSet hcp_free_names(const ProcPtr& p);
// Capture-avoiding renaming of a free name.
ProcPtr hcp_rename(const ProcPtr& p, const Name& to, const Name& from);
std::string show_proc(const ProcPtr& p);

struct HcpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Type synthesis. A wait prefix extends some existing context rather than
// starting its own; such groups stay unanchored until a cross-group recv
// places them, and any still unanchored at the top level are appended to
// the first environment.
LinHyperEnv hcp_check(const ProcPtr& p);

// Structural congruence: Par assoc/comm with unit Halt, Res commutation and
// endpoint swap, scope extrusion, link symmetry, alpha.
bool hcp_equiv(const ProcPtr& p, const ProcPtr& q);

// ---------------------------------------------------------------------
// Labelled transition system.
// ---------------------------------------------------------------------

enum class Verb { VSend, VRecv, VClose, VWait, VSelInl, VSelInr, VOffInl, VOffInr, VLink };

struct Act {
    Verb verb;
    Name subject;
    Name object;  // bound name of send/recv; link partner; empty otherwise
};

enum class LabelKind { Action, PairAct, Alpha, Beta, Tau };

struct Label {
    LabelKind kind;
    Act a, b;  // Action uses a; PairAct uses a and b
};

std::string show_label(const Label& l);
bool label_internal(const Label& l);  // Alpha/Beta/Tau

struct Transition {
    Label label;
    ProcPtr target;
};

// One layer of the LTS. Bound names in observable labels are canonically
// renamed (in label and residual alike) so equal labels imply comparable
// residuals.
std::vector<Transition> lts_step(const ProcPtr& p);

struct InternalSet {
    bool alpha = false;
    bool beta = false;
};

// Reachable-state exploration, capped.
struct Lts {
    std::vector<ProcPtr> states;                 // index 0 = root
    std::vector<std::string> keys;               // canonical state keys
    std::vector<std::vector<std::pair<Label, int>>> edges;
};
Lts explore(const ProcPtr& p, size_t cap = 100000);

// Canonical (alpha-insensitive) fingerprint of a process, as used for the
// explorer's state identity.
std::string proc_key(const ProcPtr& p);

// Saturated transitions of a state: tau-closure over the chosen internal
// labels, plus closed non-internal transitions.
std::vector<std::pair<Label, int>> saturated(const Lts& lts, int state,
                                             InternalSet internal);

enum class BisimMode { Strong, Weak };

// Multi-root bisimilarity classification: explores every root, then runs a
// single partition refinement over the disjoint union of all state spaces.
// Two states are bisimilar iff they end in the same block. The per-root
// state-space cap applies to each exploration separately.
struct BisimClasses {
    std::vector<Lts> lts;                 // one explored LTS per root
    std::vector<std::vector<int>> block;  // final block id per state
};
BisimClasses bisim_classes(const std::vector<ProcPtr>& roots, BisimMode mode,
                           InternalSet internal = {}, size_t cap = 100000);

// Partition-refinement bisimilarity; Weak saturates over `internal` first
// (with reflexive tau).
bool bisim(const ProcPtr& p, const ProcPtr& q, BisimMode mode,
           InternalSet internal = {}, size_t cap = 100000);

// GraphViz rendering of an explored LTS.
std::string lts_dot(const Lts& lts);

// ---------------------------------------------------------------------
// Concrete syntax for .hcp files.
// ---------------------------------------------------------------------
//   P ::= 0 | x<->y : A | new (x y). P | P || P | x[y]. P | x(y). P
//       | x[]. P | x(). P | x[inl : A]. P | x[inr : A]. P
//       | x.case(P, Q) | x.case(){x1 : A1, ...} | (P)
//   A ::= 1 | bot | 0 | top | A * A | A @ A | A + A | A & A | ~A | (A)
ProcPtr parse_proc(const std::string& src);
LinPtr parse_lin(const std::string& src);

}  // namespace hgv
